"""Pydantic models for parameters, queries, laws and reports."""
