"""Parallel sampling workers."""
