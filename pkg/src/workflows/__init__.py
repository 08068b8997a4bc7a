"""Verification experiments and the acceptance suite."""
