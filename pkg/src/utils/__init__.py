"""Logging, errors, serialization and finite differences."""
