"""Numerical services: q-series, sampling, exact and limit laws."""
