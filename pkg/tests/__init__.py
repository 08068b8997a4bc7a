"""Test suite for the Mallows height library."""
