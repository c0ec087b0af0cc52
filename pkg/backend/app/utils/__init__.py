"""Utility helpers used across backend modules."""
