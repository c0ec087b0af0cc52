"""CLI module for locality-renorm."""
