"""Backend package root for locality-renorm."""
