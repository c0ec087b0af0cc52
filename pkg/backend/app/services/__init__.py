"""Service layer modules for locality-renorm."""
