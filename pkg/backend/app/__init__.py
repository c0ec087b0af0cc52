"""Application package for the locality-renorm toolkit."""
