"""Contract tests for CLI commands."""
