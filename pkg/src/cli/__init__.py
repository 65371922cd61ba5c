"""Command line and data cards."""
