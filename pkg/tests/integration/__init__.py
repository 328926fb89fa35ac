"""Integration tests for the bandedge command-line interface."""
