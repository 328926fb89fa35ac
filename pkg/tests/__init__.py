"""Test suite for bandedge."""
