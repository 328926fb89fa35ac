"""Core components: configuration, logging, metrics and errors."""
