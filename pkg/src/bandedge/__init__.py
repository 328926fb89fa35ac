"""bandedge - exact decoherence of a qubit coupled to a band-edge bosonic reservoir."""

__version__ = "0.1.0"
