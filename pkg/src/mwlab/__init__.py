"""Numerical laboratory for Wintgen ideal submanifolds: DDVV gaps, certificates and Moebius invariants."""
__version__ = "0.1.0"
