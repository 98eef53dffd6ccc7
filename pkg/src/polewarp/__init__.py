"""Integration-free transient stability via Padé pole detection in contracted time."""

__version__ = "0.1.0"
