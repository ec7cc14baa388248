"""closurelab: exact-arithmetic cutting-plane laboratory."""

__version__ = "0.1.0"
