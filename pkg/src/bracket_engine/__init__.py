"""Bracket calculus for Nambu mechanics and its modified bracket."""
__version__ = "0.1.0"
