"""
WSC Toolkit - weighted superimposed codes for integer compressed sensing.
"""

__version__ = "0.1.0"
