"""
Application Version
"""

__version__: str = "0.1.0"
