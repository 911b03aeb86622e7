"""Two-class unsourced random access via coded demixing."""
__version__ = "0.1.0"
