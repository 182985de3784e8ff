"""hclab - certified numerical constructions for common hypercyclic translation operators."""

__version__ = "0.1.0"
