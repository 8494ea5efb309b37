"""Learning STRIPS action models from initial/goal state pairs."""

__version__ = "0.1.0"
