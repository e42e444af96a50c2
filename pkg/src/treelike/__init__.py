"""Construction and verification engine for treelike snarks."""

__version__ = "0.1.0"
