"""renormlab: a numerical laboratory for multicritical circle maps."""

__version__ = "0.1.0"
