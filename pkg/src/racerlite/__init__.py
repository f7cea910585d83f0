"""Thread-modular static data race detection for mini-C programs."""

__version__ = "0.1.0"
