"""Contact process on finite multigraphs, random regular graph sampling,
universal-cover couplings, and phase-transition experiments."""

__version__ = "0.1.0"
