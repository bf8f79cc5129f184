"""Universal Baxter operators: kernels, Hecke elements, Whittaker functions and L-factors.

Submodules are imported on demand (``from baxterq import hecke``) so that
the command line can configure thread counts before numpy loads.
"""

__version__ = "0.1.0"

__all__ = ["baxter", "cli", "hecke", "matgrp", "quad", "specfn", "verify", "whittaker"]
