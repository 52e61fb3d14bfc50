"""Inhomogeneous periodic FPU chains.

Modules by topic:

* :mod:`inhomfpu.lattice`: coupling matrices, spectra, dihedral symmetry
* :mod:`inhomfpu.fiber`: inverse-mass vectors with a prescribed spectrum
* :mod:`inhomfpu.transform`: eigenmode coordinates and cubic coefficients
* :mod:`inhomfpu.normalform`: averaged 1:2:3 dynamics and stability
* :mod:`inhomfpu.dynamics`: time integration, diagnostics and ensembles
"""
__version__ = "0.1.0"

from .errors import FPUError  # noqa: E402
from .lattice import InverseMasses, build_coupling, spectrum  # noqa: E402

__all__ = ["FPUError", "InverseMasses", "build_coupling", "spectrum", "__version__"]
