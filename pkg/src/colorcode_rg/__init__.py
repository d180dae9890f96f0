"""Rescaling decoder for the 4.8.8 toric color code under bit-flip noise."""

__version__ = "0.1.0"

from .lattice import CodeParams, Lattice, build_cellmap, build_lattice, rescaled_lattice
from .noise import sample_error, syndrome_of

__all__ = [
    "CodeParams",
    "Lattice",
    "RescalingDecoder",
    "build_cellmap",
    "build_lattice",
    "decode",
    "rescaled_lattice",
    "sample_error",
    "syndrome_of",
]


def __getattr__(name):
    # lazy imports keep `import colorcode_rg` light and avoid cycles
    if name == "decode":
        from .decoder import decode
        return decode
    if name == "RescalingDecoder":
        from .estimator import RescalingDecoder
        return RescalingDecoder
    raise AttributeError(name)
