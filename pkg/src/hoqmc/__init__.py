"""Higher-order digital nets: construction, quality parameters and QMC error analysis."""

__version__ = "0.1.0"

from . import analysis, constructions, gf, netcore, quality, walsh, weights  # noqa: E402
from .constructions import Descriptor, build_spec  # noqa: E402
from .netcore import DigitalNetSpec, PointSet, generate_points  # noqa: E402

__all__ = [
    "__version__",
    "analysis",
    "constructions",
    "gf",
    "netcore",
    "quality",
    "walsh",
    "weights",
    "Descriptor",
    "build_spec",
    "DigitalNetSpec",
    "PointSet",
    "generate_points",
]
