"""Orbit and conjugacy growth counts for the modular group acting on the upper half-plane.

The half-plane with PSL(2, Z) acting is used as a model of the Teichmueller
space of the once-punctured torus with its mapping class group.
"""
from .geometry import I, Point, Units, convert, distance, mobius_apply, translation_length
from .group import (
    ArithmeticOverflow,
    GroupElement,
    NotHyperbolicError,
    classify,
    compose,
    conjugate,
    enumerate_norm_ball,
    inverse,
    normalize,
    power,
    trace,
)
from .io import __version__

__all__ = [
    "ArithmeticOverflow",
    "GroupElement",
    "I",
    "NotHyperbolicError",
    "Point",
    "Units",
    "__version__",
    "classify",
    "compose",
    "conjugate",
    "convert",
    "distance",
    "enumerate_norm_ball",
    "inverse",
    "mobius_apply",
    "normalize",
    "power",
    "trace",
    "translation_length",
]
