"""Built-in extension pairs for the shipped operator models."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError
from .spectra import (ExtensionPair, SpectralSequence, Tail, harmonic_oscillator_spectrum,
                      momentum_spectrum, neumann_laplacian_spectrum, schrodinger_spectrum)

MODELS = ("momentum", "laplacian", "harmonic", "schrodinger")


def momentum_pair(a: float = math.pi, j_max: int = 100_000) -> ExtensionPair:
    """gamma = 0 against gamma = pi/2."""
    return ExtensionPair(momentum_spectrum(a, 0.0, j_max),
                         momentum_spectrum(a, math.pi / 2, j_max), math.pi / 2)


def laplacian_pair(a: float = math.pi, j_max: int = 10_000) -> ExtensionPair:
    """beta = 0 (zero mode left out) against beta = pi/2."""
    return ExtensionPair(neumann_laplacian_spectrum(a, 0.0, j_max),
                         neumann_laplacian_spectrum(a, math.pi / 2, j_max), math.pi / 2)


def harmonic_pair(j_max: int = 10_000) -> ExtensionPair:
    """Oscillator levels {2j-1} against the interlaced midpoints {2j}.

    The second spectrum plays the role of a rank-one perturbation: it shifts
    every level to the midpoint above it and so interlaces with the first.
    """
    seq_b = SpectralSequence(2.0 * np.arange(1, j_max + 1), [], False, Tail(1.0, 2.0, ("positive",)))
    return ExtensionPair(harmonic_oscillator_spectrum(j_max), seq_b, math.pi / 2)


def schrodinger_pair(a: float = math.pi, potential=math.sin, j_max: int = 2000,
                     cells: int = 2048) -> ExtensionPair:
    """Shooting spectra for beta = 0 and beta = pi/2 with the given potential."""
    return ExtensionPair(schrodinger_spectrum(a, potential, 0.0, j_max, cells=cells),
                         schrodinger_spectrum(a, potential, math.pi / 2, j_max, cells=cells),
                         math.pi / 2)


def builtin_pair(model: str, **params) -> ExtensionPair:
    factories = {"momentum": momentum_pair, "laplacian": laplacian_pair,
                 "harmonic": harmonic_pair, "schrodinger": schrodinger_pair}
    if model not in factories:
        raise InvalidParameterError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    return factories[model](**{k: v for k, v in params.items() if v is not None})
