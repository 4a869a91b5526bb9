from typing import List, Optional, Tuple

import numpy as np

from chainlab.core.errors import BadDescriptor
from chainlab.schemas.space import (
    GridDescriptor,
    MassRule,
    PuncturedGridDescriptor,
    TwoSequenceDescriptor,
)

Generated = Tuple[np.ndarray, np.ndarray, Optional[List[str]]]


def grid_points(descriptor: GridDescriptor) -> Generated:
    """side^dim points at spacing * index, lexicographic in the index."""
    axes = [np.arange(descriptor.side, dtype=float) * descriptor.spacing] * descriptor.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    n = coords.shape[0]

    if descriptor.mass_rule == MassRule.UNIFORM:
        mass = np.full(n, descriptor.spacing ** descriptor.dim)
    elif descriptor.mass_rule == MassRule.UNIT:
        mass = np.ones(n)
    else:
        mass = np.full(n, 1.0 / n)
    return coords, mass, None


def two_sequence_points(descriptor: TwoSequenceDescriptor) -> Generated:
    """Pairs x_n = n, y_n = n + 1/n with mass n^-3 each, ordered x_n, y_n by n."""
    ns = np.arange(descriptor.n_min, descriptor.n_max + 1, dtype=float)
    coords = np.empty(2 * ns.size)
    coords[0::2] = ns
    coords[1::2] = ns + 1.0 / ns
    mass = np.repeat(ns ** -3.0, 2)
    labels = []
    for n in range(descriptor.n_min, descriptor.n_max + 1):
        labels.extend([f"x{n}", f"y{n}"])
    return coords.reshape(-1, 1), mass, labels


def punctured_grid_points(descriptor: PuncturedGridDescriptor) -> Generated:
    coords, mass, labels = grid_points(descriptor.grid)
    bad = [i for i in descriptor.punctures if not 0 <= i < mass.size]
    if bad:
        raise BadDescriptor(f"Punctures outside the grid: {bad}", {"punctures": bad})
    mass = mass.copy()
    mass[list(descriptor.punctures)] = 0.0
    return coords, mass, labels
