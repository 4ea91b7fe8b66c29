"""
Wide stencils.
A stencil is the set of lattice directions the monotone scheme takes
second differences along, together with the orthogonal direction
frames the determinant is minimized over.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from malab.utils.exceptions import ArgumentError

DEFAULT_WIDTH = 3


def _canonical(v: Tuple[int, ...]) -> bool:
    """First nonzero component positive."""

    for c in v:
        if c != 0:
            return c > 0
    return False


@lru_cache(maxsize = None)
def _directions(dim: int, width: int) -> Tuple[Tuple[int, ...], ...]:
    axes = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    others = []
    for v in itertools.product(range(-width, width + 1), repeat = dim):
        if not _canonical(v) or v in axes:
            continue
        if math.gcd(*[abs(c) for c in v]) != 1:
            continue
        others.append(v)
    others.sort(key = lambda v: (max(abs(c) for c in v), sum(c * c for c in v), tuple(-c for c in v)))
    return tuple(axes + others)


@lru_cache(maxsize = None)
def _frames(dim: int, width: int) -> Tuple[Tuple[int, ...], ...]:
    if dim == 1:
        return ((0,),)
    dirs = np.array(_directions(dim, width))
    orthogonal = np.triu((dirs @ dirs.T) == 0, 1)
    frames: List[Tuple[int, ...]] = []
    # lexicographic, so the axis frame comes first
    for i, j in zip(*np.nonzero(orthogonal)):
        if dim == 2:
            frames.append((int(i), int(j)))
            continue
        third = np.flatnonzero(orthogonal[i] & orthogonal[j])
        frames.extend((int(i), int(j), int(k)) for k in third)
    return tuple(frames)


####
##      STENCIL
#####
@dataclass(frozen = True)
class Stencil:
    """
    Coprime integer directions of max norm <= width, one per +- pair,
    coordinate axes first. `frames` lists index tuples of mutually
    orthogonal directions; the axis frame comes first.
    """

    dim: int
    width: int = DEFAULT_WIDTH
    directions: np.ndarray = field(init = False, repr = False, compare = False)
    frames: np.ndarray = field(init = False, repr = False, compare = False)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ArgumentError("stencils exist for dim 1, 2 and 3")
        if self.width < 1:
            raise ArgumentError("stencil width must be >= 1")
        object.__setattr__(self, "directions", np.array(_directions(self.dim, self.width), dtype = int))
        object.__setattr__(self, "frames", np.array(_frames(self.dim, self.width), dtype = int))

    @property
    def size(self) -> int:
        return int(self.directions.shape[0])

    @property
    def reach(self) -> int:
        """Largest lattice offset any direction uses."""

        return int(np.max(np.abs(self.directions)))

    def __len__(self) -> int:
        return self.size

    def unit(self, steps: np.ndarray) -> np.ndarray:
        """Euclidean lengths of one lattice step along each direction."""

        return np.linalg.norm(self.directions * np.asarray(steps, dtype = float), axis = -1)
