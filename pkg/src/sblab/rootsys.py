"""Reduced root systems with every root of multiplicity two.

This is the structural data behind the concrete spaces in this package: the
empty system is the Euclidean case, a single unit root gives hyperbolic
3-space with its compact dual the 3-sphere. The structure functions here are
rank-general; the geometric experiments elsewhere are rank one.

Systems are supplied as explicit vector lists (coordinates in an orthonormal
basis, inner product = dot product), never by classification name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .specfun import sincc, sinhc

MULTIPLICITY = 2


@dataclass(frozen=True)
class RootSystemSpec:
    """A reduced root system in which every root has multiplicity 2.

    rank            dimension of the flat subspace the roots live on
    positive_roots  tuple of nonzero vectors in R^rank
    weyl_order      order of the Weyl group (1 for the empty system)
    multiplicity    fixed at 2; anything else is rejected
    """

    rank: int
    positive_roots: tuple[tuple[float, ...], ...] = ()
    weyl_order: int = 1
    multiplicity: int = field(default=MULTIPLICITY)

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValueError("rank must be a positive integer")
        if self.multiplicity != MULTIPLICITY:
            raise ValueError("all roots must have multiplicity 2")
        if self.weyl_order < 1:
            raise ValueError("weyl_order must be >= 1")
        roots = tuple(tuple(float(x) for x in r) for r in self.positive_roots)
        object.__setattr__(self, "positive_roots", roots)
        for r in roots:
            if len(r) != self.rank:
                raise ValueError("every root must have length == rank")
            if not any(x != 0.0 for x in r):
                raise ValueError("roots must be nonzero")
        # reduced: no positive root is a positive multiple of another
        arr = [np.asarray(r) for r in roots]
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                a, b = arr[i], arr[j]
                cross = a @ b
                if cross > 0 and abs(cross * cross - (a @ a) * (b @ b)) < 1e-12 * (a @ a) * (b @ b):
                    raise ValueError("system is not reduced: parallel positive roots")
        if not roots and self.weyl_order != 1:
            raise ValueError("the empty system has weyl_order 1")
        if len(roots) == 1 and self.weyl_order != 2:
            raise ValueError("a single-root system has weyl_order 2")

    @property
    def is_empty(self) -> bool:
        return len(self.positive_roots) == 0

    def root_matrix(self) -> np.ndarray:
        """Positive roots as a (#roots, rank) array; shape (0, rank) if empty."""
        if self.is_empty:
            return np.zeros((0, self.rank))
        return np.asarray(self.positive_roots, dtype=np.float64)

    @property
    def space_dimension(self) -> int:
        """dim of the ambient symmetric space: rank + multiplicity * #roots."""
        return self.rank + MULTIPLICITY * len(self.positive_roots)

    @classmethod
    def from_dict(cls, doc: dict) -> "RootSystemSpec":
        required = {"rank", "positive_roots", "weyl_order"}
        missing = required - doc.keys()
        if missing:
            raise ValueError(f"missing fields: {sorted(missing)}")
        extra = doc.keys() - required - {"multiplicity"}
        if extra:
            raise ValueError(f"unknown fields: {sorted(extra)}")
        return cls(
            rank=int(doc["rank"]),
            positive_roots=tuple(tuple(r) for r in doc["positive_roots"]),
            weyl_order=int(doc["weyl_order"]),
            multiplicity=int(doc.get("multiplicity", MULTIPLICITY)),
        )

    @classmethod
    def from_json(cls, text: str) -> "RootSystemSpec":
        return cls.from_dict(json.loads(text))


def euclidean(rank: int = 3) -> RootSystemSpec:
    """The empty system on R^rank: delta == 1, c == 0."""
    return RootSystemSpec(rank=rank, positive_roots=(), weyl_order=1)


def hyperbolic3() -> RootSystemSpec:
    """Rank one with a single unit root: hyperbolic 3-space, dual the 3-sphere.

    The unit normalization pins c = 1, matching the 3-sphere heat kernel
    conventions used throughout.
    """
    return RootSystemSpec(rank=1, positive_roots=((1.0,),), weyl_order=2)


def rho(spec: RootSystemSpec) -> np.ndarray:
    """Half the multiplicity-weighted sum of positive roots; equals their plain sum here."""
    out = np.zeros(spec.rank)
    for r in spec.positive_roots:
        out += np.asarray(r)
    return out  # (1/2) * 2 * sum


def c_constant(spec: RootSystemSpec) -> float:
    """|rho|^2; zero exactly for the empty system."""
    v = rho(spec)
    return float(v @ v)


def _pairings(spec: RootSystemSpec, H) -> np.ndarray:
    H = np.asarray(H, dtype=np.complex128)
    if H.shape != (spec.rank,):
        raise ValueError(f"H must be a vector of length {spec.rank}")
    return spec.root_matrix() @ H


def delta_a(spec: RootSystemSpec, H) -> complex:
    """prod over positive roots of sinh(a(H))/a(H); entire in H, 1 at H = 0."""
    if spec.is_empty:
        return complex(1.0)
    return complex(np.prod(sinhc(_pairings(spec, H))))


def eta_a(spec: RootSystemSpec, H) -> complex:
    """prod over positive roots of sinh(a(H)); antisymmetric under sign flips."""
    if spec.is_empty:
        return complex(1.0)
    return complex(np.prod(np.sinh(_pairings(spec, H))))


def j_half_a(spec: RootSystemSpec, H) -> complex:
    """prod over positive roots of sin(a(H))/a(H); equals delta_a(spec, iY) for real Y."""
    if spec.is_empty:
        return complex(1.0)
    return complex(np.prod(sincc(_pairings(spec, H))))
