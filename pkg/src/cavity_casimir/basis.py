"""Truncated multipole mode basis shared by every matrix consumer.

Index order is (l, m, P) lexicographic with the polarisation P innermost
(TE = 0, TM = 1).  Coupling matrices use the same (l, m) order with the
three field components (X, Z, radial) innermost instead of P.  The real
harmonic index m runs from -l to l (m < 0 are the sine-type harmonics).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TE, TM = 0, 1
COMP_X, COMP_Z, COMP_R = 0, 1, 2


@dataclass(frozen=True)
class ModeBasis:
    lmax: int
    lmin: int = 1

    def __post_init__(self):
        if self.lmin < 1:
            raise ValueError("l = 0 carries no transverse vector modes")
        if self.lmax < self.lmin:
            raise ValueError(f"lmax={self.lmax} must be >= lmin={self.lmin}")

    @cached_property
    def lm(self):
        """(n_lm, 2) integer array of (l, m) pairs in basis order."""
        pairs = [(l, m) for l in range(self.lmin, self.lmax + 1)
                 for m in range(-l, l + 1)]
        return np.array(pairs, dtype=int)

    @property
    def n_lm(self):
        return len(self.lm)

    @property
    def size(self):
        """Dimension of the (l, m, P) space."""
        return 2 * self.n_lm

    @cached_property
    def ell(self):
        """l of every (l, m, P) index."""
        return np.repeat(self.lm[:, 0], 2)

    @cached_property
    def m(self):
        return np.repeat(self.lm[:, 1], 2)

    @cached_property
    def pol(self):
        return np.tile([TE, TM], self.n_lm)

    def index(self, l, m, p):
        if not (self.lmin <= l <= self.lmax and abs(m) <= l):
            raise IndexError((l, m))
        before = sum(2 * j + 1 for j in range(self.lmin, l))
        return 2 * (before + m + l) + p

    def m_blocks(self):
        """Index sets coupled by an axisymmetric body, keyed by |m|.

        Real harmonics mix +m (cosine) and -m (sine) through the curl,
        so the invariant blocks are labelled by |m| rather than m.
        """
        am = np.abs(self.m)
        return {int(a): np.flatnonzero(am == a) for a in np.unique(am)}
