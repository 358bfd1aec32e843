"""The Cartan data every constructed algebra ships with."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CartanSeed:
    """A Cartan involution plus a theta-stable, maximally compact Cartan subalgebra.

    ``cartan_basis`` holds one element per row.  ``compact`` indexes the rows
    spanning ``t = h & k`` and ``noncompact`` the rows spanning ``a = h & p``.
    The order of ``compact`` is significant: positive systems are defined
    lexicographically on it.
    """

    theta: np.ndarray
    cartan_basis: np.ndarray
    compact: tuple
    noncompact: tuple

    def __post_init__(self):
        th = np.array(self.theta, dtype=float)
        cb = np.atleast_2d(np.array(self.cartan_basis, dtype=float))
        th.flags.writeable = False
        cb.flags.writeable = False
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "cartan_basis", cb)
        object.__setattr__(self, "compact", tuple(int(i) for i in self.compact))
        object.__setattr__(self, "noncompact", tuple(int(i) for i in self.noncompact))

    @property
    def rank(self) -> int:
        return self.cartan_basis.shape[0]

    @property
    def torus(self) -> np.ndarray:
        """Rows spanning the compact part t."""
        return self.cartan_basis[list(self.compact)]

    @property
    def split_part(self) -> np.ndarray:
        """Rows spanning the noncompact part a."""
        return self.cartan_basis[list(self.noncompact)]
