from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import KitError

RESERVED = frozenset({"hbar", "I", "sqrt", "exp"})
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class PhaseSpace:
    """Canonical coordinates ``q_i``, momenta ``p_i`` and extra parameters.

    Coordinate and momentum names default to ``q1..qn`` and ``p1..pn``.
    Parameters are stored sorted, which is also their monomial order.
    """

    dimension: int
    coord_names: tuple[str, ...] = field(default=())
    momentum_names: tuple[str, ...] = field(default=())
    parameters: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = self.dimension
        if not isinstance(n, int) or n < 1:
            raise KitError(f"dimension must be a positive integer, got {n!r}")
        if not self.coord_names:
            object.__setattr__(self, "coord_names", tuple(f"q{i}" for i in range(1, n + 1)))
        if not self.momentum_names:
            object.__setattr__(self, "momentum_names", tuple(f"p{i}" for i in range(1, n + 1)))
        object.__setattr__(self, "coord_names", tuple(self.coord_names))
        object.__setattr__(self, "momentum_names", tuple(self.momentum_names))
        object.__setattr__(self, "parameters", tuple(sorted(set(self.parameters))))
        if len(self.coord_names) != n or len(self.momentum_names) != n:
            raise KitError(f"expected {n} coordinate and {n} momentum names")
        names = self.coord_names + self.momentum_names + self.parameters
        for name in names:
            if not _IDENT.match(name):
                raise KitError(f"invalid identifier {name!r}")
            if name in RESERVED:
                raise KitError(f"{name!r} is reserved")
        if len(set(names)) != len(names):
            raise KitError("phase-space identifiers must be pairwise distinct")

    def symbol_names(self) -> tuple[str, ...]:
        return self.coord_names + self.momentum_names + self.parameters

    def variable(self, name: str):
        """Return ``("q", i)`` / ``("p", i)`` (0-based) for a canonical variable, else None."""
        if name in self.coord_names:
            return "q", self.coord_names.index(name)
        if name in self.momentum_names:
            return "p", self.momentum_names.index(name)
        return None
