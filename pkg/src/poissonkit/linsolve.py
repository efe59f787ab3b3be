"""Exact sparse linear algebra over the rationals.

Columns are sparse vectors ``{row_key: rational}``. :class:`EchelonBasis`
absorbs columns one at a time in a fixed order; a column that is already in
the span of earlier ones is recorded as free. Solving a target against the
basis then yields the reduced-row-echelon solution in which every free
column has coefficient zero.
"""

from __future__ import annotations


def _axpy(y: dict, a, x: dict) -> None:
    """y += a*x in place, dropping zeros."""
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


class EchelonBasis:
    def __init__(self, row_order=None):
        # pivot row key -> (vector with vector[pivot] == 1, combination of column ids)
        self.rows: dict = {}
        self.pivot_columns: list = []
        self.free_columns: list = []
        self._row_order = row_order

    def _reduce(self, v: dict) -> tuple[dict, dict]:
        v = dict(v)
        combo: dict = {}
        for pivot in [k for k in v if k in self.rows]:
            c = v.get(pivot)
            if not c:
                continue
            vec, comb = self.rows[pivot]
            _axpy(v, -c, vec)
            _axpy(combo, c, comb)
        return v, combo

    def add_column(self, column_id, vector: dict) -> bool:
        """Insert a column; returns True if it was independent of earlier ones."""
        residual, combo = self._reduce(vector)
        if not residual:
            self.free_columns.append(column_id)
            return False
        pivot = min(residual, key=self._row_order) if self._row_order else next(iter(residual))
        inv = 1 / residual[pivot]
        vec = {k: x * inv for k, x in residual.items()}
        # the new vector is column - sum(combo); track it in terms of columns
        comb = {column_id: inv}
        _axpy(comb, -inv, combo)
        # keep every stored row free of the new pivot (fully reduced form)
        for key, (other, other_comb) in self.rows.items():
            c = other.get(pivot)
            if c:
                _axpy(other, -c, vec)
                _axpy(other_comb, -c, comb)
        self.rows[pivot] = (vec, comb)
        self.pivot_columns.append(column_id)
        return True

    def solve(self, target: dict):
        """(coefficients by column id, residual); residual is empty iff solvable."""
        residual, combo = self._reduce(target)
        return combo, residual

    @property
    def rank(self) -> int:
        return len(self.rows)
