"""Piecewise-linear tables evaluated on plain reals or AD evaluations."""

import logging
from typing import Any

import numpy as np

from numerics_module.autodiff import Evaluation, value_of
from numerics_module.errors import InputError

logger = logging.getLogger(__name__)


class PiecewiseLinear:
    """Columns of values tabulated against a strictly increasing abscissa.

    Below the first node the first value is returned (zero slope). Above the last node
    the last segment is extended linearly and a warning is logged once per table,
    unless the table clamps its argument to the support instead.
    """

    def __init__(
        self,
        x: Any,
        columns: dict[str, Any],
        name: str = "table",
        units: dict[str, str] | None = None,
        clamp: bool = False,
    ):
        """Initialize the table.

        Args:
            x: Abscissa nodes, strictly increasing
            columns: Column name → values at the nodes
            name: Label used in diagnostics
            units: SI dimension name of the abscissa (key ``"x"``) and of every column
            clamp: Clamp arguments to ``[x[0], x[-1]]`` instead of extrapolating

        Raises:
            InputError: fewer than one node, non-increasing abscissa or ragged columns
        """
        self.x = np.asarray(x, dtype=float)
        self.columns = {key: np.asarray(val, dtype=float) for key, val in columns.items()}
        self.name = name
        self.units = dict(units or {})
        self.clamp = clamp
        self._warned = False

        if self.x.ndim != 1 or len(self.x) == 0:
            raise InputError(f"{name}: table needs at least one row")
        if np.any(np.diff(self.x) <= 0.0):
            raise InputError(f"{name}: first column must be strictly increasing")
        for key, column in self.columns.items():
            if column.shape != self.x.shape:
                raise InputError(f"{name}: column '{key}' has {len(column)} rows, expected {len(self.x)}")

    def __len__(self) -> int:
        return len(self.x)

    def __call__(self, arg: Any, column: str) -> Any:
        return self.evaluate(arg, column)

    def evaluate(self, arg: Any, column: str) -> Any:
        """Interpolate ``column`` at ``arg``; derivatives carry the segment slope."""
        y = self.columns[column]
        xv = np.asarray(value_of(arg), dtype=float)

        if len(self.x) == 1:
            value = np.full(xv.shape, y[0])
            slope = np.zeros(xv.shape)
        else:
            if self.clamp:
                inside = (xv >= self.x[0]) & (xv <= self.x[-1])
                xq = np.clip(xv, self.x[0], self.x[-1])
            else:
                inside = xv >= self.x[0]
                xq = np.maximum(xv, self.x[0])
                if not self._warned and np.any(xv > self.x[-1]):
                    self._warned = True
                    logger.warning(
                        "%s: argument %.6g above last node %.6g, extrapolating linearly",
                        self.name, float(np.max(xv)), self.x[-1],
                    )
            seg = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
            x0, x1 = self.x[seg], self.x[seg + 1]
            y0, y1 = y[seg], y[seg + 1]
            t = (xq - x0) / (x1 - x0)
            value = y0 * (1.0 - t) + y1 * t
            slope = np.where(inside, (y1 - y0) / (x1 - x0), 0.0)

        if isinstance(arg, Evaluation):
            return type(arg)(value, slope[..., None] * arg.derivs)
        return float(value) if value.ndim == 0 else value

    def inverse(self, target: Any, column: str) -> Any:
        """Abscissa at which a monotone ``column`` takes ``target`` (clamped, plain reals).

        Works for non-increasing and non-decreasing columns. Flat stretches return their
        first abscissa in the direction of the search.
        """
        y = self.columns[column]
        target = np.asarray(target, dtype=float)
        if len(self.x) == 1:
            result = np.full(target.shape, self.x[0])
        elif y[-1] >= y[0]:
            result = np.interp(target, y, self.x)
        else:
            result = np.interp(target, y[::-1], self.x[::-1])
        return float(result) if np.ndim(result) == 0 else result

    def is_constant(self, column: str) -> bool:
        y = self.columns[column]
        return bool(np.all(y == y[0]))
