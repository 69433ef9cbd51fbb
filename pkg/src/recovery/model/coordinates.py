"""Working coordinates: the chart u -> x and the truncated grid in u.

Three charts cover the supported domains:

* ``(0, inf)``   x = e^u
* ``(lo, inf)``  x = lo + e^u
* ``(-inf, inf)`` x = u
"""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict


class Chart(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["log", "shifted_log", "linear"]
    lo: float = 0.0

    def to_x(self, u):
        if self.kind == "linear":
            return u
        return self.lo + np.exp(u)

    def to_u(self, x):
        if self.kind == "linear":
            return x
        return np.log(np.asarray(x, dtype=float) - self.lo)

    def x_u(self, u):
        if self.kind == "linear":
            return np.ones_like(np.asarray(u, dtype=float))
        return np.exp(u)

    @property
    def curvature(self) -> float:
        """x_uu / x_u, constant for every supported chart."""
        return 0.0 if self.kind == "linear" else 1.0

    def x_u_at(self, x):
        """x_u expressed through x."""
        if self.kind == "linear":
            return np.ones_like(np.asarray(x, dtype=float))
        return np.asarray(x, dtype=float) - self.lo


def chart_for(lo: float) -> Chart:
    if lo == -math.inf:
        return Chart(kind="linear", lo=-math.inf)
    if lo == 0:
        return Chart(kind="log", lo=0.0)
    return Chart(kind="shifted_log", lo=float(lo))


class WorkingGrid(BaseModel):
    """Uniform grid in u centred on the initial state."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    chart: Chart
    u: np.ndarray
    x: np.ndarray
    x_u: np.ndarray
    center: int
    step: float

    @property
    def u_min(self) -> float:
        return float(self.u[0])

    @property
    def u_max(self) -> float:
        return float(self.u[-1])

    @property
    def u_xi(self) -> float:
        return float(self.u[self.center])

    def outward(self, values, side: str):
        """Values ordered from xi outward toward the chosen boundary."""
        values = np.asarray(values)
        if side == "left":
            return values[self.center :: -1]
        return values[self.center :]

    def nodes_per(self, width: float) -> int:
        return int(round(width / self.step))


def build_grid(chart: Chart, xi: float, halfwidth: float, step: float) -> WorkingGrid:
    n_half = int(round(halfwidth / step))
    u_xi = float(chart.to_u(xi))
    u = u_xi + step * np.arange(-n_half, n_half + 1, dtype=float)
    x = np.asarray(chart.to_x(u), dtype=float)
    # keep xi itself exact at the centre node
    x[n_half] = xi
    return WorkingGrid(
        chart=chart,
        u=u,
        x=x,
        x_u=np.asarray(chart.x_u(u), dtype=float),
        center=n_half,
        step=step,
    )
