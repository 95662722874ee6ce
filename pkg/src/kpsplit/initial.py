"""Initial values used by the Burgers and KP studies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dg import DGField1D, DGGrid
from .errors import InvalidArgument
from .spectral import GridField2D

NAMES = ("sine", "sech", "lorentzian", "schwartzian", "soliton", "zero")


@dataclass(frozen=True)
class GridSpec:
    """Equidistant 2D grid on ``[-Lx, Lx) x [-Ly, Ly)``."""

    n_x: int
    n_y: int
    Lx: float = 10 * math.pi
    Ly: float = 10 * math.pi


@dataclass(frozen=True)
class InitialCondition:
    name: str
    L: float = 20.0
    epsilon: float = 1.0
    c: float = 2.0

    def __post_init__(self):
        if self.name not in NAMES:
            raise InvalidArgument(f"unknown initial value {self.name!r}; choose from {NAMES}")

    @property
    def soliton_a(self) -> float:
        return self.epsilon * math.sqrt(self.c / 2.0)

    @property
    def soliton_b(self) -> float:
        return 2.0 * self.c * self.epsilon**2

    def __call__(self, x, y=None, t: float = 0.0):
        x = np.asarray(x, dtype=float)
        n = self.name
        if n == "zero":
            return np.zeros(np.broadcast(x, 0.0 if y is None else y).shape)
        if n == "sine":
            return np.sin(x)
        if n == "sech":
            return 1.0 / np.cosh(x)
        if n == "lorentzian":
            return 1.0 / (1.0 + x * x)
        if n == "soliton":
            out = self.c / np.cosh(self.soliton_a * (x - self.soliton_b * t)) ** 2
            return out if y is None else np.broadcast_to(out, np.broadcast(x, y).shape)
        if y is None:
            raise InvalidArgument("the Schwartzian initial value needs y")
        return schwartzian(x, np.asarray(y, dtype=float))


def schwartzian(x, y):
    """``-d/dx sech^2(sqrt(x^2 + y^2))``, zero at the origin."""
    r = np.hypot(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
    sech = 1.0 / np.cosh(r)
    return 2.0 * sech * sech * np.tanh(r) * ratio


def make_initial(ic: InitialCondition | str, target: DGGrid | GridSpec):
    """Sample ``ic`` on a dG grid (1D) or an equidistant grid (2D)."""
    if isinstance(ic, str):
        ic = InitialCondition(ic)
    if isinstance(target, DGGrid):
        if ic.name == "schwartzian":
            raise InvalidArgument("the Schwartzian initial value is two-dimensional")
        return DGField1D(target, np.asarray(ic(target.nodes), dtype=float))
    if isinstance(target, GridSpec):
        return GridField2D.sample(lambda x, y: ic(x, y), target.n_x, target.n_y, target.Lx, target.Ly)
    raise InvalidArgument(f"unsupported target {type(target).__name__}")
