"""Objective-function abstraction and the built-in min-max benchmark problems.

All benchmarks are scalar in each variable, but the abstraction carries
arbitrary dimensions (d1, d2) so user-supplied objectives work unchanged.
Evaluation callables are vectorized: they accept arrays whose last axis is
the variable dimension and broadcast over any leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import InputError

__all__ = [
    "BoxDomain",
    "ObjectiveFunction",
    "BENCHMARK_IDS",
    "make_benchmark",
    "evaluate",
    "register_benchmark",
]


@dataclass
class BoxDomain:
    """Axis-aligned box {z : lower <= z <= upper} in R^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.ndim != 1 or self.lower.shape != self.upper.shape:
            raise InputError("box bounds must be 1-d arrays of equal length")
        if self.lower.size < 1:
            raise InputError("box dimension must be >= 1")
        if not np.all(self.lower < self.upper):
            raise InputError("box requires lower[k] < upper[k] for every k")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, points: np.ndarray) -> np.ndarray:
        """Coordinate-wise projection onto the box (last axis indexes coordinates)."""
        return np.clip(points, self.lower, self.upper)

    def contains(self, points: np.ndarray) -> bool:
        return bool(np.all(points >= self.lower) and np.all(points <= self.upper))


@dataclass
class ObjectiveFunction:
    """Evaluatable E(x, y) with its dimensions and box domains.

    ``fn`` must be deterministic and finite on domain_x x domain_y.  The
    instance also tracks how many scalar evaluations have been requested;
    zero-order methods are judged by evaluation budget.  The counter is the
    only mutable state; use :meth:`fresh` to obtain a per-run handle before
    evaluating from concurrent runs.
    """

    name: str
    dim_x: int
    dim_y: int
    domain_x: BoxDomain
    domain_y: BoxDomain
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    eval_count: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_y < 1:
            raise InputError("objective dimensions must be positive")
        if self.domain_x.dim != self.dim_x or self.domain_y.dim != self.dim_y:
            raise InputError("domain dimensions do not match objective dimensions")

    def fresh(self) -> "ObjectiveFunction":
        """Copy of this objective with its evaluation counter reset."""
        return replace(self, eval_count=0)

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        """E at a single point; validates dimensions."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != (self.dim_x,):
            raise InputError(f"x has shape {x.shape}, expected ({self.dim_x},)")
        if y.shape != (self.dim_y,):
            raise InputError(f"y has shape {y.shape}, expected ({self.dim_y},)")
        self.eval_count += 1
        return float(self.fn(x, y))

    def batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Broadcast evaluation; xs (..., d1) against ys (..., d2)."""
        out = np.asarray(self.fn(xs, ys), dtype=float)
        self.eval_count += out.size
        return out

    def pair_matrix(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """All-pairs matrix M[i, j] = E(xs[i], ys[j]) in one vectorized call."""
        return self.batch(xs[:, None, :], ys[None, :, :])


def _quartic(z):
    return (z + 1.0) * (z - 1.0) * (z + 3.0) * (z - 3.0)


def _even_sextic(z):
    z2 = z * z
    return z2 / 4.0 - z2 * z2 / 2.0 + z2 * z2 * z2 / 6.0


def _bilinear(x, y):
    return x[..., 0] * y[..., 0]


def _bivariate(x, y):
    xx = x[..., 0]
    return xx**4 / 4.0 - xx**2 / 2.0 + xx * y[..., 0]


def _bilinearly_coupled(x, y):
    xx, yy = x[..., 0], y[..., 0]
    return _quartic(xx) + 10.0 * xx * yy - _quartic(yy)


def _forsaken(x, y):
    xx, yy = x[..., 0], y[..., 0]
    return xx * (yy - 0.45) + _even_sextic(xx) - _even_sextic(yy)


def _sixth_order(x, y):
    xx, yy = x[..., 0], y[..., 0]
    poly = 4.0 * xx**2 - (yy - 3.0 * xx + 0.05 * xx**3) ** 2 - 0.1 * yy**4
    return poly * np.exp(-0.01 * (xx**2 + yy**2))


def _remark_function(x, y):
    xx, yy = x[..., 0], y[..., 0]
    a = np.sin(xx) / (1.0 + xx**2)
    b = np.sin(xx) / (1.0 + xx**2) ** 2
    bump = -((yy - a) ** 2) / (1.0 + (yy - b) ** 2)
    return bump + np.abs(np.tanh(xx)) / (1.0 + np.sin(xx) ** 2)


def _box1(lo, hi):
    return BoxDomain(np.array([lo]), np.array([hi]))


# id -> (formula, x-box, y-box).  The bilinear, bivariate and remark problems
# are stated on all of R x R; they get [-4, 4]^2 by convention so projection
# and border initialization are well defined (override via make_benchmark).
_BENCHMARKS: dict[str, tuple[Callable, tuple[float, float], tuple[float, float]]] = {
    "bilinear": (_bilinear, (-4.0, 4.0), (-4.0, 4.0)),
    "bivariate": (_bivariate, (-4.0, 4.0), (-4.0, 4.0)),
    "bilinearly_coupled": (_bilinearly_coupled, (-4.0, 4.0), (-4.0, 4.0)),
    "forsaken": (_forsaken, (-1.5, 1.5), (-1.5, 1.5)),
    "sixth_order": (_sixth_order, (-2.0, 2.0), (-2.0, 2.0)),
    "remark_function": (_remark_function, (-4.0, 4.0), (-4.0, 4.0)),
}

BENCHMARK_IDS = tuple(_BENCHMARKS)


def _canonical_id(benchmark_id: str) -> str:
    key = str(benchmark_id).strip().lower().replace("-", "_").replace(" ", "_")
    if key not in _BENCHMARKS:
        raise InputError(
            f"unknown benchmark {benchmark_id!r}; valid ids: {', '.join(BENCHMARK_IDS)}"
        )
    return key


def register_benchmark(name: str, fn: Callable, box_x: BoxDomain, box_y: BoxDomain) -> None:
    """Code-level extension point: add a custom objective under a new id."""
    key = name.strip().lower().replace("-", "_")
    if key in _BENCHMARKS:
        raise InputError(f"benchmark id {name!r} already registered")
    _BENCHMARKS[key] = (fn, box_x, box_y)


def make_benchmark(benchmark_id: str, box_x=None, box_y=None) -> ObjectiveFunction:
    """Build the named benchmark objective, optionally overriding its boxes."""
    key = _canonical_id(benchmark_id)
    fn, bx, by = _BENCHMARKS[key]
    dom_x = bx if isinstance(bx, BoxDomain) else _box1(*bx)
    dom_y = by if isinstance(by, BoxDomain) else _box1(*by)
    if box_x is not None:
        dom_x = box_x if isinstance(box_x, BoxDomain) else _box1(*box_x)
    if box_y is not None:
        dom_y = box_y if isinstance(box_y, BoxDomain) else _box1(*box_y)
    return ObjectiveFunction(
        name=key,
        dim_x=dom_x.dim,
        dim_y=dom_y.dim,
        domain_x=dom_x,
        domain_y=dom_y,
        fn=fn,
    )


def evaluate(obj: ObjectiveFunction, x: np.ndarray, y: np.ndarray) -> float:
    """Dispatch wrapper: E(x, y) at a single point, no clamping."""
    return obj.value(x, y)
