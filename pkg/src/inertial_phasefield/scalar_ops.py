"""Scalar monotone nonlinearity, its resolvent, Yosida approximation and
Moreau-Yosida envelope, plus the Lipschitz perturbation.

All evaluators accept a float or an ndarray and are vectorized cell-wise, so
they can be applied directly to grid functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ScalarMonotone",
    "LipschitzPerturbation",
    "SolverFailure",
    "GrowthReport",
    "resolvent_scalar",
    "yosida_scalar",
    "moreau_scalar",
    "growth_certificate",
    "make_nonlinearity",
    "make_perturbation",
    "NONLINEARITIES",
    "PERTURBATIONS",
]

RESOLVENT_ATOL = 1e-12
RESOLVENT_MAX_ITER = 100


class SolverFailure(RuntimeError):
    """Raised when the scalar root finder does not converge."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ScalarMonotone:
    """Nondecreasing continuous map with beta(0) = 0 and its convex primitive.

    ``growth_exponent`` and ``growth_constant`` are the pair (q, c) for which
    ``|beta(r)|**q <= c * (1 + primitive(r))`` is claimed.
    """

    name: str
    fn: Callable
    primitive: Callable
    growth_exponent: float
    growth_constant: float
    derivative: Optional[Callable] = None

    def __call__(self, r):
        return self.fn(r)


@dataclass(frozen=True)
class LipschitzPerturbation:
    name: str
    fn: Callable
    lipschitz_constant: float

    def __call__(self, r):
        return self.fn(r)


@dataclass(frozen=True)
class GrowthReport:
    worst_ratio: float
    worst_r: float
    passed: bool


# -- registry ----------------------------------------------------------------
# Module-level callables (and partials of them) keep the objects picklable for
# process-pool sweeps.

class _bound(partial):
    """``functools.partial`` that compares by value, so ``cubic() == cubic()``."""

    def _key(self):
        return (self.func, self.args, tuple(sorted(self.keywords.items())))

    def __eq__(self, other):
        return isinstance(other, _bound) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


def _power(r, p, k):
    r = np.asarray(r, dtype=float)
    return k * np.sign(r) * np.abs(r) ** p


def _power_primitive(r, p, k):
    r = np.asarray(r, dtype=float)
    return k * np.abs(r) ** (p + 1) / (p + 1)


def _power_derivative(r, p, k):
    r = np.asarray(r, dtype=float)
    return k * p * np.abs(r) ** (p - 1)


def _odd_power(p, k=1.0, q=None, c=None, name=None):
    # |k r^p|^q <= c (1 + k|r|^{p+1}/(p+1)) with q = (p+1)/p needs c >= k^{q-1}(p+1)
    if q is None:
        q = (p + 1.0) / p
    if c is None:
        c = k ** (q - 1.0) * (p + 1.0)
    return ScalarMonotone(
        name=name or f"power{p:g}",
        fn=_bound(_power, p=p, k=k),
        primitive=_bound(_power_primitive, p=p, k=k),
        derivative=_bound(_power_derivative, p=p, k=k),
        growth_exponent=q,
        growth_constant=c,
    )


def cubic(k=1.0):
    """beta(r) = k r^3 (double-well choice), certified with q = 4/3, c = 4 k^{1/3}."""
    return _odd_power(3, k=k, name="cubic")


def linear(k=1.0):
    """beta(r) = k r, certified with q = 2, c = 2k."""
    return _odd_power(1, k=k, name="linear")


def quintic(k=1.0):
    return _odd_power(5, k=k, name="quintic")


NONLINEARITIES = {"cubic": cubic, "linear": linear, "quintic": quintic}


def _scaled_identity(r, k):
    return -k * np.asarray(r, dtype=float)


def _scaled_sine(r, a):
    return -a * np.sin(np.asarray(r, dtype=float))


def _zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


def neg_linear(k=1.0):
    """pi(r) = -k r; the classical double-well split uses k = 1."""
    return LipschitzPerturbation("linear", _bound(_scaled_identity, k=k), abs(k))


def neg_sine(a=1.0):
    return LipschitzPerturbation("sine", _bound(_scaled_sine, a=a), abs(a))


def zero():
    return LipschitzPerturbation("zero", _zero, 0.0)


PERTURBATIONS = {"linear": neg_linear, "sine": neg_sine, "zero": zero}


def make_nonlinearity(name="cubic", **kwargs) -> ScalarMonotone:
    try:
        factory = NONLINEARITIES[name]
    except KeyError:
        raise ValueError(f"unknown nonlinearity {name!r}; choose from {sorted(NONLINEARITIES)}")
    return factory(**kwargs)


def make_perturbation(name="linear", **kwargs) -> LipschitzPerturbation:
    try:
        factory = PERTURBATIONS[name]
    except KeyError:
        raise ValueError(f"unknown perturbation {name!r}; choose from {sorted(PERTURBATIONS)}")
    return factory(**kwargs)


# -- resolvent / Yosida / envelope --------------------------------------------

def _as_output(x, scalar):
    return float(x) if scalar else x


def resolvent_scalar(op: ScalarMonotone, eps: float, r, atol=RESOLVENT_ATOL,
                     max_iter=RESOLVENT_MAX_ITER):
    """Solve ``s + eps * op(s) = r`` for s, element-wise.

    ``eps`` may be an array broadcastable against ``r``.

    Safeguarded Newton on the bracket [min(0, r), max(0, r)]: any Newton
    iterate leaving the current bracket is replaced by a bisection step.
    The residual test is ``|g(s)| <= atol * max(1, |r|)``; a bracket collapsed
    to a few ulps is also accepted.

    Raises
    ------
    SolverFailure
        If some entry has not converged after ``max_iter`` iterations.
    """
    if not np.all(np.asarray(eps) > 0):
        raise ValueError("eps must be positive")
    scalar = np.ndim(r) == 0 and np.ndim(eps) == 0
    r, eps = np.broadcast_arrays(np.atleast_1d(np.asarray(r, dtype=float)), eps)
    r = r.copy()
    lo = np.minimum(r, 0.0)
    hi = np.maximum(r, 0.0)
    tol = atol * np.maximum(1.0, np.abs(r))
    s = r.copy()
    deriv = op.derivative
    for _ in range(max_iter):
        g = s + eps * op(s) - r
        done = (np.abs(g) <= tol) | (hi - lo <= 4 * np.spacing(np.maximum(np.abs(lo), np.abs(hi))))
        if done.all():
            if deriv is not None:
                # one polishing Newton step takes the root to rounding level
                with np.errstate(divide="ignore", invalid="ignore"):
                    polished = s - g / (1.0 + eps * deriv(s))
                s = np.where(np.isfinite(polished), np.clip(polished, lo, hi), s)
            return _as_output(s[0] if scalar else s, scalar)
        above = g > 0
        hi = np.where(above, s, hi)
        lo = np.where(above, lo, s)
        if deriv is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                trial = s - g / (1.0 + eps * deriv(s))
            inside = (trial > lo) & (trial < hi)
            step = np.where(inside, trial, 0.5 * (lo + hi))
        else:
            step = 0.5 * (lo + hi)
        s = np.where(done, s, step)
    g = s + eps * op(s) - r
    raise SolverFailure(
        f"resolvent of {op.name} did not converge in {max_iter} iterations",
        float(np.max(np.abs(g))),
    )


def yosida_scalar(op: ScalarMonotone, eps: float, r):
    """Yosida approximation ``(r - J(r)) / eps``; 1/eps-Lipschitz and monotone."""
    s = resolvent_scalar(op, eps, r)
    return (np.asarray(r, dtype=float) - s) / eps if np.ndim(r) else (float(r) - s) / eps


def moreau_scalar(op: ScalarMonotone, eps: float, r):
    """Moreau-Yosida envelope of the primitive, via the resolvent identity."""
    s = resolvent_scalar(op, eps, r)
    r = np.asarray(r, dtype=float)
    out = (r - s) ** 2 / (2.0 * eps) + op.primitive(s)
    return float(out) if out.ndim == 0 else out


def growth_certificate(op: ScalarMonotone, sample_range=(-10.0, 10.0), n_samples=2001,
                       rtol=1e-12) -> GrowthReport:
    """Worst ratio ``|beta(r)|**q / (c (1 + primitive(r)))`` on a uniform sample."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    r = np.linspace(sample_range[0], sample_range[1], n_samples)
    ratio = np.abs(op(r)) ** op.growth_exponent / (op.growth_constant * (1.0 + op.primitive(r)))
    i = int(np.argmax(ratio))
    worst = float(ratio[i])
    return GrowthReport(worst_ratio=worst, worst_r=float(r[i]), passed=worst <= 1.0 + rtol)
