"""Deterministic counterparts of moment-robust chance constraints.

For the ambiguity set of distributions whose mean lies in the ellipsoid
``(E[w] - mu0)' inv(sigma0) (E[w] - mu0) <= gamma1`` and whose centred second
moment is dominated by ``gamma2 * sigma0``, the worst-case chance constraint

    inf_{P in D} P(a'w <= b) >= 1 - eps

is equivalent to ``mu0'a + k * sqrt(a' sigma0 a) <= b`` with

    k = sqrt(gamma1) + sqrt((1 - eps)/eps * (gamma2 - gamma1))   if gamma1/gamma2 <= eps
    k = sqrt(gamma2 / eps)                                       otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ConfigError

VARIANCE_ROUNDOFF = 1e-12


class Branch(str, enum.Enum):
    """Which closed form of the safety factor applies."""

    MEAN_AND_SPREAD = "mean_and_spread"
    SPREAD_ONLY = "spread_only"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True, eq=False)
class AmbiguitySet:
    mu0: np.ndarray
    sigma0: np.ndarray
    gamma1: float
    gamma2: float

    def __post_init__(self):
        mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=float))
        sigma0 = np.asarray(self.sigma0, dtype=float).reshape(mu0.size, mu0.size)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "sigma0", sigma0)
        if not self.gamma1 >= 0:
            raise ConfigError("gamma1", f"must be >= 0, got {self.gamma1}")
        if not self.gamma2 >= 1:
            raise ConfigError("gamma2", f"must be >= 1, got {self.gamma2}")
        if not np.allclose(sigma0, sigma0.T, rtol=0, atol=1e-14):
            raise ConfigError("sigma0", "must be symmetric")
        if mu0.size and np.linalg.eigvalsh(sigma0).min() < -1e-10 * max(1.0, np.abs(sigma0).max()):
            raise ConfigError("sigma0", "must be positive semidefinite")

    @property
    def dim(self) -> int:
        return self.mu0.size


def safety_factor(eps: float, amb: AmbiguitySet) -> tuple[float, Branch]:
    """Return ``(k, branch)`` for risk level ``eps`` under ``amb``.

    >>> safety_factor(0.2, AmbiguitySet([0.0], [[1.0]], 0.0, 1.0))
    (2.0, <Branch.MEAN_AND_SPREAD: 'mean_and_spread'>)
    """
    return safety_factor_from(eps, amb.gamma1, amb.gamma2)


def safety_factor_from(eps: float, gamma1: float, gamma2: float) -> tuple[float, Branch]:
    if not 0.0 < eps < 1.0:
        raise ConfigError("eps", f"risk level must lie in (0, 1), got {eps}")
    if gamma1 / gamma2 <= eps:
        return factor_mean_and_spread(eps, gamma1, gamma2), Branch.MEAN_AND_SPREAD
    return factor_spread_only(eps, gamma2), Branch.SPREAD_ONLY


def factor_mean_and_spread(eps: float, gamma1: float, gamma2: float) -> float:
    return math.sqrt(gamma1) + math.sqrt((1.0 - eps) / eps * (gamma2 - gamma1))


def factor_spread_only(eps: float, gamma2: float) -> float:
    return math.sqrt(gamma2 / eps)


def gaussian_factor(eps: float, amb: AmbiguitySet | None = None) -> tuple[float, Branch]:
    """Normal-quantile factor used by the Gaussian-assumption baseline."""
    if not 0.0 < eps < 1.0:
        raise ConfigError("eps", f"risk level must lie in (0, 1), got {eps}")
    return float(norm.ppf(1.0 - eps)), Branch.GAUSSIAN


def boundary_gap(eps: float, gamma2: float) -> tuple[float, float, float]:
    """Evaluate both closed forms at ``gamma1 = eps * gamma2``.

    Returns ``(k_mean_and_spread, k_spread_only, relative difference)``.  The
    two forms are not assumed to agree on the switching surface.
    """
    gamma1 = eps * gamma2
    k_ms = factor_mean_and_spread(eps, gamma1, gamma2)
    k_so = factor_spread_only(eps, gamma2)
    return k_ms, k_so, abs(k_ms - k_so) / k_so


def guarded_sqrt(value: float) -> float:
    if value < 0.0:
        if value < -VARIANCE_ROUNDOFF:
            raise ValueError(f"negative variance {value:.3e}; covariance is not PSD")
        return 0.0
    return math.sqrt(value)


@dataclass(frozen=True, eq=False)
class RobustConstraintSpec:
    """``a(x) = A_w @ x + a0`` (uncertainty coefficients) and ``b(x) = b_x @ x + b0``."""

    A_w: np.ndarray
    a0: np.ndarray
    b_x: np.ndarray
    b0: float
    eps: float


@dataclass(frozen=True, eq=False)
class DeterministicCounterpart:
    """Constraint ``mu0'a(x) + k sqrt(a(x)' sigma0 a(x)) <= b(x)``."""

    spec: RobustConstraintSpec
    amb: AmbiguitySet
    k: float
    branch: Branch

    @property
    def is_linear(self) -> bool:
        """True when ``a`` does not depend on ``x`` (or there is no spread term)."""
        return not np.any(self.spec.A_w) or not np.any(self.amb.sigma0)

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        return self.spec.A_w @ x + self.spec.a0

    def spread(self, x: np.ndarray) -> float:
        a = self.coefficients(x)
        return guarded_sqrt(float(a @ self.amb.sigma0 @ a))

    def lhs(self, x: np.ndarray) -> float:
        a = self.coefficients(x)
        return float(self.amb.mu0 @ a) + self.k * self.spread(x)

    def rhs(self, x: np.ndarray) -> float:
        return float(self.spec.b_x @ x + self.spec.b0)

    def residual(self, x: np.ndarray) -> float:
        """``lhs - rhs``; feasible iff ``<= 0``."""
        return self.lhs(x) - self.rhs(x)


def counterpart(spec: RobustConstraintSpec, amb: AmbiguitySet, factor=safety_factor) -> DeterministicCounterpart:
    A_w = np.atleast_2d(np.asarray(spec.A_w, dtype=float))
    a0 = np.atleast_1d(np.asarray(spec.a0, dtype=float))
    if A_w.shape[0] != amb.dim or a0.size != amb.dim:
        raise ValueError(f"coefficient dimension {a0.size} does not match ambiguity set dimension {amb.dim}")
    if np.atleast_1d(spec.b_x).size != A_w.shape[1]:
        raise ValueError("bound map and coefficient map disagree on decision dimension")
    k, branch = factor(spec.eps, amb)
    fixed = RobustConstraintSpec(A_w, a0, np.atleast_1d(np.asarray(spec.b_x, dtype=float)), float(spec.b0), spec.eps)
    return DeterministicCounterpart(fixed, amb, k, branch)
