"""Out-of-sample violation frequencies of a dispatch under sampled wind errors.

A dispatch ``x = [p, alpha]`` reacts to the total wind error ``s = e'w`` by
moving generator ``i`` to ``p_i - alpha_i s``.  For each sample the events are

    gen[i]   pmin_i <= p_i - alpha_i s <= pmax_i
    adj[i]   adj_down_i <= alpha_i s <= adj_up_i
    line[l]  |m_g'(p - alpha s) + m_w'(v + w) + m_d'd| <= Tbar_l   (rated lines)

and the report holds the fraction of samples violating each of them.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dispatch import symmetric_factor
from .drcc import AmbiguitySet
from .errors import ConfigError
from .ingest import PowerCase
from .network import ShiftFactors

GAUSSIAN, LAPLACE, LOGISTIC = "gaussian", "laplace", "logistic"
FAMILIES = (GAUSSIAN, LAPLACE, LOGISTIC)

# Marginal scales giving unit variance: Var(Laplace(b)) = 2 b^2, Var(Logistic(s)) = s^2 pi^2 / 3.
LAPLACE_SCALE = 1.0 / math.sqrt(2.0)
LOGISTIC_SCALE = math.sqrt(3.0) / math.pi

CHUNK = 2048
WORKERS_ENV = "GRCC_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    family: str
    true_mu: np.ndarray
    true_sigma: np.ndarray
    samples: np.ndarray
    seed: int | None

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]


def standard_marginals(family: str, rng: np.random.Generator, size: tuple[int, int]) -> np.ndarray:
    """I.i.d. zero-mean, unit-variance draws from ``family``."""
    if family == GAUSSIAN:
        return rng.standard_normal(size)
    if family == LAPLACE:
        return rng.laplace(0.0, LAPLACE_SCALE, size)
    if family == LOGISTIC:
        return rng.logistic(0.0, LOGISTIC_SCALE, size)
    raise ConfigError("family", f"unknown distribution family {family!r}; choose from {', '.join(FAMILIES)}")


def _check_psd(sigma: np.ndarray) -> None:
    if sigma.size == 0:
        return
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
        raise ConfigError("sigma", "covariance must be symmetric")
    if np.linalg.eigvalsh(sigma).min() < -1e-10 * max(1.0, np.abs(sigma).max()):
        raise ConfigError("sigma", "covariance must be positive semidefinite")


def sample_scenarios(family: str, mu, sigma, n: int, seed: int | None) -> ScenarioSet:
    """Draw ``n`` wind-error vectors with mean ``mu`` and covariance ``sigma``.

    Standardized marginals are correlated through the symmetric square root of
    ``sigma``, so all three families share the first two moments.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.asarray(sigma, dtype=float).reshape(mu.size, mu.size)
    if n < 1:
        raise ConfigError("samples", f"need at least one sample, got {n}")
    _check_psd(sigma)
    rng = np.random.default_rng(seed)
    z = standard_marginals(family, rng, (n, mu.size))
    samples = z @ symmetric_factor(sigma) + mu
    return ScenarioSet(family, mu, sigma, samples, seed)


def event_labels(case: PowerCase) -> tuple[str, ...]:
    rated = np.flatnonzero(np.isfinite(case.flow_limits))
    return (tuple(f"gen[{i}]" for i in range(case.n_gen))
            + tuple(f"adj[{i}]" for i in range(case.n_gen))
            + tuple(f"line[{l}]" for l in rated))


def _count_chunk(w: np.ndarray, p, alpha, pmin, pmax, dn, up, base, m_g, m_w, limits) -> np.ndarray:
    s = w.sum(axis=1)
    adj = np.outer(s, alpha)
    gen = p - adj
    flow = base + (m_g @ gen.T).T + w @ m_w.T
    gen_bad = (gen < pmin) | (gen > pmax)
    adj_bad = (adj < dn) | (adj > up)
    line_bad = np.abs(flow) > limits
    return np.concatenate([gen_bad.sum(axis=0), adj_bad.sum(axis=0), line_bad.sum(axis=0)])


@dataclass(frozen=True, eq=False)
class RiskReport:
    labels: tuple[str, ...]
    counts: np.ndarray
    n_samples: int
    family: str
    seed: int | None

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.n_samples

    @property
    def std_errors(self) -> np.ndarray:
        prob = self.probabilities
        return np.sqrt(prob * (1.0 - prob) / self.n_samples)

    @property
    def max_violation(self) -> float:
        return float(self.probabilities.max()) if self.counts.size else 0.0

    @property
    def worst(self) -> str | None:
        return self.labels[int(np.argmax(self.counts))] if self.counts.size else None

    @property
    def worst_std_error(self) -> float:
        return float(self.std_errors[int(np.argmax(self.counts))]) if self.counts.size else 0.0

    def probability(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def as_dict(self) -> dict:
        return {
            "family": self.family, "seed": self.seed, "n_samples": self.n_samples,
            "max_violation": self.max_violation, "worst": self.worst,
            "worst_std_error": self.worst_std_error,
            "events": {lab: {"violations": int(c), "probability": float(c) / self.n_samples}
                       for lab, c in zip(self.labels, self.counts)},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["event", "violations", "probability", "std_error"])
        for lab, c, prob, se in zip(self.labels, self.counts, self.probabilities, self.std_errors):
            out.writerow([lab, int(c), repr(float(prob)), repr(float(se))])
        return buf.getvalue()


def estimate_risk(x: np.ndarray, scenarios: ScenarioSet, case: PowerCase, sf: ShiftFactors,
                  workers: int | None = None) -> RiskReport:
    """Count per-event violations of dispatch ``x`` over ``scenarios``.

    Samples are split into fixed chunks, so counts do not depend on ``workers``.
    """
    G = case.n_gen
    x = np.asarray(x, dtype=float)
    if x.size != 2 * G:
        raise ValueError(f"dispatch has dimension {x.size}, case needs {2 * G}")
    w = scenarios.samples
    if w.shape[1] != case.n_wind:
        raise ValueError(f"scenarios have {w.shape[1]} wind farms, case has {case.n_wind}")
    if sf.m_g.shape != (case.n_line, G):
        raise ValueError("shift factors do not match the case")
    p, alpha = x[:G], x[G:]
    rated = np.isfinite(case.flow_limits)
    m_g, m_w = sf.m_g[rated], sf.m_w[rated]
    base = m_w @ case.wind_forecast + sf.m_d[rated] @ case.load_vector
    args = (p, alpha, case.gen_array("p_min"), case.gen_array("p_max"), case.gen_array("adj_down"),
            case.gen_array("adj_up"), base, m_g, m_w, case.flow_limits[rated])
    chunks = [w[i:i + CHUNK] for i in range(0, w.shape[0], CHUNK)]
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_count_chunk(c, *args) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _count_chunk(c, *args), chunks))
    counts = np.sum(parts, axis=0).astype(np.int64)
    return RiskReport(event_labels(case), counts, w.shape[0], scenarios.family, scenarios.seed)


def perturb_moments(amb: AmbiguitySet, direction="random", seed: int | None = None,
                    radius: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return true moments ``(mu, sigma)`` inside the ambiguity set.

    ``mu = mu0 + F t`` with ``F`` the symmetric root of ``sigma0``,
    ``t = radius * direction`` and ``radius`` defaulting to ``sqrt(gamma1)``
    (the ellipsoid boundary).  Since ``F t t' F <= radius^2 sigma0``, the
    covariance ``(gamma2 - radius^2) sigma0`` keeps the centred second moment
    within ``gamma2 sigma0``.

    Args:
        amb: Ambiguity set.
        direction: Unit vector, or ``"random"`` for a seeded uniform direction.
        seed: Seed for the random direction.
        radius: Norm of ``t``; must not exceed ``sqrt(gamma1)``.
    """
    dim = amb.dim
    if isinstance(direction, str):
        if direction != "random":
            raise ConfigError("direction", f"expected a vector or 'random', got {direction!r}")
        d = np.random.default_rng(seed).standard_normal(dim)
    else:
        d = np.atleast_1d(np.asarray(direction, dtype=float))
        if d.size != dim:
            raise ConfigError("direction", f"has dimension {d.size}, expected {dim}")
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ConfigError("direction", "must be nonzero")
    d = d / norm
    cap = math.sqrt(amb.gamma1)
    if radius is None:
        radius = cap
    if radius < 0:
        raise ConfigError("radius", f"must be >= 0, got {radius}")
    if amb.gamma1 == 0.0 and radius > 0.0:
        raise ConfigError("radius", "gamma1 = 0 admits no mean shift")
    if radius > cap * (1.0 + 1e-12):
        raise ConfigError("radius", f"{radius} exceeds sqrt(gamma1) = {cap}")
    mu = amb.mu0 + symmetric_factor(amb.sigma0) @ (radius * d)
    sigma = (amb.gamma2 - radius * radius) * amb.sigma0
    return mu, sigma


def moment_membership(mu, sigma, amb: AmbiguitySet) -> tuple[float, float]:
    """Slacks of the two moment conditions at true moments ``(mu, sigma)``.

    Returns ``(gamma1 - mean distance, min eigenvalue of gamma2 sigma0 - M)``
    where ``M = sigma + (mu - mu0)(mu - mu0)'``; both are ``>= 0`` inside the
    set.  A shift outside the range of ``sigma0`` has infinite distance.
    """
    delta = np.atleast_1d(np.asarray(mu, dtype=float)) - amb.mu0
    sigma = np.asarray(sigma, dtype=float).reshape(amb.dim, amb.dim)
    lam, vec = np.linalg.eigh(amb.sigma0)
    coords = vec.T @ delta
    tol = 1e-12 * max(1.0, float(lam.max(initial=0.0)))
    pos = lam > tol
    if np.any(np.abs(coords[~pos]) > 1e-12):
        dist = math.inf
    else:
        dist = float(np.sum(coords[pos] ** 2 / lam[pos]))
    second = amb.gamma2 * amb.sigma0 - sigma - np.outer(delta, delta)
    eig = float(np.linalg.eigvalsh(second).min()) if amb.dim else 0.0
    return amb.gamma1 - dist, eig
