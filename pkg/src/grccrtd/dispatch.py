"""Assembly of the robust real-time dispatch as a QCQP over ``x = [p, alpha]``.

Every row has the form ``Q o X + b'x <= c`` (or ``= c``) with ``X = x x'`` and
``A o B = sum_ij A_ij B_ij``.  Only the objective and the squared line-flow
rows carry a nonzero ``Q``.

Per line ``l`` write ``q = m_g' p`` and ``s = m_g' alpha``.  The flow under
wind error ``w`` is ``const(p) + (m_w - s e)' w``, so both flow directions share
the spread term

    V(s) = m_w' S0 m_w - 2 s (e' S0 m_w) + s^2 sum(S0)

and the cone constraints ``k sqrt(V) <= r_pos``, ``k sqrt(V) <= r_neg`` with

    r_pos = T_pos - q + mu_s s,    T_pos = Tbar - m_w'v - m_d'd - mu0'm_w
    r_neg = T_neg + q - mu_s s,    T_neg = Tbar + m_w'v + m_d'd + mu0'm_w

are stored squared (``k^2 V - r^2 <= 0``) together with the linear sign rows
``r >= 0`` that make the squaring exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .drcc import AmbiguitySet, Branch, safety_factor
from .errors import AssemblyError
from .ingest import PowerCase, StudyConfig
from .network import ShiftFactors

log = logging.getLogger(__name__)

GEN_LO, GEN_HI, ADJ_UP, ADJ_DN = "gen_lo", "gen_hi", "adj_up", "adj_dn"
LINE_POS, LINE_NEG = "line_pos", "line_neg"
LINE_POS_SIGN, LINE_NEG_SIGN = "line_pos_sign", "line_neg_sign"
BALANCE, PF_SUM = "balance", "pf_sum"
QUADRATIC_KINDS = (LINE_POS, LINE_NEG)


@dataclass(frozen=True)
class Tag:
    kind: str
    index: int = -1
    k: float = math.nan
    branch: str | None = None

    def __str__(self) -> str:
        return self.kind if self.index < 0 else f"{self.kind}[{self.index}]"


@dataclass(frozen=True, eq=False)
class Row:
    b: np.ndarray
    c: float
    tag: Tag
    Q: np.ndarray | None = None

    def value(self, x: np.ndarray) -> float:
        """``Q o (x x') + b'x - c``."""
        quad = 0.0 if self.Q is None else float(x @ self.Q @ x)
        return quad + float(self.b @ x) - self.c


@dataclass(frozen=True, eq=False)
class QcqpModel:
    n: int
    n_gen: int
    Q0: np.ndarray
    b0: np.ndarray
    c0: float
    ineqs: tuple[Row, ...]
    eqs: tuple[Row, ...]
    lower: np.ndarray
    upper: np.ndarray

    def objective(self, x: np.ndarray) -> float:
        return float(x @ self.Q0 @ x + self.b0 @ x + self.c0)

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[: self.n_gen], x[self.n_gen:]

    @property
    def tags(self) -> tuple[Tag, ...]:
        return tuple(r.tag for r in self.ineqs) + tuple(r.tag for r in self.eqs)


@dataclass(frozen=True, eq=False)
class LineData:
    """Per-line constants for lines with a finite limit."""

    line: int
    m_g: np.ndarray
    m_w: np.ndarray
    t_pos: float
    t_neg: float
    k: float
    branch: str
    var_ww: float
    var_we: float


@dataclass(frozen=True, eq=False)
class ModelAnnotations:
    mu_s: float
    sigma_s: float
    k_gen: np.ndarray
    k_adj: np.ndarray
    gen_branch: tuple[str, ...]
    adj_branch: tuple[str, ...]
    lines: tuple[LineData, ...]
    amb: AmbiguitySet
    sigma_sum: float
    sigma0_factor: np.ndarray
    warnings: tuple[str, ...] = field(default=())


def line_blocks(Q: np.ndarray, n_gen: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a line ``Q`` into its ``(p,p)``, ``(p,alpha)``, ``(alpha,p)``, ``(alpha,alpha)`` blocks."""
    return Q[:n_gen, :n_gen], Q[:n_gen, n_gen:], Q[n_gen:, :n_gen], Q[n_gen:, n_gen:]


def symmetric_factor(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix (negative round-off clipped)."""
    if sigma.size == 0:
        return sigma.copy()
    lam, vec = np.linalg.eigh(sigma)
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T


def ambiguity_from(cfg: StudyConfig) -> AmbiguitySet:
    return AmbiguitySet(cfg.mu0_vector, cfg.sigma0_matrix, cfg.gamma1, cfg.gamma2)


def spread_sum(sigma0: np.ndarray, mode: str) -> float:
    """Variance proxy of the total wind error ``e'w``.

    ``full_covariance`` uses ``e' S0 e``; ``paper_literal`` sums only the
    diagonal.
    """
    if sigma0.size == 0:
        return 0.0
    if mode == "paper_literal":
        return float(np.trace(sigma0))
    if mode == "full_covariance":
        return float(sigma0.sum())
    raise AssemblyError(f"unknown sigma_s_mode {mode!r}")


def assemble(case: PowerCase, sf: ShiftFactors, cfg: StudyConfig, factor=safety_factor,
             sign_cuts: bool = True) -> tuple[QcqpModel, ModelAnnotations]:
    """Build the QCQP and its annotations.

    ``factor(eps, amb) -> (k, branch)`` picks the safety factor for every
    chance constraint; swap it for :func:`grccrtd.drcc.gaussian_factor` to get
    the Gaussian-assumption baseline.
    """
    G, W = case.n_gen, case.n_wind
    if sf.m_g.shape != (case.n_line, G) or sf.m_w.shape != (case.n_line, W):
        raise AssemblyError("shift factors do not match the case dimensions")
    amb = ambiguity_from(cfg)
    if amb.dim != W:
        raise AssemblyError(f"ambiguity set has dimension {amb.dim}, case has {W} wind farms")
    n = 2 * G
    e_w = np.ones(W)
    mu0, S0 = amb.mu0, amb.sigma0
    mu_s = float(mu0.sum())
    sigma_s = spread_sum(S0, cfg.sigma_s_mode)
    root_s = math.sqrt(max(sigma_s, 0.0))
    S_sum = float(S0.sum()) if W else 0.0

    pmin, pmax = case.gen_array("p_min"), case.gen_array("p_max")
    p_up, p_dn = case.gen_array("adj_up"), case.gen_array("adj_down")
    c1, c2, c3 = (case.gen_array(a) for a in ("cost_quadratic", "cost_linear", "cost_const"))

    Q0 = np.zeros((n, n))
    Q0[np.arange(G), np.arange(G)] = c1
    b0 = np.concatenate([c2, np.zeros(G)])
    c0 = float(c3.sum())

    def unit(j: int, coef: float = 1.0) -> np.ndarray:
        v = np.zeros(n)
        v[j] = coef
        return v

    ineqs: list[Row] = []
    k_gen, k_adj, gbr, abr = np.zeros(G), np.zeros(G), [], []
    for i in range(G):
        k1, br1 = factor(cfg.eps_gen[i], amb)
        k2, br2 = factor(cfg.eps_adj[i], amb)
        k_gen[i], k_adj[i] = k1, k2
        gbr.append(Branch(br1).value)
        abr.append(Branch(br2).value)
        # gen_lo:  (mu_s + k1 rs) a_i - p_i <= -pmin
        b = unit(G + i, mu_s + k1 * root_s)
        b[i] = -1.0
        ineqs.append(Row(b, -pmin[i], Tag(GEN_LO, i, k1, gbr[-1])))
        b = unit(G + i, -mu_s + k1 * root_s)
        b[i] = 1.0
        ineqs.append(Row(b, pmax[i], Tag(GEN_HI, i, k1, gbr[-1])))
        ineqs.append(Row(unit(G + i, mu_s + k2 * root_s), p_up[i], Tag(ADJ_UP, i, k2, abr[-1])))
        ineqs.append(Row(unit(G + i, -mu_s + k2 * root_s), -p_dn[i], Tag(ADJ_DN, i, k2, abr[-1])))

    v, d = case.wind_forecast, case.load_vector
    limits = case.flow_limits
    lines: list[LineData] = []
    for l in range(case.n_line):
        if not math.isfinite(limits[l]):
            continue
        k, br = factor(cfg.eps_line[l], amb)
        m_g, m_w, m_d = sf.m_g[l], sf.m_w[l], sf.m_d[l]
        base_flow = float(m_w @ v + m_d @ d)
        t_pos = limits[l] - base_flow - float(mu0 @ m_w)
        t_neg = limits[l] + base_flow + float(mu0 @ m_w)
        var_ww = float(m_w @ S0 @ m_w) if W else 0.0
        var_we = float(e_w @ S0 @ m_w) if W else 0.0
        data = LineData(l, m_g.copy(), m_w.copy(), t_pos, t_neg, k, Branch(br).value, var_ww, var_we)
        lines.append(data)

        mm = np.outer(m_g, m_g)
        Q = np.empty((n, n))
        Q[:G, :G] = -mm
        Q[:G, G:] = mu_s * mm
        Q[G:, :G] = mu_s * mm
        Q[G:, G:] = (k * k * S_sum - mu_s * mu_s) * mm
        kk = k * k
        b_pos = np.concatenate([2.0 * t_pos * m_g, (-2.0 * kk * var_we - 2.0 * t_pos * mu_s) * m_g])
        b_neg = np.concatenate([-2.0 * t_neg * m_g, (-2.0 * kk * var_we + 2.0 * t_neg * mu_s) * m_g])
        ineqs.append(Row(b_pos, t_pos * t_pos - kk * var_ww, Tag(LINE_POS, l, k, data.branch), Q))
        ineqs.append(Row(b_neg, t_neg * t_neg - kk * var_ww, Tag(LINE_NEG, l, k, data.branch), Q))
        if sign_cuts:
            ineqs.append(Row(np.concatenate([m_g, -mu_s * m_g]), t_pos, Tag(LINE_POS_SIGN, l, k, data.branch)))
            ineqs.append(Row(np.concatenate([-m_g, mu_s * m_g]), t_neg, Tag(LINE_NEG_SIGN, l, k, data.branch)))

    eqs = (
        Row(np.concatenate([np.ones(G), np.zeros(G)]), float(d.sum() - v.sum()), Tag(BALANCE)),
        Row(np.concatenate([np.zeros(G), np.ones(G)]), 1.0, Tag(PF_SUM)),
    )
    lower = np.concatenate([pmin, np.zeros(G)])
    upper = np.concatenate([pmax, np.ones(G)])

    warnings = _feasibility_hints(case, mu_s, root_s, k_gen, k_adj, pmin, pmax, p_up, p_dn, d, v)
    for msg in warnings:
        log.warning(msg)

    model = QcqpModel(n, G, Q0, b0, c0, tuple(ineqs), eqs, lower, upper)
    ann = ModelAnnotations(mu_s, sigma_s, k_gen, k_adj, tuple(gbr), tuple(abr), tuple(lines), amb,
                           S_sum, symmetric_factor(S0), tuple(warnings))
    return model, ann


def _feasibility_hints(case, mu_s, root_s, k_gen, k_adj, pmin, pmax, p_up, p_dn, d, v) -> list[str]:
    hints = []
    if pmax.sum() + v.sum() < d.sum():
        hints.append(f"total capacity {pmax.sum() + v.sum():.4f} pu is below load {d.sum():.4f} pu")
    if pmin.sum() + v.sum() > d.sum():
        hints.append(f"minimum generation {pmin.sum() + v.sum():.4f} pu exceeds load {d.sum():.4f} pu")
    alpha_cap = np.ones(case.n_gen)
    for i in range(case.n_gen):
        for coef, room in ((mu_s + k_adj[i] * root_s, p_up[i]), (-mu_s + k_adj[i] * root_s, -p_dn[i])):
            if coef > 0:
                alpha_cap[i] = min(alpha_cap[i], room / coef)
        spread = 2.0 * k_gen[i] * root_s
        if spread > 0:
            alpha_cap[i] = min(alpha_cap[i], (pmax[i] - pmin[i]) / spread)
    if alpha_cap.sum() < 1.0:
        hints.append(f"participation factors can reach at most {alpha_cap.sum():.4f} in total "
                     "under the adjustment and generation limits")
    return hints
