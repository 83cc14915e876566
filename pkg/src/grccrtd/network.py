"""DC power-flow injection shift factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import NetworkError
from .ingest import PowerCase


@dataclass(frozen=True, eq=False)
class ShiftFactors:
    """Line-flow sensitivities, positive in each branch's from->to direction.

    ``ptdf[l, b]`` is the flow on line ``l`` per unit injected at bus ``b`` and
    withdrawn at the slack.  ``m_g``/``m_w`` pick generator/wind columns of it;
    ``m_d`` is its negation since loads withdraw power, so that

        flow = m_g @ p + m_w @ (v + w) + m_d @ d
    """

    ptdf: np.ndarray
    m_g: np.ndarray
    m_w: np.ndarray
    m_d: np.ndarray
    slack_bus: int


def incidence(case: PowerCase) -> np.ndarray:
    """Branch-bus incidence, +1 at the from end and -1 at the to end."""
    idx = case.bus_index
    A = np.zeros((case.n_line, case.n_bus))
    for k, br in enumerate(case.branches):
        A[k, idx[br.from_bus]] = 1.0
        A[k, idx[br.to_bus]] = -1.0
    return A


def check_connected(case: PowerCase) -> None:
    idx = case.bus_index
    rows = [idx[br.from_bus] for br in case.branches]
    cols = [idx[br.to_bus] for br in case.branches]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(case.n_bus, case.n_bus))
    n_comp, labels = connected_components(graph, directed=False)
    if n_comp > 1:
        slack = labels[idx[case.slack_bus]]
        islanded = [b.id for b, lab in zip(case.buses, labels) if lab != slack]
        raise NetworkError(f"network is disconnected; buses {islanded[:10]} are islanded from the slack")


def build_ptdf(case: PowerCase, slack: int | None = None) -> np.ndarray:
    """Dense PTDF (lines x buses) from the reduced susceptance matrix."""
    slack = case.slack_bus if slack is None else slack
    idx = case.bus_index
    if slack not in idx:
        raise NetworkError(f"unknown slack bus {slack}")
    check_connected(case)
    A = incidence(case)
    b = np.array([1.0 / br.reactance for br in case.branches])
    B = A.T @ (b[:, None] * A)
    keep = np.array([k for k in range(case.n_bus) if k != idx[slack]], dtype=int)
    Br = B[np.ix_(keep, keep)]
    try:
        Br_inv = np.linalg.inv(Br)
    except np.linalg.LinAlgError:
        raise NetworkError("reduced susceptance matrix is singular") from None
    ptdf = np.zeros((case.n_line, case.n_bus))
    ptdf[:, keep] = (b[:, None] * A[:, keep]) @ Br_inv
    return ptdf


def build_shift_factors(case: PowerCase, slack: int | None = None) -> ShiftFactors:
    slack = case.slack_bus if slack is None else slack
    ptdf = build_ptdf(case, slack)
    idx = case.bus_index
    gcols = [idx[g.bus] for g in case.generators]
    wcols = [idx[w.bus] for w in case.wind_farms]
    return ShiftFactors(
        ptdf=ptdf,
        m_g=ptdf[:, gcols],
        m_w=ptdf[:, wcols] if wcols else np.zeros((case.n_line, 0)),
        m_d=-ptdf,
        slack_bus=slack,
    )


def bus_injections(case: PowerCase, p: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Net injection per bus for dispatch ``p`` and wind realisation ``v + w``."""
    idx = case.bus_index
    inj = -case.load_vector
    np.add.at(inj, [idx[g.bus] for g in case.generators], p)
    if case.n_wind:
        wind = case.wind_forecast + (0.0 if w is None else w)
        np.add.at(inj, [idx[f.bus] for f in case.wind_farms], wind)
    return inj
