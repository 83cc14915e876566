"""Independent reference computations used by the tests.

Nothing here goes through the PTDF, assembly or lifting code of the package.
"""

import math

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve


def direct_dc_flows(case, injection, slack=None):
    """Branch flows from a full DC solve: B theta = injection, theta_slack = 0."""
    slack = case.slack_bus if slack is None else slack
    ids = [b.id for b in case.buses]
    pos = {b: k for k, b in enumerate(ids)}
    rows, cols, vals = [], [], []
    for br in case.branches:
        i, j, y = pos[br.from_bus], pos[br.to_bus], 1.0 / br.reactance
        rows += [i, j, i, j]
        cols += [i, j, j, i]
        vals += [y, y, -y, -y]
    B = sp.csr_matrix((vals, (rows, cols)), shape=(len(ids), len(ids)))
    keep = [k for k in range(len(ids)) if ids[k] != slack]
    theta = np.zeros(len(ids))
    theta[keep] = spsolve(B[keep][:, keep].tocsc(), np.asarray(injection, dtype=float)[keep])
    return np.array([(theta[pos[br.from_bus]] - theta[pos[br.to_bus]]) / br.reactance
                     for br in case.branches])


def unit_sensitivities(case, buses, slack=None):
    """Columns of flow change per unit injection at each bus in ``buses``."""
    pos = {b.id: k for k, b in enumerate(case.buses)}
    out = np.zeros((case.n_line, len(buses)))
    for c, bus in enumerate(buses):
        inj = np.zeros(case.n_bus)
        inj[pos[bus]] = 1.0
        out[:, c] = direct_dc_flows(case, inj, slack)
    return out


def safety_factor_oracle(eps, g1, g2):
    if g1 <= eps * g2:
        return math.sqrt(g1) + math.sqrt((1 - eps) * (g2 - g1) / eps)
    return math.sqrt(g2 / eps)


def objective_direct(case, x):
    G = case.n_gen
    p = x[:G]
    return sum(g.cost_quadratic * pi * pi + g.cost_linear * pi + g.cost_const
               for g, pi in zip(case.generators, p))


def line_residuals_direct(case, cfg, x, slack=None):
    """Squared chance-constraint residuals for every rated line.

    Returns ``{line: (pos, neg)}`` with ``k^2 a'S a - (rhs)^2`` where the flow
    under error ``w`` is ``base + a'w``.
    """
    G = case.n_gen
    p, alpha = x[:G], x[G:]
    mu0 = np.asarray(cfg.mu0, dtype=float)
    S0 = np.asarray(cfg.sigma0, dtype=float)
    m_g = unit_sensitivities(case, [g.bus for g in case.generators], slack)
    m_w = unit_sensitivities(case, [w.bus for w in case.wind_farms], slack)
    inj = np.zeros(case.n_bus)
    pos = {b.id: k for k, b in enumerate(case.buses)}
    for w in case.wind_farms:
        inj[pos[w.bus]] += w.forecast
    inj -= np.asarray(case.loads)
    base_no_gen = direct_dc_flows(case, inj, slack)
    out = {}
    for l, br in enumerate(case.branches):
        if not math.isfinite(br.flow_limit):
            continue
        k = safety_factor_oracle(cfg.eps_line[l], cfg.gamma1, cfg.gamma2)
        s = float(m_g[l] @ alpha)
        a = m_w[l] - s
        base = base_no_gen[l] + float(m_g[l] @ p)
        var = float(a @ S0 @ a)
        mean = float(mu0 @ a)
        r_pos = br.flow_limit - base - mean
        r_neg = br.flow_limit + base + mean
        out[l] = (k * k * var - r_pos * r_pos, k * k * var - r_neg * r_neg)
    return out


def dc_dispatch_cost(case):
    """Optimal cost of the deterministic DC dispatch in angle form (wind at forecast)."""
    pos = {b.id: k for k, b in enumerate(case.buses)}
    p = cp.Variable(case.n_gen)
    theta = cp.Variable(case.n_bus)
    inj = -np.asarray(case.loads, dtype=float)
    for w in case.wind_farms:
        inj[pos[w.bus]] += w.forecast
    gen_at = np.zeros((case.n_bus, case.n_gen))
    for i, g in enumerate(case.generators):
        gen_at[pos[g.bus], i] = 1.0
    flows = []
    for br in case.branches:
        flows.append((theta[pos[br.from_bus]] - theta[pos[br.to_bus]]) / br.reactance)
    net = [0] * case.n_bus
    for (br, f) in zip(case.branches, flows):
        net[pos[br.from_bus]] = net[pos[br.from_bus]] + f
        net[pos[br.to_bus]] = net[pos[br.to_bus]] - f
    cons = [theta[pos[case.slack_bus]] == 0]
    cons += [net[b] == gen_at[b] @ p + inj[b] for b in range(case.n_bus)]
    cons += [p >= [g.p_min for g in case.generators], p <= [g.p_max for g in case.generators]]
    for br, f in zip(case.branches, flows):
        if math.isfinite(br.flow_limit):
            cons += [f <= br.flow_limit, f >= -br.flow_limit]
    c2 = np.array([g.cost_quadratic for g in case.generators])
    c1 = np.array([g.cost_linear for g in case.generators])
    c0 = sum(g.cost_const for g in case.generators)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.multiply(c2, cp.square(p))) + c1 @ p + c0), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
    assert prob.status == cp.OPTIMAL, prob.status
    return float(prob.value)


def in_ambiguity_set(mu, sigma, mu0, sigma0, gamma1, gamma2, tol=1e-9):
    """Both moment conditions via Cholesky-free least squares and eigenvalues."""
    delta = np.asarray(mu, dtype=float) - np.asarray(mu0, dtype=float)
    sol, *_ = np.linalg.lstsq(sigma0, delta, rcond=None)
    if np.linalg.norm(sigma0 @ sol - delta) > 1e-10:
        return False
    mean_ok = float(delta @ sol) <= gamma1 + tol
    M = np.asarray(sigma) + np.outer(delta, delta)
    cov_ok = np.linalg.eigvalsh(gamma2 * np.asarray(sigma0) - M).min() >= -tol
    return bool(mean_ok and cov_ok)
