"""End-to-end runs: ingest -> shift factors -> assemble -> (lift) -> solve -> certify."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .dispatch import ModelAnnotations, QcqpModel, assemble
from .drcc import gaussian_factor, safety_factor
from .errors import ConfigError
from .ingest import PowerCase, StudyConfig, WindFarm, apply_config, load_case, load_config
from .network import ShiftFactors, build_shift_factors
from .rlt import LiftedLp, lift
from .solvers import CertificationReport, SolveResult, certify, solve_cone_reference, solve_lifted

RLT, CONE = "rlt", "cone"
FIXTURES = ("case3", "case5", "case14", "case118")

# Benchmark model variants: (name, gamma1, gamma2, factor rule, zero moments)
VARIANTS = {
    "risk_neutral": (None, None, "theorem", True),
    "gaussian": (None, None, "gaussian", False),
    "grcc1": (0.0, 1.0, "theorem", False),
    "grcc2": (0.1, 1.1, "theorem", False),
    "grcc3": (0.2, 1.1, "theorem", False),
}


@dataclass(frozen=True, eq=False)
class Study:
    case: PowerCase
    cfg: StudyConfig
    sf: ShiftFactors
    factor_rule: str = "theorem"


@dataclass(frozen=True, eq=False)
class RunResult:
    study: Study
    model: QcqpModel
    ann: ModelAnnotations
    result: SolveResult
    certification: CertificationReport | None
    formulation: str
    timings: dict[str, float]
    lp: LiftedLp | None = None

    @property
    def objective(self) -> float | None:
        return self.result.objective

    @property
    def dispatch(self) -> tuple[np.ndarray, np.ndarray]:
        return self.model.split(self.result.x_star)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture, e.g. ``fixture_path("case118.m")``."""
    return Path(str(resources.files("grccrtd") / "data" / name))


def fixture_files(name: str) -> tuple[Path, Path]:
    case_file = fixture_path(f"{name}.yaml" if name == "case3" else f"{name}.m")
    return case_file, fixture_path(f"config{name[4:]}.yaml")


def make_study(case: PowerCase, cfg: StudyConfig, factor_rule: str = "theorem") -> Study:
    merged = apply_config(case, cfg)
    sf = build_shift_factors(merged, cfg.slack_bus)
    return Study(merged, cfg, sf, factor_rule)


def load_study(case_path, config_path=None, **overrides) -> Study:
    from .ingest import parse_config

    case = load_case(case_path)
    cfg = load_config(config_path, case) if config_path else parse_config("", case)
    if overrides:
        cfg = replace(cfg, **overrides)
    return make_study(case, cfg)


def load_fixture(name: str, **overrides) -> Study:
    return load_study(*fixture_files(name), **overrides)


def with_config(study: Study, factor_rule: str | None = None, **changes) -> Study:
    cfg = replace(study.cfg, **changes)
    rule = study.factor_rule if factor_rule is None else factor_rule
    return Study(study.case, cfg, study.sf, rule)


def variant(study: Study, name: str) -> Study:
    """Study configured as one of the benchmark variants in :data:`VARIANTS`."""
    g1, g2, rule, zero = VARIANTS[name]
    changes = {}
    if g1 is not None:
        changes.update(gamma1=g1, gamma2=g2)
    if zero:
        nw = study.case.n_wind
        changes.update(mu0=(0.0,) * nw, sigma0=tuple((0.0,) * nw for _ in range(nw)))
    return with_config(study, factor_rule=rule, **changes)


def grow_wind_farms(study: Study, count: int) -> Study:
    """Study with ``count`` wind farms, adding farms at ``cfg.extra_wind_buses``.

    Each added farm gets the mean forecast and mean error variance of the
    configured farms, a zero mean error and no correlation with the others.
    """
    cfg, case = study.cfg, study.case
    base = case.wind_farms
    if count < len(base):
        raise ConfigError("wind_farms", f"cannot shrink {len(base)} farms to {count}")
    extra = count - len(base)
    if extra > len(cfg.extra_wind_buses):
        raise ConfigError("extra_wind_buses",
                          f"{extra} more farms requested, only {len(cfg.extra_wind_buses)} buses listed")
    if extra == 0:
        return study
    S0 = cfg.sigma0_matrix
    forecast = float(np.mean([w.forecast for w in base])) if base else 0.0
    var = float(np.mean(np.diag(S0))) if base else 0.0
    farms = base + tuple(WindFarm(b, forecast) for b in cfg.extra_wind_buses[:extra])
    sigma = np.zeros((count, count))
    sigma[:len(base), :len(base)] = S0
    sigma[np.arange(len(base), count), np.arange(len(base), count)] = var
    new_cfg = replace(cfg, wind_farms=farms, mu0=tuple(cfg.mu0) + (0.0,) * extra,
                      sigma0=tuple(tuple(float(v) for v in row) for row in sigma))
    return make_study(case, new_cfg, study.factor_rule)


def build_model(study: Study) -> tuple[QcqpModel, ModelAnnotations]:
    factor = gaussian_factor if study.factor_rule == "gaussian" else safety_factor
    return assemble(study.case, study.sf, study.cfg, factor=factor, sign_cuts=study.cfg.solver.sign_cuts)


def run(study: Study, formulation: str = RLT, certify_tol: float = 1e-6) -> RunResult:
    timings = {}
    t0 = time.perf_counter()
    model, ann = build_model(study)
    timings["assemble"] = time.perf_counter() - t0
    lp = None
    opts = study.cfg.solver
    if formulation == RLT:
        t0 = time.perf_counter()
        lp = lift(model, dedupe_diagonal=opts.dedupe_diagonal)
        timings["lift"] = time.perf_counter() - t0
        result = solve_lifted(lp, opts)
    elif formulation == CONE:
        result = solve_cone_reference(model, ann, opts)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    timings["solve"] = result.solve_time
    cert = certify(result.x_star, model, certify_tol) if result.optimal else None
    return RunResult(study, model, ann, result, cert, formulation, timings, lp)
