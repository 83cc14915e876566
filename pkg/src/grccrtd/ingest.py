"""Case and study-configuration ingest.

Two case formats are accepted:

* a MATPOWER subset (``mpc.baseMVA``, ``mpc.bus``, ``mpc.gen``, ``mpc.branch``,
  ``mpc.gencost``), and
* a native YAML document that additionally carries wind farms and
  generator adjustment limits.

Everything is converted to per-unit on ``base_mva`` on the way in.  The study
configuration is always YAML; its schema is documented in the README.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .errors import CaseError, ConfigError, ParseError

SLACK, PV, PQ = "slack", "PV", "PQ"
_MATPOWER_BUS_TYPES = {1: PQ, 2: PV, 3: SLACK}
SIGMA_S_MODES = ("full_covariance", "paper_literal")

DEFAULT_EPS = 0.2
DEFAULT_GAMMA1 = 0.1
DEFAULT_GAMMA2 = 1.1
DEFAULT_ADJ_FRACTION = 0.1


@dataclass(frozen=True)
class Bus:
    id: int
    type: str = PQ


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    reactance: float
    flow_limit: float = math.inf


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    adj_down: float
    adj_up: float
    cost_quadratic: float = 0.0
    cost_linear: float = 0.0
    cost_const: float = 0.0


@dataclass(frozen=True)
class WindFarm:
    bus: int
    forecast: float


@dataclass(frozen=True)
class PowerCase:
    """Validated network data, all power quantities in per-unit."""

    name: str
    base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    loads: tuple[float, ...]
    wind_farms: tuple[WindFarm, ...] = ()

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_gen(self) -> int:
        return len(self.generators)

    @property
    def n_line(self) -> int:
        return len(self.branches)

    @property
    def n_wind(self) -> int:
        return len(self.wind_farms)

    @property
    def bus_index(self) -> dict[int, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    @property
    def slack_bus(self) -> int:
        return next(b.id for b in self.buses if b.type == SLACK)

    def gen_array(self, attr: str) -> np.ndarray:
        return np.array([getattr(g, attr) for g in self.generators], dtype=float)

    @property
    def load_vector(self) -> np.ndarray:
        return np.asarray(self.loads, dtype=float)

    @property
    def wind_forecast(self) -> np.ndarray:
        return np.array([w.forecast for w in self.wind_farms], dtype=float)

    @property
    def flow_limits(self) -> np.ndarray:
        return np.array([br.flow_limit for br in self.branches], dtype=float)

    def with_wind_farms(self, farms: Sequence[WindFarm]) -> PowerCase:
        out = replace(self, wind_farms=tuple(farms))
        validate_case(out)
        return out


@dataclass(frozen=True)
class SolverOptions:
    lp_backend: str = "highs"
    lp_tolerance: float = 1e-8
    cone_tolerance: float = 1e-9
    time_limit: float = 600.0
    dedupe_diagonal: bool = True
    sign_cuts: bool = True


@dataclass(frozen=True)
class StudyConfig:
    """Risk levels, ambiguity-set moments and solver settings for one study.

    Vectors are stored as tuples so that instances compare field-wise.
    """

    eps_gen: tuple[float, ...]
    eps_adj: tuple[float, ...]
    eps_line: tuple[float, ...]
    gamma1: float = DEFAULT_GAMMA1
    gamma2: float = DEFAULT_GAMMA2
    mu0: tuple[float, ...] = ()
    sigma0: tuple[tuple[float, ...], ...] = ()
    sigma_s_mode: str = "full_covariance"
    slack_bus: int | None = None
    wind_farms: tuple[WindFarm, ...] | None = None
    adj_up: tuple[float, ...] | None = None
    adj_down: tuple[float, ...] | None = None
    extra_wind_buses: tuple[int, ...] = ()
    solver: SolverOptions = field(default_factory=SolverOptions)

    @property
    def mu0_vector(self) -> np.ndarray:
        return np.asarray(self.mu0, dtype=float)

    @property
    def sigma0_matrix(self) -> np.ndarray:
        n = len(self.mu0)
        return np.asarray(self.sigma0, dtype=float).reshape(n, n)


# ---------------------------------------------------------------------------
# validation


def validate_case(case: PowerCase) -> None:
    ids = [b.id for b in case.buses]
    if len(set(ids)) != len(ids):
        raise CaseError("buses", "duplicate bus ids")
    slacks = [b.id for b in case.buses if b.type == SLACK]
    if not slacks:
        raise CaseError("buses", "missing slack bus")
    if len(slacks) > 1:
        raise CaseError("buses", f"multiple slack buses {slacks}")
    for k, b in enumerate(case.buses):
        if b.type not in (SLACK, PV, PQ):
            raise CaseError(f"buses[{k}].type", f"unknown bus type {b.type!r}")
    known = set(ids)
    if case.base_mva <= 0:
        raise CaseError("base_mva", "must be positive")
    if len(case.loads) != len(case.buses):
        raise CaseError("loads", "one load entry per bus required")
    for k, br in enumerate(case.branches):
        for end in ("from_bus", "to_bus"):
            if getattr(br, end) not in known:
                raise CaseError(f"branches[{k}].{end}", f"unknown bus {getattr(br, end)}")
        if br.from_bus == br.to_bus:
            raise CaseError(f"branches[{k}]", "self loop")
        if not br.reactance > 0:
            raise CaseError(f"branches[{k}].reactance", f"must be > 0, got {br.reactance}")
        if not br.flow_limit > 0:
            raise CaseError(f"branches[{k}].flow_limit", f"must be > 0, got {br.flow_limit}")
    for k, g in enumerate(case.generators):
        if g.bus not in known:
            raise CaseError(f"generators[{k}].bus", f"unknown bus {g.bus}")
        if not g.p_min <= g.p_max:
            raise CaseError(f"generators[{k}].p_min", "p_min exceeds p_max")
        if not math.isfinite(g.p_min) or not math.isfinite(g.p_max):
            raise CaseError(f"generators[{k}]", "generation limits must be finite")
        if g.adj_down > 0:
            raise CaseError(f"generators[{k}].adj_down", "must be <= 0")
        if g.adj_up < 0:
            raise CaseError(f"generators[{k}].adj_up", "must be >= 0")
        if g.cost_quadratic < 0:
            raise CaseError(f"generators[{k}].cost_quadratic", "must be >= 0 (convex cost)")
    for k, w in enumerate(case.wind_farms):
        if w.bus not in known:
            raise CaseError(f"wind_farms[{k}].bus", f"unknown bus {w.bus}")


def _check_eps(name: str, values: Sequence[float]) -> None:
    for k, e in enumerate(values):
        if not 0.0 < e < 1.0:
            raise ConfigError(f"{name}[{k}]", f"risk level must lie in (0, 1), got {e}")


def validate_config(cfg: StudyConfig, case: PowerCase) -> None:
    """Check dimensions of ``cfg`` against ``case`` (after wind/adjustment merge)."""
    _check_eps("eps_gen", cfg.eps_gen)
    _check_eps("eps_adj", cfg.eps_adj)
    _check_eps("eps_line", cfg.eps_line)
    if len(cfg.eps_gen) != case.n_gen or len(cfg.eps_adj) != case.n_gen:
        raise ConfigError("risk", f"expected {case.n_gen} generator risk levels")
    if len(cfg.eps_line) != case.n_line:
        raise ConfigError("risk.eps_line", f"expected {case.n_line} line risk levels")
    if not cfg.gamma1 >= 0:
        raise ConfigError("ambiguity.gamma1", f"must be >= 0, got {cfg.gamma1}")
    if not cfg.gamma2 >= 1:
        raise ConfigError("ambiguity.gamma2", f"must be >= 1, got {cfg.gamma2}")
    if cfg.sigma_s_mode not in SIGMA_S_MODES:
        raise ConfigError("sigma_s_mode", f"expected one of {SIGMA_S_MODES}")
    nw = case.n_wind
    if len(cfg.mu0) != nw:
        raise ConfigError("ambiguity.mu0", f"dimension {len(cfg.mu0)} != {nw} wind farms")
    if len(cfg.sigma0) != nw or any(len(r) != nw for r in cfg.sigma0):
        shape = (len(cfg.sigma0), len(cfg.sigma0[0]) if cfg.sigma0 else 0)
        raise ConfigError("ambiguity.sigma0", f"shape {shape} != ({nw}, {nw}) wind farms")
    if nw:
        s = cfg.sigma0_matrix
        if not np.array_equal(s, s.T):
            raise ConfigError("ambiguity.sigma0", "must be symmetric")
        lam = np.linalg.eigvalsh(s)
        if lam.min() < -1e-10 * max(1.0, abs(lam).max()):
            raise ConfigError("ambiguity.sigma0", f"not PSD (min eigenvalue {lam.min():.3e})")
    if cfg.slack_bus is not None and cfg.slack_bus not in case.bus_index:
        raise ConfigError("slack_bus", f"unknown bus {cfg.slack_bus}")


# ---------------------------------------------------------------------------
# MATPOWER subset

_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[")
_SCALAR_RE = re.compile(r"mpc\.(\w+)\s*=\s*([^\[;]+);")


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _read_matpower_tables(text: str, source: str | None) -> tuple[dict, dict]:
    scalars: dict[str, tuple[str, int]] = {}
    tables: dict[str, list[tuple[list[float], int]]] = {}
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        line = _strip_comment(lines[k])
        m = _MATRIX_RE.search(line)
        if m:
            name = m.group(1)
            start = k + 1
            rows: list[tuple[list[float], int]] = []
            body = line[m.end():]
            while True:
                closed = "]" in body
                chunk = body.split("]")[0]
                for piece in chunk.split(";"):
                    tokens = piece.replace(",", " ").split()
                    if not tokens:
                        continue
                    try:
                        rows.append(([float(t) for t in tokens], k + 1))
                    except ValueError:
                        bad = next(t for t in tokens if not _is_number(t))
                        raise ParseError(f"bad number {bad!r} in mpc.{name}", k + 1, source) from None
                if closed:
                    break
                k += 1
                if k >= len(lines):
                    raise ParseError(f"unterminated matrix mpc.{name}", start, source)
                body = _strip_comment(lines[k])
            tables[name] = rows
        else:
            m = _SCALAR_RE.search(line)
            if m:
                scalars[m.group(1)] = (m.group(2).strip(), k + 1)
        k += 1
    return scalars, tables


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _require_cols(name: str, rows, ncol: int, source) -> None:
    for vals, line in rows:
        if len(vals) < ncol:
            raise ParseError(f"mpc.{name} row has {len(vals)} columns, need >= {ncol}", line, source)


def parse_matpower(text: str, source: str | None = None) -> PowerCase:
    scalars, tables = _read_matpower_tables(text, source)
    for need in ("bus", "gen", "branch", "gencost"):
        if need not in tables:
            raise ParseError(f"missing table mpc.{need}", None, source)
    if "baseMVA" not in scalars:
        raise ParseError("missing mpc.baseMVA", None, source)
    raw, line = scalars["baseMVA"]
    try:
        base = float(raw)
    except ValueError:
        raise ParseError(f"bad baseMVA {raw!r}", line, source) from None
    name = "case"
    m = re.search(r"function\s+\w+\s*=\s*(\w+)", text)
    if m:
        name = m.group(1)

    _require_cols("bus", tables["bus"], 3, source)
    _require_cols("gen", tables["gen"], 10, source)
    _require_cols("branch", tables["branch"], 6, source)
    _require_cols("gencost", tables["gencost"], 4, source)

    buses, loads = [], []
    for k, (row, line) in enumerate(tables["bus"]):
        btype = int(row[1])
        if btype not in _MATPOWER_BUS_TYPES:
            raise CaseError(f"bus[{k}].type", f"unsupported MATPOWER bus type {btype}")
        buses.append(Bus(int(row[0]), _MATPOWER_BUS_TYPES[btype]))
        loads.append(row[2] / base)

    branches = []
    for k, (row, line) in enumerate(tables["branch"]):
        if len(row) > 10 and row[10] <= 0:
            continue
        rate = row[5]
        branches.append(Branch(int(row[0]), int(row[1]), row[3],
                               rate / base if rate > 0 else math.inf))

    gens_rows = tables["gen"]
    cost_rows = tables["gencost"]
    if len(cost_rows) < len(gens_rows):
        raise CaseError("gencost", f"{len(cost_rows)} cost rows for {len(gens_rows)} generators")
    generators = []
    for k, ((row, line), (cost, cline)) in enumerate(zip(gens_rows, cost_rows)):
        if row[7] <= 0:
            continue
        if int(cost[0]) != 2:
            raise CaseError(f"gencost[{k}].model", "only polynomial (model 2) costs are supported")
        ncoef = int(cost[3])
        coefs = cost[4:4 + ncoef]
        if len(coefs) != ncoef or not 1 <= ncoef <= 3:
            raise ParseError(f"gencost row declares {ncoef} coefficients", cline, source)
        c2, c1, c0 = ([0.0] * (3 - ncoef) + list(coefs))
        pmax, pmin = row[8] / base, row[9] / base
        generators.append(Generator(
            bus=int(row[0]), p_min=pmin, p_max=pmax,
            adj_down=-DEFAULT_ADJ_FRACTION * pmax, adj_up=DEFAULT_ADJ_FRACTION * pmax,
            cost_quadratic=c2 * base * base, cost_linear=c1 * base, cost_const=c0,
        ))
    case = PowerCase(name, base, tuple(buses), tuple(branches), tuple(generators), tuple(loads))
    validate_case(case)
    return case


# ---------------------------------------------------------------------------
# native YAML format


def _load_yaml(text: str, source: str | None) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", line, source) from None


def _num(value: Any, path: str) -> float:
    # YAML 1.1 reads exponents without a dot (1e-06) as strings
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseError(path, f"expected a number, got {value!r}")
    return float(value)


def _get(d: dict, key: str, path: str, default: Any = ...) -> Any:
    if key in d:
        return d[key]
    if default is ...:
        raise CaseError(f"{path}.{key}" if path else key, "missing required field")
    return default


def parse_native(text: str, source: str | None = None) -> PowerCase:
    doc = _load_yaml(text, source)
    if not isinstance(doc, dict):
        raise CaseError("<root>", "expected a mapping")
    base = _num(_get(doc, "base_mva", ""), "base_mva")
    units = _get(doc, "units", "", "mw")
    if units not in ("mw", "pu"):
        raise CaseError("units", f"expected 'mw' or 'pu', got {units!r}")
    scale = base if units == "mw" else 1.0

    buses, loads = [], []
    for k, b in enumerate(_get(doc, "buses", "")):
        path = f"buses[{k}]"
        btype = _get(b, "type", path, PQ)
        if btype not in (SLACK, PV, PQ):
            raise CaseError(f"{path}.type", f"unknown bus type {btype!r}")
        buses.append(Bus(int(_get(b, "id", path)), btype))
        loads.append(_num(_get(b, "load", path, 0.0), f"{path}.load") / scale)

    branches = []
    for k, br in enumerate(_get(doc, "branches", "", [])):
        path = f"branches[{k}]"
        limit = _get(br, "limit", path, None)
        branches.append(Branch(
            int(_get(br, "from", path)), int(_get(br, "to", path)),
            _num(_get(br, "x", path), f"{path}.x"),
            math.inf if limit is None else _num(limit, f"{path}.limit") / scale,
        ))

    generators = []
    for k, g in enumerate(_get(doc, "generators", "")):
        path = f"generators[{k}]"
        pmax = _num(_get(g, "p_max", path), f"{path}.p_max") / scale
        pmin = _num(_get(g, "p_min", path, 0.0), f"{path}.p_min") / scale
        up = g.get("adj_up")
        down = g.get("adj_down")
        cost = _get(g, "cost", path, [0.0, 0.0, 0.0])
        if not isinstance(cost, list) or len(cost) != 3:
            raise CaseError(f"{path}.cost", "expected [quadratic, linear, constant]")
        c2, c1, c0 = (_num(c, f"{path}.cost") for c in cost)
        generators.append(Generator(
            bus=int(_get(g, "bus", path)), p_min=pmin, p_max=pmax,
            adj_down=-DEFAULT_ADJ_FRACTION * pmax if down is None else _num(down, f"{path}.adj_down") / scale,
            adj_up=DEFAULT_ADJ_FRACTION * pmax if up is None else _num(up, f"{path}.adj_up") / scale,
            cost_quadratic=c2 * scale * scale, cost_linear=c1 * scale, cost_const=c0,
        ))

    farms = []
    for k, w in enumerate(_get(doc, "wind_farms", "", [])):
        path = f"wind_farms[{k}]"
        farms.append(WindFarm(int(_get(w, "bus", path)),
                              _num(_get(w, "forecast", path), f"{path}.forecast") / scale))

    case = PowerCase(str(doc.get("name", "case")), base, tuple(buses), tuple(branches),
                     tuple(generators), tuple(loads), tuple(farms))
    validate_case(case)
    return case


def parse_case(text: str, source: str | None = None) -> PowerCase:
    """Parse MATPOWER or native case text, sniffing the format."""
    if re.search(r"^\s*mpc\.\w+\s*=", text, flags=re.MULTILINE):
        return parse_matpower(text, source)
    return parse_native(text, source)


def load_case(path: str | Path) -> PowerCase:
    path = Path(path)
    return parse_case(path.read_text(), str(path))


def serialize_case(case: PowerCase) -> str:
    """Dump ``case`` in the native format (per-unit, lossless)."""

    def lim(x: float) -> float | None:
        return None if math.isinf(x) else x

    doc = {
        "name": case.name,
        "base_mva": case.base_mva,
        "units": "pu",
        "buses": [{"id": b.id, "type": b.type, "load": d} for b, d in zip(case.buses, case.loads)],
        "branches": [{"from": br.from_bus, "to": br.to_bus, "x": br.reactance, "limit": lim(br.flow_limit)}
                     for br in case.branches],
        "generators": [{"bus": g.bus, "p_min": g.p_min, "p_max": g.p_max,
                        "adj_down": g.adj_down, "adj_up": g.adj_up,
                        "cost": [g.cost_quadratic, g.cost_linear, g.cost_const]}
                       for g in case.generators],
        "wind_farms": [{"bus": w.bus, "forecast": w.forecast} for w in case.wind_farms],
    }
    return yaml.safe_dump(doc, sort_keys=False)


# ---------------------------------------------------------------------------
# study configuration

_CONFIG_KEYS = {"risk", "ambiguity", "sigma_s_mode", "slack_bus", "wind_farms",
                "adjustment", "extra_wind_buses", "solver"}


def _broadcast(value: Any, n: int, path: str) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise ConfigError(path, f"expected {n} entries, got {len(value)}")
        return tuple(_num(v, path) for v in value)
    return (_num(value, path),) * n


def _pu_value(d: dict, key: str, base: float, path: str) -> float:
    if f"{key}_pu" in d:
        return _num(d[f"{key}_pu"], f"{path}.{key}_pu")
    return _num(_get(d, f"{key}_mw", path), f"{path}.{key}_mw") / base


def _pu_vector(d: dict, key: str, case: PowerCase, path: str) -> tuple[float, ...] | None:
    if f"{key}_pu" in d:
        return _broadcast(d[f"{key}_pu"], case.n_gen, f"{path}.{key}_pu")
    if f"{key}_mw" in d:
        vals = _broadcast(d[f"{key}_mw"], case.n_gen, f"{path}.{key}_mw")
        return tuple(v / case.base_mva for v in vals)
    return None


def parse_config(text: str, case: PowerCase, source: str | None = None) -> StudyConfig:
    """Parse study configuration YAML, broadcasting scalars and applying defaults.

    Wind farms listed in the config replace those of the case (MATPOWER cases
    have none); forecasts and adjustment limits take ``*_mw`` or ``*_pu`` keys.
    """
    doc = _load_yaml(text, source) or {}
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a mapping")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")

    farms = None
    if doc.get("wind_farms") is not None:
        farms = tuple(
            WindFarm(int(_get(w, "bus", f"wind_farms[{k}]")),
                     _pu_value(w, "forecast", case.base_mva, f"wind_farms[{k}]"))
            for k, w in enumerate(doc["wind_farms"]))
    n_wind = len(farms) if farms is not None else case.n_wind

    risk = doc.get("risk") or {}
    amb = doc.get("ambiguity") or {}
    mu0 = amb.get("mu0")
    sigma0 = amb.get("sigma0")
    mu0 = (0.0,) * n_wind if mu0 is None else tuple(_num(v, "ambiguity.mu0") for v in mu0)
    if sigma0 is None:
        sigma0 = tuple((0.0,) * n_wind for _ in range(n_wind))
    else:
        sigma0 = tuple(tuple(_num(v, "ambiguity.sigma0") for v in row) for row in sigma0)

    adj = doc.get("adjustment") or {}
    adj_up = _pu_vector(adj, "up", case, "adjustment")
    adj_down = _pu_vector(adj, "down", case, "adjustment")

    solver_doc = doc.get("solver") or {}
    try:
        solver = SolverOptions(**solver_doc)
    except TypeError as exc:
        raise ConfigError("solver", str(exc)) from None

    cfg = StudyConfig(
        eps_gen=_broadcast(risk.get("eps_gen", DEFAULT_EPS), case.n_gen, "risk.eps_gen"),
        eps_adj=_broadcast(risk.get("eps_adj", DEFAULT_EPS), case.n_gen, "risk.eps_adj"),
        eps_line=_broadcast(risk.get("eps_line", DEFAULT_EPS), case.n_line, "risk.eps_line"),
        gamma1=_num(amb.get("gamma1", DEFAULT_GAMMA1), "ambiguity.gamma1"),
        gamma2=_num(amb.get("gamma2", DEFAULT_GAMMA2), "ambiguity.gamma2"),
        mu0=mu0,
        sigma0=sigma0,
        sigma_s_mode=doc.get("sigma_s_mode", "full_covariance"),
        slack_bus=doc.get("slack_bus"),
        wind_farms=farms,
        adj_up=adj_up,
        adj_down=adj_down,
        extra_wind_buses=tuple(int(b) for b in doc.get("extra_wind_buses", ())),
        solver=solver,
    )
    validate_config(cfg, apply_config(case, cfg, validate=False))
    return cfg


def load_config(path: str | Path, case: PowerCase) -> StudyConfig:
    path = Path(path)
    return parse_config(path.read_text(), case, str(path))


def apply_config(case: PowerCase, cfg: StudyConfig, validate: bool = True) -> PowerCase:
    """Merge config-side wind farms and adjustment limits into the case."""
    gens = list(case.generators)
    if cfg.adj_up is not None:
        gens = [replace(g, adj_up=u) for g, u in zip(gens, cfg.adj_up)]
    if cfg.adj_down is not None:
        gens = [replace(g, adj_down=d) for g, d in zip(gens, cfg.adj_down)]
    farms = case.wind_farms if cfg.wind_farms is None else cfg.wind_farms
    merged = replace(case, generators=tuple(gens), wind_farms=tuple(farms))
    if validate:
        validate_case(merged)
        validate_config(cfg, merged)
    return merged


def serialize_config(cfg: StudyConfig) -> str:
    doc: dict[str, Any] = {
        "risk": {"eps_gen": list(cfg.eps_gen), "eps_adj": list(cfg.eps_adj),
                 "eps_line": list(cfg.eps_line)},
        "ambiguity": {"gamma1": cfg.gamma1, "gamma2": cfg.gamma2,
                      "mu0": list(cfg.mu0), "sigma0": [list(r) for r in cfg.sigma0]},
        "sigma_s_mode": cfg.sigma_s_mode,
    }
    if cfg.slack_bus is not None:
        doc["slack_bus"] = cfg.slack_bus
    if cfg.wind_farms is not None:
        doc["wind_farms"] = [{"bus": w.bus, "forecast_pu": w.forecast} for w in cfg.wind_farms]
    adj = {}
    if cfg.adj_up is not None:
        adj["up_pu"] = list(cfg.adj_up)
    if cfg.adj_down is not None:
        adj["down_pu"] = list(cfg.adj_down)
    if adj:
        doc["adjustment"] = adj
    if cfg.extra_wind_buses:
        doc["extra_wind_buses"] = list(cfg.extra_wind_buses)
    doc["solver"] = dict(vars(cfg.solver))
    return yaml.safe_dump(doc, sort_keys=False)
