"""Experiment specs: parsing, bound expressions and execution.

A spec file holds one or more sections::

    [thm1-star]
    graph = star
    n = 21
    variant = observed(1)
    strategy = wmw1
    dist = uniform support=leaves
    trials = 50000
    seed = 1
    bound = n + 1

``strategy`` and ``dist`` take a name followed by ``key=value`` parameters.
``n`` may be a range ``lo..hi``, in which case each replicate draws its own
size.  ``bound`` is an upper bound and ``lower_bound`` a lower one; both
are expressions in ``n``, ``k``, ``r`` (radius), ``m`` (``ceil(n/k)``) and
``t``.  With ``mode = throttle`` the scenario estimates ``min_k k + T_k``
for ``family`` over ``k_range`` and the bounds apply to that value.

A ``.json`` file holds one object or a list of objects with the same keys
plus ``name``; there ``strategy`` and ``dist`` may also be objects.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .engine import CaptureStats, GameConfig, Variant, estimate_capture_time, verify_bound, verify_lower_bound
from .errors import ConfigError, CopGamblerError
from .gambler import (
    GamblerDistribution,
    adversarial_cycle_distribution,
    dirichlet_distribution,
    geometric_distribution,
    point_mass,
    read_distribution,
    uniform_distribution,
)
from .graph import GRAPH_KINDS, Graph, generate, read_edge_list
from .strategies import build_strategy
from .throttling import FAMILIES, throttle_estimate

CSV_COLUMNS = ["scenario", "strategy", "variant", "graphKind", "n", "k", "t", "trials", "mean", "stdError",
               "censored", "bound", "lowerBound", "pass"]

SPEC_SUFFIXES = (".spec", ".json")

# -- bound expressions ------------------------------------------------------

_BINOPS: dict[type, Callable[[float, float], float]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.FloorDiv: operator.floordiv,
    ast.Pow: operator.pow,
    ast.Mod: operator.mod,
}
_FUNCS: dict[str, Callable[..., float]] = {
    "sqrt": math.sqrt,
    "ceil": math.ceil,
    "floor": math.floor,
    "log": math.log,
    "exp": math.exp,
    "min": min,
    "max": max,
}
_CONSTS = {"e": math.e, "pi": math.pi}
BOUND_VARIABLES = ("n", "k", "r", "m", "t")


def _eval(node: ast.AST, env: dict[str, float]) -> float:
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ValueError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        return _FUNCS[node.func.id](*(_eval(a, env) for a in node.args))
    raise ValueError(f"unsupported expression element {ast.dump(node)[:40]}")


def evaluate_bound(expr: str, **env: float) -> float:
    """Evaluate a closed-form bound; only arithmetic, the bound variables and a few functions are allowed."""
    try:
        tree = ast.parse(expr, mode="eval")
        value = float(_eval(tree, env))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(f"bad bound expression {expr!r}: {exc}") from None
    if not math.isfinite(value):
        raise ConfigError(f"bound expression {expr!r} is not finite")
    return value


# -- spec -------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    name: str
    graph: str
    n: int | tuple[int, int] | None = None
    edges: str | None = None
    graph_seed: int = 0
    variant: Variant = field(default_factory=lambda: Variant("observed", 1))
    strategy: str = ""
    strategy_params: dict[str, Any] = field(default_factory=dict)
    k: int = 1
    dist: str = "uniform"
    dist_params: dict[str, Any] = field(default_factory=dict)
    trials: int = 1000
    seed: int = 0
    bound: str | None = None
    lower_bound: str | None = None
    replicates: int = 1
    mode: str = "estimate"
    family: str | None = None
    k_range: tuple[int, ...] = ()
    max_turns: int = 0
    origin: str = "<spec>"

    def where(self, key: str | None = None) -> str:
        return f"{self.origin} [{self.name}]" + (f" field {key!r}" if key else "")


_REQUIRED = ("graph", "variant", "trials", "seed")
_INT_FIELDS = ("graph_seed", "k", "trials", "seed", "replicates", "max_turns")


def _scalar(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _name_and_params(text: str) -> tuple[str, dict[str, Any]]:
    head, *rest = text.split()
    params = {}
    for item in rest:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {item!r}")
        params[key] = _scalar(value)
    return head, params


def _int_range(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in str(text).replace(",", " ").split():
        lo, sep, hi = part.partition("..")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    if not out:
        raise ValueError("empty range")
    return tuple(out)


def _apply(spec: ExperimentSpec, key: str, value: Any, where: str) -> None:
    try:
        if key == "n":
            text = str(value)
            if ".." in text:
                lo, hi = (int(x) for x in text.split(".."))
                if not 1 <= lo <= hi:
                    raise ValueError(f"bad range {text}")
                spec.n = (lo, hi)
            else:
                spec.n = int(value)
        elif key in _INT_FIELDS:
            setattr(spec, key, int(value))
        elif key == "variant":
            spec.variant = Variant.parse(str(value))
        elif key in ("strategy", "dist"):
            if isinstance(value, dict):
                name, params = value["name"], {k: v for k, v in value.items() if k != "name"}
            else:
                name, params = _name_and_params(str(value))
            setattr(spec, key, name)
            setattr(spec, f"{key}_params", params)
        elif key in ("bound", "lower_bound"):
            setattr(spec, key, str(value))
        elif key == "k_range":
            spec.k_range = _int_range(value)
        elif key in ("graph", "edges", "mode", "family"):
            setattr(spec, key, str(value))
        else:
            raise ValueError("unknown field")
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"{where} field {key!r}: {exc}") from None


def _validate(spec: ExperimentSpec, seen: set[str]) -> ExperimentSpec:
    for key in _REQUIRED:
        if key not in seen and not (key == "graph" and "edges" in seen):
            raise ConfigError(f"{spec.where()}: missing required field {key!r}")
    if "edges" in seen:
        spec.graph = spec.graph if "graph" in seen else "custom"
    elif spec.n is None:
        raise ConfigError(f"{spec.where()}: missing required field 'n'")
    elif spec.graph not in GRAPH_KINDS:
        raise ConfigError(f"{spec.where('graph')}: unknown kind {spec.graph!r}, expected one of {GRAPH_KINDS}")
    if spec.mode not in ("estimate", "throttle"):
        raise ConfigError(f"{spec.where('mode')}: expected 'estimate' or 'throttle'")
    if spec.mode == "throttle":
        if spec.family not in FAMILIES:
            raise ConfigError(f"{spec.where('family')}: expected one of {sorted(FAMILIES)}")
    elif not spec.strategy:
        raise ConfigError(f"{spec.where()}: missing required field 'strategy'")
    if spec.bound is None and spec.lower_bound is None:
        raise ConfigError(f"{spec.where()}: need 'bound' or 'lower_bound'")
    for key in ("bound", "lower_bound"):
        expr = getattr(spec, key)
        if expr is not None:
            try:
                evaluate_bound(expr, n=10, k=2, r=3, m=5, t=1)
            except ConfigError as exc:
                raise ConfigError(f"{spec.where(key)}: {exc}") from None
    if spec.trials < 1 or spec.replicates < 1 or spec.k < 1:
        raise ConfigError(f"{spec.where()}: trials, replicates and k must be positive")
    return spec


def parse_spec_text(text: str, origin: str = "<spec>") -> list[ExperimentSpec]:
    """Parse key=value text with ``[name]`` headers (or JSON) into specs."""
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            # "[name]" headers also start with a bracket; only a leading brace must be JSON
            if stripped.startswith("{"):
                raise ConfigError(f"{origin}:{exc.lineno}: invalid JSON: {exc.msg}") from None
        else:
            return _parse_json(data, origin)
    specs: list[ExperimentSpec] = []
    current: ExperimentSpec | None = None
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            if current is not None:
                specs.append(_validate(current, seen))
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"{origin}:{lineno}: empty scenario name")
            current, seen = ExperimentSpec(name=name, graph="", origin=origin), set()
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"{origin}:{lineno}: field before any [scenario] header")
        key = key.strip()
        _apply(current, key, value.strip(), f"{origin}:{lineno}")
        seen.add(key)
    if current is not None:
        specs.append(_validate(current, seen))
    if not specs:
        raise ConfigError(f"{origin}: no scenarios found")
    return specs


def _parse_json(data: Any, origin: str) -> list[ExperimentSpec]:
    items = data if isinstance(data, list) else [data]
    specs = []
    for i, item in enumerate(items):
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError(f"{origin}: entry {i} must be an object with a 'name'")
        spec = ExperimentSpec(name=str(item["name"]), graph="", origin=origin)
        for key, value in item.items():
            if key != "name":
                _apply(spec, key, value, f"{origin} entry {i}")
        specs.append(_validate(spec, set(item) - {"name"}))
    if not specs:
        raise ConfigError(f"{origin}: no scenarios found")
    return specs


def load_spec(path: str | Path) -> list[ExperimentSpec]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    specs = parse_spec_text(text, str(path))
    base = path.parent
    for spec in specs:
        if spec.edges is not None and not Path(spec.edges).is_absolute():
            spec.edges = str(base / spec.edges)
        p = spec.dist_params.get("path")
        if spec.dist == "file" and isinstance(p, str) and not Path(p).is_absolute():
            spec.dist_params["path"] = str(base / p)
    return specs


def load_suite(directory: str | Path) -> list[ExperimentSpec]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.suffix in SPEC_SUFFIXES)
    if not files:
        raise ConfigError(f"{directory}: no spec files ({', '.join(SPEC_SUFFIXES)})")
    specs = [s for f in files for s in load_spec(f)]
    names = [s.name for s in specs]
    dupes = sorted({x for x in names if names.count(x) > 1})
    if dupes:
        raise ConfigError(f"{directory}: duplicate scenario names {dupes}")
    return specs


# -- execution --------------------------------------------------------------

@dataclass
class ScenarioRow:
    scenario: str
    strategy: str
    variant: str
    graph_kind: str
    n: int
    k: int
    t: int
    trials: int
    mean: float
    std_error: float
    censored: int
    bound: float | None
    lower_bound: float | None
    passed: bool

    def as_list(self) -> list:
        def num(x):
            return "" if x is None else repr(float(x))
        return [self.scenario, self.strategy, self.variant, self.graph_kind, self.n, self.k, self.t, self.trials,
                repr(self.mean), repr(self.std_error), self.censored, num(self.bound), num(self.lower_bound),
                "pass" if self.passed else "fail"]


@dataclass
class ScenarioResult:
    spec: ExperimentSpec
    rows: list[ScenarioRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _graph_for(spec: ExperimentSpec, replicate: int) -> Graph:
    if spec.edges is not None:
        return read_edge_list(spec.edges)
    seed = spec.graph_seed + replicate
    if isinstance(spec.n, tuple):
        lo, hi = spec.n
        n = int(np.random.default_rng([spec.graph_seed, replicate]).integers(lo, hi + 1))
    else:
        n = spec.n
    return generate(spec.graph, n, seed)


def _support(graph: Graph, which: str) -> list[int]:
    if which == "all":
        return list(range(graph.n))
    if which == "leaves":
        return [v for v in range(graph.n) if graph.degree(v) == 1]
    raise ValueError(f"support must be 'all' or 'leaves', got {which!r}")


def _dist_for(spec: ExperimentSpec, graph: Graph, replicate: int, cop_start: int) -> GamblerDistribution:
    p = dict(spec.dist_params)
    name = spec.dist
    if name == "uniform":
        dist = uniform_distribution(_support(graph, p.pop("support", "all")), graph.n)
    elif name == "point_mass":
        dist = point_mass(int(p.pop("v")), graph.n)
    elif name == "dirichlet":
        dist = dirichlet_distribution(graph.n, int(p.pop("seed", 0)) + replicate, float(p.pop("alpha", 1.0)))
    elif name == "geometric":
        support = _support(graph, p.pop("support", "all"))
        dist = geometric_distribution(support, graph.n, float(p.pop("ratio", 0.5)))
    elif name == "adversarial_cycle":
        eps = p.pop("epsilon", None)
        dist = adversarial_cycle_distribution(graph.n, int(p.pop("t")), cop_start,
                                              None if eps is None else float(eps))
    elif name == "file":
        dist = read_distribution(p.pop("path"))
    else:
        raise ValueError(f"unknown distribution {name!r}")
    if p:
        raise ValueError(f"unexpected parameters {sorted(p)} for distribution {name!r}")
    return dist


def _bounds(spec: ExperimentSpec, env: dict[str, float]) -> tuple[float | None, float | None]:
    hi = None if spec.bound is None else evaluate_bound(spec.bound, **env)
    lo = None if spec.lower_bound is None else evaluate_bound(spec.lower_bound, **env)
    return hi, lo


def _verdict(stats: CaptureStats, hi: float | None, lo: float | None) -> bool:
    ok = True
    if hi is not None:
        ok &= verify_bound(stats, hi).passed
    if lo is not None:
        ok &= verify_lower_bound(stats, lo).passed
    return bool(ok)


def run_scenario(spec: ExperimentSpec, workers: int = 1) -> ScenarioResult:
    """Run every replicate of one scenario and check its bounds."""
    rows = []
    try:
        for rep in range(spec.replicates):
            graph = _graph_for(spec, rep)
            seed = spec.seed + rep
            if spec.mode == "throttle":
                rows.append(_throttle_row(spec, graph, rep, seed, workers))
                continue
            # starting positions never depend on the distribution, but some distributions depend on them
            probe = build_strategy(spec.strategy, graph, spec.k, uniform_distribution(range(graph.n), graph.n),
                                   **spec.strategy_params)
            starts = probe.default_starts(graph, spec.k)
            dist = _dist_for(spec, graph, rep, starts[0])
            strategy = build_strategy(spec.strategy, graph, spec.k, dist, **spec.strategy_params)
            config = GameConfig(graph, starts, spec.variant, spec.max_turns)
            stats = estimate_capture_time(config, strategy, dist, spec.trials, seed, workers)
            env = dict(n=graph.n, k=spec.k, r=graph.radius, m=math.ceil(graph.n / spec.k), t=spec.variant.t)
            hi, lo = _bounds(spec, env)
            rows.append(ScenarioRow(spec.name, spec.strategy, str(spec.variant), graph.kind, graph.n, spec.k,
                                    spec.variant.t, spec.trials, stats.mean, stats.std_error, stats.censored,
                                    hi, lo, _verdict(stats, hi, lo)))
    except ConfigError:
        raise
    except (CopGamblerError, ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"{spec.where()}: {exc}") from None
    return ScenarioResult(spec, rows)


def _throttle_row(spec: ExperimentSpec, graph: Graph, rep: int, seed: int, workers: int) -> ScenarioRow:
    dist = _dist_for(spec, graph, rep, 0)
    result = throttle_estimate(graph, spec.variant, spec.family, spec.k_range or None, dist, spec.trials, seed,
                               workers)
    env = dict(n=graph.n, k=result.best_k, r=graph.radius, m=math.ceil(graph.n / result.best_k),
               t=spec.variant.t)
    hi, lo = _bounds(spec, env)
    best = result.per_k[result.best_k]
    shifted = replace(best, mean=result.value)
    return ScenarioRow(spec.name, f"throttle:{spec.family}", str(spec.variant), graph.kind, graph.n,
                       result.best_k, spec.variant.t, spec.trials, result.value, best.std_error, best.censored,
                       hi, lo, _verdict(shifted, hi, lo))


def format_csv(results: list[ScenarioResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for result in sorted(results, key=lambda r: r.spec.name):
        for row in result.rows:
            writer.writerow(row.as_list())
    return buf.getvalue()
