"""Reproduction targets: published table cells recomputed and compared.

A manifest (YAML) lists targets. Each target names a runner `kind`, a base
model config and parameters, and a list of cases; a case may override the
model or the parameters and carries the cells to check:

    - id: hyperexp2-barriers
      kind: barriers
      model: {claims: {...}, lam: 1, loading: 1}
      params: {q: 0.1}
      cases:
        - label: theta=1
          cells:
            - {key: exact.phi, expected: 0.110113}

A target-level `tol` replaces the default tolerance of its cells. Runners
return a mapping key -> value for the keys they are asked for.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Set

import numpy as np

from riskscale.core import env
from riskscale.core.approx import compare_approximations
from riskscale.core.claims import RiskModel
from riskscale.core.model_config import ModelConfig, parse_number
from riskscale.core.policy_exponential import (
    PolicyIngredients,
    a_of_b,
    b_bar,
    eta,
    k_critical,
    optimize_exponential,
    q_limit,
)
from riskscale.core.policy_matrix import solve_policy
from riskscale.core.scale import (
    bracketed_roots,
    build_scale_basis,
    de_finetti_barrier,
    de_finetti_value,
)
from riskscale.io.yamlio import safe_load_yaml
from riskscale.models.policy import METHOD_ALIASES, PolicyParams
from riskscale.utils.errors import ConfigError, RiskScaleError

logger = logging.getLogger("riskscale.repro")

DEFAULT_TOL = 1e-3
PHI_TOL = 1e-5

Runner = Callable[[RiskModel, Dict[str, float], Set[str]], Dict[str, float]]


@dataclass(frozen=True)
class Cell:
    key: str
    expected: float
    tol: float


@dataclass(frozen=True)
class ReproCase:
    label: str
    cells: List[Cell]
    model: Dict[str, Any] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)
    eps: Optional[float] = None


@dataclass(frozen=True)
class ReproTarget:
    id: str
    kind: str
    description: str
    model: Dict[str, Any]
    params: Dict[str, Any]
    cases: List[ReproCase]


@dataclass(frozen=True)
class CellResult:
    target: str
    case: str
    key: str
    expected: float
    actual: Optional[float]
    tol: float
    status: str  # pass | fail | skip

    @property
    def error(self) -> float:
        if self.actual is None:
            return math.nan
        return abs(self.actual - self.expected)


@dataclass
class ReproReport:
    target: str
    results: List[CellResult] = field(default_factory=list)

    def count(self, status: str) -> int:
        return sum(1 for r in self.results if r.status == status)

    @property
    def passed(self) -> int:
        return self.count("pass")

    @property
    def failed(self) -> int:
        return self.count("fail")

    @property
    def skipped(self) -> int:
        return self.count("skip")


def default_tolerance(key: str) -> float:
    return PHI_TOL if key.endswith("phi") else DEFAULT_TOL


# ----------------------------------------------------------------------------
# Manifest parsing
# ----------------------------------------------------------------------------

def _cell(raw: Any, where: str, default_tol: Optional[float] = None) -> Cell:
    if not isinstance(raw, dict) or "key" not in raw or "expected" not in raw:
        raise ConfigError(f"{where}: cells need 'key' and 'expected'")
    key = str(raw["key"])
    tol = raw.get("tol")
    return Cell(
        key=key,
        expected=parse_number(raw["expected"], f"{where}.{key}.expected"),
        tol=(default_tol or default_tolerance(key)) if tol is None else parse_number(tol, f"{where}.{key}.tol"),
    )


def _case(raw: Any, where: str, default_tol: Optional[float] = None) -> ReproCase:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: case must be a mapping")
    label = str(raw.get("label", where))
    eps = raw.get("eps")
    return ReproCase(
        label=label,
        cells=[_cell(c, f"{where}.{label}", default_tol) for c in raw.get("cells") or []],
        model=dict(raw.get("model") or {}),
        params=dict(raw.get("params") or {}),
        eps=None if eps is None else parse_number(eps, f"{where}.eps"),
    )


def parse_manifest(raw: Any) -> Dict[str, ReproTarget]:
    if not isinstance(raw, dict) or not isinstance(raw.get("targets"), list):
        raise ConfigError("reproduction manifest needs a 'targets' list")
    targets: Dict[str, ReproTarget] = {}
    for item in raw["targets"]:
        if not isinstance(item, dict) or "id" not in item or "kind" not in item:
            raise ConfigError("each target needs 'id' and 'kind'")
        tid = str(item["id"])
        tol = None if item.get("tol") is None else parse_number(item["tol"], f"{tid}.tol")
        if item["kind"] not in RUNNERS:
            raise ConfigError(f"target {tid}: unknown kind {item['kind']!r}")
        if tid in targets:
            raise ConfigError(f"duplicate target id {tid!r}")
        targets[tid] = ReproTarget(
            id=tid,
            kind=str(item["kind"]),
            description=str(item.get("description", "")),
            model=dict(item.get("model") or {}),
            params=dict(item.get("params") or {}),
            cases=[_case(c, tid, tol) for c in item.get("cases") or []],
        )
    return targets


def load_targets(path: Optional[str | Path] = None) -> Dict[str, ReproTarget]:
    path = Path(path) if path is not None else env.get_targets_path()
    return parse_manifest(safe_load_yaml(path))


# ----------------------------------------------------------------------------
# Runners
# ----------------------------------------------------------------------------

def _policy_params(params: Dict[str, float]) -> PolicyParams:
    return PolicyParams(q=params["q"], k=params.get("k", 1.5), P=params.get("P", 0.0))


def run_barriers(model: RiskModel, params: Dict[str, float], keys: Set[str]) -> Dict[str, float]:
    """Φ_q and b_DeF for the exact model and the surrogates, J_DeF, and W_q terms."""
    q = params["q"]
    out: Dict[str, float] = {}
    for row in compare_approximations(model, q):
        out[f"{row.method}.phi"] = row.phi
        out[f"{row.method}.b_def"] = row.b_def
    basis = build_scale_basis(model, q)
    out["exact.j_def"] = de_finetti_value(basis, de_finetti_barrier(basis))
    real = basis.roots.imag == 0
    order = np.argsort(basis.roots[real].real)
    for i, j in enumerate(order):
        out[f"w.exponent.{i}"] = float(basis.roots[real].real[j])
        out[f"w.coef.{i}"] = float(basis.coefficients[real].real[j])
    return out


def run_policy(model: RiskModel, params: Dict[str, float], keys: Set[str]) -> Dict[str, float]:
    """`<method>.J0|a|b` for the methods named in the keys; `<method>.gap` is J0 minus the matrix J0."""
    pp = _policy_params(params)
    wanted = {k.split(".", 1)[0] for k in keys}
    if any(k.endswith(".gap") for k in keys):
        wanted.add("matrix")
    out: Dict[str, float] = {}
    for name in sorted(wanted):
        if name not in METHOD_ALIASES:
            raise ConfigError(f"unknown policy method {name!r} in cell keys")
        sol = solve_policy(model, pp, METHOD_ALIASES[name])
        out[f"{name}.J0"] = sol.J0
        out[f"{name}.a"] = sol.a_star
        out[f"{name}.b"] = sol.b_star
    if "matrix.J0" in out:
        for name in wanted:
            out[f"{name}.gap"] = out[f"{name}.J0"] - out["matrix.J0"]
    return out


def run_exponential(model: RiskModel, params: Dict[str, float], keys: Set[str]) -> Dict[str, float]:
    """Diagnostics of the exponential engine (θ, j, b̄, η roots, optimum)."""
    pp = _policy_params(params)
    ing = PolicyIngredients.from_model(model, pp.q)
    top = b_bar(ing.basis)
    out: Dict[str, float] = {
        "theta0": ing.theta(0.0),
        "theta_inf": ing.theta(50.0 / ing.basis.phi),
        "gamma0": ing.gamma(0.0),
        "j0": ing.j(0.0),
        "b_bar": top,
        "phi": ing.basis.phi,
        "a_of_0": a_of_b(ing, pp, 0.0),
    }
    if "eta_root" in keys:
        grid = np.linspace(0.0, top, 2001)
        roots = [b for b in bracketed_roots(np.vectorize(lambda b: eta(ing, pp, float(b))), grid) if b > 0]
        out["eta_root"] = roots[0] if roots else math.nan
    if keys & {"J0", "a", "b"}:
        sol = optimize_exponential(model, pp)
        out.update({"J0": sol.J0, "a": sol.a_star, "b": sol.b_star})
    return out


def run_kc(model: RiskModel, params: Dict[str, float], keys: Set[str]) -> Dict[str, float]:
    """Critical injection cost and the discount limit q_l."""
    P = params.get("P", 0.0)
    out = {"q_limit": q_limit(model, P)}
    if "kc" in keys:
        out["kc"] = k_critical(model, params["q"], P)
    return out


RUNNERS: Dict[str, Runner] = {
    "barriers": run_barriers,
    "policy": run_policy,
    "exponential": run_exponential,
    "kc": run_kc,
}


# ----------------------------------------------------------------------------
# Execution
# ----------------------------------------------------------------------------

def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    # an override of one premium mode replaces the other
    if "c" in override:
        out.pop("loading", None)
    if "loading" in override:
        out.pop("c", None)
    return out


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def run_case(target: ReproTarget, case: ReproCase) -> List[CellResult]:
    model_raw = _merge(target.model, case.model)
    if case.eps is not None:
        model_raw.setdefault("claims", {})["eps"] = case.eps
    params = {k: parse_number(v, f"{target.id}.params.{k}") for k, v in _merge(target.params, case.params).items()}
    keys = {c.key for c in case.cells}
    model = ModelConfig.from_dict(model_raw).build()
    logger.debug("[repro] %s / %s: %d cell(s)", target.id, case.label, len(keys))
    try:
        values = RUNNERS[target.kind](model, params, keys)
    except RiskScaleError as e:
        logger.warning("[repro] %s / %s failed: %s", target.id, case.label, e)
        values = {}
    results = []
    for cell in case.cells:
        actual = values.get(cell.key)
        ok = actual is not None and math.isfinite(actual) and abs(actual - cell.expected) <= cell.tol
        results.append(
            CellResult(target.id, case.label, cell.key, cell.expected, actual, cell.tol, "pass" if ok else "fail")
        )
    return results


def run_target(target: ReproTarget, eps: Optional[float] = None) -> ReproReport:
    """Run every case of `target`; with `eps`, cases for other ε values are skipped."""
    report = ReproReport(target=target.id)
    for case in target.cases:
        if eps is not None and (case.eps is None or not _same(case.eps, eps)):
            report.results.extend(
                CellResult(target.id, case.label, c.key, c.expected, None, c.tol, "skip") for c in case.cells
            )
            continue
        report.results.extend(run_case(target, case))
    logger.info(
        "[repro] %s: %d passed, %d failed, %d skipped",
        target.id, report.passed, report.failed, report.skipped,
    )
    return report
