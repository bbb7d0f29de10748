"""Experiment configuration ingestion, orchestration, and report emission.

Configs are versioned JSON documents; matrices are row-major nested
lists and every random choice sits behind an explicit seed, so a config
determines its reports byte for byte.  Each report embeds the resolved
config for provenance.
"""

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .basedyn import BaseSystem, Cocycle, cocycle_step
from .errors import ValidationError, WeightNotAdmissible
from .flagdyn import (
    FlagPoint,
    attractor_section,
    cocycle_omega,
    estimated_contraction_gap,
    repeller_section,
    transversality_check,
)
from .gaugediff import (
    GaugeDirection,
    analytic_differential,
    finite_difference,
    random_gauge_direction,
    ruelle_differential,
    smoothness_scan,
)
from .liealg import ThetaSet, weight_combination
from .matkit import iwasawa, polar_chamber
from .semigrp import (
    ConePositive,
    MinorPositive,
    SymplecticQ,
    TotallyPositive,
    sample_interior_cocycle,
    verify_gap_predictions,
)
from .spectra import section_flag_type, spectrum_functional, spectrum_report, spectrum_via_section
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ConfigError",
    "Experiment",
    "bundled_config_names",
    "cmd_derivative",
    "cmd_section",
    "cmd_semigroup",
    "cmd_spectrum",
    "cmd_verify",
    "load_bundled_config",
    "load_config",
]

SCHEMA_VERSION = 1


class ConfigError(ValidationError):
    """A config document violates the schema; message carries the path."""


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return cfg[key]


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if cfg.get("version") != SCHEMA_VERSION:
        raise ConfigError(f"version: expected {SCHEMA_VERSION}, got {cfg.get('version')!r}")
    return cfg


def bundled_config_names() -> list:
    from importlib import resources

    root = resources.files("flaglyap") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled_config(name: str) -> dict:
    from importlib import resources

    text = (resources.files("flaglyap") / "configs" / name).read_text("utf-8")
    cfg = json.loads(text)
    cfg["_bundled_name"] = name
    return cfg


class Experiment:
    """A fully resolved experiment: base, cocycle, weights, gauge data."""

    def __init__(self, cfg: dict, seed_override: int | None = None, tol_override: float | None = None):
        self.config = cfg
        self.tolerances = self._resolve_tolerances(cfg)
        self.base = self._build_base(cfg)
        self.dim, self.symplectic_n = self._resolve_ambient(cfg)
        self.cocycle, self.semigroup = self._build_cocycle(cfg, seed_override)
        self.weights = self._build_weights(cfg)
        self.gauge = self._build_gauge(cfg, seed_override)
        solver = cfg.get("solver", {})
        self.section_tol = float(tol_override if tol_override is not None else solver.get("tol", self.tolerances.section))
        self.section_max_iter = solver.get("max_iter")
        self.section_seed = int(solver.get("seed", 0))
        self.fd_step = float(cfg.get("fd_step", self.tolerances.fd_step))

    @staticmethod
    def _resolve_tolerances(cfg: dict) -> Tolerances:
        overrides = cfg.get("tolerances", {})
        bad = set(overrides) - {f.name for f in dataclasses.fields(Tolerances)}
        if bad:
            raise ConfigError(f"tolerances: unknown fields {sorted(bad)}")
        return dataclasses.replace(DEFAULT, **{k: float(v) for k, v in overrides.items()})

    @staticmethod
    def _build_base(cfg: dict) -> BaseSystem:
        spec = _require(cfg, "base", "config")
        cycles = _require(spec, "cycles", "base")
        try:
            return BaseSystem.from_cycles(cycles, spec.get("weights"))
        except ValidationError as exc:
            raise ConfigError(f"base: {exc}") from exc

    @staticmethod
    def _resolve_ambient(cfg: dict):
        ambient = _require(cfg, "ambient", "config")
        if "d" in ambient and "symplectic_n" in ambient:
            raise ConfigError("ambient: give either d or symplectic_n, not both")
        if "symplectic_n" in ambient:
            n = int(ambient["symplectic_n"])
            if n < 1:
                raise ConfigError("ambient.symplectic_n: must be at least 1")
            return 2 * n, n
        if "d" in ambient:
            d = int(ambient["d"])
            if not 2 <= d <= 12:
                raise ConfigError("ambient.d: must lie in 2..12")
            return d, None
        raise ConfigError("ambient: needs d or symplectic_n")

    def _build_cocycle(self, cfg: dict, seed_override):
        gen_cfg = _require(cfg, "generators", "config")
        if "matrices" in gen_cfg:
            mats = gen_cfg["matrices"]
            if len(mats) != self.base.n_points:
                raise ConfigError("generators.matrices: need one matrix per base point")
            try:
                gens = tuple(np.asarray(m, dtype=float).reshape(self.dim, self.dim) for m in mats)
                return Cocycle(base=self.base, gen=gens), None
            except (ValueError, ValidationError) as exc:
                raise ConfigError(f"generators.matrices: {exc}") from exc
        if "semigroup" in gen_cfg:
            sg = gen_cfg["semigroup"]
            family = _require(sg, "family", "generators.semigroup")
            seed = int(seed_override if seed_override is not None else _require(sg, "seed", "generators.semigroup"))
            spec = self._semigroup_spec(family, sg)
            return sample_interior_cocycle(spec, self.base, seed), spec
        raise ConfigError("generators: needs matrices or semigroup")

    def _semigroup_spec(self, family: str, sg: dict):
        if family == "cone_positive":
            return ConePositive(self.dim)
        if family == "totally_positive":
            return TotallyPositive(self.dim)
        if family == "minor_positive":
            k_set = _require(sg, "k_set", "generators.semigroup")
            try:
                return MinorPositive(self.dim, tuple(k_set))
            except ValidationError as exc:
                raise ConfigError(f"generators.semigroup.k_set: {exc}") from exc
        if family == "symplectic_q":
            if self.symplectic_n is None:
                raise ConfigError("symplectic_q generators need ambient.symplectic_n")
            return SymplecticQ(self.symplectic_n)
        raise ConfigError(f"generators.semigroup.family: unknown family {family!r}")

    def _build_weights(self, cfg: dict) -> list:
        rows = cfg.get("weights", [])
        out = []
        for i, row in enumerate(rows):
            try:
                out.append(weight_combination(row, self.dim))
            except ValidationError as exc:
                raise ConfigError(f"weights[{i}]: {exc}") from exc
        return out

    def _build_gauge(self, cfg: dict, seed_override) -> GaugeDirection | None:
        gauge = cfg.get("gauge")
        if gauge is None:
            return None
        if "table" in gauge:
            try:
                mats = tuple(
                    np.asarray(m, dtype=float).reshape(self.dim, self.dim) for m in gauge["table"]
                )
                return GaugeDirection(self.base, mats)
            except (ValueError, ValidationError) as exc:
                raise ConfigError(f"gauge.table: {exc}") from exc
        if "seed" in gauge:
            seed = int(seed_override if seed_override is not None else gauge["seed"])
            symplectic = gauge.get("symplectic", False)
            return random_gauge_direction(
                self.base, self.dim, seed, scale=float(gauge.get("scale", 1.0)),
                symplectic_n=self.symplectic_n if symplectic else None,
            )
        raise ConfigError("gauge: needs table or seed")

    def solve_section(self, theta: ThetaSet | None = None):
        theta = section_flag_type(self.cocycle) if theta is None else theta
        return attractor_section(
            self.cocycle, theta, tol=self.section_tol,
            max_iter=self.section_max_iter, seed=self.section_seed,
        )


def _resolved_block(exp: Experiment) -> dict:
    return {
        "section_tol": exp.section_tol,
        "section_max_iter": exp.section_max_iter,
        "section_seed": exp.section_seed,
        "fd_step": exp.fd_step,
        "dim": exp.dim,
        "symplectic_n": exp.symplectic_n,
    }


def _write_json(payload: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(rows, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(rows)


def cmd_spectrum(exp: Experiment, out_dir: Path) -> dict:
    """Per-point polar exponents, mean spectrum, gaps, flag type."""
    report = spectrum_report(exp.cocycle)
    payload = {"config": exp.config, "resolved": _resolved_block(exp), "spectrum": report.as_dict()}
    _write_json(payload, out_dir / "spectrum.json")
    _write_csv(report.csv_rows(), out_dir / "spectrum.csv")
    return payload


def cmd_section(exp: Experiment, out_dir: Path) -> dict:
    """Attractor and repeller sections with residuals and transversality."""
    theta = section_flag_type(exp.cocycle)
    if not theta.subspace_dims():
        # the estimated type carries no subspace at all (gap-free cocycle);
        # attempt the projective type so the verdict is meaningful
        theta = ThetaSet.projective(exp.dim)
    section = exp.solve_section(theta)
    dual = repeller_section(
        exp.cocycle, theta, tol=exp.section_tol,
        max_iter=exp.section_max_iter, seed=exp.section_seed,
    )
    verdicts = transversality_check(section, dual, exp.tolerances)
    payload = {
        "config": exp.config,
        "resolved": _resolved_block(exp),
        "theta": sorted(theta.indices),
        "gap_estimate": estimated_contraction_gap(exp.cocycle, theta),
        "residual": section.residual,
        "residual_history": list(section.history),
        "frames": [f.frame.tolist() for f in section.flags],
        "repeller_residual": dual.residual,
        "repeller_frames": [f.frame.tolist() for f in dual.flags],
        "transversal": verdicts,
    }
    _write_json(payload, out_dir / "section.json")
    return payload


def cmd_derivative(exp: Experiment, out_dir: Path) -> dict:
    """Analytic differentials vs finite differences, plus a smoothness scan."""
    if exp.gauge is None:
        raise ConfigError("derivative runs need a gauge section in the config")
    if not exp.weights:
        raise ConfigError("derivative runs need at least one weight")
    theta = section_flag_type(exp.cocycle)
    section = exp.solve_section(theta)
    rows = []
    for omega in exp.weights:
        analytic = analytic_differential(
            exp.cocycle, omega, exp.gauge, theta=theta, section=section, tol=exp.tolerances,
        )
        slope, order = finite_difference(exp.cocycle, omega, exp.gauge, exp.fd_step)
        rows.append({
            "weight": list(map(float, omega.coeffs)),
            "analytic": analytic,
            "central_difference": slope,
            "order_estimate": order,
            "agreement_residual": abs(analytic - slope) / (1.0 + abs(analytic)),
        })
    scan_cfg = exp.config.get("scan", {})
    grid = np.linspace(
        float(scan_cfg.get("t_min", -0.1)),
        float(scan_cfg.get("t_max", 0.1)),
        int(scan_cfg.get("points", 11)),
    )
    scan = smoothness_scan(exp.cocycle, exp.weights[0], exp.gauge, grid)
    header = ["t", "value"] + [f"gap{i}" for i in range(1, exp.dim)]
    _write_csv([header] + [list(r) for r in scan], out_dir / "scan.csv")
    payload = {"config": exp.config, "resolved": _resolved_block(exp), "derivatives": rows}
    _write_json(payload, out_dir / "derivative.json")
    return payload


def cmd_semigroup(exp: Experiment, out_dir: Path) -> dict:
    """Run the full prediction verification for a sampled-family config."""
    if exp.semigroup is None:
        raise ConfigError("semigroup verification needs semigroup-sampled generators")
    report = verify_gap_predictions(exp.cocycle, exp.semigroup, exp.tolerances)
    payload = {"config": exp.config, "resolved": _resolved_block(exp), "report": report}
    _write_json(payload, out_dir / "semigroup.json")
    return payload


# ---------------------------------------------------------------------------
# verification battery


def _criterion(results: list, name: str, passed: bool, detail: str):
    results.append({"criterion": name, "passed": bool(passed), "detail": detail})


def _battery(exp: Experiment) -> list:
    results: list = []
    tol = exp.tolerances
    c = exp.cocycle
    rng = np.random.default_rng(2024)

    worst = 0.0
    for _ in range(200):
        g = rng.standard_normal((exp.dim, exp.dim))
        if np.linalg.det(g) < 0:
            g[:, 0] *= -1.0
        g /= np.linalg.det(g) ** (1.0 / exp.dim)
        scale = max(1.0, np.abs(g).max())
        fac = iwasawa(g)
        worst = max(worst, np.abs(fac.recompose() - g).max() / scale)
        pol = polar_chamber(g)
        worst = max(worst, np.abs(pol.recompose() - g).max() / scale)
    _criterion(results, "decomposition", worst <= tol.recon, f"max relative error {worst:.3e}")

    worst = 0.0
    for _ in range(20):
        x = int(rng.integers(c.base.n_points))
        n, m = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        lhs = cocycle_step(c, n + m, x)
        rhs = cocycle_step(c, n, _tau_power(c.base, x, m)) @ cocycle_step(c, m, x)
        worst = max(worst, np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max()))
    _criterion(results, "cocycle-identity", worst <= 1e-9, f"max relative defect {worst:.3e}")

    theta = section_flag_type(c)
    try:
        section = exp.solve_section(theta)
    except Exception as exc:  # noqa: BLE001 - verdict, not control flow
        _criterion(results, "section-residual", False, f"solver failed: {exc}")
        return results
    _criterion(
        results, "section-residual",
        section.residual is not None and section.residual <= exp.section_tol,
        f"residual {section.residual:.3e}",
    )

    dual = repeller_section(c, theta, tol=exp.section_tol, max_iter=exp.section_max_iter)
    verdicts = transversality_check(section, dual, tol)
    _criterion(results, "transversality", all(verdicts), f"per-point verdicts {verdicts}")

    if exp.weights:
        try:
            worst = 0.0
            for omega in exp.weights:
                a = spectrum_functional(c, omega)
                b = spectrum_via_section(c, omega, theta, section=section, tol=tol)
                worst = max(worst, abs(a - b))
            _criterion(results, "oracle-equivalence", worst <= 1e-8, f"max gap {worst:.3e}")

            worst = 0.0
            omega = exp.weights[0]
            flag = section.flags[0]
            base_val = cocycle_omega(c, omega, 1, 0, flag, tol)
            for _ in range(20):
                twist = _random_stabilizer(theta, rng)
                lifted = FlagPoint(theta=theta, frame=flag.frame @ twist)
                worst = max(worst, abs(cocycle_omega(c, omega, 1, 0, lifted, tol) - base_val))
            _criterion(results, "fiber-constancy", worst <= tol.recon, f"max variation {worst:.3e}")
        except WeightNotAdmissible as exc:
            _criterion(results, "oracle-equivalence", False, f"inadmissible weight: {exc}")

    if exp.gauge is not None and exp.weights:
        try:
            worst = 0.0
            for omega in exp.weights:
                analytic = analytic_differential(c, omega, exp.gauge, theta=theta, section=section, tol=tol)
                slope, _ = finite_difference(c, omega, exp.gauge, exp.fd_step)
                worst = max(worst, abs(analytic - slope) / (1.0 + abs(analytic)))
            _criterion(results, "differential-agreement", worst <= tol.fd_agreement, f"max residual {worst:.3e}")
        except WeightNotAdmissible as exc:
            _criterion(results, "differential-agreement", False, f"inadmissible weight: {exc}")

        if 1 not in theta.indices:
            lam1 = weight_combination([1.0] + [0.0] * (exp.dim - 2), exp.dim)
            fine = attractor_section(c, ThetaSet.projective(exp.dim), tol=1e-13, seed=exp.section_seed)
            fine_dual = repeller_section(c, ThetaSet.projective(exp.dim), tol=1e-13, seed=exp.section_seed)
            r = ruelle_differential(c, exp.gauge, sections=(fine, fine_dual))
            a = analytic_differential(
                c, lam1, exp.gauge, theta=ThetaSet.projective(exp.dim),
                section=fine, tol=tol,
            )
            _criterion(results, "ruelle-consistency", abs(r - a) <= 1e-10, f"|ruelle - analytic| = {abs(r - a):.3e}")

    if exp.semigroup is not None:
        try:
            verify_gap_predictions(c, exp.semigroup, tol)
            _criterion(results, "gap-predictions", True, "all predictions hold")
        except Exception as exc:  # noqa: BLE001
            _criterion(results, "gap-predictions", False, str(exc))

    return results


def _tau_power(base: BaseSystem, x: int, m: int) -> int:
    for _ in range(m):
        x = base.tau[x]
    return x


def _random_stabilizer(theta: ThetaSet, rng: np.random.Generator) -> np.ndarray:
    d = theta.dim
    out = np.zeros((d, d))
    start = 0
    for size in theta.block_sizes():
        q = np.linalg.qr(rng.standard_normal((size, size)))[0]
        if np.linalg.det(q) < 0:
            q = q.copy()
            q[:, 0] *= -1.0
        out[start:start + size, start:start + size] = q
        start += size
    return out


def cmd_verify(exp: Experiment, out_dir: Path, label: str = "config") -> dict:
    """Run the verification battery twice and include a determinism check."""
    results = _battery(exp)
    replay = Experiment(exp.config)
    replay_results = _battery(replay)
    first = json.dumps(results, sort_keys=True)
    second = json.dumps(replay_results, sort_keys=True)
    _criterion(results, "determinism", first == second, "battery replay is byte-identical")
    payload = {
        "config": exp.config,
        "resolved": _resolved_block(exp),
        "label": label,
        "results": results,
        "all_passed": all(r["passed"] for r in results),
    }
    _write_json(payload, out_dir / f"verify_{label}.json")
    return payload
