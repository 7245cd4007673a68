"""Command-line interface: validate, analyze, sweep and the sub-pipelines.

Exit codes are a stable contract: 0 success, 2 the no-finite-orbit check
failed, 3 malformed input, 4 a theorem check failed (the report is still
written).
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import fixtures

from .errors import SpecFormatError
from .homeo import PiecewiseLinear
from .minimal import GridApprox, minimal_sets, refine
from .rds import (
    SystemSpec,
    invert_system,
    load_system,
    save_system,
    system_to_json,
    uniforms,
    validate_no_finite_orbit,
)
from .reporting import (
    canonical_json,
    measure_cdf_csv,
    measure_to_csv,
    profile_to_csv,
    weight_curves_csv,
    write_json,
)
from .structure import (
    check_gap_property,
    check_permutation_property,
    profile_agreement,
    e_family,
    gap_families,
    check_gap_inverse_invariance,
    inverse_comparison,
    level_one_families,
    neighbor_analysis,
    proximal_decomposition,
    routing_audit,
    synchronization_test,
)
from .transfer import TransferOperator, decompose, stationary_measures
from .weights import (
    MCConfig,
    transition_zones,
    verify_weight_theorems,
    weight_profile,
)
from .mc import OrbitEngine, build_regions


@dataclass(frozen=True)
class RunConfig:
    """Every knob of the pipeline; embedded verbatim in all reports."""

    resolution: int = 2**12
    refine_target: int = 2**14
    probe_count: int = 512
    samples: int = 4000
    orbit_length: int = 2000
    burn_in: int = 1000
    eps_cluster: str = "1/1024"
    delta_one: float = 0.02
    l_max: int = 12
    hat_budget: int = 10**6
    routing_budget: int = 10**5
    tol_sigma: float = 4.0
    noise: float = 0.01
    pinv_probes: int = 100
    sync_pairs: int = 200
    sync_steps: int = 2000
    crosscheck_probes: int = 20
    transfer_steps: int = 4000
    max_period: int = 6
    search_budget: int = 10**6
    seed: int = 0
    workers: int = 1
    out_dir: str = "out"

    def mc(self) -> MCConfig:
        return MCConfig(
            n_steps=self.orbit_length,
            burn=self.burn_in,
            eps_cluster=Fraction(self.eps_cluster),
            samples=self.samples,
        )


def load_config(path: str | None, overrides: dict) -> RunConfig:
    base = RunConfig()
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise SpecFormatError(f"cannot read config {path}: {e}") from e
        unknown = set(raw) - set(asdict(base))
        if unknown:
            raise SpecFormatError(f"unknown config keys {sorted(unknown)}")
        base = replace(base, **raw)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(base, **overrides)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def run_analysis(system: SystemSpec, cfg: RunConfig) -> dict:
    """Full pipeline; returns the report dictionary plus artifacts."""
    cfg_dict = asdict(cfg)
    # execution environment, not analysis parameters: results never depend
    # on these, and reports must be byte-identical across worker counts
    cfg_dict.pop("workers")
    cfg_dict.pop("out_dir")
    report: dict = {
        "label": system.label,
        "config": cfg_dict,
        "system": system_to_json(system),
        "checks": {},
    }
    grid = GridApprox(cfg.resolution)

    ks = minimal_sets(system, grid)
    fine, stable = refine(system, ks, cfg.refine_target)
    report["minimal"] = {
        "d": len(ks),
        "resolution": cfg.resolution,
        "stable": stable,
        "refine_target": cfg.refine_target,
        "minimal_sets": [
            {
                "index": ms.index,
                "cells": ms.cell_count,
                "arcs": [["full", "full"] if a.full else
                         [str(a.lo.value), str(a.hi.value)]
                         for a in ms.arcs.arcs()],
            }
            for ms in ks
        ],
    }

    mc_cfg = cfg.mc()
    regions = build_regions(ks, mc_cfg.eps_cluster)
    engine = OrbitEngine(system, regions, cfg.seed)
    profile = weight_profile(system, ks, cfg.probe_count, mc_cfg, cfg.seed)
    theorem_report = verify_weight_theorems(
        profile, system, ks,
        tol_sigma=cfg.tol_sigma, delta_one=cfg.delta_one,
        pinv_probes=cfg.pinv_probes, noise=cfg.noise, engine=engine,
    )
    report["weights"] = theorem_report.as_dict()
    report["checks"].update(
        {f"weights.{k}": v["passed"] for k, v in report["weights"].items()}
    )

    a_fams = level_one_families(system, ks)
    agree = profile_agreement(a_fams, profile, cfg.delta_one)
    report["checks"]["structure.level_one_profile_agreement"] = agree.passed
    e_fams = [e_family(system, ks, i + 1) for i in range(len(ks))]
    structure: dict = {
        "level_one_profile_agreement": {"passed": agree.passed,
                                        **agree.details},
        "a_families": [f.as_dict() for f in a_fams],
        "e_families": [f.as_dict() for f in e_fams],
        "hat_points": [],
        "permutation": {},
        "routing": {},
        "synchronization": [],
    }
    for fam in a_fams + e_fams:
        res = check_permutation_property(system, fam)
        structure["permutation"][res.name] = {"passed": res.passed,
                                              **res.details}
        report["checks"][f"structure.{res.name}"] = res.passed
    b_fams = []
    for fam in a_fams:
        b, hats, check = proximal_decomposition(
            system, fam, ks, l_max=cfg.l_max, budget=cfg.hat_budget
        )
        b_fams.append(b)
        structure["hat_points"].extend(h.as_dict() for h in hats)
        structure[f"b_family_{fam.owner}"] = b.as_dict()
        report["checks"][f"structure.{check.name}"] = check.passed
        for arc, h in zip(fam.arcs, hats):
            if h.case == "split":
                audit = routing_audit(system, arc, h, l_max=cfg.l_max,
                                      budget=cfg.routing_budget)
                key = f"routing_{fam.owner}_{arc.lo.value}"
                structure["routing"][key] = {"passed": audit.passed,
                                             **audit.details}
                report["checks"][f"structure.{key}"] = audit.passed
    sync_pass = True
    for b in b_fams:
        for arc in b.arcs:
            if arc.full:
                continue
            out = synchronization_test(
                system, arc, pairs=cfg.sync_pairs, n_steps=cfg.sync_steps,
                eps=Fraction(cfg.eps_cluster), seed=cfg.seed,
            )
            out["owner"] = b.owner
            out["arc"] = [str(arc.lo.value), str(arc.hi.value)]
            structure["synchronization"].append(out)
            sync_pass &= out["fraction_synchronized"] >= 0.99
    if structure["synchronization"]:
        report["checks"]["structure.synchronization"] = sync_pass

    graph = neighbor_analysis(profile, noise=cfg.noise,
                              delta_one=cfg.delta_one)
    structure["neighbors"] = graph.as_dict()
    for c in graph.checks:
        report["checks"][f"neighbors.{c.name}"] = c.passed

    gaps = gap_families(a_fams, ordered=False)
    structure["gap_families"] = [f.as_dict() for f in gaps]
    if gaps:
        ginv = check_gap_inverse_invariance(system, gaps)
        structure["gap_invariance"] = {"passed": ginv.passed, **ginv.details}
        report["checks"]["structure.gap_inverse_invariance"] = ginv.passed
    gp = check_gap_property(a_fams, profile, cfg.delta_one)
    structure["same_owner_gap_property"] = {"passed": gp.passed, **gp.details}
    report["checks"]["structure.same_owner_gap_property"] = gp.passed
    report["structure"] = structure

    cmp_ = inverse_comparison(system, grid)
    report["inverse"] = cmp_.as_dict()
    report["inverse"]["minimal_sets"] = [
        {"index": ms.index,
         "arcs": [["full", "full"] if a.full else
                  [str(a.lo.value), str(a.hi.value)] for a in ms.arcs.arcs()]}
        for ms in cmp_.backward_sets
    ]
    for c in cmp_.checks:
        report["checks"][f"inverse.{c.name}"] = c.passed

    op = TransferOperator(system, cfg.resolution)
    mus = stationary_measures(system, ks, cfg.transfer_steps, operator=op)
    crosscheck = _transfer_crosscheck(system, ks, profile, op, mus, cfg)
    report["transfer"] = crosscheck
    report["checks"]["transfer.decomposition_matches_weights"] = (
        crosscheck["passed"]
    )

    report["all_passed"] = all(report["checks"].values())
    return {
        "report": report,
        "profile": profile,
        "measures": mus,
        "ks": ks,
        "inverse_sets": cmp_.backward_sets,
    }


def _transfer_crosscheck(system, ks, profile, op, mus, cfg: RunConfig) -> dict:
    """Compare the Cesàro-average decomposition with the weight estimates."""
    zones = transition_zones(profile, cfg.delta_one)
    zone_probes = [k for z in zones for k in z.probe_indices]
    if not zone_probes:
        return {"passed": True, "probes": [], "note": "no transition zones"}
    step = max(1, len(zone_probes) // cfg.crosscheck_probes)
    chosen = zone_probes[::step][: cfg.crosscheck_probes]
    boundary_allowance = []
    for mu in mus:
        cells = mu.support_cells()
        runs = 1 + int(np.sum(np.diff(cells) > 1)) if len(cells) else 0
        boundary_allowance.append(2 * (2 * runs) / op.resolution)
    rows = []
    passed = True
    for k in chosen:
        est = profile.estimates[k]
        avg = op.cesaro_average(est.point, cfg.transfer_steps)
        t, residual = decompose(avg, mus)
        tol = cfg.tol_sigma * est.stderr + np.array(boundary_allowance)
        ok = bool(np.all(np.abs(t - est.values) <= tol))
        passed &= ok
        rows.append({
            "probe": str(est.point.value),
            "coefficients": t.tolist(),
            "weights": est.values.tolist(),
            "residual": residual,
            "ok": ok,
        })
    return {"passed": passed, "probes": rows}


def write_artifacts(out_dir: Path, result: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "report.json", result["report"])
    (out_dir / "profile.csv").write_text(profile_to_csv(result["profile"]),
                                         encoding="utf-8")
    mdir = out_dir / "measures"
    mdir.mkdir(exist_ok=True)
    pdir = out_dir / "plotdata"
    pdir.mkdir(exist_ok=True)
    for i, mu in enumerate(result["measures"]):
        (mdir / f"measure_{i + 1}.csv").write_text(measure_to_csv(mu),
                                                   encoding="utf-8")
        (pdir / f"measure_cdf_{i + 1}.csv").write_text(
            measure_cdf_csv(mu), encoding="utf-8"
        )
    for name, text in weight_curves_csv(result["profile"]).items():
        (pdir / name).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Random system generation for the sweep
# ---------------------------------------------------------------------------


def _rand_ints(seed: int, stream: int, count: int, span: int) -> list[int]:
    u = uniforms(seed, np.full(count, stream, dtype=np.uint64),
                 np.arange(count, dtype=np.uint64))
    return [int(v) for v in (u * span).astype(int)]


def random_system(seed: int, index: int, mixed: bool) -> SystemSpec:
    """Deterministic random PL system on the 1/64 dyadic grid."""
    den = 64
    stream = index * 97
    n_maps = 2 + _rand_ints(seed, stream, 1, 2)[0]
    maps = []
    for k in range(n_maps):
        m = 4 + _rand_ints(seed, stream + k + 1, 1, 5)[0]
        draws = _rand_ints(seed, stream + 10 + k, 4 * m, den)
        xs = sorted(set(draws[:2 * m]))[:m]
        ys = sorted(set(draws[2 * m:]))[:m]
        while len(xs) < m:
            xs.append((xs[-1] + 1) % den)
            xs = sorted(set(xs))
        while len(ys) < m:
            ys.append((ys[-1] + 1) % den)
            ys = sorted(set(ys))
        shift = _rand_ints(seed, stream + 50 + k, 1, m)[0]
        ys = ys[shift:] + ys[:shift]
        reversing = mixed and _rand_ints(seed, stream + 70 + k, 1, 2)[0] == 1
        if reversing:
            ys = ys[::-1]
        maps.append(PiecewiseLinear(
            tuple(Fraction(x, den) for x in xs),
            tuple(Fraction(y, den) for y in ys),
            reversing=reversing,
        ))
    w = Fraction(1, n_maps)
    weights = tuple([w] * (n_maps - 1) + [1 - w * (n_maps - 1)])
    return SystemSpec(maps=maps, weights=weights,
                      label=f"sweep_{index}")


def run_sweep(count: int, mixed: bool, cfg: RunConfig, out_dir: Path) -> dict:
    accepted = 0
    tried = 0
    results = []
    violations = []
    while accepted < count and tried < 50 * count:
        system = random_system(cfg.seed, tried, mixed)
        tried += 1
        rep = validate_no_finite_orbit(system, cfg.max_period,
                                       cfg.search_budget)
        if not rep.passed:
            continue
        accepted += 1
        cmp_ = inverse_comparison(system, GridApprox(cfg.resolution),
                                  refine_target=2 * cfg.resolution)
        entry = {
            "index": tried - 1,
            "d_plus": cmp_.d_plus,
            "d_minus": cmp_.d_minus,
            "passed": cmp_.all_passed,
        }
        results.append(entry)
        if not cmp_.all_passed:
            out_dir.mkdir(parents=True, exist_ok=True)
            dump = out_dir / f"violation_{tried - 1}.json"
            save_system(system, dump)
            violations.append(str(dump))
    cfg_dict = asdict(cfg)
    cfg_dict.pop("workers")
    cfg_dict.pop("out_dir")
    return {
        "family": "mixed" if mixed else "preserving",
        "requested": count,
        "generated": accepted,
        "tried": tried,
        "results": results,
        "violations": violations,
        "config": cfg_dict,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


_CONFIG_OPTIONS = [
    click.option("--seed", type=int, default=None, help="Base RNG seed."),
    click.option("--resolution", type=int, default=None,
                 help="Grid resolution (power of two)."),
    click.option("--workers", type=int, default=None,
                 help="Worker cap (results never depend on it)."),
    click.option("--out", "out_dir", type=str, default=None,
                 help="Output directory."),
    click.option("--config", "config_path", type=str, default=None,
                 help="JSON config file (RunConfig fields)."),
]


def _with_config_options(fn):
    for opt in reversed(_CONFIG_OPTIONS):
        fn = opt(fn)
    return fn


def _build_config(config_path, **overrides) -> RunConfig:
    return load_config(config_path, overrides)


def _load(spec_path: str) -> SystemSpec:
    try:
        return load_system(spec_path)
    except SpecFormatError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(3)


@click.group()
def main():
    """Structure analysis of random systems of circle homeomorphisms."""


@main.command()
@click.argument("spec_path")
@_with_config_options
def validate(spec_path, seed, resolution, workers, out_dir, config_path):
    """Schema check plus the bounded no-finite-orbit search."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    rep = validate_no_finite_orbit(system, cfg.max_period, cfg.search_budget)
    payload = {
        "label": system.label,
        "passed": rep.passed,
        "max_period": rep.max_period,
        "witness": [str(p.value) for p in rep.witness],
        "note": rep.note,
    }
    click.echo(canonical_json(payload), nl=False)
    if not rep.passed:
        sys.exit(2)


@main.command()
@click.argument("spec_path")
@_with_config_options
def analyze(spec_path, seed, resolution, workers, out_dir, config_path):
    """Full pipeline: minimal sets, weights, structure, transfer, checks."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    rep = validate_no_finite_orbit(system, cfg.max_period, cfg.search_budget)
    if not rep.passed:
        click.echo("error: system has a finite invariant set", err=True)
        sys.exit(2)
    result = run_analysis(system, cfg)
    write_artifacts(Path(cfg.out_dir), result)
    ok = result["report"]["all_passed"]
    click.echo(f"report written to {cfg.out_dir}/report.json; "
               f"{'all checks passed' if ok else 'SOME CHECKS FAILED'}")
    if not ok:
        sys.exit(4)


@main.command()
@click.argument("spec_path")
@_with_config_options
def minimal(spec_path, seed, resolution, workers, out_dir, config_path):
    """Minimal sets and refinement stability only."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    ks = minimal_sets(system, GridApprox(cfg.resolution))
    fine, stable = refine(system, ks, cfg.refine_target)
    payload = {
        "d": len(ks),
        "resolution": cfg.resolution,
        "stable": stable,
        "minimal_sets": [
            {"index": ms.index, "cells": ms.cell_count,
             "arcs": [["full", "full"] if a.full else
                      [str(a.lo.value), str(a.hi.value)]
                      for a in ms.arcs.arcs()]}
            for ms in ks
        ],
    }
    click.echo(canonical_json(payload), nl=False)


@main.command()
@click.argument("spec_path")
@_with_config_options
def weights(spec_path, seed, resolution, workers, out_dir, config_path):
    """Weight profile and the profile-level theorem checks."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    ks = minimal_sets(system, GridApprox(cfg.resolution))
    profile = weight_profile(system, ks, cfg.probe_count, cfg.mc(), cfg.seed)
    rep = verify_weight_theorems(profile, system, ks, tol_sigma=cfg.tol_sigma,
                                 delta_one=cfg.delta_one,
                                 pinv_probes=cfg.pinv_probes, noise=cfg.noise)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profile.csv").write_text(profile_to_csv(profile), encoding="utf-8")
    click.echo(canonical_json(rep.as_dict()), nl=False)
    if not rep.all_passed:
        sys.exit(4)


@main.command()
@click.argument("spec_path")
@_with_config_options
def structure(spec_path, seed, resolution, workers, out_dir, config_path):
    """Interval families, hat points, neighbors (needs a weight profile)."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    result = run_analysis(system, cfg)
    payload = result["report"]["structure"]
    click.echo(canonical_json(payload), nl=False)


@main.command()
@click.argument("spec_path")
@_with_config_options
def inverse(spec_path, seed, resolution, workers, out_dir, config_path):
    """Minimal-set counts of the system and its inverse, with gap checks."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    cmp_ = inverse_comparison(system, GridApprox(cfg.resolution))
    click.echo(canonical_json(cmp_.as_dict()), nl=False)
    if not cmp_.all_passed:
        sys.exit(4)


@main.command()
@click.argument("spec_path")
@_with_config_options
def transfer(spec_path, seed, resolution, workers, out_dir, config_path):
    """Stationary measures and their export."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    system = _load(spec_path)
    ks = minimal_sets(system, GridApprox(cfg.resolution))
    op = TransferOperator(system, cfg.resolution)
    mus = stationary_measures(system, ks, cfg.transfer_steps, operator=op)
    out = Path(cfg.out_dir)
    (out / "measures").mkdir(parents=True, exist_ok=True)
    for i, mu in enumerate(mus):
        (out / "measures" / f"measure_{i + 1}.csv").write_text(
            measure_to_csv(mu), encoding="utf-8"
        )
    click.echo(canonical_json({"measures": len(mus),
                               "resolution": cfg.resolution}), nl=False)


@main.command()
@click.option("--count", type=int, default=50, help="Systems per family.")
@click.option("--family", type=click.Choice(["mixed", "preserving"]),
              default="mixed")
@_with_config_options
def sweep(count, family, seed, resolution, workers, out_dir, config_path):
    """Randomized search for counterexamples to the count relations."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    out = Path(cfg.out_dir)
    agg = run_sweep(count, family == "mixed", cfg, out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "sweep.json", agg)
    click.echo(canonical_json({k: agg[k] for k in
                               ("family", "generated", "violations")}),
               nl=False)
    if agg["violations"]:
        sys.exit(4)


@main.command()
@_with_config_options
def demo(seed, resolution, workers, out_dir, config_path):
    """Write the built-in example systems as spec files."""
    cfg = _build_config(config_path, seed=seed, resolution=resolution,
                        workers=workers, out_dir=out_dir)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(fixtures.BUILTIN_SYSTEMS):
        save_system(fixtures.builtin(name), out / f"{name}.json")
    click.echo(f"wrote {len(fixtures.BUILTIN_SYSTEMS)} spec files to {out}")


if __name__ == "__main__":
    main()
