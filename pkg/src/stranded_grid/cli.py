"""``stranded-grid`` command line.

Exit codes: 0 success, 1 domain error (invalid model, failed cell,
exhausted budget), 2 I/O or usage error.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import reports
from .cases import CaseSpec, dispatch_ensemble, run_experiment
from .dispatch import DispatchError
from .lp import BACKENDS, LpError
from .metrics import check_identities, metric_report, wind_penetration
from .network import NetworkError, load_network, network_from_dict, validate_network
from .placement import PlacementConfig, PlacementError, evaluate_placement, solve_placement
from .scenario import DAY_TYPES, ScenarioError, ScenarioSet, load_scenarios, scale_to_penetration

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
DOMAIN_ERRORS = (NetworkError, ScenarioError, DispatchError, PlacementError, LpError)


class DomainFailure(click.ClickException):
    exit_code = EXIT_DOMAIN


class IoFailure(click.ClickException):
    exit_code = EXIT_IO


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise IoFailure(f"{path} is not valid JSON: {exc}")


def _network(path: Path):
    doc = _read_json(path)
    try:
        return load_network(doc)
    except NetworkError as exc:
        raise DomainFailure(str(exc))


def _scenarios(path: Path | None, net, day: str | None):
    if path is None:
        return ScenarioSet.deterministic(net, day)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}")
    try:
        return load_scenarios(text, net, day)
    except ScenarioError as exc:
        raise DomainFailure(str(exc))


def _out_dir(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc.strerror or exc}")
    return out


def _now():
    return datetime.now(timezone.utc)


day_option = click.option("--day", default=None, type=click.Choice([d.name for d in DAY_TYPES]),
                          help="Day type whose load, import and renewable profiles apply.")
threads_option = click.option("--threads", type=click.IntRange(min=1), default=None,
                              help="Concurrent subproblem solves (default: $STRANDED_GRID_THREADS or CPU count).")
backend_option = click.option("--backend", type=click.Choice(BACKENDS), default=None, help="LP backend.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Economic dispatch, stranded power and data-center placement."""


@main.command()
@click.argument("network", type=click.Path(path_type=Path))
def validate(network):
    """Check a network document and list problems."""
    doc = _read_json(network)
    try:
        net = network_from_dict(doc)
    except NetworkError as exc:
        click.echo(f"error: {exc}")
        sys.exit(EXIT_DOMAIN)
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: malformed network document: {exc}")
        sys.exit(EXIT_DOMAIN)
    report = validate_network(net)
    for line in report.lines():
        click.echo(line)
    if report.ok:
        click.echo(f"ok: {len(net.buses)} buses, {len(net.lines)} lines, horizon {net.horizon}")
    sys.exit(EXIT_OK if report.ok else EXIT_DOMAIN)


@main.command()
@click.option("--net", "network", required=True, type=click.Path(path_type=Path))
@click.option("--scenarios", type=click.Path(path_type=Path), default=None,
              help="Scenario CSV; without it the farms' attached trajectories are used.")
@click.option("--scenario", "scenario_id", default=None, help="Dispatch only this scenario id.")
@day_option
@click.option("--level", type=click.FloatRange(min=0), default=None,
              help="Rescale wind to this fraction of demand (0.15 = 15%).")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@threads_option
@backend_option
def dispatch(network, scenarios, scenario_id, day, level, out, threads, backend):
    """Solve the dispatch for one or every wind scenario."""
    started = _now()
    net = _network(network)
    try:
        day_net = net.for_day(day)
        sset = _scenarios(scenarios, net, day)
        if scenario_id is not None:
            picked = [s for s in sset.scenarios if s.id == scenario_id]
            if not picked:
                raise DomainFailure(f"no scenario {scenario_id!r} in {scenarios}")
            sset = ScenarioSet(tuple(picked), sset.day_type)
        if level is not None:
            sset = scale_to_penetration(sset, day_net, level)
        sols = dispatch_ensemble(day_net, sset, threads=threads, backend=backend)
    except DOMAIN_ERRORS as exc:
        raise DomainFailure(str(exc))
    out = _out_dir(out)
    reps = [metric_report(s) for s in sols]
    for sid, rep in zip(sset.ids, reps):
        bad = check_identities(rep)
        if bad:
            raise DomainFailure(f"scenario {sid}: {', '.join(bad)}")
    probs = sset.probabilities
    files = [
        reports.write_csv(out / "dispatch.csv", ("scenario", "symbol", "index", "period", "value"),
                          ((sid, *row) for sid, s in zip(sset.ids, sols) for row in reports.dispatch_rows(s))),
        reports.write_csv(out / "lmp.csv", ("scenario", "bus", "period", "lmp"),
                          ((sid, *row) for sid, s in zip(sset.ids, sols) for row in reports.lmp_rows(s))),
        reports.write_csv(out / "metrics.csv", reports.metrics_header(()),
                          reports.metric_rows((), sset.ids, probs, reps)),
    ]
    details = {"day": day, "level": level, "scenarios": len(sols),
               "wind_penetration_percent": wind_penetration(sset, day_net),
               "expected_cost": float(probs @ np.array([r.cost for r in reps]))}
    inputs = [network] + ([scenarios] if scenarios else [])
    config = {"net": str(network), "scenarios": str(scenarios), "scenario": scenario_id, "day": day,
              "level": level, "backend": backend}
    reports.write_manifest(out, "dispatch", config, inputs, files, "ok", started, details)
    click.echo(f"dispatched {len(sols)} scenario(s); expected cost {details['expected_cost']:.6g}")


@main.command()
@click.option("--net", "network", required=True, type=click.Path(path_type=Path))
@click.option("--scenarios", type=click.Path(path_type=Path), default=None)
@click.option("--k", "K", required=True, type=click.IntRange(min=0), help="Number of dispatchable loads.")
@click.option("--u", "U", required=True, type=click.FloatRange(min=0), help="MW per dispatchable load.")
@click.option("--method", type=click.Choice(["benders", "detequiv"]), default="benders", show_default=True)
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-6, show_default=True)
@click.option("--cut-mode", type=click.Choice(["single", "multi"]), default="single", show_default=True)
@click.option("--max-iterations", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--candidates", default=None, help="Comma-separated candidate buses (default: all).")
@day_option
@click.option("--level", type=click.FloatRange(min=0), default=None)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@threads_option
@backend_option
def place(network, scenarios, K, U, method, tol, cut_mode, max_iterations, candidates, day, level, out,
          threads, backend):
    """Choose where K dispatchable loads of U MW go."""
    started = _now()
    net = _network(network)
    try:
        day_net = net.for_day(day)
        sset = _scenarios(scenarios, net, day)
        if level is not None:
            sset = scale_to_penetration(sset, day_net, level)
        cfg = PlacementConfig(K=K, U=U, tol=tol, cut_mode=cut_mode, max_iterations=max_iterations,
                              candidates=tuple(candidates.split(",")) if candidates else None, backend=backend)
        sol = solve_placement(day_net, sset, cfg, method=method, threads=threads)
        expected, reps, _ = evaluate_placement(sol.x, day_net, sset, U, threads=threads, backend=backend)
    except DOMAIN_ERRORS as exc:
        raise DomainFailure(str(exc))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    out = _out_dir(out)
    files = [
        reports.write_csv(out / "placement.csv", ("bus", "x"), reports.placement_rows(sol)),
        reports.write_csv(out / "metrics.csv", reports.metrics_header(()),
                          reports.metric_rows((), sset.ids, sset.probabilities, reps)),
    ]
    if method == "benders":
        files.append(reports.write_csv(out / "convergence.csv", reports.CONVERGENCE_HEADER,
                                       reports.convergence_rows(sol)))
    status = "budget_exhausted" if sol.budget_exhausted else "ok"
    details = {"method": method, "objective": sol.objective, "expected_cost": expected, "gap": sol.gap,
               "iterations": len(sol.log), "placement": sol.as_dict(), "budget_exhausted": sol.budget_exhausted}
    config = {"net": str(network), "scenarios": str(scenarios), "K": K, "U": U, "method": method, "tol": tol,
              "cut_mode": cut_mode, "max_iterations": max_iterations, "candidates": candidates, "day": day,
              "level": level, "backend": backend}
    inputs = [network] + ([scenarios] if scenarios else [])
    reports.write_manifest(out, "place", config, inputs, files, status, started, details)
    placed = ", ".join(f"{b}={x}" for b, x in sol.as_dict().items() if x)
    click.echo(f"{method}: expected cost {expected:.10g}; placement {placed or 'none'}")
    if sol.budget_exhausted:
        raise DomainFailure(f"iteration budget exhausted with gap {sol.gap:.3g}")


def _experiment_config(path: Path) -> dict:
    cfg = _read_json(path)
    missing = [k for k in ("network", "scenarios", "day_types", "wind_levels", "cases") if k not in cfg]
    if missing:
        raise click.UsageError(f"experiment config {path} lacks {', '.join(missing)}")
    return cfg


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output directory (default: the config's 'output', relative to the config file).")
@threads_option
def experiment(config_path, out, threads):
    """Run the case and wind-level sweep described by a JSON config."""
    started = _now()
    cfg = _experiment_config(config_path)
    root = config_path.parent
    net_path = root / cfg["network"]
    net = _network(net_path)
    scenario_paths = {k: root / v for k, v in cfg["scenarios"].items()}
    try:
        sets = {k: load_scenarios(_read_text(p), net) for k, p in scenario_paths.items()}
        specs = [CaseSpec.from_dict(c) for c in cfg["cases"]]
    except ScenarioError as exc:
        raise DomainFailure(str(exc))
    except (KeyError, ValueError) as exc:
        raise click.UsageError(f"bad case spec: {exc}")
    pcfg = dict(cfg.get("placement", {}))
    method = pcfg.pop("method", "benders")
    report = run_experiment(net, specs, sets, [float(x) for x in cfg["wind_levels"]], cfg["day_types"],
                            method=method, placement_options=pcfg, threads=threads, backend=cfg.get("backend"))
    out = _out_dir(out if out is not None else root / cfg.get("output", "out"))
    files = reports.write_experiment(report, out, timings=bool(cfg.get("record_timings", False)))
    failed = report.failures
    details = {"cells": len(report.cells), "failed": [f"{c.key}: {c.error}" for c in failed]}
    reports.write_manifest(out, "experiment", cfg, [config_path, net_path, *scenario_paths.values()], files,
                           "failed" if failed else "ok", started, details)
    click.echo(f"{len(report.cells)} cells, {len(failed)} failed; outputs in {out}")
    for c in failed:
        click.echo(f"  {c.key}: {c.error}", err=True)
    if failed:
        sys.exit(EXIT_DOMAIN)


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}")


if __name__ == "__main__":  # pragma: no cover
    main()
