"""Command-line driver: ``movingsource run <config>`` and ``movingsource converge <config>``.

Configurations are flat text, one ``key = value`` per line, ``#`` starting a
comment. Results are written as space-separated numeric text plus one JSON
summary, so identical configurations produce bit-identical files.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 a ``--check``
expectation not met.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .core import (
    BadPartition,
    ConfigError,
    MovingSourceError,
    ProblemError,
    ProblemSpec,
    UnknownExample,
    WeightsNotNormalized,
)
from .problems import EXAMPLES, make_example
from .simulate import RunReport, run

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4

DEFAULT_LADDER = ((40, 40), (80, 160), (160, 640), (320, 2560))

_FLOAT_KEYS = ("T", "tau", "p", "mu", "s0")
_INT_KEYS = ("N", "L")
_KNOWN = {"example", "N", "L", "T", "tau", "theta", "p", "epsilon", "mu", "s0", "boundary",
          "points_per_subdomain", "mode", "snapshot_times", "out_dir", "ladder"}

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Parsed configuration: the problem plus options that are not part of it."""

    example: str
    spec: ProblemSpec
    mode: str = "pc"
    out_dir: Optional[str] = None
    ladder: tuple[tuple[int, int], ...] = DEFAULT_LADDER
    overrides: dict[str, Any] = field(default_factory=dict)

    def spec_for(self, N: int, L: int, mode: Optional[str] = None,
                 strict_paper_labc: bool = False) -> ProblemSpec:
        kw = dict(self.overrides, N=N, L=L, mode=mode or self.mode)
        kw.pop("points_per_subdomain", None)
        return make_example(self.example, strict_paper_labc=strict_paper_labc, **kw)


def _read_pairs(text: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        pairs[key] = (value, lineno)
    return pairs


def _number(value: str, kind, key: str, lineno: int):
    try:
        out = kind(value)
    except ValueError:
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, "
                          f"got {value!r}", lineno) from None
    if kind is float and not math.isfinite(out):
        raise ConfigError(f"{key} must be finite", lineno)
    return out


def _number_list(value: str, kind, key: str, lineno: int) -> list:
    items = [v.strip() for v in value.split(",")]
    if any(not v for v in items):
        raise ConfigError(f"{key} has an empty entry", lineno)
    return [_number(v, kind, key, lineno) for v in items]


def _ladder(value: str, lineno: int) -> tuple[tuple[int, int], ...]:
    rungs = []
    for item in value.split(","):
        parts = item.strip().split(":")
        if len(parts) != 2:
            raise ConfigError(f"ladder entries are N:L pairs, got {item.strip()!r}", lineno)
        rungs.append(tuple(_number(p.strip(), int, "ladder", lineno) for p in parts))
    return tuple(rungs)


def parse_config(text: str, strict_paper_labc: bool = False) -> RunConfig:
    """Parse a configuration into a validated problem and run options.

    Omitted keys take the preset defaults of the chosen example.
    """
    pairs = _read_pairs(text)
    for key, (_, lineno) in pairs.items():
        if key not in _KNOWN:
            raise ConfigError(f"unknown key {key!r}", lineno)
    if "example" not in pairs:
        raise ConfigError("missing required key 'example'")
    name, name_line = pairs["example"]
    if name not in EXAMPLES:
        raise ConfigError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}", name_line)

    kw: dict[str, Any] = {}
    for key in _INT_KEYS:
        if key in pairs:
            kw[key] = _number(pairs[key][0], int, key, pairs[key][1])
    for key in _FLOAT_KEYS:
        if key in pairs:
            kw[key] = _number(pairs[key][0], float, key, pairs[key][1])
    if "epsilon" in pairs:
        value, lineno = pairs["epsilon"]
        kw["epsilon"] = value.replace(" ", "") if "/" in value else _number(value, float,
                                                                            "epsilon", lineno)
    if "mode" in pairs:
        value, lineno = pairs["mode"]
        if value not in ("exact", "pc"):
            raise ConfigError(f"mode must be 'exact' or 'pc', got {value!r}", lineno)
        if value == "exact" and name != "example1":
            raise ConfigError("mode = exact needs the exact source motion of example1", lineno)
        kw["mode"] = value
    if "boundary" in pairs:
        value, lineno = pairs["boundary"]
        if value.lower() not in ("dirichlet", "labc"):
            raise ConfigError(f"boundary must be 'dirichlet' or 'labc', got {value!r}", lineno)
        if name == "example1" and value.lower() == "labc":
            raise ConfigError("example1 only supports Dirichlet boundaries", lineno)
        kw["boundary"] = value.lower()
    if "points_per_subdomain" in pairs:
        value, lineno = pairs["points_per_subdomain"]
        kw["points_per_subdomain"] = _number_list(value, int, "points_per_subdomain", lineno)
        if "N" in kw and sum(kw["points_per_subdomain"]) != kw["N"]:
            raise ConfigError(f"points_per_subdomain sums to {sum(kw['points_per_subdomain'])}, "
                              f"not N = {kw['N']}", lineno)

    try:
        base = make_example(name, strict_paper_labc=strict_paper_labc,
                            **{k: v for k, v in kw.items() if k != "points_per_subdomain"})
    except (ProblemError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    q = base.q

    if "theta" in pairs:
        value, lineno = pairs["theta"]
        theta = _number_list(value, float, "theta", lineno)
        if len(theta) != q + 2 and not (name == "example1" and len(theta) == 1):
            raise ConfigError(f"theta needs q+2 = {q + 2} entries for {name}, got {len(theta)}",
                              lineno)
        kw["theta"] = theta[0] if len(theta) == 1 else tuple(theta)
    snapshots: tuple[float, ...] = ()
    if "snapshot_times" in pairs:
        value, lineno = pairs["snapshot_times"]
        snapshots = tuple(_number_list(value, float, "snapshot_times", lineno))
        if any(t < 0 for t in snapshots):
            raise ConfigError("snapshot_times must be nonnegative", lineno)

    try:
        spec = make_example(name, strict_paper_labc=strict_paper_labc, **kw)
    except (ProblemError, ValueError) as exc:
        culprit = {WeightsNotNormalized: "theta", BadPartition: "points_per_subdomain"}
        key = next((k for cls, k in culprit.items() if isinstance(exc, cls)), None)
        raise ConfigError(str(exc), pairs[key][1] if key in pairs else None) from exc
    except UnknownExample as exc:  # pragma: no cover - names are checked above
        raise ConfigError(str(exc), name_line) from exc
    if snapshots:
        spec = replace(spec, snapshot_times=snapshots)

    cfg = RunConfig(example=name, spec=spec, mode=kw.get("mode", "pc"), overrides=kw)
    if "out_dir" in pairs:
        cfg.out_dir = pairs["out_dir"][0]
    if "ladder" in pairs:
        if name != "example1":
            raise ConfigError("ladder is only used by converge, which needs example1",
                              pairs["ladder"][1])
        cfg.ladder = _ladder(*pairs["ladder"])
    return cfg


# -- output -------------------------------------------------------------------

def _savetxt(path: Path, rows: np.ndarray, header: str) -> None:
    np.savetxt(path, np.atleast_2d(rows), fmt="%.17g", header=header)


def _as_builtin(obj):
    if isinstance(obj, dict):
        return {k: _as_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _as_builtin(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run_summary(report: RunReport) -> dict:
    """JSON-ready summary of a run (no wall-clock fields, so output is reproducible)."""
    blow = None
    if report.blow_up is not None:
        b = report.blow_up
        blow = {"time": b.time, "location": b.locations[0], "locations": b.locations,
                "peak": b.peak, "source_index": b.source_index, "source_values": b.source_values}
    return _as_builtin({
        "example": report.spec.name,
        "N": report.spec.N,
        "termination": report.termination,
        "final_time": report.final.time,
        "step_count": report.step_count,
        "rejections": report.rejections,
        "max_value": report.max_value,
        "blow_up": blow,
        "errors": report.errors,
        "newton": report.newton_stats(),
        "final_positions": report.sources.positions,
        "alpha_trajectories": report.source_trajectories,
    })


def write_run(report: RunReport, out: Path) -> list[Path]:
    """Write mesh trajectory, snapshots and summary; returns the paths written."""
    out.mkdir(parents=True, exist_ok=True)
    traj = report.mesh_trajectory
    if not np.all(np.diff(traj[:, 1:], axis=1) > 0):
        raise MovingSourceError("mesh trajectory row not strictly monotone")
    paths = [out / "mesh_trajectory.txt"]
    _savetxt(paths[0], traj, "t x_0 ... x_N")
    N = report.spec.N
    xi = np.arange(N + 1) / N
    for k, snap in enumerate(report.snapshots):
        p = out / f"snapshot_{k:03d}.txt"
        _savetxt(p, np.column_stack((snap.mesh.nodes, snap.values, xi)),
                 f"t = {snap.time!r}\nx u xi")
        paths.append(p)
    p = out / "summary.json"
    p.write_text(json.dumps(run_summary(report), indent=2) + "\n")
    paths.append(p)
    return paths


# -- commands -----------------------------------------------------------------

def cmd_run(cfg: RunConfig, out: Path, full: bool = False) -> tuple[RunReport, dict]:
    report = run(cfg.spec, max_rows=10**9 if full else 500)
    write_run(report, out)
    return report, run_summary(report)


def convergence_table(cfg: RunConfig, strict_paper_labc: bool = False) -> list[dict]:
    """E, E~ and E^alpha at T for each ladder rung, with ratios to the previous rung."""
    if cfg.example != "example1":
        raise ConfigError("converge needs example1, the only problem with an exact solution")
    rows: list[dict] = []
    for N, L in cfg.ladder:
        exact = run(cfg.spec_for(N, L, "exact", strict_paper_labc))
        pc = run(cfg.spec_for(N, L, "pc", strict_paper_labc))
        row = {"N": N, "L": L, "E": exact.errors["u_inf"], "E_tilde": pc.errors["u_inf"],
               "E_alpha": pc.errors["alpha"]}
        for key in ("E", "E_tilde", "E_alpha"):
            row[f"ratio_{key}"] = row[key] / rows[-1][key] if rows else None
        rows.append(row)
    return rows


def format_table(rows: list[dict]) -> str:
    cols = ("E", "ratio_E", "E_tilde", "ratio_E_tilde", "E_alpha", "ratio_E_alpha")
    lines = ["# N L " + " ".join(cols)]
    for r in rows:
        vals = ["-" if r[c] is None else f"{r[c]:.6e}" for c in cols]
        lines.append(f"{r['N']} {r['L']} " + " ".join(vals))
    return "\n".join(lines) + "\n"


def cmd_converge(cfg: RunConfig, out: Path, strict_paper_labc: bool = False) -> dict:
    rows = convergence_table(cfg, strict_paper_labc)
    out.mkdir(parents=True, exist_ok=True)
    (out / "convergence.txt").write_text(format_table(rows))
    summary = {"example": cfg.example, "rows": rows}
    (out / "convergence.json").write_text(json.dumps(_as_builtin(summary), indent=2) + "\n")
    return summary


# -- expectations -------------------------------------------------------------

def _lookup(summary: dict, path: str):
    cur: Any = summary
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def check_expectations(summary: dict, text: str) -> list[str]:
    """Compare summary fields against ``path = value [+- tol]`` lines.

    Paths are dotted keys into the summary (list entries by index, e.g.
    ``rows.0.E``). Numbers without a tolerance must match to 1e-9 relative;
    anything else must match as a string. Returns one message per failure.
    """
    failures = []
    for key, (value, lineno) in _read_pairs(text).items():
        try:
            got = _lookup(summary, key)
        except (KeyError, IndexError, ValueError):
            failures.append(f"line {lineno}: {key} not in results")
            continue
        want, _, tol = value.partition("+-")
        want = want.strip()
        try:
            target = float(want)
        except ValueError:
            if str(got) != want:
                failures.append(f"{key}: expected {want!r}, got {got!r}")
            continue
        if got is None or isinstance(got, (dict, list, str)):
            failures.append(f"{key}: expected a number near {target}, got {got!r}")
            continue
        bound = float(tol) if tol.strip() else 1e-9 * max(1.0, abs(target))
        if not abs(float(got) - target) <= bound:
            failures.append(f"{key}: {got!r} not within {bound:g} of {target!r}")
    return failures


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="movingsource",
        description="Moving-mesh solver for heat equations with traveling point sources.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "integrate one configuration"),
                        ("converge", "refinement study against the exact interface solution")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path, help="key = value configuration file")
        p.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
        p.add_argument("--strict-paper-labc", action="store_true",
                       help="use the variant right absorbing row whose last term is u_0, not u_N")
        p.add_argument("--check", type=Path,
                       help="file of 'path = value [+- tol]' expectations; exit 4 on mismatch")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "run":
            p.add_argument("--full", action="store_true",
                           help="write every time row of the mesh trajectory")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text()
        cfg = parse_config(text, strict_paper_labc=args.strict_paper_labc)
        expectations = args.check.read_text() if args.check else None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.out_dir or f"out_{cfg.example}")

    try:
        if args.command == "run":
            report, summary = cmd_run(cfg, out, full=args.full)
            b = report.blow_up
            print(f"{cfg.example}: {report.termination} at t={report.final.time:.15g} "
                  f"after {report.step_count} steps ({report.wall_time:.1f} s)")
            if b is not None:
                print(f"blow-up t={b.time:.15g} x={b.locations[0]:.15g} peak={b.peak:.6e} "
                      f"source={b.source_index}")
        else:
            summary = cmd_converge(cfg, out, strict_paper_labc=args.strict_paper_labc)
            print(format_table(summary["rows"]), end="")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MovingSourceError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"results in {out}")

    if expectations is not None:
        failures = check_expectations(_as_builtin(summary), expectations)
        for f in failures:
            print(f"check failed: {f}", file=sys.stderr)
        if failures:
            return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
