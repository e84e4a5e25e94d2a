"""``embedlab`` command line.

Exit codes: 0 ok, 1 property failure, 2 parse error, 3 validation error,
4 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, attacks, checks, embeddings as em, linalg, primitives, probdist as pd
from .errors import DimensionTooLarge, EmbedLabError, ParseError, ValidationError
from .optimize import OptimizerConfig, minimize_leakage

EXIT_OK, EXIT_PROPERTY, EXIT_PARSE, EXIT_VALIDATION, EXIT_RESOURCE = 0, 1, 2, 3, 4

TABLE1_COLUMNS = ["row", "parameter", "reference_value", "computed", "abs_diff", "method"]


@dataclass
class RunManifest:
    command: str
    arguments: list[str]
    seed: int | None
    tool_version: str = __version__
    backend: str = linalg.BACKEND
    python: str = field(default_factory=platform.python_version)
    wall_time: float = 0.0
    results: Any = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "backend": self.backend,
            "python": self.python,
            "wall_time": self.wall_time,
            "results": self.results,
        }

    @classmethod
    def load(cls, path) -> "RunManifest":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**d)


def _round(obj, digits: int = 12):
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}") if math.isfinite(obj) else obj
    if isinstance(obj, (np.floating,)):
        return _round(float(obj), digits)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    return obj


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{v:.6g}"
    return str(v)


def _load_primitive(target: str) -> pd.JointDistribution:
    path = Path(target)
    if path.suffix == ".json" or path.exists():
        try:
            return pd.JointDistribution.load(path)
        except FileNotFoundError:
            raise ParseError(f"no such file: {target}") from None
    return primitives.resolve(target).dist


def _floats(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.replace(",", " ").split()]
    except ValueError:
        raise ParseError(f"could not parse number list {raw!r}") from None


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, ftol=args.ftol, seed=args.seed)


# ----------------------------------------------------------------------
# commands; each returns (results, exit code, text rendering)


def cmd_analyze(args):
    P = _load_primitive(args.target)
    gauge = em.free_phase_coordinates(P)
    if args.phases and args.coords:
        raise ParseError("give either --phases or --coords, not both")
    if args.phases:
        phases = em.PhaseAssignment(P, _floats(args.phases))
    elif args.coords:
        phases = gauge.embed(_floats(args.coords))
    else:
        phases = em.PhaseAssignment.zeros(P)
    rep = em.leakage_regular(em.build_regular(P, phases))
    triv = pd.is_trivial(P, tol=args.tol)
    comps = pd.connected_components(P)
    dep_x = pd.dependent_part(P, of="x", tol=args.tol)
    dep_y = pd.dependent_part(P, of="y", tol=args.tol)
    results = {
        "shape": list(P.shape),
        "H_X": pd.shannon_entropy(P.px),
        "H_Y": pd.shannon_entropy(P.py),
        "I_XY": pd.mutual_information(P),
        "H_X_given_Y": pd.conditional_entropy(P, given="y"),
        "H_Y_given_X": pd.conditional_entropy(P, given="x"),
        "trivial": triv.trivial,
        "H_Xdep_given_Y": triv.h_xdep_given_y,
        "H_Ydep_given_X": triv.h_ydep_given_x,
        "components": comps.count,
        "component_weights": list(comps.weights),
        "dependent_classes_x": dep_x.n_classes,
        "dependent_classes_y": dep_y.n_classes,
        "free_phase_coordinates": gauge.count,
        "phases": phases.values.tolist(),
        "leakage": rep.to_dict(),
    }
    rows = [(k, v) for k, v in results.items() if k not in ("phases", "leakage", "component_weights")]
    rows += [(f"leakage.{k}", v) for k, v in rep.to_dict().items()]
    text = "\n".join(f"{k:<24} {_fmt(v)}" for k, v in rows)
    return results, EXIT_OK, text


def cmd_minimize(args):
    P = _load_primitive(args.target)
    res = minimize_leakage(P, _config(args))
    results = res.to_dict()
    results["best_phases"] = {f"{x}|{y}": v for (x, y), v in res.best_phases.as_mapping().items()}
    results["canonical_delta"] = em.leakage_regular(em.canonical(P)).delta
    lines = [
        f"best_delta      {_fmt(res.best_delta)}",
        f"canonical_delta {_fmt(results['canonical_delta'])}",
        f"free coords     {res.count}",
        f"best restart    {res.best_restart}",
        f"best coords     {' '.join(_fmt(c) for c in res.best_coords)}",
    ]
    return results, EXIT_OK, "\n".join(lines)


def table1_rows(max_r: int = 10, numeric_max_r: int = 10) -> list[dict]:
    rows = []

    def add(row, param, ref, computed, method):
        diff = abs(ref - computed) if ref is not None else None
        rows.append(
            {"row": row, "parameter": param, "reference_value": ref, "computed": computed, "abs_diff": diff, "method": method}
        )

    rot1 = primitives.make_rot(1).dist
    add("ROT^1", "r=1", 0.311, em.leakage_regular(em.canonical(rot1)).delta, "numeric canonical")
    for r in range(1, max_r + 1):
        add("ROT^r", f"r={r}", None, primitives.rot_leakage_closed(r).delta, "closed form")
        if r <= numeric_max_r:
            d = em.leakage_regular(em.canonical(primitives.make_rot(r).dist)).delta
            add("ROT^r", f"r={r}", None, d, "numeric canonical")
    ot = primitives.ot_entropy_closed(0.0)
    add("OT", "omega=0", 0.5, ot.s_aprime - 1.0, "closed form")
    add("OT", "", 0.5, em.leakage_regular(em.canonical(primitives.make_ot(1).dist)).delta, "numeric canonical")
    add("SAND", "", 0.5, em.leakage_regular(em.canonical(primitives.make_sand().dist)).delta, "numeric canonical")
    for r in (2, 3):
        d = em.leakage_regular(em.canonical(primitives.make_ot(r).dist)).delta
        add("OT^r", f"r={r}", None, d, "numeric canonical")
    add("OT_p", "p=0", 1 / (128 * math.log(2)), primitives.otp_lower_bound(0.0), "bound")
    for p in (0.01, 0.02, 0.05, 0.08, 0.10, 0.12, 0.14):
        add("OT_p", f"p={p:g}", None, primitives.otp_lower_bound(p), "bound")
        d = em.leakage_regular(em.canonical(primitives.make_otp(p).dist)).delta
        add("OT_p", f"p={p:g}", None, d, "numeric canonical")
    return rows


def cmd_table1(args):
    rows = table1_rows(args.max_r)
    header = f"{'row':<6} {'parameter':<10} {'reference':>10} {'computed':>10} {'diff':>10}  method"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r['row']:<6} {r['parameter']:<10} {_fmt(r['reference_value']) if r['reference_value'] is not None else '':>10} "
            f"{_fmt(r['computed']):>10} {_fmt(r['abs_diff']) if r['abs_diff'] is not None else '':>10}  {r['method']}"
        )
    return rows, EXIT_OK, "\n".join(lines)


_ATTACKS = {
    "bob": ("B", attacks.bob_xor_povm, attacks.xor_of_bits),
    "alice": ("A", attacks.alice_choice_povm, attacks.selection_bit),
}


def cmd_attack(args):
    P = _load_primitive(args.target)
    e = em.build_regular(P, _floats(args.phases)) if args.phases else em.canonical(P)
    results = {}
    lines = []
    for who in (["bob", "alice"] if args.side == "both" else [args.side]):
        side, make, target = _ATTACKS[who]
        out = attacks.run_povm_attack(e, make(), side, target)
        results[who] = out.to_dict()
        lines.append(f"{who}: conclusive {_fmt(out.conclusive_probability)}, correctness {_fmt(out.conditional_correctness)}")
        for label, p, inferred in out.outcome_table:
            lines.append(f"  {label:<3} {_fmt(p):>10}  {inferred if inferred is not None else 'inconclusive'}")
    return results, EXIT_OK, "\n".join(lines)


def cmd_check(args):
    reports = checks.run_suite(args.suite, args.seed)
    ok = all(r.ok for r in reports)
    lines = []
    for r in reports:
        for p in r.properties:
            status = "PASS" if p.ok else "FAIL"
            lines.append(f"[{status}] {r.suite:<9} {p.passed}/{p.total}  {p.name} (worst {_fmt(p.worst)})")
    lines.append("all properties hold" if ok else "property failures")
    return [r.to_dict() for r in reports], EXIT_OK if ok else EXIT_PROPERTY, "\n".join(lines)


EXPORT_CATALOG = ("rot/1", "rot/2", "ot/1", "sand", "otp/0.05", "independent", "correlated")


def cmd_export(args):
    if args.target == "catalog":
        if not args.out:
            raise ParseError("export catalog needs --out DIR")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for ident in EXPORT_CATALOG:
            path = out / (ident.replace("/", "_") + ".json")
            primitives.resolve(ident).dist.save(path)
            written.append(str(path))
        args.out = None  # files already written
        return {"written": written}, EXIT_OK, "\n".join(written)
    P = _load_primitive(args.target)
    return P.to_dict(), EXIT_OK, P.to_json()


COMMANDS = {
    "analyze": cmd_analyze,
    "minimize": cmd_minimize,
    "table1": cmd_table1,
    "attack": cmd_attack,
    "check": cmd_check,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--manifest", help="write the run manifest here")
    common.add_argument("--tol", type=float, default=1e-9, help="triviality / strictness tolerance")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--restarts", type=int, default=16)
    opt.add_argument("--max-iters", type=int, default=2000)
    opt.add_argument("--ftol", type=float, default=1e-9)

    parser = argparse.ArgumentParser(prog="embedlab", description="Leakage of quantum embeddings of two-party primitives.")
    parser.add_argument("--version", action="version", version=f"embedlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="entropies, triviality and leakage of one embedding")
    p.add_argument("target", help="primitive id (rot/3, ot/1, sand, otp/0.05, ...) or JSON file")
    p.add_argument("--phases", help="phase per support point, row-major")
    p.add_argument("--coords", help="gauge-fixed phase coordinates")

    p = sub.add_parser("minimize", parents=[common, opt], help="minimise leakage over phases")
    p.add_argument("target")

    p = sub.add_parser("table1", parents=[common], help="reproduce the leakage table")
    p.add_argument("--max-r", type=int, default=10)

    p = sub.add_parser("attack", parents=[common], help="POVM attacks on a 1-2 OT embedding")
    p.add_argument("target", nargs="?", default="ot/1")
    p.add_argument("--side", choices=["bob", "alice", "both"], default="both")
    p.add_argument("--phases")

    p = sub.add_parser("check", parents=[common], help="run property suites")
    p.add_argument("suite", choices=list(checks.SUITES) + ["all"])

    p = sub.add_parser("export", parents=[common], help="write a primitive as JSON ('catalog' for all)")
    p.add_argument("target")
    return parser


def _render(results, text: str, fmt: str, command: str) -> str:
    if fmt == "json":
        return json.dumps(_round(results), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        if command == "table1":
            w = csv.DictWriter(buf, fieldnames=TABLE1_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in results:
                w.writerow({k: ("" if v is None else (f"{v:.12g}" if isinstance(v, float) else v)) for k, v in r.items()})
        else:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in _flatten(_round(results)):
                w.writerow([k, v])
        return buf.getvalue()
    return text + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), json.dumps(obj) if isinstance(obj, list) else obj


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    manifest = RunManifest(args.command, argv, getattr(args, "seed", None))
    start = time.perf_counter()
    try:
        results, code, text = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionTooLarge as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EmbedLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    manifest.wall_time = time.perf_counter() - start
    manifest.results = _round(results)
    out = _render(results, text, args.format, args.command)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        Path(manifest_path).write_text(json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
