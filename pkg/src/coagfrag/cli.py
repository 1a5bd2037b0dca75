"""Command-line front end.

Subcommands: ``sample`` (write draws as JSON lines), ``verify`` (run a
duality diagram, identity check, or two-file comparison and emit a
report), ``density`` (tabulate the numeric kernel on a grid as CSV), and
``list-diagrams``.  Configuration may come from flags or from a JSON
file (flags win).  Exit codes: 0 success, 2 configuration error, 3
numeric error, 4 statistical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import subprocess
import sys

import numpy as np

from . import __version__
from .duality import (
    DIAGRAMS,
    NEGATIVE_CONTROLS,
    Statistic,
    check_conditional_coag,
    check_conditional_independence,
    check_laplace_identity,
    check_vershik_moment,
    run_duality,
)
from .errors import ConfigError, NumericError, StatisticalFailure
from .partitions import MassPartition, SetPartition, diversity_estimate
from .operators import three_step_partition
from .rng import SeedStream
from .samplers import (
    ZetaSpec,
    sample_gg_jumps,
    sample_pa_zeta,
    sample_pd_conditional,
    sample_pd_stickbreak,
    sample_stable,
    sample_tilted_stable,
)
from .specfun import QuadratureConfig, stable_density
from .stats import ks_two_sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STATISTICAL = 4


def _fmt(x) -> str:
    """All numeric CLI output uses 17 significant decimal digits."""
    return f"{float(x):.17g}"


def version_string() -> str:
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{__version__}+{desc.stdout.strip()}"
    except Exception:
        pass
    return __version__


def parse_zeta(text: str) -> ZetaSpec:
    """Parse 'zero', 'const:B', 'gamma:SHAPE', 'empirical:v,w;v,w', with an
    optional '+gamma:SHAPE' suffix for shifted laws."""
    t = text.strip()
    extra = None
    if "+gamma:" in t:
        t, extra_part = t.split("+gamma:", 1)
        extra = float(extra_part)
    if t == "zero":
        spec = ZetaSpec.zero()
    elif t.startswith("const:"):
        b = float(t.split(":", 1)[1])
        spec = ZetaSpec.zero() if b == 0.0 else ZetaSpec.constant(b)
    elif t.startswith("gamma:"):
        spec = ZetaSpec.gamma(float(t.split(":", 1)[1]))
    elif t.startswith("empirical:"):
        pairs = [p for p in t.split(":", 1)[1].split(";") if p]
        vals, wts = zip(*(map(float, p.split(",")) for p in pairs))
        spec = ZetaSpec.empirical(vals, wts)
    else:
        raise ConfigError(f"cannot parse zeta spec {text!r}")
    return spec.plus_gamma(extra) if extra is not None else spec


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Fill unset flags from --config JSON (flags take precedence)."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"config key {key!r} is not a known option")
        if parser.get_default(attr) == getattr(args, attr):
            setattr(args, attr, value)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


# -- sample -----------------------------------------------------------------------

def cmd_sample(args) -> int:
    zeta = parse_zeta(args.zeta) if args.zeta else None
    stream = SeedStream(args.seed, args.stream)
    rows = []
    for i in range(args.n):
        sub = stream.substream(i)
        if args.family == "pa_zeta":
            if zeta is None:
                raise ConfigError("--family pa_zeta needs --zeta")
            part = sample_pa_zeta(args.alpha, zeta, args.n_atoms, sub)
            rows.append(part.to_json())
        elif args.family == "pd":
            if args.theta is None:
                raise ConfigError("--family pd needs --theta")
            part = sample_pd_stickbreak(args.alpha, args.theta, args.n_atoms, sub)
            rows.append(part.to_json())
        elif args.family == "pd_conditional":
            if args.total is None:
                raise ConfigError("--family pd_conditional needs --total")
            part = sample_pd_conditional(args.alpha, args.total, args.n_atoms, sub)
            rows.append(part.to_json())
        elif args.family == "stable":
            rows.append({"value": sample_stable(args.alpha, sub)})
        elif args.family == "tilted_stable":
            if args.time is None:
                raise ConfigError("--family tilted_stable needs --time")
            rows.append({"value": sample_tilted_stable(args.alpha, args.time, sub)})
        elif args.family == "gg_jumps":
            if args.time is None:
                raise ConfigError("--family gg_jumps needs --time")
            js = sample_gg_jumps(args.alpha, args.time, args.n_atoms, sub)
            rows.append({
                "jumps": [float(v) for v in js.jumps],
                "elapsed_time": js.elapsed_time,
                "tail_mass_bound": js.tail_mass_bound,
            })
        elif args.family == "three_step":
            if zeta is None or args.delta is None:
                raise ConfigError("--family three_step needs --zeta and --delta")
            sp = three_step_partition(args.alpha, args.delta, zeta, args.n_items, sub)
            rows.append(sp.to_json())
        else:
            raise ConfigError(f"unknown family {args.family!r}")
    out, close = _open_out(args.out)
    try:
        for row in rows:
            out.write(json.dumps(_round17(row)) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def _round17(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, list):
        return [_round17(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _round17(v) for k, v in obj.items()}
    return obj


# -- verify -----------------------------------------------------------------------

def _write_report(args, payload: dict):
    payload = dict(payload)
    payload["version"] = version_string()
    payload["resolved_config"] = {k: v for k, v in vars(args).items() if k != "func"}
    out, close = _open_out(args.out)
    try:
        json.dump(_round17(payload), out, indent=2)
        out.write("\n")
    finally:
        if close:
            out.close()
    if getattr(args, "csv", None) and "csv_rows" in payload:
        with open(args.csv, "w", newline="") as fh:
            rows = payload["csv_rows"]
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (_fmt(v) if isinstance(v, float) else v)
                                 for k, v in row.items()})


def _load_partitions(path):
    parts = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                parts.append(MassPartition.from_json(json.loads(line)))
    if not parts:
        raise ConfigError(f"no partitions found in {path}")
    return parts


def cmd_verify(args) -> int:
    threads = int(os.environ.get("COAGFRAG_THREADS", "1") or "1")
    stream = SeedStream(args.seed, args.stream)

    if args.two_sample:
        path_a, path_b = args.two_sample
        parts_a = _load_partitions(path_a)
        parts_b = _load_partitions(path_b)
        wanted = [Statistic.parse(t) for t in args.stats.split(",")]
        rng = stream.generator()
        reports = []
        ok = True
        for st in wanted:
            if st.kind not in ("P1", "P2", "sizebiased", "diversity"):
                raise ConfigError(f"two-sample mode supports scalar statistics, not {st.name}")
            def ext(parts):
                vals = []
                for p in parts:
                    if st.kind == "P1":
                        vals.append(float(p.freqs[0]))
                    elif st.kind == "P2":
                        vals.append(float(p.freqs[1]) if p.freqs.size > 1 else 0.0)
                    elif st.kind == "sizebiased":
                        c = np.cumsum(p.freqs)
                        j = min(int(np.searchsorted(c, rng.random() * c[-1], "right")),
                                p.freqs.size - 1)
                        vals.append(float(p.freqs[j]))
                    else:
                        vals.append(diversity_estimate(p, args.alpha))
                return np.asarray(vals)
            res = ks_two_sample(ext(parts_a), ext(parts_b))
            passed = res.p_value > args.level
            ok = ok and passed
            reports.append({"statistic": st.name, "ks_stat": res.statistic,
                            "p_value": res.p_value, "pass": passed,
                            "n1": res.n1, "n2": res.n2})
        _write_report(args, {"mode": "two_sample", "reports": reports, "passed": ok})
        return EXIT_OK if ok else EXIT_STATISTICAL

    if args.check:
        zeta = parse_zeta(args.zeta) if args.zeta else None
        if args.check == "laplace":
            rep = check_laplace_identity(args.alpha, args.delta, args.zeta_value, args.y,
                                         args.omega1, args.omega2, args.n_samples, stream)
            reports = [rep]
        elif args.check == "vershik":
            levels = [float(v) for v in args.levels.split(",")]
            bps = [float(v) for v in args.breakpoints.split(",")] if args.breakpoints else []
            rep = check_vershik_moment(args.alpha, args.delta, levels, bps,
                                       args.n_samples, stream)
            reports = [rep]
        elif args.check == "conditional_coag":
            if zeta is None:
                raise ConfigError("conditional checks need --zeta")
            rep = check_conditional_coag(args.alpha, args.delta, zeta, args.n_samples,
                                         stream, n_atoms=args.n_atoms)
            reports = [rep]
        elif args.check == "conditional_independence":
            if zeta is None:
                raise ConfigError("conditional checks need --zeta")
            reports = check_conditional_independence(args.alpha, args.delta, zeta,
                                                     args.n_samples, stream,
                                                     n_atoms=args.n_atoms)
        else:
            raise ConfigError(f"unknown check {args.check!r}")
        ok = all(r.passed for r in reports)
        _write_report(args, {"mode": f"check:{args.check}",
                             "reports": [r.to_json() for r in reports], "passed": ok})
        return EXIT_OK if ok else EXIT_STATISTICAL

    if not args.diagram:
        raise ConfigError("verify needs --diagram, --check, or --two-sample")
    zeta = parse_zeta(args.zeta) if args.zeta else None
    stats = [t for t in args.stats.split(",") if t] if args.stats else None
    report = run_duality(
        args.diagram, alpha=args.alpha, delta=args.delta, theta=args.theta, zeta=zeta,
        n_replicas=args.n_replicas, n_atoms=args.n_atoms, stats=stats, level=args.level,
        n_seeds=args.n_seeds, s=stream, negative_control=args.negative_control,
        max_workers=max(threads, 1),
    )
    payload = report.to_json()
    payload["csv_rows"] = report.to_csv_rows()
    _write_report(args, payload)
    for rep in report.reports:
        status = "pass" if rep.passed else "FAIL"
        print(f"[{status}] {report.diagram_id} {rep.direction} {rep.statistic} "
              f"p={[float(_fmt(p)) for p in rep.p_values]}")
    return EXIT_OK if report.passed else EXIT_STATISTICAL


# -- density ----------------------------------------------------------------------

def cmd_density(args) -> int:
    lo, hi, n = args.grid
    if not (lo > 0 and hi > lo and int(n) >= 2):
        raise ConfigError("grid must be LO:HI:N with 0 < LO < HI and N >= 2")
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), int(n)))
    cfg = QuadratureConfig()
    zeta = parse_zeta(args.zeta) if args.zeta else None

    fieldnames = ["x", "stable_density"]
    if args.total is not None:
        fieldnames.append("cond_mix_weight")
    if args.v_value is not None:
        if args.delta is None or zeta is None:
            raise ConfigError("the conditioned mixing column needs --delta and --zeta")
        fieldnames.append("pkmix_unnorm")
        from .duality import _pkmix_weight
        from . import tables
        tab = tables.stable_density_table(args.delta)

    out, close = _open_out(args.out)
    try:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        for x in grid:
            row = {"x": _fmt(x)}
            try:
                row["stable_density"] = _fmt(stable_density(args.alpha, float(x), cfg))
            except NumericError as exc:
                row["stable_density"] = f"ERROR:{exc}"
            if args.total is not None:
                # reweighting factor of the mixing law given the observed total
                w = math.exp(-(args.total * x ** (1.0 / args.alpha) - x))
                row["cond_mix_weight"] = _fmt(w)
            if args.v_value is not None:
                wt = _pkmix_weight(zeta, args.v_value, args.alpha, args.delta,
                                   np.array([float(x)]))[0]
                dens = math.exp(tab.log_density(np.array([float(x)]))[0]) * wt
                row["pkmix_unnorm"] = _fmt(dens)
            writer.writerow(row)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_list_diagrams(_args) -> int:
    for name in sorted(DIAGRAMS):
        ncs = ", ".join(NEGATIVE_CONTROLS[name]) or "-"
        print(f"{name:16s} {DIAGRAMS[name]}")
        print(f"{'':16s}   negative controls: {ncs}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be LO:HI:N")
    return float(parts[0]), float(parts[1]), int(parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coagfrag",
        description="Simulation and Monte Carlo verification of coagulation/"
                    "fragmentation dualities for stable Poisson-Kingman mass partitions.")
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="write draws as JSON lines")
    p_sample.add_argument("--family", required=True,
                          choices=["pa_zeta", "pd", "pd_conditional", "stable",
                                   "tilted_stable", "gg_jumps", "three_step"])
    p_sample.add_argument("--alpha", type=float, required=True)
    p_sample.add_argument("--delta", type=float)
    p_sample.add_argument("--theta", type=float)
    p_sample.add_argument("--zeta", type=str)
    p_sample.add_argument("--total", type=float, help="conditional total mass")
    p_sample.add_argument("--time", type=float, help="subordinator time horizon")
    p_sample.add_argument("--n", type=int, default=100)
    p_sample.add_argument("--n-items", type=int, default=5,
                          help="partition size for --family three_step")
    p_sample.add_argument("--n-atoms", type=int, default=2000)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--stream", type=int, default=0)
    p_sample.add_argument("--out", type=str, default="-")
    p_sample.add_argument("--config", type=str)
    p_sample.set_defaults(func=cmd_sample)

    p_verify = sub.add_parser("verify", help="verify a diagram or identity")
    p_verify.add_argument("--diagram", choices=sorted(DIAGRAMS))
    p_verify.add_argument("--check", choices=["laplace", "vershik", "conditional_coag",
                                              "conditional_independence"])
    p_verify.add_argument("--two-sample", nargs=2, metavar=("A.jsonl", "B.jsonl"))
    p_verify.add_argument("--negative-control", type=str)
    p_verify.add_argument("--alpha", type=float, default=0.5)
    p_verify.add_argument("--delta", type=float)
    p_verify.add_argument("--theta", type=float)
    p_verify.add_argument("--zeta", type=str)
    p_verify.add_argument("--zeta-value", type=float, default=1.0,
                          help="fixed mixing value for --check laplace")
    p_verify.add_argument("--y", type=float, default=0.5)
    p_verify.add_argument("--omega1", type=float, default=0.5)
    p_verify.add_argument("--omega2", type=float, default=1.0)
    p_verify.add_argument("--levels", type=str, default="0.5,2.0,1.0")
    p_verify.add_argument("--breakpoints", type=str, default="0.3,0.7")
    p_verify.add_argument("--n-samples", type=int, default=200000)
    p_verify.add_argument("--n-replicas", type=int, default=20000)
    p_verify.add_argument("--n-atoms", type=int, default=2000)
    p_verify.add_argument("--n-seeds", type=int, default=5)
    p_verify.add_argument("--stats", type=str, default="P1,P2,sizebiased,K50")
    p_verify.add_argument("--level", type=float, default=0.01)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--stream", type=int, default=0)
    p_verify.add_argument("--out", type=str, default="-")
    p_verify.add_argument("--csv", type=str)
    p_verify.add_argument("--config", type=str)
    p_verify.set_defaults(func=cmd_verify)

    p_density = sub.add_parser("density", help="tabulate densities on a grid as CSV")
    p_density.add_argument("--alpha", type=float, required=True)
    p_density.add_argument("--delta", type=float)
    p_density.add_argument("--zeta", type=str)
    p_density.add_argument("--grid", type=_grid, default=(0.05, 20.0, 100),
                           help="LO:HI:N, logarithmic spacing")
    p_density.add_argument("--total", type=float,
                           help="observed total for the mixing-reweight column")
    p_density.add_argument("--v-value", type=float,
                           help="coarse total for the conditioned mixing column")
    p_density.add_argument("--out", type=str, default="-")
    p_density.add_argument("--config", type=str)
    p_density.set_defaults(func=cmd_density)

    p_list = sub.add_parser("list-diagrams", help="list verifiable diagrams")
    p_list.set_defaults(func=cmd_list_diagrams)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "config"):
            _merge_config(args, parser)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StatisticalFailure as exc:
        print(f"statistical failure: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL


if __name__ == "__main__":
    sys.exit(main())
