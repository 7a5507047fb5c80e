"""Command-line front end: build, lay out, check, cost, route and simulate."""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import topo as T
from .cost import BufferParams, avg_wire_length, cost_report, total_central_buffers, total_edge_buffers
from .ff import make_field, prime_power
from .layout import LAYOUTS, make_layout
from .presets import PRESETS, UnknownPreset, get as get_preset
from .route import assign_vcs, build_tables, check_deadlock_free
from .sim import SimConfig, StallError, curve_csv, run, sweep
from .sim.traffic import PATTERNS
from .wiring import TECH, check_constraint, crossing_csv, plan_wires

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_STALL = 0, 2, 3, 4
OUT_ENV = "SLIMNOC_OUT"
# accepted concentration band, p / ceil(k'/2)
CONC_BAND = (Fraction(2, 3), Fraction(4, 3))


class InfeasibleN(ValueError):
    def __init__(self, msg, splits=(), suggestions=()):
        super().__init__(msg)
        self.splits = list(splits)
        self.suggestions = list(suggestions)


class MissingInput(FileNotFoundError):
    pass


class UsageError(ValueError):
    pass


# -- fixed-N feasibility ------------------------------------------------------

def n_splits(N: int) -> list[dict]:
    """Every (q, p) with N = 2 q^2 p, q a prime power and p >= 1."""
    out = []
    q = 2
    while 2 * q * q <= N:
        if prime_power(q) and N % (2 * q * q) == 0:
            cfg = T.sn_params(q, N // (2 * q * q))
            ratio = Fraction(cfg.p, math.ceil(cfg.k_net / 2))
            out.append({"q": q, "p": cfg.p, "k_net": cfg.k_net, "N_r": cfg.N_r, "kappa": cfg.kappa,
                        "concentration_ratio": float(ratio),
                        "in_band": CONC_BAND[0] <= ratio <= CONC_BAND[1]})
        q += 1
    return out


def feasible_sizes(q_max: int = 11) -> list[int]:
    sizes = set()
    for q in range(2, q_max + 1):
        if not prime_power(q):
            continue
        k = T.sn_params(q, 1).k_net
        half = math.ceil(k / 2)
        for p in range(1, 4 * half + 1):
            if CONC_BAND[0] <= Fraction(p, half) <= CONC_BAND[1]:
                sizes.add(2 * q * q * p)
    return sorted(sizes)


def _nearest(values, N):
    below = [v for v in values if v < N]
    above = [v for v in values if v > N]
    return ([below[-1]] if below else []) + ([above[0]] if above else [])


def fixed_n(N: int) -> list[dict]:
    splits = n_splits(N)
    ok = [s for s in splits if s["in_band"]]
    if ok:
        return ok
    sizes = feasible_sizes()
    squares = [v for v in sizes if math.isqrt(v) ** 2 == v]
    sugg = sorted(set(_nearest(sizes, N)) | set(_nearest(squares, N)))
    raise InfeasibleN(f"N={N} has no Slim NoC split with balanced concentration; "
                      f"nearest feasible: {', '.join(map(str, sugg))}", splits, sugg)


# -- plumbing -----------------------------------------------------------------

def out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(OUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def write_manifest(args, outputs: list[Path], inputs=(), seeds=(), started=0.0, extra=None) -> Path:
    argv = {k: v for k, v in vars(args).items() if k not in ("func",)}
    man = {
        "command": args.command,
        "args": argv,
        "tool": "slimnoc",
        "version": __version__,
        "seeds": list(seeds),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "wall_seconds": round(time.time() - started, 3),
    }
    if extra:
        man.update(extra)
    stem = outputs[0].name.split(".", 1)[0] if outputs else args.command
    d = outputs[0].parent if outputs else out_dir(args)
    return _write(d / f"{stem}.manifest.json", _dump(man))


def topology_from(args) -> tuple[T.Topology, str | None, object]:
    """(topology, layout kind, preset or None) from --preset, --input or build flags."""
    if getattr(args, "preset", None):
        pr = get_preset(args.preset)
        return pr.topology(), pr.layout, pr
    if getattr(args, "input", None):
        p = Path(args.input)
        if not p.exists():
            raise MissingInput(str(p))
        return T.load(p), None, None
    kind = args.topology or "sn"
    if kind == "sn":
        if args.q is None or args.p is None:
            raise UsageError("--q and --p are required for a Slim NoC")
        return T.slim_noc(args.q, args.p), None, None
    if args.p is None or args.rows is None or args.cols is None:
        raise UsageError(f"{kind} needs --rows, --cols and --p")
    build = {"t2d": T.build_torus, "cm": T.build_cmesh, "fbf": T.build_fbf}.get(kind)
    if build is not None:
        return build(args.rows, args.cols, args.p), None, None
    if kind == "pfbf":
        return T.build_pfbf(args.px, args.py, args.rows, args.cols, args.p), None, None
    raise UsageError(f"unknown topology kind {kind!r}")


def _layout(args, t, default):
    kind = getattr(args, "layout", None) or default
    return make_layout(t, kind, getattr(args, "seed", 0) or 0)


def _sim_config(args, preset_name: str | None = None, rate: float | None = None) -> SimConfig:
    if preset_name:
        pr = get_preset(preset_name)
        t, lay_kind = pr.topology(), pr.layout
        vc = args.vc if args.vc is not None else pr.vc
        scheme = pr.vc_scheme
    else:
        t, lay_kind, pr = topology_from(args)
        vc = args.vc if args.vc is not None else (pr.vc if pr else 2)
        scheme = pr.vc_scheme if pr else None
    lay = _layout(args, t, lay_kind)
    tables = build_tables(t)
    policy = assign_vcs(t, tables, vc, scheme)
    return SimConfig(
        t, layout=lay, tables=tables, policy=policy, buffering=args.buffering, vc=vc,
        packet_flits=args.flits, injection_rate=args.rate if rate is None else rate,
        pattern=args.pattern, H=args.H, warmup_cycles=args.warmup, measure_cycles=args.cycles,
        seed=args.seed, link_mode=args.link_mode, stall_bound=args.stall_bound,
        trace=args.trace, replies=args.replies,
    )


# -- commands -----------------------------------------------------------------

def cmd_field(args):
    t0 = time.time()
    f = make_field(args.q)
    doc = f.to_json()
    doc["modulus"] = list(f.modulus)
    path = _write(out_dir(args) / f"field_q{args.q}.json", _dump(doc))
    write_manifest(args, [path], started=t0)
    print(path)


def cmd_generate(args):
    t0 = time.time()
    if args.N is not None:
        splits = fixed_n(args.N)
        path = _write(out_dir(args) / f"splits_N{args.N}.json", _dump({"N": args.N, "splits": splits}))
        write_manifest(args, [path], started=t0)
        for s in splits:
            print(f"q={s['q']} p={s['p']} k'={s['k_net']} N_r={s['N_r']} kappa={s['kappa']}")
        return
    t, _, _ = topology_from(args)
    d = out_dir(args)
    path = d / f"{args.name or t.name}.json"
    T.save(t, path)
    outs = [path]
    if args.dot:
        outs.append(_write(d / f"{args.name or t.name}.dot", T.to_dot(t)))
    write_manifest(args, outs, started=t0)
    print(path)


def cmd_layout(args):
    t0 = time.time()
    t, default, _ = topology_from(args)
    lay = _layout(args, t, default)
    d = out_dir(args)
    stem = f"{t.name}_{lay.kind}"
    outs = [_write(d / f"{stem}.layout.json", _dump(lay.to_json())),
            _write(d / f"{stem}.layout.csv", lay.to_csv())]
    write_manifest(args, outs, seeds=[args.seed], started=t0)
    print(f"{lay.kind}: extent {lay.extent[0]}x{lay.extent[1]}, M={avg_wire_length(t, lay):.4f}")


def cmd_wires(args):
    t0 = time.time()
    t, default, _ = topology_from(args)
    lay = _layout(args, t, default)
    plan = plan_wires(t, lay, args.link_width, args.both_directions)
    verdict = check_constraint(plan.crossing, TECH[args.tech], args.link_width, not args.per_link)
    d = out_dir(args)
    stem = f"{t.name}_{lay.kind}_{args.tech}nm"
    outs = [_write(d / f"{stem}.crossings.csv", crossing_csv(plan.crossing)),
            _write(d / f"{stem}.verdict.json", _dump(verdict.to_json()))]
    write_manifest(args, outs, seeds=[args.seed], started=t0)
    print(f"{'PASS' if verdict.passed else 'FAIL'} max {verdict.max_links} links "
          f"({verdict.max_wires} wires) vs W={verdict.W:g}")
    if not verdict.passed:
        return EXIT_INVALID


def cmd_cost(args):
    t0 = time.time()
    t, default, _ = topology_from(args)
    lay = _layout(args, t, default)
    params = BufferParams(args.b_over_L, args.vc or 2, args.H, args.cb)
    rep = cost_report(t, lay, params)
    d = out_dir(args)
    path = _write(d / f"{t.name}_{lay.kind}_H{args.H}.cost.json", _dump(rep))
    write_manifest(args, [path], seeds=[args.seed], started=t0)
    print(f"M={rep['M']:.4f} delta_eb={rep['delta_eb']} delta_cb={rep['delta_cb']}")


def cmd_route(args):
    t0 = time.time()
    t, _, pr = topology_from(args)
    tables = build_tables(t, args.order)
    vc = args.vc if args.vc is not None else (pr.vc if pr else 2)
    policy = assign_vcs(t, tables, vc, args.scheme or (pr.vc_scheme if pr else None))
    verdict = check_deadlock_free(t, tables, policy)
    doc = tables.to_json()
    doc.update({"vc_scheme": policy.scheme, "vc_count": policy.vc_count,
                "deadlock_free": verdict.acyclic, "channels": verdict.channels,
                "dependencies": verdict.dependencies,
                "cycle": [list(c) for c in verdict.cycle]})
    path = _write(out_dir(args) / f"{t.name}.routes.json", _dump(doc))
    write_manifest(args, [path], started=t0)
    print(f"{policy.scheme} with {policy.vc_count} VCs: "
          f"{'acyclic' if verdict.acyclic else 'CYCLE'} ({verdict.channels} channels)")
    if not verdict.acyclic:
        return EXIT_INVALID


def cmd_simulate(args):
    t0 = time.time()
    cfg = _sim_config(args)
    try:
        rep = run(cfg)
    except StallError as e:
        if e.report is not None:
            _write(out_dir(args) / "stall.report.json", e.report.dumps())
        print(f"stall: {e}", file=sys.stderr)
        return EXIT_STALL
    d = out_dir(args)
    stem = f"{cfg.topology.name}_{cfg.buffering}_{cfg.pattern}_r{cfg.injection_rate:g}_s{cfg.seed}"
    path = _write(d / f"{stem}.report.json", rep.dumps())
    write_manifest(args, [path], inputs=[args.trace] if args.trace else [], seeds=[args.seed], started=t0)
    print(f"latency {rep.avg_packet_latency:.3f} cycles ({rep.avg_latency_ns:.3f} ns), "
          f"throughput {rep.throughput:.4f}{' SATURATED' if rep.saturation_flag else ''}")


def _rates(args) -> list[float]:
    if args.rates:
        return [float(x) for x in args.rates.split(",") if x.strip()]
    return [args.rate]


def cmd_sweep(args):
    t0 = time.time()
    cfg = _sim_config(args)
    try:
        pts = sweep(cfg, _rates(args), workers=args.workers)
    except StallError as e:
        print(f"stall: {e}", file=sys.stderr)
        return EXIT_STALL
    path = _write(out_dir(args) / f"{cfg.topology.name}_{cfg.buffering}_{cfg.pattern}.sweep.csv",
                  curve_csv(pts))
    write_manifest(args, [path], seeds=[args.seed], started=t0)
    print(path)


COMPARE_FIELDS = ["preset", "pattern", "rate", "latency_cycles", "latency_ns", "throughput",
                  "saturated", "M", "delta_eb", "delta_cb", "wiring_ok"]


def cmd_compare(args):
    t0 = time.time()
    names = [n for n in (args.presets or "").split(",") if n.strip()]
    if not names:
        raise UsageError("compare needs at least one preset")
    for n in names:
        get_preset(n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_FIELDS)
    for n in names:
        cfg = _sim_config(args, n)
        t, lay = cfg.topology, cfg.layout
        params = BufferParams(vc=cfg.vc, H=cfg.H, cb_size=args.cb)
        M = avg_wire_length(t, lay)
        deb = total_edge_buffers(t, lay, params)
        dcb = total_central_buffers(t.n_routers, t.k_net, params)
        ok = check_constraint(plan_wires(t, lay).crossing, TECH[args.tech]).passed
        try:
            pts = sweep(cfg, _rates(args), workers=args.workers)
        except StallError as e:
            print(f"stall in {n}: {e}", file=sys.stderr)
            return EXIT_STALL
        for pt in pts:
            w.writerow([n, cfg.pattern, f"{pt.rate:.6g}", f"{pt.latency_cycles:.6f}",
                        f"{pt.latency_ns:.6f}", f"{pt.throughput:.6f}", int(pt.saturated),
                        f"{M:.6f}", deb, dcb, int(ok)])
    path = _write(out_dir(args) / f"compare_{args.pattern}.csv", buf.getvalue())
    write_manifest(args, [path], seeds=[args.seed], started=t0)
    print(buf.getvalue(), end="")


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args):
    t0 = time.time()
    files = []
    for inp in args.inputs:
        p = Path(inp)
        if p.is_dir():
            files += sorted(glob.glob(str(p / "*.csv")))
        elif p.exists():
            files.append(str(p))
        else:
            raise MissingInput(inp)
    if not files:
        raise MissingInput("no CSV inputs found")
    versions = set()
    for inp in args.inputs:
        p = Path(inp)
        for m in (sorted(p.glob("*.manifest.json")) if p.is_dir() else []):
            versions.add(json.loads(m.read_text()).get("version"))
    if len(versions) > 1:
        print(f"warning: inputs come from different tool versions: {sorted(map(str, versions))}",
              file=sys.stderr)
    rows = []
    for f in files:
        for r in _read_csv(f):
            if "latency_cycles" not in r:
                continue
            key = r.get("preset") or Path(f).name.split(".")[0]
            rows.append({**r, "preset": key})
    metrics = ["latency_cycles", "latency_ns", "throughput"]
    merged = {m: {} for m in metrics}
    for r in rows:
        for m in metrics:
            merged[m].setdefault(r["preset"], {})[r["rate"]] = float(r[m])
    d = out_dir(args)
    outs = []
    if args.format == "json":
        outs.append(_write(d / "report.json", _dump(merged)))
    else:
        for m in metrics:
            presets = sorted(merged[m])
            rates = sorted({rt for p in presets for rt in merged[m][p]}, key=float)
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["rate"] + presets)
            for rt in rates:
                w.writerow([rt] + [f"{merged[m][p][rt]:.6f}" if rt in merged[m][p] else ""
                                   for p in presets])
            outs.append(_write(d / f"report_{m}.csv", buf.getvalue()))
    write_manifest(args, outs, inputs=files, started=t0)
    for p in sorted(merged["throughput"]):
        thr = merged["throughput"][p]
        print(f"{p}: {len(thr)} points, peak throughput {max(thr.values()):.4f}")


def cmd_replay(args):
    man = json.loads(Path(args.manifest).read_text())
    argv = man["args"]
    if args.out:
        argv["out"] = args.out
    ns = argparse.Namespace(**argv)
    ns.func = COMMANDS[man["command"]]
    return ns.func(ns)


COMMANDS = {
    "field": cmd_field, "generate": cmd_generate, "layout": cmd_layout, "wires": cmd_wires,
    "cost": cmd_cost, "route": cmd_route, "simulate": cmd_simulate, "sweep": cmd_sweep,
    "compare": cmd_compare, "report": cmd_report, "replay": cmd_replay,
}


# -- parser -------------------------------------------------------------------

def _topo_flags(sp):
    g = sp.add_argument_group("network")
    g.add_argument("--preset", help=f"one of {', '.join(sorted(PRESETS))}")
    g.add_argument("--input", help="topology JSON file")
    g.add_argument("--topology", choices=["sn", "t2d", "cm", "fbf", "pfbf"])
    g.add_argument("--q", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--px", type=int, default=2, help="pfbf partitions along x")
    g.add_argument("--py", type=int, default=1, help="pfbf partitions along y")


def _sim_flags(sp, rates=False):
    sp.add_argument("--layout", choices=list(LAYOUTS) + ["grid"])
    sp.add_argument("--buffering", default="EB-Var-N")
    sp.add_argument("--vc", type=int)
    sp.add_argument("--flits", type=int, default=6)
    sp.add_argument("--pattern", default="RND", choices=PATTERNS)
    sp.add_argument("--rate", type=float, default=0.1)
    if rates:
        sp.add_argument("--rates", help="comma separated, ascending")
        sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--H", type=int, default=1)
    sp.add_argument("--cycles", type=int, default=10000, help="measured cycles")
    sp.add_argument("--warmup", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--link-mode", dest="link_mode", default="exact", choices=["exact", "avg"])
    sp.add_argument("--stall-bound", dest="stall_bound", type=int, default=50_000)
    sp.add_argument("--trace", help="trace CSV for --pattern TRACE")
    sp.add_argument("--replies", action="store_true", help="answer reads with 6-flit replies")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slimnoc", description=__doc__)
    ap.add_argument("--version", action="version", version=f"slimnoc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
        return sp

    sp = add("field", "finite field tables")
    sp.add_argument("--q", type=int, required=True)

    sp = add("generate", "build a topology, or list (q, p) splits for --N")
    _topo_flags(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--name")
    sp.add_argument("--dot", action="store_true")

    sp = add("layout", "place routers")
    _topo_flags(sp)
    sp.add_argument("--layout", choices=list(LAYOUTS) + ["grid"])
    sp.add_argument("--seed", type=int, default=0)

    sp = add("wires", "wire placement and density check")
    _topo_flags(sp)
    sp.add_argument("--layout", choices=list(LAYOUTS) + ["grid"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tech", type=int, default=45, choices=sorted(TECH))
    sp.add_argument("--link-width", dest="link_width", type=int, default=128)
    sp.add_argument("--both-directions", dest="both_directions", action="store_true")
    sp.add_argument("--per-link", dest="per_link", action="store_true",
                    help="compare link counts, not wires, with W")

    sp = add("cost", "wire length and buffer totals")
    _topo_flags(sp)
    sp.add_argument("--layout", choices=list(LAYOUTS) + ["grid"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--H", type=int, default=1)
    sp.add_argument("--vc", type=int)
    sp.add_argument("--cb", type=int, default=20)
    sp.add_argument("--b-over-L", dest="b_over_L", type=float, default=1.0)

    sp = add("route", "routing tables and deadlock check")
    _topo_flags(sp)
    sp.add_argument("--vc", type=int)
    sp.add_argument("--order", choices=["index", "xy"])
    sp.add_argument("--scheme", choices=["hop", "xy", "dateline", "partition"])

    sp = add("simulate", "one simulation run")
    _topo_flags(sp)
    _sim_flags(sp)

    sp = add("sweep", "latency/throughput curve")
    _topo_flags(sp)
    _sim_flags(sp, rates=True)

    sp = add("compare", "run several presets over the same rates")
    sp.add_argument("--presets", required=True)
    _sim_flags(sp, rates=True)
    sp.add_argument("--tech", type=int, default=45, choices=sorted(TECH))
    sp.add_argument("--cb", type=int, default=20)

    sp = add("report", "merge CSV outputs into per-metric tables")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = add("replay", "re-run a command from its manifest")
    sp.add_argument("manifest")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.func = COMMANDS[args.command]
    try:
        rc = args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownPreset as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleN as e:
        print(f"infeasible: {e}", file=sys.stderr)
        for s in e.splits:
            print(f"  out of band: q={s['q']} p={s['p']} ratio={s['concentration_ratio']:.2f}",
                  file=sys.stderr)
        return EXIT_INVALID
    except MissingInput as e:
        print(f"missing input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, T.ConstructionInvalid) as e:
        print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVALID
    return rc or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
