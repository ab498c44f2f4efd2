"""``tanglectl``: entanglement reports for state files.

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 dimension
mismatch, 4 no classifier for these dimensions.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bipartite, multipartite, roofs, symfam, threequbit
from .core import DensityMatrix, DimensionError, PureState, StateError
from .invariants import residual_tangle, tau3
from .stateio import StateFormatError, load_state

EXIT_PARSE, EXIT_DIMS, EXIT_UNSUPPORTED = 2, 3, 4
SYMMETRY_TOL = 1e-12


class UnsupportedError(Exception):
    pass


def _threads() -> int:
    cap = os.environ.get("TANGLEKIT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


def _fmt(v) -> str:
    return "" if v is None else format(v, ".12g") if isinstance(v, float) else str(v)


# ------------------------------------------------------------ measures
# Each entry maps (state, seed) to (value, kind).

def _pure_only(state, what):
    if not isinstance(state, PureState):
        raise DimensionError(f"{what} is only available for pure states")
    return state


def _m_tau3(state, seed):
    if isinstance(state, PureState):
        return tau3(state), "exact"
    return threequbit.tau3_mixed_lower_bound(state, seed).value, "lower"


def _m_concurrence(state, seed):
    if tuple(state.dims) == (2, 2):
        return bipartite.wootters_concurrence(state), "exact"
    if isinstance(state, PureState):
        return bipartite.i_concurrence(state), "exact"
    return bipartite.huber_concurrence_bound(state).value, "lower"


def _m_g_concurrence(state, seed):
    if isinstance(state, PureState):
        return bipartite.g_concurrence(state), "exact"
    return roofs.convex_roof_upper(roofs.G_CONCURRENCE, state, seed).value, "upper"


def _m_gme(state, seed):
    if isinstance(state, PureState):
        return multipartite.gme_concurrence_pure(state), "exact"
    return multipartite.gme_concurrence_bound(state).value, "lower"


def _m_cren(state, seed):
    if isinstance(state, PureState):
        return bipartite.negativity(state), "exact"
    return roofs.cren_upper(state, seed).value, "upper"


def _m_eof(state, seed):
    if tuple(state.dims) != (2, 2):
        raise DimensionError("entanglement of formation needs two qubits")
    return bipartite.eof_geometric_from_concurrence(bipartite.wootters_concurrence(state))[0], "exact"


MEASURES = {
    "tau3": _m_tau3,
    "residual_tangle": lambda s, seed: (residual_tangle(_pure_only(s, "residual tangle")), "exact"),
    "negativity": lambda s, seed: (bipartite.negativity(s, 0), "exact"),
    "log_negativity": lambda s, seed: (bipartite.log_negativity(s, 0), "exact"),
    "concurrence": _m_concurrence,
    "i_concurrence": lambda s, seed: (bipartite.i_concurrence(_pure_only(s, "I-concurrence")), "exact"),
    "g_concurrence": _m_g_concurrence,
    "cren": _m_cren,
    "eof": _m_eof,
    "fef": lambda s, seed: (bipartite.fully_entangled_fraction(s, seed), "lower"),
    "gme_concurrence": _m_gme,
    "min_bipartition_negativity": lambda s, seed: (
        multipartite.min_bipartition_negativity(s).value, "upper"),
    "global_entanglement": lambda s, seed: (
        multipartite.global_entanglement(_pure_only(s, "global entanglement")), "exact"),
    "geometric": lambda s, seed: (
        bipartite.geometric_measure_pure(_pure_only(s, "geometric measure"), seed), "upper"),
    "tau3_witness": lambda s, seed: (threequbit.tau3_witness_bound(s), "lower"),
}


def _describe(path, state) -> dict:
    return {"file": str(path), "kind": "pure" if isinstance(state, PureState) else "mixed",
            "dims": list(state.dims)}


def _emit(doc: dict, rows: list, as_csv: bool, out) -> None:
    if not as_csv:
        out.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
        return
    out.write(f"# seed={doc.get('seed', 0)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(rows[0].keys()) if rows else [])
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])


def cmd_measure(args, out) -> int:
    state = load_state(args.state)
    names = [n.strip() for n in args.measures.split(",") if n.strip()]
    unknown = [n for n in names if n not in MEASURES]
    if unknown:
        raise StateFormatError(f"unknown measures {unknown}; choose from {sorted(MEASURES)}")
    rows = []
    for name in names:
        t0 = time.perf_counter()
        value, kind = MEASURES[name](state, args.seed)
        row = {"name": name, "value": float(value), "kind": kind}
        if args.timing:
            row["seconds"] = time.perf_counter() - t0
        rows.append(row)
    doc = {"seed": args.seed, "input": _describe(args.state, state), "measures": rows}
    _emit(doc, rows, args.csv, out)
    return 0


# ------------------------------------------------------------ classify

def _is_ghz_symmetric(rho: DensityMatrix) -> bool:
    c = symfam.ghzsym_twirl(rho)
    if not symfam.ghzsym_is_physical(c):
        return False
    image = symfam.family_state("ghzsym", x=c.x, y=c.y).matrix
    return float(np.abs(image - rho.matrix).max()) < SYMMETRY_TOL


def _classify(state) -> tuple[str, dict]:
    dims = tuple(state.dims)
    if dims == (2, 2, 2):
        if isinstance(state, PureState):
            inv = {"tau3": tau3(state)}
            inv.update({f"C_{a}{b}": multipartite.pairwise_concurrence(state, i, j)
                        for (i, j), (a, b) in zip(((0, 1), (0, 2), (1, 2)), ("AB", "AC", "BC"))})
            return threequbit.pure_class3(state), inv
        if _is_ghz_symmetric(state):
            c = symfam.ghzsym_twirl(state)
            rep = symfam.ghzsym_exact(c)
            inv = {"x": c.x, "y": c.y, "tau3": rep["tau3"].value,
                   "gme_concurrence": rep["gme_concurrence"].value}
            return rep.labels["class"], inv
        lb = threequbit.tau3_mixed_lower_bound(state, 0).value
        gme = multipartite.gme_concurrence_bound(state).value
        inv = {"tau3_lower": lb, "gme_concurrence_lower": gme}
        if lb > 0:
            return "GHZ", inv
        if gme > 0:
            return "genuinely multipartite entangled", inv
        return "undetermined", inv
    if len(dims) == 2:
        r_n, r_c = bipartite.schmidt_number_bounds(state)
        inv = {"negativity": bipartite.negativity(state),
               "schmidt_bound_negativity": r_n, "schmidt_bound_concurrence": r_c}
        k = max(r_n, r_c)
        if isinstance(state, PureState):
            inv["schmidt_rank"] = bipartite.schmidt(state).rank
            if inv["schmidt_rank"] == 1:
                return "separable", inv
        if k >= 2:
            return f"entangled, Schmidt number \u2265 {k}", inv
        if isinstance(state, PureState) or math.prod(dims) <= 6:
            # positive partial transpose decides separability in 2x2 and 2x3
            return "separable", inv
        return "undetermined (PPT)", inv
    raise UnsupportedError(f"no classifier for dims {list(dims)}")


def cmd_classify(args, out) -> int:
    state = load_state(args.state)
    label, inv = _classify(state)
    doc = {"seed": args.seed, "input": _describe(args.state, state), "class": label,
           "invariants": inv}
    rows = [{"name": k, "value": v} for k, v in inv.items()]
    if args.csv:
        out.write(f"# class={label}\n")
    _emit(doc, rows, args.csv, out)
    return 0


# ------------------------------------------------------------ scan

SCAN_COLUMNS = ("x", "y", "class", "tau3", "gmec", "negativity")


def _grid_axes(family, d, m):
    if family == "ghzsym":
        xr = (-0.5, 0.5)
        yr = (-1 / (4 * math.sqrt(3)), math.sqrt(3) / 4)
    else:
        xr = (-1 / math.sqrt(d * (d - 1)), math.sqrt((d - 1) / d))
        yr = (-1 / (d * math.sqrt(d - 1)), math.sqrt(d - 1) / d)
    if m == 1:
        return np.zeros(1), np.zeros(1)
    return np.linspace(*xr, m), np.linspace(*yr, m)


def _scan_row(family, d, xs, y):
    rows = []
    for x in xs:
        x = float(x)
        if family == "ghzsym":
            c = symfam.GhzSymCoords(x, y)
            if not symfam.ghzsym_is_physical(c):
                continue
            rep = symfam.ghzsym_exact(c)
            rows.append((x, y, rep.labels["class"], rep["tau3"].value,
                         rep["gme_concurrence"].value, rep["negativity"].value))
        else:
            c = symfam.AxiCoords(x, y, d)
            if not symfam.axi_is_physical(c):
                continue
            rep = symfam.axi_exact(c)
            k = rep.labels["schmidt_number"]
            rows.append((x, y, "" if k is None else f"S{k}", None, None, rep["negativity"].value))
    return rows


def cmd_scan(args, out) -> int:
    if args.grid < 1:
        raise StateFormatError("grid must be at least 1")
    if args.family == "axi" and args.d < 2:
        raise StateFormatError("axisymmetric scans need d >= 2")
    xs, ys = _grid_axes(args.family, args.d, args.grid)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        # map keeps grid order whatever the scheduling
        chunks = list(pool.map(lambda y: _scan_row(args.family, args.d, xs, float(y)), ys))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    count = 0
    for chunk in chunks:
        for row in chunk:
            w.writerow([_fmt(v) for v in row])
            count += 1
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror}") from exc
    out.write(json.dumps({"family": args.family, "grid": args.grid, "rows": count,
                          "out": str(args.out)}, indent=2) + "\n")
    return 0


# ------------------------------------------------------------ witness

def cmd_witness(args, out) -> int:
    state = load_state(args.state)
    value = threequbit.witness_value(state, args.witness)
    doc = {"seed": args.seed, "input": _describe(args.state, state), "witness": args.witness,
           "value": value, "detected": value < 0}
    _emit(doc, [{"witness": args.witness, "value": value, "detected": value < 0}], args.csv, out)
    return 0


# ------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tanglectl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, state=True):
        if state:
            sp.add_argument("--state", required=True, help="state file (JSON)")
        sp.add_argument("--seed", type=int, default=0, help="seed for optimizers (default 0)")
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_false", dest="csv", help="JSON report (default)")
        fmt.add_argument("--csv", action="store_true", help="CSV report")
        sp.set_defaults(csv=False)

    m = sub.add_parser("measure", help="evaluate entanglement measures")
    common(m)
    m.add_argument("--measures", required=True, help="comma-separated: " + ",".join(MEASURES))
    m.add_argument("--timing", action="store_true", help="add per-measure seconds (not reproducible)")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("classify", help="entanglement class with supporting invariants")
    common(c)
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("scan", help="CSV grid over a symmetric family")
    s.add_argument("--family", choices=("axi", "ghzsym"), required=True)
    s.add_argument("--d", type=int, default=3, help="local dimension for axi")
    s.add_argument("--grid", type=int, default=100, help="points per axis")
    s.add_argument("--out", required=True, help="output CSV path")
    s.set_defaults(func=cmd_scan)

    w = sub.add_parser("witness", help="evaluate a named witness")
    common(w)
    w.add_argument("--witness", required=True, choices=threequbit.WITNESSES)
    w.set_defaults(func=cmd_witness)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except DimensionError as exc:
        print(f"tanglectl: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except UnsupportedError as exc:
        print(f"tanglectl: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (StateError, OSError) as exc:
        # malformed files, non-physical matrices, unwritable outputs
        print(f"tanglectl: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
