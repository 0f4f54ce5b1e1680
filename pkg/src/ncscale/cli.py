"""Command-line interface: instance parsing, solver dispatch, JSON envelopes."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .numla import CPMap, apply_adjoint, apply_cp, size

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class SchemaError(ValueError):
    pass


@dataclass
class InstanceFile:
    kind: str                     # cpmap | matrix | lines
    data: object                  # CPMap, np.ndarray or LineSet
    metadata: dict


def _entry(v, where):
    if isinstance(v, bool):
        raise SchemaError(f"{where}: expected an integer or [re, im] pair")
    if isinstance(v, int):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, int) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise SchemaError(f"{where}: expected an integer or [re, im] pair, got {v!r}")


def _dim(obj, key):
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise SchemaError(f"{key}: expected a nonnegative integer, got {v!r}")
    return v


def _int_vector(v, n, where):
    if not isinstance(v, list) or len(v) != n:
        raise SchemaError(f"{where}: expected a list of {n} entries")
    out = [_entry(t, f"{where}[{i}]") for i, t in enumerate(v)]
    return [int(z.real) if z.imag == 0 else z for z in out]


def parse_instance_data(obj) -> InstanceFile:
    if not isinstance(obj, dict):
        raise SchemaError("top level: expected a JSON object")
    kind = obj.get("kind")
    meta = {k: obj[k] for k in ("seed", "description") if k in obj}
    if kind == "cpmap":
        m, n = _dim(obj, "m"), _dim(obj, "n")
        kraus = obj.get("kraus")
        if not isinstance(kraus, list) or not kraus:
            raise SchemaError("kraus: expected a nonempty list of matrices")
        arr = np.zeros((len(kraus), m, n), dtype=complex)
        for p, K in enumerate(kraus):
            if not isinstance(K, list) or len(K) != m:
                raise SchemaError(f"kraus[{p}]: expected {m} rows")
            for i, row in enumerate(K):
                if not isinstance(row, list) or len(row) != n:
                    raise SchemaError(f"kraus[{p}][{i}]: expected {n} entries")
                for j, v in enumerate(row):
                    arr[p, i, j] = _entry(v, f"kraus[{p}][{i}][{j}]")
        return InstanceFile("cpmap", CPMap(arr), meta)
    if kind == "matrix":
        m, n = _dim(obj, "m"), _dim(obj, "n")
        ent = obj.get("entries")
        if not isinstance(ent, list) or len(ent) != m:
            raise SchemaError(f"entries: expected {m} rows")
        A = np.zeros((m, n))
        for i, row in enumerate(ent):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"entries[{i}]: expected {n} entries")
            for j, v in enumerate(row):
                if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
                    raise SchemaError(f"entries[{i}][{j}]: expected a nonnegative number")
                A[i, j] = v
        return InstanceFile("matrix", A, meta)
    if kind == "lines":
        from .blapps import LineSet
        n = _dim(obj, "n")
        lines = obj.get("lines")
        if not isinstance(lines, list) or not lines:
            raise SchemaError("lines: expected a nonempty list of [a, b] pairs")
        pairs = []
        for i, ln in enumerate(lines):
            if not isinstance(ln, list) or len(ln) != 2:
                raise SchemaError(f"lines[{i}]: expected two vectors")
            pairs.append((_int_vector(ln[0], n, f"lines[{i}][0]"), _int_vector(ln[1], n, f"lines[{i}][1]")))
        return InstanceFile("lines", LineSet(n, pairs), meta)
    raise SchemaError(f"kind: expected one of cpmap, matrix, lines, got {kind!r}")


def parse_instance(path) -> InstanceFile:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_instance_data(obj)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _cvec(v) -> list:
    v = np.asarray(v)
    if np.iscomplexobj(v) and np.any(v.imag):
        return [[float(z.real), float(z.imag)] for z in v]
    return [float(z.real) for z in v]


def _cmat(M) -> list:
    return [_cvec(col) for col in np.asarray(M).T]


def _need(inst: InstanceFile, kind: str):
    if inst.kind != kind:
        raise SchemaError(f"this command needs a {kind} instance, got {inst.kind}")
    return inst.data


def _write_trace(path, objectives, slacks=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective", "slack"])
        for i, f in enumerate(objectives):
            w.writerow([i, repr(float(f)), repr(float(slacks[i])) if slacks else ""])


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(" ", "").split(",") if t]


def _cmd_ncrank(inst, a):
    from .opscale import find_kstar, find_rstar
    phi = _need(inst, "cpmap")
    kw = _decision_kwargs(a)
    k, klog = find_kstar(phi, **kw)
    r, rlog = find_rstar(phi, k, **kw)
    return EXIT_OK, {"ncrank": k, "r_star": r, "m": phi.m, "n": phi.n,
                     "decisions": [{"k": d.k, "r": d.r, "decision": d.verdict, "reason": d.reason,
                                    "iterations": d.iterations} for d in klog + rlog]}


def _cmd_shrunk(inst, a):
    from .shrunk import randomized_shrunk, round_subspaces, shrunk_from_dominant
    phi = _need(inst, "cpmap")
    if a.method == "wong":
        res = randomized_shrunk(phi, rng_seed=a.seed, trials=a.trials)
        return EXIT_OK, res.to_json()
    dom = round_subspaces(phi, denom_bound_override=a.denom_bound, max_iter=a.max_iter or 20_000,
                          rng_seed=a.seed, decision_kwargs=_decision_kwargs(a))
    out = shrunk_from_dominant(phi, dom).to_json()
    out["L"] = dom.to_json()["L"]
    out["r_star"] = dom.rstar
    return EXIT_OK, out


def _decision_kwargs(a) -> dict:
    kw = {}
    if a.eps is not None:
        kw["eps"] = a.eps
    if a.max_iter is not None:
        kw["max_iter"] = a.max_iter
    if getattr(a, "floor_const", None) is not None:
        kw["floor_const"] = a.floor_const
    if a.exact:
        kw["mode"] = "exact"
    return kw


def _cmd_scale(inst, a):
    from .opscale import MajSpec, maj_sinkhorn
    from .permproj import majorization_slack
    phi = _need(inst, "cpmap")
    alpha = np.array(_floats(a.alpha)) if a.alpha else None
    beta = np.array(_floats(a.beta)) if a.beta else None
    spec = MajSpec.perturbed(phi.n, phi.m, a.k, a.r)
    if alpha is not None or beta is not None:
        spec = MajSpec(alpha if alpha is not None else spec.alpha, beta if beta is not None else spec.beta, a.k, a.r)
    eps = a.eps if a.eps is not None else 0.1
    res = maj_sinkhorn(phi, spec, eps, mode=a.mode, floor_const=a.floor_const or 16.0, max_iter=a.max_iter)
    if a.trace:
        _write_trace(a.trace, res.objectives, res.slacks)
    out = {"status": res.status, "iterations": res.iterations, "objective": res.objective,
           "normalization": res.normalization, "factor": res.factor}
    if res.scaled:
        sc = CPMap(res.scaled_kraus)
        col = np.linalg.eigvalsh(apply_adjoint(sc, np.eye(phi.m)))[::-1]
        row = np.linalg.eigvalsh(apply_cp(sc, np.eye(phi.n)))[::-1]
        out.update({"size": size(sc), "column_spectrum": col.tolist(), "row_spectrum": row.tolist(),
                    "column_slack": majorization_slack(col, spec.alpha),
                    "row_slack": majorization_slack(row, spec.beta)})
    return (EXIT_OK if res.scaled else EXIT_INFEASIBLE), out


def _cmd_decide(inst, a):
    from .opscale import decision_sinkhorn
    phi = _need(inst, "cpmap")
    d = decision_sinkhorn(phi, a.k, a.r, **_decision_kwargs(a))
    if a.trace:
        _write_trace(a.trace, d.objectives, d.slacks)
    out = {"decision": d.verdict, "reason": d.reason, "k": d.k, "r": d.r, "iterations": d.iterations}
    if d.witness is not None and d.witness.exact_R is not None:
        out["witness"] = {"L": [[str(x) for x in v] for v in d.witness.exact_L],
                          "R": [[str(x) for x in v] for v in d.witness.exact_R]}
    return (EXIT_OK if d.bounded else EXIT_INFEASIBLE), out


def _cmd_witness(inst, a):
    from .opscale import approx_indep
    phi = _need(inst, "cpmap")
    eps = a.eps if a.eps is not None else 1e-6
    w = approx_indep(phi, int(a.k), a.r, eps, max_iter=a.max_iter)
    return EXIT_OK, {"k": int(a.k), "r": a.r, "epsilon": w.epsilon, "dim_L": w.dims[0], "dim_R": w.dims[1],
                     "L": _cmat(w.L), "R": _cmat(w.R)}


def _cmd_matscale(inst, a):
    from .matscale import matrix_sinkhorn, max_matching_size, smallest_hall_blocker
    from .permproj import alpha_r
    A = _need(inst, "matrix")
    m, n = A.shape
    k = a.k if a.k is not None else float(min(m, n))
    eps = a.eps if a.eps is not None else 0.1
    res = matrix_sinkhorn(A, alpha_r(n, a.r), np.ones(m), k, eps, max_iter=a.max_iter or 100_000)
    hb = smallest_hall_blocker(A)
    out = {"status": res.status, "k": k, "iterations": res.iterations, "objective": res.objective,
           "max_matching": max_matching_size(A), "hall_blocker": list(hb.S), "defect": hb.defect}
    if res.scaled:
        out["scaled_matrix"] = res.scaled_matrix.tolist()
    return (EXIT_OK if res.scaled else EXIT_INFEASIBLE), out


def _cmd_match(inst, a):
    from .blapps import frac_matroid_matching
    L = _need(inst, "lines")
    eps = a.eps if a.eps is not None else 0.05
    fm = frac_matroid_matching(L, eps, symmetric=not a.asymmetric)
    return EXIT_OK, {"x": fm.x.tolist(), "value": fm.value, "quality": fm.quality, "ncrank": fm.kstar,
                     "iterations": fm.iterations}


def _cmd_cover(inst, a):
    from .blapps import dominant_two_cover
    L = _need(inst, "lines")
    c = dominant_two_cover(L, denom_bound_override=a.denom_bound)
    return EXIT_OK, c.to_json()


def _cmd_member(inst, a):
    from .blapps import mem_eps_bl
    L = _need(inst, "lines")
    if not a.point:
        raise SchemaError("bl-member needs --point")
    eps = a.eps if a.eps is not None else 0.1
    r = mem_eps_bl(L, _floats(a.point), eps, a.max_iter)
    out = {"verdict": "near" if r.near else "far", "reason": r.reason, "iterations": r.iterations}
    if r.near:
        out["y"] = r.y.tolist()
    if r.violated is not None:
        out["violated_subspace"] = [[str(x) for x in v] for v in r.violated]
    return (EXIT_OK if r.near else EXIT_INFEASIBLE), out


def _cmd_weighted(inst, a):
    from .blapps import weighted_opt
    L = _need(inst, "lines")
    if not a.w:
        raise SchemaError("weighted needs --w")
    w = _floats(a.w)
    opt = weighted_opt(L, w, a.eps)
    w = [int(v) for v in w]
    return EXIT_OK, {"w": w, "opt": str(opt), "opt_float": float(opt)}


COMMANDS = {
    "ncrank": _cmd_ncrank, "shrunk": _cmd_shrunk, "scale": _cmd_scale, "decide": _cmd_decide,
    "witness": _cmd_witness, "matscale": _cmd_matscale, "match": _cmd_match, "cover": _cmd_cover,
    "bl-member": _cmd_member, "weighted": _cmd_weighted,
}


def run_command(command: str, instance: InstanceFile, flags: argparse.Namespace) -> tuple[int, dict]:
    """Run one solver command; returns (exit code, envelope)."""
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}")
    t0 = time.perf_counter()
    code, result = COMMANDS[command](instance, flags)
    env = {"schema_version": SCHEMA_VERSION, "command": command,
           "flags": {k: v for k, v in sorted(vars(flags).items())
                     if k not in ("func", "instance", "command", "timing")},
           "result": result}
    if getattr(flags, "timing", False):
        env["seconds"] = round(time.perf_counter() - t0, 6)
    return code, env


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver flags")
    g.add_argument("--eps", type=float, default=None,
                   help="accuracy; default depends on the command (decide: 1/(10 sqrt(m+n)) for r=0, "
                        "1/(10 n sqrt(m+n)) for r>0; scale/matscale/bl-member: 0.1; match: 0.05)")
    g.add_argument("--max-iter", type=int, default=None, help="iteration cap (default: worst-case budget with constant 64)")
    g.add_argument("--seed", type=int, default=0, help="random seed for randomized routines (default 0)")
    g.add_argument("--precision-bits", type=int, default=53,
                   help="requested working precision; the engine computes in IEEE double (53 bits)")
    g.add_argument("--denom-bound", type=int, default=10**6, help="denominator bound for rounding (default 10^6)")
    g.add_argument("--exact", action="store_true", help="use exact-mode updates where available")
    g.add_argument("--timing", action="store_true", help="include wall-clock seconds in the envelope")
    g.add_argument("--trace", default=None, help="write objective-per-iteration CSV to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncscale", description="Noncommutative rank, shrunk subspaces and "
                                 "majorized operator scaling.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "ncrank": "noncommutative rank k* and r* of a matrix space",
        "shrunk": "exact smallest shrunk subspace",
        "scale": "majorized operator scaling",
        "decide": "decide finiteness of the (k, r) capacity",
        "witness": "approximate independent set violating (k, r)",
        "matscale": "matrix scaling and Hall blocker of a nonnegative matrix",
        "match": "fractional linear matroid matching",
        "cover": "dominant 2-cover",
        "bl-member": "eps-membership in the rank-2 Brascamp-Lieb polytope",
        "weighted": "maximize w.x over the rank-2 Brascamp-Lieb polytope",
    }
    for name, h in helps.items():
        p = sub.add_parser(name, help=h, description=h)
        p.add_argument("instance", help="instance JSON file")
        _common(p)
        if name in ("scale", "decide", "witness", "matscale"):
            p.add_argument("--k", type=float, default=None if name == "matscale" else 1.0,
                           help="target size k (default 1; matscale: min(m, n))")
            p.add_argument("--r", type=int, default=0, help="perturbation count r (default 0)")
        if name in ("scale", "decide"):
            p.add_argument("--floor-const", type=float, default=None,
                           help="constant in the capacity floor (default 16)")
        if name == "scale":
            p.add_argument("--alpha", default=None, help="comma-separated column target (default alpha_r)")
            p.add_argument("--beta", default=None, help="comma-separated row target (default all ones)")
            p.add_argument("--mode", choices=["finite", "exact"], default="finite",
                           help="update rule (default finite)")
        if name == "shrunk":
            p.add_argument("--method", choices=["round", "wong"], default="round",
                           help="deterministic rounding or randomized Wong sequences (default round)")
            p.add_argument("--trials", type=int, default=8, help="draws per blow-up size for wong (default 8)")
        if name == "match":
            p.add_argument("--asymmetric", action="store_true", help="disable the symmetric scaling shortcut")
        if name == "bl-member":
            p.add_argument("--point", default=None, help="comma-separated point x")
        if name == "weighted":
            p.add_argument("--w", default=None, help="comma-separated nonnegative integer weights")
    rp = sub.add_parser("repro", help="run the acceptance suite and print a pass/fail table")
    rp.add_argument("--filter", default=None, help="comma-separated criterion numbers or names, e.g. 5 or kl,bits (default: all)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "repro":
        from .repro import run_suite
        try:
            results = run_suite(args.filter)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_ERROR
        return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR
    try:
        inst = parse_instance(args.instance)
        if args.command == "scale" and args.exact:
            args.mode = "exact"
        code, env = run_command(args.command, inst, args)
    except (SchemaError, ValueError, RuntimeError, OSError) as exc:
        print(json.dumps({"schema_version": SCHEMA_VERSION, "command": args.command, "error": str(exc)}),
              file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps(env, indent=2, default=str))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
