"""Compiled vs pure-Python kernels, per kernel and end to end.

    python3 benchmarks/bench_kernels.py [--repeat N]

The end-to-end rows run the same Sinkhorn decision in a subprocess with
NCSCALE_PURE_PYTHON unset and set, since the backend is fixed at import.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ncscale import _kernels_py

try:
    from ncscale import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

END_TO_END = r"""
import json, time
import numpy as np
from ncscale import BACKEND
from ncscale.matscale import bipartite_kraus
from ncscale.opscale import find_kstar
from ncscale.permproj import kl_project
rng = np.random.default_rng(0)
mats = [(rng.random((8, 8)) < 0.3).astype(int) for _ in range(20)]
t = time.perf_counter()
for A in mats:
    find_kstar(bipartite_kraus(A))
sinkhorn = time.perf_counter() - t
qs = [rng.exponential(1.0, 64) for _ in range(2000)]
alpha = np.sort(rng.uniform(0.1, 1.0, 64))[::-1]
t = time.perf_counter()
for q in qs:
    kl_project(q, alpha)
proj = time.perf_counter() - t
print(json.dumps({"backend": BACKEND, "sinkhorn": sinkhorn, "kl_project": proj}))
"""


def _cases(rng, n):
    q = np.sort(rng.exponential(1.0, n))[::-1].copy()
    alpha = np.sort(rng.uniform(0.1, 1.0, n))[::-1].copy()
    x = _kernels_py.kl_dual_sorted(q, alpha)
    w = rng.integers(0, 3, n).astype(float)
    nu = rng.uniform(0.0, 1.0, n)
    k = float(w.sum()) * 0.7 + 1.0
    return {
        "kl_dual_sorted": lambda m: m.kl_dual_sorted(q, alpha),
        "kl_projection_gap": lambda m: m.kl_projection_gap(q, x),
        "gen_kl": lambda m: m.gen_kl(q, alpha),
        "halfspace_z": lambda m: m.halfspace_z(nu, w, k),
    }


def kernel_table(repeat: int) -> list[tuple]:
    rng = np.random.default_rng(1)
    rows = []
    for n in (8, 64, 512):
        for name, call in _cases(rng, n).items():
            tp = min(timeit.repeat(lambda: call(_kernels_py), number=repeat, repeat=3)) / repeat
            tc = (min(timeit.repeat(lambda: call(_kernels_c), number=repeat, repeat=3)) / repeat
                  if _kernels_c is not None else float("nan"))
            rows.append((name, n, tp, tc))
    return rows


def end_to_end() -> list[dict]:
    out = []
    for pure in ("0", "1"):
        env = dict(os.environ, NCSCALE_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                             text=True, check=True)
        out.append(json.loads(res.stdout))
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; only the Python column is meaningful")
    print(f"{'kernel':<20}{'n':>6}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, n, tp, tc in kernel_table(args.repeat):
        print(f"{name:<20}{n:>6}{tp * 1e6:>14.2f}{tc * 1e6:>14.2f}{tp / tc:>10.1f}")
    print()
    print(f"{'end to end':<20}{'backend':>10}{'sinkhorn (s)':>14}{'kl_project (s)':>16}")
    for row in end_to_end():
        print(f"{'':<20}{row['backend']:>10}{row['sinkhorn']:>14.3f}{row['kl_project']:>16.3f}")


if __name__ == "__main__":
    main()
