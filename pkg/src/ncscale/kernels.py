"""Backend selection for the scalar kernels.

The compiled extension is used when it was built; setting the environment
variable ``NCSCALE_PURE_PYTHON=1`` forces the pure-Python twin.
"""
import os

if os.environ.get("NCSCALE_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
    HAVE_EXTENSION = False
else:
    try:
        from . import _kernels as _impl
        HAVE_EXTENSION = True
    except ImportError:  # extension not built
        from . import _kernels_py as _impl
        HAVE_EXTENSION = False

BACKEND = "cython" if HAVE_EXTENSION else "python"
LOG_CAP = _impl.LOG_CAP
kl_dual_sorted = _impl.kl_dual_sorted
kl_projection_gap = _impl.kl_projection_gap
gen_kl = _impl.gen_kl
halfspace_z = _impl.halfspace_z

__all__ = ["HAVE_EXTENSION", "BACKEND", "LOG_CAP", "kl_dual_sorted",
           "kl_projection_gap", "gen_kl", "halfspace_z"]
