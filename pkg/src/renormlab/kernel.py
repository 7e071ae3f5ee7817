"""Backend selection for the orbit kernels.

The compiled MPFR kernel (renormlab._kernel) is used when it was built;
otherwise the pure gmpy2 implementation takes over.  Both produce
bit-identical results; the environment variable RENORMLAB_BACKEND
("c" or "python") forces a choice, mainly for the benchmark and the
cross-backend tests.
"""
import os

from . import _kernel_py


def _load_compiled():
    from . import _kernel
    return _kernel


def get_backend(name):
    if name == "python":
        return _kernel_py
    if name == "c":
        return _load_compiled()
    raise ValueError("unknown backend %r" % name)


def available_backends():
    names = ["python"]
    try:
        _load_compiled()
        names.insert(0, "c")
    except ImportError:
        pass
    return names


_forced = os.environ.get("RENORMLAB_BACKEND")
if _forced:
    _impl = get_backend(_forced)
else:
    try:
        _impl = _load_compiled()
    except ImportError:
        _impl = _kernel_py

BACKEND = _impl.BACKEND

STATUS_OK = _kernel_py.STATUS_OK
STATUS_NO_CONVERGENCE = _kernel_py.STATUS_NO_CONVERGENCE
STATUS_DERIVATIVE_VANISHED = _kernel_py.STATUS_DERIVATIVE_VANISHED
STATUS_GUARD_EXIT = _kernel_py.STATUS_GUARD_EXIT

eval_lift_real = _impl.eval_lift_real
eval_lift_dlift_real = _impl.eval_lift_dlift_real
eval_lift_dlift_cx = _impl.eval_lift_dlift_cx
orbit_real = _impl.orbit_real
orbit_final_real = _impl.orbit_final_real
orbit_count_in = _impl.orbit_count_in
iterate_real = _impl.iterate_real
iterate_dlift_real = _impl.iterate_dlift_real
iterate_cx = _impl.iterate_cx
pullback_newton = _impl.pullback_newton
