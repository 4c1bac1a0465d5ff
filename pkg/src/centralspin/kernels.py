"""Backend selection for the hot per-level sums.

The compiled extension is used when it was built; set
``CENTRALSPIN_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_evaluate = _pykernels.evaluate

if os.environ.get("CENTRALSPIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _evaluate = _ckernels.evaluate


def evaluate(times, levels, branch_sign, derivatives=False, backend=None):
    """Sum the level contributions at every time in ``times``.

    Returns an array of shape ``(4, M)`` holding ``alpha``, ``beta`` and the
    real and imaginary parts of the phase-free coherence sum; with
    ``derivatives`` four more rows hold their time derivatives.
    """
    fn = _evaluate
    if backend == "python":
        fn = _pykernels.evaluate
    elif backend == "cython":
        from . import _ckernels

        fn = _ckernels.evaluate
    return fn(
        times,
        levels.eta,
        levels.eta_p,
        levels.amp_alpha,
        levels.amp_beta,
        levels.weight,
        levels.ratio_a,
        levels.ratio_b,
        float(branch_sign),
        bool(derivatives),
    )
