"""Hot-kernel backend selection.

Two interchangeable implementations of the numeric inner loops
(conv1d forward/backward, pairwise squared distances, batched forward
kinematics): a Cython extension (`_ckern`) built at install time and a
pure-numpy fallback (`pykern`). The extension is preferred when present;
set HABITMOTION_BACKEND=python|compiled to force one.

`benchmarks/bench_kernels.py` compares the two.
"""

import os

_requested = os.environ.get("HABITMOTION_BACKEND", "auto")

if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"HABITMOTION_BACKEND must be auto, compiled or python, got {_requested!r}"
    )

if _requested == "python":
    from habitmotion.kernels import pykern as _impl

    BACKEND = "python"
else:
    try:
        from habitmotion.kernels import _ckern as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "HABITMOTION_BACKEND=compiled but the extension is not built; "
                "reinstall the package with a C compiler available"
            ) from None
        from habitmotion.kernels import pykern as _impl

        BACKEND = "python"

conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
sqdist = _impl.sqdist
fk_positions = _impl.fk_positions
