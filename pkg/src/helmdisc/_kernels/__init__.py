"""Kernel backend selection.

The compiled Cython core is used when importable; the pure numpy fallback
otherwise. HELMDISC_KERNEL={auto,py,cy} overrides.
"""
import os

_choice = os.environ.get("HELMDISC_KERNEL", "auto")
if _choice not in ("auto", "py", "cy"):
    raise RuntimeError(f"HELMDISC_KERNEL must be auto|py|cy, got {_choice!r}")

impl = None
if _choice in ("auto", "cy"):
    try:
        from . import _cyl_cy as impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "cy":
            raise
        impl = None
if impl is None:
    from . import _cyl_py as impl

BACKEND = impl.BACKEND
cyl_scaled = impl.cyl_scaled
cyl_pair_batch = impl.cyl_pair_batch
cyl_phase_sum = impl.cyl_phase_sum


def available_backends():
    names = ["python"]
    try:
        from . import _cyl_cy  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names
