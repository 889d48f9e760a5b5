"""helmdisc: series solutions, resonances, Morawetz identity checks and
certified wavenumber-explicit bounds for the 2-d penetrable-disc Helmholtz
transmission problem."""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
