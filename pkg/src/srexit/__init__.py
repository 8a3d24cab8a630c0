"""Exit time of the generalized Shiryaev-Roberts diffusion dR = dt + mu R dB from [0, A]."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CensoringError,
    ConvergenceError,
    DegenerateParameterError,
    DomainError,
    NoSignChangeError,
    SRExitError,
    SymmetryError,
)
from .spectral import ModelParams, EigenResult, SpectralPoint  # noqa: E402
from .exitlaw import ExitProblem, MgfQuery, MomentSet  # noqa: E402
from .montecarlo import SimConfig, ExitTimeSample, SurvivalCurve  # noqa: E402
