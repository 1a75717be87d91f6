"""Spectra, spectral projections, spectral submanifolds and inertial-manifold
certificates for delay differential equations with discrete and distributed
delays."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .expsum import ExpSum  # noqa: E402
from .model import *  # noqa: E402,F401,F403
from .spectrum import *  # noqa: E402,F401,F403
from .projection import *  # noqa: E402,F401,F403
from .ssm import *  # noqa: E402,F401,F403
from .inertial import *  # noqa: E402,F401,F403
from .simulate import *  # noqa: E402,F401,F403
from .sysfile import dump_system, file_digest, load_system, parse_system, save_system  # noqa: E402
from . import systems  # noqa: E402,F401

__all__ = [name for name in dir() if not name.startswith("_")]
