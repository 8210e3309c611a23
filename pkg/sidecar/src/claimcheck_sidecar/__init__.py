"""HTTP sidecar serving the encoder endpoints the claimcheck client expects."""

from .app import create_app
from .config import ServiceConfig

__version__ = "0.1.0"

__all__ = ["ServiceConfig", "create_app", "__version__"]
