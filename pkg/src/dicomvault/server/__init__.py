"""HTTP layer: DICOMWeb services, management API, sessions, audit middleware."""

from .app import create_app
from .auth import SessionToken, TokenStore
from .services import VaultServices
