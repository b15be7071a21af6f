from .app import app, create_app
from .client import HttpBackend, LocalBackend, make_backend

__all__ = ["HttpBackend", "LocalBackend", "app", "create_app", "make_backend"]
