"""Reference model server for the drtt wire protocol."""

from .server import ServerConfig, serve

__version__ = "0.1.0"
