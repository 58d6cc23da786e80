"""Reference model server for the line-delimited JSON prediction protocol."""

from .models import ModelBundle, load_model, save_artifact
from .protocol import PROTOCOL_VERSION, encode_frame, parse_frame
from .server import ServerConfig, Session, serve

__version__ = "0.1.0"

__all__ = [
    "ModelBundle",
    "PROTOCOL_VERSION",
    "ServerConfig",
    "Session",
    "encode_frame",
    "load_model",
    "parse_frame",
    "save_artifact",
    "serve",
    "__version__",
]
