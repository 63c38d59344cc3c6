"""Serialization: splat PLY, camera JSON, images, and the viewer export."""

from .cameras import load_cameras, save_cameras
from .images import read_image, write_image
from .ply import PlyParseError, load_ply, save_ply
from .wsplat_format import WsplatParseError, export_wsplat, load_wsplat

__all__ = [
    "PlyParseError",
    "WsplatParseError",
    "export_wsplat",
    "load_cameras",
    "load_ply",
    "load_wsplat",
    "read_image",
    "save_cameras",
    "save_ply",
    "write_image",
]
