"""Configuration, grid sampling, export and verification reports."""

from .config import Anchor, ConfigParseError, JobConfig, load_config, parse_config
from .export import IoError, export_mesh, read_ply, write_fields_csv
from .report import build_report, report_json, run_verify
from .sampling import EmptyMesh, GridMesh, grid_mesh, sample_surface

__all__ = [
    "Anchor",
    "ConfigParseError",
    "EmptyMesh",
    "GridMesh",
    "IoError",
    "JobConfig",
    "build_report",
    "export_mesh",
    "grid_mesh",
    "load_config",
    "parse_config",
    "read_ply",
    "report_json",
    "run_verify",
    "sample_surface",
    "write_fields_csv",
]
