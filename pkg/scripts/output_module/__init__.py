"""Result output: summary CSV, VTK field files and the background output worker.

This module provides tools for:
- Writing summary vectors per report step in deck units
- Writing PRESSURE/SWAT/SGAS/SOIL/RS cell fields as legacy VTK
- Running output jobs off the stepping thread
"""

from .output_queue import OutputQueue
from .summary_writer import SummaryWriter, summary_frame, write_summary
from .vtk_writer import FieldSnapshot, snapshot_fields, write_vtk

__all__ = [
    "SummaryWriter",
    "summary_frame",
    "write_summary",
    "FieldSnapshot",
    "snapshot_fields",
    "write_vtk",
    "OutputQueue",
]
