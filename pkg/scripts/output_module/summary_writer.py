"""Summary time series as CSV, one row per report step, in the deck's unit system."""

import logging
from collections.abc import Iterable
from pathlib import Path

import pandas as pd

from reservoir_module.units import UnitSystem
from solver_module.nonlinear import ReportRecord

logger = logging.getLogger(__name__)

VECTOR_DIMENSIONS = {
    "WBHP": "pressure",
    "WOPR": "liquid_surface_rate",
    "WWPR": "liquid_surface_rate",
    "WGPR": "gas_surface_rate",
    "WGOR": "gas_oil_ratio",
    "WWIR": "liquid_surface_rate",
    "WGIR": "gas_surface_rate",
    "FOPR": "liquid_surface_rate",
    "FWPR": "liquid_surface_rate",
    "FGPR": "gas_surface_rate",
    "FWIR": "liquid_surface_rate",
    "FGIR": "gas_surface_rate",
    "FPR": "pressure",
}


def column_name(vector: str, well: str | None) -> str:
    return f"{vector}:{well}" if well else vector


def summary_row(record: ReportRecord, vectors: list[tuple[str, str | None]], units: UnitSystem) -> dict[str, float]:
    """One CSV row: TIME in days, then every requested vector converted from SI."""
    row = {"TIME": float(units.from_si("time", record.time))}
    for vector, well in vectors:
        if vector == "FPR":
            value = record.field_pressure
        elif well is None:
            value = record.field_rates.get(vector, 0.0)
        else:
            # a well that is shut or not yet defined reports zero
            value = record.well_rates.get(well, {}).get(vector, 0.0)
        row[column_name(vector, well)] = float(units.from_si(VECTOR_DIMENSIONS[vector], value))
    return row


def summary_frame(
    records: Iterable[ReportRecord], vectors: list[tuple[str, str | None]], units: UnitSystem
) -> pd.DataFrame:
    """Rows for report steps 1..n; the equilibrated state (step 0) is not a row."""
    columns = ["TIME"] + [column_name(vector, well) for vector, well in vectors]
    rows = [summary_row(record, vectors, units) for record in records if record.step > 0]
    return pd.DataFrame(rows, columns=columns)


def write_summary(
    records: Iterable[ReportRecord],
    vectors: list[tuple[str, str | None]],
    units: UnitSystem,
    path: str | Path,
) -> pd.DataFrame:
    """Write the summary CSV (header only when there are no report steps).

    Returns:
        The frame that was written
    """
    frame = summary_frame(records, vectors, units)
    frame.to_csv(path, index=False)
    logger.info("summary written to %s (%d rows)", path, len(frame))
    return frame


class SummaryWriter:
    """Appends a row per report step as results arrive, then rewrites the full file at the end."""

    def __init__(self, path: str | Path, vectors: list[tuple[str, str | None]], units: UnitSystem):
        self.path = Path(path)
        self.vectors = list(vectors)
        self.units = units
        self.records: list[ReportRecord] = []
        summary_frame([], self.vectors, self.units).to_csv(self.path, index=False)

    def append(self, record: ReportRecord):
        """Flush one report step to disk."""
        self.records.append(record)
        if record.step == 0:
            return
        frame = summary_frame([record], self.vectors, self.units)
        frame.to_csv(self.path, mode="a", header=False, index=False)

    def finalize(self) -> pd.DataFrame:
        return write_summary(self.records, self.vectors, self.units, self.path)
