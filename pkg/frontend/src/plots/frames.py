"""Parsing and validation of simulation trace CSVs.

The expected schema is the one the simulator CLI writes: ``t`` and ``event``
first, then paired ``truth_*`` / ``est_*`` state columns with matching
suffixes, then ``attitude_error_rad``, ``velocity_error``, ``lyapunov``.
Any drift from that schema fails loudly, naming the missing columns.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TAIL_COLUMNS = ("attitude_error_rad", "velocity_error", "lyapunov")
GNSS_EVENT = 1
MAG_EVENT = 2


class SchemaError(ValueError):
    """The CSV does not match the simulator trace schema."""


@dataclass(frozen=True)
class TraceFrame:
    """Trace columns as numeric arrays plus per-channel event masks."""

    columns: dict[str, np.ndarray]
    state_names: tuple[str, ...]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    @property
    def event(self) -> np.ndarray:
        return self.columns["event"]

    def mask(self, event_code: int) -> np.ndarray:
        return self.event == event_code

    def event_times(self, event_code: int) -> np.ndarray:
        return self.t[self.mask(event_code)]


def _validate_header(header: list[str]) -> tuple[str, ...]:
    missing = []
    if len(header) < 2 or header[0] != "t":
        missing.append("t")
    if len(header) < 2 or header[1] != "event":
        missing.append("event")
    for name in TAIL_COLUMNS:
        if name not in header[-3:]:
            missing.append(name)
    if missing:
        raise SchemaError(f"missing columns: {', '.join(missing)}")

    middle = header[2:-3]
    truth = [c[len("truth_"):] for c in middle if c.startswith("truth_")]
    est = [c[len("est_"):] for c in middle if c.startswith("est_")]
    if not truth or truth != est or len(middle) != len(truth) + len(est):
        expected = [f"truth_{s}" for s in truth] + [f"est_{s}" for s in truth]
        unmatched = [c for c in middle if c not in expected]
        raise SchemaError(
            "missing columns: truth_*/est_* pairs do not match"
            + (f" (unpaired: {', '.join(unmatched)})" if unmatched else "")
        )
    return tuple(truth)


def load_trace(csv_path: str | Path) -> TraceFrame:
    path = Path(csv_path)
    if not path.exists():
        raise SchemaError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("missing columns: empty file") from None
        state_names = _validate_header(header)
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError("no data rows (header-only CSV)")
    data = np.array([[float(x) for x in row] for row in rows])
    if data.shape[1] != len(header):
        raise SchemaError("row width does not match the header")
    columns = {name: data[:, i] for i, name in enumerate(header)}
    columns["event"] = columns["event"].astype(int)
    return TraceFrame(columns, state_names)
