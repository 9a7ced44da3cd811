"""Benchmark time series: one row per outer step of a solver run."""

import csv
from dataclasses import dataclass, fields
from typing import Optional


@dataclass
class TraceRow:
    algorithm: str
    pass_count: float
    objective: float
    suboptimality: float
    align_u: float
    align_v: float
    constraint_u: float
    constraint_v: float
    wall_time: float = 0.0


# wall_time stays in memory only: benchmark CSVs must be byte-identical
# across identically seeded runs, so timing never reaches disk.
CSV_FIELDS = [f.name for f in fields(TraceRow) if f.name != "wall_time"]


class RunTrace:
    """Append-only list of TraceRow with CSV emission."""

    def __init__(self, rows=None):
        self.rows = list(rows) if rows else []

    def append(self, row):
        if self.rows and row.pass_count < self.rows[-1].pass_count:
            raise ValueError("pass_count must be nondecreasing within a run")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def final(self):
        return self.rows[-1] if self.rows else None

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def extend_with_prefix(self, other, extra):
        """Merge rows of `other`, tagging each with extra columns (bench use)."""
        for r in other.rows:
            self.rows.append(r)
        return self

    def write_csv(self, path, extra_columns=None):
        """RFC-4180-style CSV with a header row; floats use repr (round-trip
        exact and deterministic)."""
        extra = extra_columns or {}
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(extra.keys()) + CSV_FIELDS)
            prefix = [_fmt(v) for v in extra.values()]
            for r in self.rows:
                writer.writerow(prefix + [_fmt(getattr(r, name)) for name in CSV_FIELDS])

    def first_pass_reaching(self, suboptimality):
        """Pass count at which suboptimality first drops to the target, or None."""
        for r in self.rows:
            if r.suboptimality <= suboptimality:
                return r.pass_count
        return None


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
