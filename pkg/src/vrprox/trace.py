"""Run traces and their CSV serialization.

The schema is fixed: one header row
``k,effective_passes,objective,objective_avg,gap,variance,seconds,restart``
and one row per record. Unavailable values (gap under perturbation,
variance when not probed) are written as empty fields. Wall-clock seconds
are kept in memory but written as empty by default so that reruns of the
same configuration produce byte-identical files; pass
``include_seconds=True`` to persist them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["CSV_HEADER", "SolverTrace", "TraceRow"]

CSV_HEADER = "k,effective_passes,objective,objective_avg,gap,variance,seconds,restart"


@dataclass
class TraceRow:
    k: int
    effective_passes: float
    objective: float
    objective_avg: float | None = None
    gap: float | None = None
    variance: float | None = None
    seconds: float = 0.0
    restart: bool = False
    feasible: bool = True  # box-indicator runs flag infeasible points here


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return repr(float(value))


@dataclass
class SolverTrace:
    rows: list[TraceRow] = field(default_factory=list)
    algorithm: str = ""
    seed: int | None = None
    fstar_ref: float | None = None
    diverged: bool = False
    message: str = ""

    def append(self, row: TraceRow) -> None:
        if self.rows:
            last = self.rows[-1]
            if row.effective_passes < last.effective_passes or row.k < last.k:
                raise ValueError("trace rows must be ordered by iteration and cost")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        vals = [getattr(r, name) for r in self.rows]
        return np.array([np.nan if v is None else float(v) for v in vals])

    @property
    def final(self) -> TraceRow:
        if not self.rows:
            raise ValueError("empty trace")
        return self.rows[-1]

    def to_csv(self, path, include_seconds: bool = False) -> None:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        str(r.k),
                        repr(float(r.effective_passes)),
                        _fmt(r.objective),
                        _fmt(r.objective_avg),
                        _fmt(r.gap),
                        _fmt(r.variance),
                        _fmt(r.seconds) if include_seconds else "",
                        str(int(r.restart)),
                    ]
                )
            )
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @staticmethod
    def from_csv(path) -> "SolverTrace":
        trace = SolverTrace()
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header in {path}: {header!r}")
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != 8:
                    raise ValueError(f"malformed trace row in {path}: {line!r}")

                def opt(s: str) -> float | None:
                    return None if s == "" else float(s)

                trace.rows.append(
                    TraceRow(
                        k=int(float(parts[0])),
                        effective_passes=float(parts[1]),
                        objective=float(parts[2]) if parts[2] else float("nan"),
                        objective_avg=opt(parts[3]),
                        gap=opt(parts[4]),
                        variance=opt(parts[5]),
                        seconds=float(parts[6]) if parts[6] else 0.0,
                        restart=bool(int(parts[7])),
                    )
                )
        return trace
