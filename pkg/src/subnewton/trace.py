"""Per-iteration run records and the trace CSV schema.

Every solver emits one RunRecord per iteration (epoch); the CSV layout
is fixed: header row, columns in the order below, floats with 17
significant digits so values round-trip exactly.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = (
    "solver",
    "iter",
    "cum_seconds",
    "objective",
    "train_acc",
    "test_acc",
    "step_size",
    "cg_iters",
)

# timing is the only non-deterministic column
TIMING_COLUMNS = ("cum_seconds",)


def format_float(v):
    return f"{float(v):.17g}"


@dataclass
class RunRecord:
    solver: str
    iteration: int
    cum_seconds: float
    objective: float
    train_acc: float
    test_acc: float
    step_size: float
    cg_iters: int

    def as_row(self):
        return [
            self.solver,
            str(self.iteration),
            format_float(self.cum_seconds),
            format_float(self.objective),
            format_float(self.train_acc),
            format_float(self.test_acc),
            format_float(self.step_size),
            str(self.cg_iters),
        ]


@dataclass
class SolveTrace:
    """Full log of one run plus the final iterate and stop reason.

    reason is one of gradient-converged, max-iters, line-search-failure
    (Newton) or max-iters, diverged (first-order).
    """

    records: list = field(default_factory=list)
    x_final: np.ndarray = None
    reason: str = ""

    @property
    def initial_objective(self):
        return self.records[0].objective

    @property
    def final_objective(self):
        return self.records[-1].objective

    @property
    def iterations(self):
        return self.records[-1].iteration

    @property
    def objectives(self):
        return np.array([r.objective for r in self.records])

    @property
    def best_test_acc(self):
        accs = [r.test_acc for r in self.records if np.isfinite(r.test_acc)]
        return max(accs) if accs else float("nan")

    def time_to_accuracy(self, target):
        """First cumulative timestamp whose test accuracy reaches target,
        or None if never reached."""
        for r in self.records:
            if np.isfinite(r.test_acc) and r.test_acc >= target:
                return r.cum_seconds
        return None


def write_trace_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in records:
            writer.writerow(rec.as_row())


def read_trace_csv(path):
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        for row in reader:
            records.append(
                RunRecord(
                    solver=row[0],
                    iteration=int(row[1]),
                    cum_seconds=float(row[2]),
                    objective=float(row[3]),
                    train_acc=float(row[4]),
                    test_acc=float(row[5]),
                    step_size=float(row[6]),
                    cg_iters=int(row[7]),
                )
            )
    return records
