"""Named-column rectangular table with CSV round-trip support."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"
CATEGORICAL = "categorical"


@dataclass
class DataTable:
    """Ordered map of equally long column vectors plus per-column kinds.

    Numeric columns are float arrays; categorical columns hold level labels
    (object arrays). ``levels`` preserves the declared label order of every
    categorical column so reference coding stays deterministic, and
    ``onehot_groups`` records which indicator columns replaced a categorical
    one. Tables are treated as immutable after creation; helpers that change
    anything return a new table.
    """

    columns: dict[str, np.ndarray]
    kinds: dict[str, str] = field(default_factory=dict)
    levels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    onehot_groups: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"ragged columns: {lengths}")
        normalized = {}
        for name, col in self.columns.items():
            kind = self.kinds.get(name)
            if kind is None:
                kind = _infer_kind(col)
                self.kinds[name] = kind
            if kind == CATEGORICAL:
                arr = np.asarray(col, dtype=object)
            else:
                arr = np.asarray(col, dtype=float)
                if kind == BINARY:
                    bad = ~np.isin(arr[np.isfinite(arr)], (0.0, 1.0))
                    if bad.any():
                        raise ValueError(f"binary column '{name}' contains values outside {{0, 1}}")
            normalized[name] = arr
        self.columns = normalized

    @property
    def n_rows(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def col(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"no column named '{name}'")
        return self.columns[name]

    def numeric_names(self) -> list[str]:
        return [n for n in self.columns if self.kinds[n] != CATEGORICAL]

    def with_column(self, name: str, values, kind: str = CONTINUOUS) -> "DataTable":
        cols = dict(self.columns)
        cols[name] = np.asarray(values)
        kinds = dict(self.kinds)
        kinds[name] = kind
        return DataTable(cols, kinds, dict(self.levels), dict(self.onehot_groups))

    def select(self, names) -> "DataTable":
        cols = {n: self.columns[n] for n in names}
        kinds = {n: self.kinds[n] for n in names}
        levels = {n: v for n, v in self.levels.items() if n in cols}
        return DataTable(cols, kinds, levels, {})

    def take_rows(self, idx) -> "DataTable":
        idx = np.asarray(idx)
        cols = {n: c[idx] for n, c in self.columns.items()}
        return DataTable(cols, dict(self.kinds), dict(self.levels), dict(self.onehot_groups))

    # -- CSV ---------------------------------------------------------------

    def to_csv(self) -> str:
        """CSV text: header row, floats via repr, 0/1 for binary columns."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = self.names
        writer.writerow(names)
        for i in range(self.n_rows):
            row = []
            for name in names:
                value = self.columns[name][i]
                if self.kinds[name] == CATEGORICAL:
                    row.append(str(value))
                elif self.kinds[name] == BINARY:
                    row.append(str(int(value)))
                else:
                    row.append(repr(float(value)))
            writer.writerow(row)
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "DataTable":
        """Parse CSV text; column kinds are inferred (binary iff all 0/1)."""
        reader = csv.reader(io.StringIO(text))
        rows = [row for row in reader if row]
        if not rows:
            raise ValueError("empty CSV input")
        header = rows[0]
        if len(set(header)) != len(header):
            raise ValueError("duplicate column names in CSV header")
        body = rows[1:]
        for i, row in enumerate(body):
            if len(row) != len(header):
                raise ValueError(f"CSV row {i + 2} has {len(row)} fields, expected {len(header)}")
        columns: dict[str, np.ndarray] = {}
        kinds: dict[str, str] = {}
        levels: dict[str, tuple[str, ...]] = {}
        for j, name in enumerate(header):
            raw = [row[j] for row in body]
            try:
                vals = np.array([float(v) for v in raw], dtype=float)
            except ValueError:
                columns[name] = np.array(raw, dtype=object)
                kinds[name] = CATEGORICAL
                levels[name] = tuple(sorted(set(raw)))
                continue
            columns[name] = vals
            kinds[name] = _infer_kind(vals)
        return cls(columns, kinds, levels, {})

    @classmethod
    def read_csv(cls, path) -> "DataTable":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return cls.from_csv(fh.read())


def _infer_kind(col) -> str:
    arr = np.asarray(col)
    if arr.dtype.kind in ("U", "S", "O"):
        return CATEGORICAL
    arr = arr.astype(float)
    finite = arr[np.isfinite(arr)]
    if finite.size and np.isin(finite, (0.0, 1.0)).all():
        return BINARY
    return CONTINUOUS
