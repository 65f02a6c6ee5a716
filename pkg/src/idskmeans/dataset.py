"""Loading, validation and preprocessing of labeled numeric CSV data.

The three UCI corpora (Iris, Wine, Glass) ship with the package in their
original UCI layout and are described by builtin :class:`CsvSchema` entries.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed input files or invalid dataset contents."""


@dataclass(frozen=True)
class CsvSchema:
    label_column: int
    delimiter: str = ","
    header: bool = False
    drop_columns: tuple[int, ...] = ()
    n_columns: int | None = None


BUILTIN_SCHEMAS: dict[str, CsvSchema] = {
    "iris": CsvSchema(label_column=4, n_columns=5),
    "wine": CsvSchema(label_column=0, n_columns=14),
    "glass": CsvSchema(label_column=10, drop_columns=(0,), n_columns=11),
}

# number of classes the corpora are clustered into
BUILTIN_K = {"iris": 3, "wine": 3, "glass": 6}


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    data: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DatasetError(f"data must be a non-empty 2-D matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DatasetError("data contains non-finite entries")
        if labels.shape != (data.shape[0],):
            raise DatasetError("labels length must equal the number of rows")
        n_classes = len(self.class_names)
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise DatasetError("label id out of range")
        if np.unique(labels).size != n_classes:
            raise DatasetError("every class must occur at least once")
        data.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and np.array_equal(self.data, other.data)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True, eq=False)
class BoundingBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("lower must not exceed upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def tile(self, times: int) -> "BoundingBox":
        """Cartesian product of the box with itself ``times`` times."""
        return BoundingBox(np.tile(self.lower, times), np.tile(self.upper, times))

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = self.lower.shape if size is None else (size,) + self.lower.shape
        return self.lower + rng.random(shape) * self.widths


def _parse_rows(text: str, schema: CsvSchema, source: str) -> LabeledDataset:
    reader = csv.reader(io.StringIO(text), delimiter=schema.delimiter)
    records = [row for row in reader if row and any(cell.strip() for cell in row)]
    if schema.header and records:
        records = records[1:]
    if not records:
        raise DatasetError(f"{source}: empty file")

    width = schema.n_columns if schema.n_columns is not None else len(records[0])
    if not 0 <= schema.label_column < width:
        raise DatasetError(f"{source}: label column {schema.label_column} outside {width} columns")
    feature_cols = [
        j for j in range(width) if j != schema.label_column and j not in schema.drop_columns
    ]
    if not feature_cols:
        raise DatasetError(f"{source}: schema leaves no feature columns")

    values = np.empty((len(records), len(feature_cols)))
    label_strings = []
    first_line = 2 if schema.header else 1
    for i, row in enumerate(records):
        line = i + first_line
        if len(row) != width:
            raise DatasetError(f"{source}: line {line} has {len(row)} columns, expected {width}")
        for out_j, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                values[i, out_j] = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{source}: line {line}, column {j + 1}: cannot parse {cell!r} as a number"
                ) from None
            if not np.isfinite(values[i, out_j]):
                raise DatasetError(f"{source}: line {line}, column {j + 1}: non-finite value")
        label_strings.append(row[schema.label_column].strip())

    # ids by order of first appearance
    class_index: dict[str, int] = {}
    labels = np.array([class_index.setdefault(s, len(class_index)) for s in label_strings])
    return LabeledDataset(values, labels, tuple(class_index), name=source)


def load_csv(path: str | Path, schema: CsvSchema) -> LabeledDataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    ds = _parse_rows(text, schema, path.name)
    return LabeledDataset(ds.data, ds.labels, ds.class_names, name=path.stem)


def load_builtin(name: str) -> LabeledDataset:
    if name not in BUILTIN_SCHEMAS:
        raise DatasetError(f"unknown builtin dataset {name!r}; choose from {sorted(BUILTIN_SCHEMAS)}")
    text = resources.files("idskmeans").joinpath("data").joinpath(f"{name}.data").read_text(encoding="utf-8")
    ds = _parse_rows(text, BUILTIN_SCHEMAS[name], f"{name}.data")
    return LabeledDataset(ds.data, ds.labels, ds.class_names, name=name)


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("idskmeans").joinpath("data").joinpath(f"{name}.data")))


def dumps(ds: LabeledDataset) -> str:
    """Headerless comma-separated features followed by the class name."""
    lines = []
    for row, label in zip(ds.data, ds.labels):
        lines.append(",".join(repr(float(v)) for v in row) + "," + ds.class_names[label])
    return "\n".join(lines) + "\n"


def serialized_schema(ds: LabeledDataset) -> CsvSchema:
    """Schema that reads back the output of :func:`dumps`."""
    return CsvSchema(label_column=ds.cols, n_columns=ds.cols + 1)


def save_csv(ds: LabeledDataset, path: str | Path) -> None:
    Path(path).write_text(dumps(ds), encoding="utf-8")


def standardize(ds: LabeledDataset, mode: str = "none") -> LabeledDataset:
    """Column-wise scaling. Constant columns map to 0 under both scalings."""
    if mode == "none":
        return ds
    x = ds.data
    if mode == "zscore":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        constant = std == 0
        out = (x - mean) / np.where(constant, 1.0, std)
        out[:, constant] = 0.0
    elif mode == "minmax":
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        constant = span == 0
        out = (x - lo) / np.where(constant, 1.0, span)
        out[:, constant] = 0.0
    else:
        raise ValueError(f"unknown preprocessing mode {mode!r}")
    return LabeledDataset(out, ds.labels, ds.class_names, name=ds.name)


def bounding_box(m) -> BoundingBox:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] == 0:
        raise ValueError("bounding_box needs a non-empty 2-D matrix")
    return BoundingBox(m.min(axis=0), m.max(axis=0))


def parse_schema(spec: str) -> CsvSchema:
    """Parse ``label=4,delimiter=;,header=1,drop=0:3`` style schema strings.

    ``delimiter`` may be given as ``tab``, ``semicolon``, ``comma`` or ``space``.
    """
    named = {"tab": "\t", "semicolon": ";", "comma": ",", "space": " "}
    kwargs: dict = {}
    for part in filter(None, (p.strip() for p in spec.split(","))):
        key, _, value = part.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "label":
            kwargs["label_column"] = int(value)
        elif key == "delimiter":
            kwargs["delimiter"] = named.get(value, value)
        elif key == "header":
            kwargs["header"] = value.lower() in ("1", "true", "yes")
        elif key == "drop":
            kwargs["drop_columns"] = tuple(int(v) for v in value.split(":") if v)
        elif key == "columns":
            kwargs["n_columns"] = int(value)
        else:
            raise ValueError(f"unknown schema key {key!r}")
    if "label_column" not in kwargs:
        raise ValueError("schema must name the label column (label=<index>)")
    return CsvSchema(**kwargs)
