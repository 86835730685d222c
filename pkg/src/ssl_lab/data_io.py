"""CSV ingestion, preprocessing, deterministic splits, and sweep files.

Tables come in as CSV with a header row, '.' decimal points, comma
separators, and no quoting of numeric fields. One designated column
holds the labels; every other column is parsed as a real-valued
feature, and malformed or non-finite cells are rejected with the
1-based file line of the offending row. Preprocessing covers per-column
standardization (returning a reusable, invertible affine record) and
PCA via power iteration with deflation. PCA here works on the centered
covariance, deliberately unlike the uncentered second moment the
estimators diagonalize: ingested tables carry no symmetry around the
origin, so the mean must be removed before directions mean anything.

Sweep results round-trip through a versioned CSV schema: a '# schema'
line first, then a fixed header, then one row per (grid cell, method).
Floats are written with repr() so every float64 survives bit-for-bit,
and method extras pack into the last column as semicolon-separated
key=value pairs. Readers reject any other schema version up front.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, SchemaVersionError, ValidationError
from .estimators import DEFAULT_MAX_ITER, DEFAULT_TOL, leading_eigenpair
from .experiments import CellStats, SweepResult
from .gmm import LabeledDataset, UnlabeledDataset, _check_finite, _readonly
from .seeds import MASK64

#: Version stamped into (and required from) results files.
RESULTS_SCHEMA_VERSION = 1

_SCHEMA_PREFIX = "# schema ssl-lab-sweep "

#: Fixed column order of a results file.
RESULTS_COLUMNS = (
    "axis_name",
    "axis_value",
    "method",
    "replicates",
    "mean_excess",
    "std_excess",
    "mean_estimation",
    "std_estimation",
    "mean_test_error",
    "std_test_error",
    "extra",
)


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """A feature table with {-1, +1} labels and named columns.

    `x` is the n x d feature matrix, `y` the label vector, `columns` the
    feature names in matrix order, and `provenance` a free-form note on
    where the rows came from (a file path, or a transform description).
    Entries are finite by construction and every label is -1 or +1.
    """

    x: np.ndarray
    y: np.ndarray
    columns: tuple
    provenance: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise ValidationError("x must be a 2-d matrix")
        if x.shape[1] < 1:
            raise ValidationError("x must have at least one column")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValidationError("y must be a vector with one entry per row of x")
        _check_finite(x, "x")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValidationError("labels must be exactly -1 or +1")
        columns = tuple(self.columns)
        if len(columns) != x.shape[1]:
            raise ValidationError("columns must name each feature column exactly once")
        if not all(isinstance(name, str) and name for name in columns):
            raise ValidationError("column names must be nonempty strings")
        if len(set(columns)) != len(columns):
            raise ValidationError("column names must be unique")
        if not isinstance(self.provenance, str):
            raise ValidationError("provenance must be a string")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "columns", columns)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    """Sizes and seed for one deterministic labeled/pool/validation/test split.

    `n_l` rows become the labeled training set, `n_val` the (unlabeled)
    validation set, and `n_test` the held-out test set; whatever remains
    joins the unlabeled pool. The seed is a 64-bit integer and fully
    determines the split.
    """

    n_l: int
    n_val: int = 1000
    n_test: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("n_l", "n_val", "n_test"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ValidationError(f"{name} must be an integer")
            if value < 0:
                raise ValidationError(f"{name} must be nonnegative")
            object.__setattr__(self, name, int(value))
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ValidationError("seed must be an integer")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class StandardizeRecord:
    """The affine map fitted by standardize: z = (x - mean) / scale.

    `scale` holds the per-column population standard deviation, except on
    constant columns where it is 1 so the map stays invertible; those
    columns are marked in the boolean `constant` array. transform applies
    the map to any matrix of matching width, inverse undoes it exactly.
    """

    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        constant = np.asarray(self.constant, dtype=bool)
        if not (mean.ndim == scale.ndim == constant.ndim == 1):
            raise ValidationError("mean, scale, and constant must be 1-d arrays")
        if not (mean.shape == scale.shape == constant.shape):
            raise ValidationError("mean, scale, and constant must share one length")
        _check_finite(mean, "mean")
        _check_finite(scale, "scale")
        if not np.all(scale > 0.0):
            raise ValidationError("scale entries must be positive")
        object.__setattr__(self, "mean", _readonly(mean))
        object.__setattr__(self, "scale", _readonly(scale))
        flags = np.array(constant, copy=True)
        flags.setflags(write=False)
        object.__setattr__(self, "constant", flags)

    def _check_width(self, matrix: np.ndarray) -> np.ndarray:
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.mean.shape[0]:
            raise ValidationError(
                f"matrix must have {self.mean.shape[0]} columns to match this record"
            )
        return arr

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        """Apply z = (x - mean) / scale row-wise."""
        return (self._check_width(matrix) - self.mean) / self.scale

    def inverse(self, matrix: np.ndarray) -> np.ndarray:
        """Undo transform: x = z * scale + mean."""
        return self._check_width(matrix) * self.scale + self.mean


def load_csv(path, label_column: str, positive_label) -> TabularDataset:
    """Read a feature table from a CSV file.

    The first row must be a header naming every column. `label_column`
    selects the label column: the raw cell equal to str(positive_label)
    maps to +1 and the other of the two distinct raw values maps to -1.
    Every remaining column is parsed as a float feature.

    Raises DataFormatError when the header is missing or has duplicate
    names, the label column is absent, a cell fails to parse or is
    non-finite (the message names the 1-based file line), there are no
    data rows or no feature columns, the labels do not take exactly two
    distinct values, or positive_label is not one of them.
    """
    display = os.fspath(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{display}: empty file, expected a header row") from None
        if len(set(header)) != len(header):
            raise DataFormatError(f"{display}: duplicate column names in header")
        if label_column not in header:
            raise DataFormatError(
                f"{display}: label column {label_column!r} not found; columns are {header}"
            )
        label_index = header.index(label_column)
        feature_names = tuple(name for i, name in enumerate(header) if i != label_index)
        if not feature_names:
            raise DataFormatError(f"{display}: no feature columns besides the label column")
        rows = []
        raw_labels = []
        for line, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DataFormatError(
                    f"{display}: row {line}: expected {len(header)} fields, found {len(record)}"
                )
            values = []
            for i, cell in enumerate(record):
                if i == label_index:
                    continue
                try:
                    value = float(cell.strip())
                except ValueError:
                    raise DataFormatError(
                        f"{display}: row {line}: cannot parse {cell!r} in column "
                        f"{header[i]!r} as a real number"
                    ) from None
                if not math.isfinite(value):
                    raise DataFormatError(
                        f"{display}: row {line}: non-finite value {cell!r} in column {header[i]!r}"
                    )
                values.append(value)
            rows.append(values)
            raw_labels.append(record[label_index].strip())
    if not rows:
        raise DataFormatError(f"{display}: no data rows after the header")
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise DataFormatError(
            f"{display}: label column must take exactly two distinct values, "
            f"found {len(distinct)}: {distinct[:5]}"
        )
    positive = str(positive_label)
    if positive not in distinct:
        raise DataFormatError(
            f"{display}: positive label {positive!r} not among label values {distinct}"
        )
    y = np.where([label == positive for label in raw_labels], 1.0, -1.0)
    return TabularDataset(
        x=np.asarray(rows, dtype=float), y=y, columns=feature_names, provenance=display
    )


def save_csv(data: TabularDataset, path, label_column: str = "label") -> None:
    """Write the table to CSV with full-precision floats.

    Features are written with repr(), which round-trips every float64
    bit-for-bit; labels are written as 1 / -1. load_csv(path,
    label_column, "1") restores the dataset exactly.
    """
    if label_column in data.columns:
        raise ValidationError(f"label column name {label_column!r} collides with a feature")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(data.columns) + [label_column])
        for row, label in zip(data.x, data.y):
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])


def standardize(data: TabularDataset):
    """Center each feature column and rescale it to unit population spread.

    Needs at least two rows. Non-constant columns come out with mean
    0 +/- 1e-9 and population standard deviation 1; zero-variance columns
    are passed through centered (all zeros) and flagged in the returned
    record. Returns (table, record) where record is the fitted
    StandardizeRecord whose inverse restores the original features.
    """
    if data.n < 2:
        raise ValidationError("standardize needs at least 2 rows")
    mean = data.x.mean(axis=0)
    std = data.x.std(axis=0)
    constant = std == 0.0
    record = StandardizeRecord(
        mean=mean, scale=np.where(constant, 1.0, std), constant=constant
    )
    table = TabularDataset(
        x=record.transform(data.x),
        y=data.y,
        columns=data.columns,
        provenance=f"standardize({data.provenance})",
    )
    return table, record


def _orthogonal_completion(basis: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to the columns of `basis` (fewer than rows)."""
    residuals = np.eye(basis.shape[0]) - basis @ basis.T
    norms = np.linalg.norm(residuals, axis=0)
    best = int(np.argmax(norms))
    return residuals[:, best] / norms[best]


def pca_basis(
    data: TabularDataset,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
):
    """Top-k eigenpairs of the centered feature covariance.

    Power iteration with deflation: each found component is projected out
    of the working matrix before extracting the next, and every new
    vector is re-orthogonalized against its predecessors, so the returned
    basis is orthonormal well within 1e-8. The covariance is centered on
    purpose; the estimators diagonalize the uncentered second moment
    because their model is symmetric around the origin, but an ingested
    table is not.

    Returns (values, components): a length-k array of eigenvalues in the
    order found (nonincreasing up to solver tolerance) and the d x k
    matrix whose columns are the components. Raises ConvergenceError if
    power iteration fails to settle, ValidationError unless 1 <= k <= d
    and the table has at least two rows.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ValidationError("k must be an integer")
    k = int(k)
    if not 1 <= k <= data.d:
        raise ValidationError(f"k must satisfy 1 <= k <= d = {data.d}")
    if data.n < 2:
        raise ValidationError("pca needs at least 2 rows")
    centered = data.x - data.x.mean(axis=0)
    cov = centered.T @ centered / data.n
    work = cov.copy()
    values = np.empty(k)
    components = np.empty((data.d, k))
    for j in range(k):
        pair = leading_eigenpair(work, tol=tol, max_iter=max_iter, seed=seed + j)
        vector = np.array(pair.vector, dtype=float, copy=True)
        for i in range(j):
            vector -= (components[:, i] @ vector) * components[:, i]
        norm = np.linalg.norm(vector)
        if norm < 1e-12:
            vector = _orthogonal_completion(components[:, :j])
        else:
            vector /= norm
        values[j] = vector @ cov @ vector
        components[:, j] = vector
        work -= (vector @ work @ vector) * np.outer(vector, vector)
    return values, components


def pca_project(
    data: TabularDataset,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> TabularDataset:
    """Project the features onto their top-k principal axes.

    The scores are the centered features times the pca_basis components,
    an n x k matrix with columns named pc1..pck; labels ride along
    unchanged. Same preconditions and errors as pca_basis.
    """
    _, components = pca_basis(data, k, tol=tol, max_iter=max_iter, seed=seed)
    scores = (data.x - data.x.mean(axis=0)) @ components
    return TabularDataset(
        x=scores,
        y=data.y,
        columns=tuple(f"pc{j + 1}" for j in range(components.shape[1])),
        provenance=f"pca{components.shape[1]}({data.provenance})",
    )


def split(data: TabularDataset, spec: SplitSpec):
    """Deterministic disjoint split into labeled / pool / validation / test.

    A permutation seeded by spec.seed orders the rows; the first n_l
    become the labeled training set, the next n_val the validation set
    (labels stripped), the next n_test the held-out test set, and every
    remaining row joins the unlabeled pool (labels stripped). Returns
    (labeled, pool, validation, test); raises ValidationError when
    n_l + n_val + n_test exceeds the number of rows.
    """
    total = spec.n_l + spec.n_val + spec.n_test
    if total > data.n:
        raise ValidationError(
            f"split needs n_l + n_val + n_test = {total} rows but the table has {data.n}"
        )
    perm = np.random.default_rng(spec.seed & MASK64).permutation(data.n)
    stop_l = spec.n_l
    stop_v = stop_l + spec.n_val
    stop_t = stop_v + spec.n_test
    rows_l, rows_v = perm[:stop_l], perm[stop_l:stop_v]
    rows_t, rows_p = perm[stop_v:stop_t], perm[stop_t:]
    return (
        LabeledDataset(x=data.x[rows_l], y=data.y[rows_l]),
        UnlabeledDataset(x=data.x[rows_p]),
        UnlabeledDataset(x=data.x[rows_v]),
        LabeledDataset(x=data.x[rows_t], y=data.y[rows_t]),
    )


def _format_number(value) -> str:
    return repr(float(value))


def _format_extra(extra: dict) -> str:
    parts = []
    for key in extra:
        if not isinstance(key, str) or not key or any(c in key for c in ";=,\n\r"):
            raise ValidationError(f"extra key {key!r} cannot be serialized")
        parts.append(f"{key}={_format_number(extra[key])}")
    return ";".join(parts)


def write_results(sweep: SweepResult, path) -> None:
    """Serialize a sweep to versioned CSV, one row per (grid cell, method).

    The first line stamps the schema version, the second is the fixed
    header, and every float is written with repr() so read_results
    reproduces the sweep exactly (NaN and infinities included).
    """
    with open(path, "w", newline="") as handle:
        handle.write(f"{_SCHEMA_PREFIX}{RESULTS_SCHEMA_VERSION}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULTS_COLUMNS)
        for value, row in zip(sweep.grid, sweep.cells):
            for stats in row:
                writer.writerow(
                    [
                        sweep.axis_name,
                        _format_number(value),
                        stats.method,
                        str(int(stats.replicates)),
                        _format_number(stats.mean_excess),
                        _format_number(stats.std_excess),
                        _format_number(stats.mean_estimation),
                        _format_number(stats.std_estimation),
                        _format_number(stats.mean_test_error),
                        _format_number(stats.std_test_error),
                        _format_extra(stats.extra),
                    ]
                )


def _parse_number(text: str, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(
            f"row {line}: cannot parse {text!r} in column {column!r} as a number"
        ) from None


def _parse_extra(text: str, line: int) -> dict:
    if not text:
        return {}
    extra = {}
    for part in text.split(";"):
        key, sep, value = part.partition("=")
        if not sep or not key:
            raise DataFormatError(f"row {line}: malformed extra entry {part!r}")
        extra[key] = _parse_number(value, line, "extra")
    return extra


def read_results(path) -> SweepResult:
    """Read a sweep written by write_results.

    The file must open with the matching '# schema ssl-lab-sweep N' line;
    a missing line or any other version raises SchemaVersionError. A
    header-only file reads back as an empty sweep. Grid values appear in
    file order, and rows sharing an axis value group into one cell.
    """
    with open(path, newline="") as handle:
        first = handle.readline()
        if not first.startswith(_SCHEMA_PREFIX):
            raise SchemaVersionError(
                f"missing schema line; expected {_SCHEMA_PREFIX!r}"
                f" followed by the version number"
            )
        version = first[len(_SCHEMA_PREFIX):].strip()
        if version != str(RESULTS_SCHEMA_VERSION):
            raise SchemaVersionError(
                f"unsupported results schema version {version!r}; "
                f"this reader handles version {RESULTS_SCHEMA_VERSION}"
            )
        reader = csv.reader(handle)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise DataFormatError("missing header row") from None
        if header != RESULTS_COLUMNS:
            raise DataFormatError(
                f"unexpected header {list(header)}; expected {list(RESULTS_COLUMNS)}"
            )
        axis_name = None
        replicates = None
        grid = []
        cells = []
        index = {}
        for line, record in enumerate(reader, start=3):
            if not record:
                continue
            if len(record) != len(RESULTS_COLUMNS):
                raise DataFormatError(
                    f"row {line}: expected {len(RESULTS_COLUMNS)} fields, "
                    f"found {len(record)}"
                )
            name, value_text, method, reps_text = record[:4]
            if axis_name is None:
                axis_name = name
            elif name != axis_name:
                raise DataFormatError(
                    f"row {line}: axis name {name!r} differs from {axis_name!r}"
                )
            value = _parse_number(value_text, line, "axis_value")
            try:
                reps = int(reps_text)
            except ValueError:
                raise DataFormatError(
                    f"row {line}: cannot parse {reps_text!r} in column 'replicates'"
                ) from None
            if replicates is None:
                replicates = reps
            elif reps != replicates:
                raise DataFormatError(
                    f"row {line}: replicates {reps} differs from {replicates}"
                )
            numbers = [
                _parse_number(text, line, column)
                for text, column in zip(record[4:10], RESULTS_COLUMNS[4:10])
            ]
            stats = CellStats(
                method=method,
                replicates=reps,
                mean_excess=numbers[0],
                std_excess=numbers[1],
                mean_estimation=numbers[2],
                std_estimation=numbers[3],
                mean_test_error=numbers[4],
                std_test_error=numbers[5],
                extra=_parse_extra(record[10], line),
            )
            if value in index:
                cells[index[value]].append(stats)
            else:
                index[value] = len(grid)
                grid.append(value)
                cells.append([stats])
    if axis_name is None:
        return SweepResult(axis_name="", grid=(), replicates=0, cells=())
    return SweepResult(
        axis_name=axis_name,
        grid=tuple(grid),
        replicates=int(replicates),
        cells=tuple(tuple(cell) for cell in cells),
    )
