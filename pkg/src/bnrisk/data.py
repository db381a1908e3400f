"""Dataset ingestion: CSV coding, outlier cleaning, and discretization rules.

A :class:`Dataset` stores coded state indices (int16, ``-1`` marks a missing
cell) in schema column order plus a year tag per row. The CSV wire format is
UTF-8, comma-delimited, header = schema variable names plus ``year``, cells
are state labels, and the empty string means missing.

Raw health-assessment records are discretized with the published coding
rules: age in four decade bands, the four WHO BMI classes, sleep duration
short/normal/excessive (6h and 9h both map to normal; the boundary convention
is ours, not pinned by the source), medical conditions from medication flags
or laboratory cut-offs, and socioeconomic score binned at mean +/- one
standard deviation by default.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import NetworkSchema

MISSING = -1


class DataError(ValueError):
    """Malformed input that prevents ingestion."""


@dataclass(frozen=True)
class Dataset:
    """Coded categorical observations over a schema."""

    schema: NetworkSchema
    codes: np.ndarray  # (n_rows, n_vars) int16, MISSING marks an empty cell
    years: np.ndarray  # (n_rows,) int32
    name: str = "data"

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.int16)
        years = np.ascontiguousarray(self.years, dtype=np.int32)
        if codes.ndim != 2 or codes.shape[1] != len(self.schema):
            raise DataError(
                f"codes shape {codes.shape} does not match schema of {len(self.schema)} variables"
            )
        if years.shape != (codes.shape[0],):
            raise DataError("years must have one entry per row")
        cards = self.schema.cardinalities
        if codes.size:
            if codes.max(initial=0) >= cards.max() or np.any(codes >= cards[None, :]):
                raise DataError("state index out of range for its variable")
            if codes.min(initial=0) < MISSING:
                raise DataError("invalid negative state index")
        codes.setflags(write=False)
        years.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "years", years)

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def is_complete(self) -> bool:
        return bool(np.all(self.codes >= 0))

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.index(name)]

    def select(self, mask: np.ndarray, name: str | None = None) -> "Dataset":
        return Dataset(self.schema, self.codes[mask], self.years[mask], name or self.name)

    def rows_as_evidence(self) -> list[dict[str, int]]:
        names = self.schema.names
        return [
            {n: int(v) for n, v in zip(names, row) if v != MISSING} for row in self.codes
        ]


def concat(datasets: Sequence[Dataset], name: str = "concat") -> Dataset:
    if not datasets:
        raise DataError("nothing to concatenate")
    schema = datasets[0].schema
    for ds in datasets[1:]:
        if ds.schema != schema:
            raise DataError("datasets have different schemas")
    codes = np.vstack([ds.codes for ds in datasets])
    years = np.concatenate([ds.years for ds in datasets])
    return Dataset(schema, codes, years, name)


@dataclass(frozen=True)
class IngestReport:
    total_rows: int
    accepted_rows: int
    missing_cells: int
    rejected: tuple[tuple[int, str, str], ...]  # (1-based data row, column, offending label)

    @property
    def rejected_rows(self) -> int:
        return len(self.rejected)


def load_dataset(source, schema: NetworkSchema, name: str | None = None) -> tuple[Dataset, IngestReport]:
    """Parse a coded CSV into a Dataset plus an ingest report.

    ``source`` may be a path or a text file object. Rows containing a label
    unknown to the schema are rejected (not loaded) and cited by row and
    column in the report; empty cells become missing markers.
    """
    if hasattr(source, "read"):
        return _load_dataset_file(source, schema, name or "data")
    with open(source, "r", encoding="utf-8", newline="") as fh:
        return _load_dataset_file(fh, schema, name or str(source))


def _load_dataset_file(fh, schema: NetworkSchema, name: str) -> tuple[Dataset, IngestReport]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    expected = set(schema.names) | {"year"}
    for col in header:
        if col not in expected:
            raise DataError(f"unknown column {col!r} in header")
    for var in schema.names:
        if var not in header:
            raise DataError(f"missing column {var!r} in header")
    if "year" not in header:
        raise DataError("missing column 'year' in header")
    col_of = {c: i for i, c in enumerate(header)}
    year_col = col_of["year"]
    var_cols = [col_of[v] for v in schema.names]
    state_maps = [
        {label: k for k, label in enumerate(v.states)} for v in schema.variables
    ]

    rows: list[list[int]] = []
    years: list[int] = []
    rejected: list[tuple[int, str, str]] = []
    missing_cells = 0
    total = 0
    for row_no, raw in enumerate(reader, start=1):
        if not raw or all(cell == "" for cell in raw):
            continue
        total += 1
        if len(raw) != len(header):
            rejected.append((row_no, "<row>", f"{len(raw)} cells, expected {len(header)}"))
            continue
        coded = []
        bad: tuple[int, str, str] | None = None
        row_missing = 0
        for var, col, smap in zip(schema.names, var_cols, state_maps):
            cell = raw[col].strip()
            if cell == "":
                coded.append(MISSING)
                row_missing += 1
                continue
            k = smap.get(cell)
            if k is None:
                bad = (row_no, var, cell)
                break
            coded.append(k)
        if bad is not None:
            rejected.append(bad)
            continue
        year_cell = raw[year_col].strip()
        try:
            year = int(year_cell) if year_cell else 0
        except ValueError:
            rejected.append((row_no, "year", year_cell))
            continue
        rows.append(coded)
        years.append(year)
        missing_cells += row_missing

    codes = np.asarray(rows, dtype=np.int16).reshape(len(rows), len(schema))
    ds = Dataset(schema, codes, np.asarray(years, dtype=np.int32), name)
    report = IngestReport(total, len(rows), missing_cells, tuple(rejected))
    return ds, report


def save_dataset(ds: Dataset, target) -> None:
    """Write a Dataset back to the CSV wire format (labels, '' = missing)."""
    if hasattr(target, "write"):
        _save_dataset_file(ds, target)
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _save_dataset_file(ds, fh)


def _save_dataset_file(ds: Dataset, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(list(ds.schema.names) + ["year"])
    states = [v.states for v in ds.schema.variables]
    for row, year in zip(ds.codes, ds.years):
        cells = [states[j][v] if v != MISSING else "" for j, v in enumerate(row)]
        writer.writerow(cells + [int(year)])


def dataset_to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    _save_dataset_file(ds, buf)
    return buf.getvalue()


def complete_cases(ds: Dataset) -> tuple[Dataset, int]:
    """Drop every row carrying a missing marker; returns (kept, dropped count)."""
    mask = np.all(ds.codes >= 0, axis=1)
    dropped = int((~mask).sum())
    return ds.select(mask), dropped


# --- raw records and cleaning ----------------------------------------------


@dataclass(frozen=True)
class RawRecord:
    """One health assessment before coding. Unknown values stay None."""

    sex: str | None = None  # "female" | "male"
    age_years: float | None = None
    ses_score: float | None = None
    height_cm: float | None = None
    weight_kg: float | None = None
    sleep_hours: float | None = None
    activity: str | None = None  # "1" | "2"
    smoking: str | None = None  # "non-smoker" | "ex-smoker" | "smoker"
    alcohol: str | None = None  # "low" | "high"
    anxiety: bool | None = None
    depression: bool | None = None
    glycemia: float | None = None  # mg/dL
    ldl: float | None = None
    hdl: float | None = None
    triglycerides: float | None = None
    total_cholesterol: float | None = None
    systolic: float | None = None
    diastolic: float | None = None
    diabetes_medicated: bool = False
    cholesterol_medicated: bool = False
    hypertension_medicated: bool = False
    crc: bool | None = None
    year: int = 0


#: Continuous unimodal fields subject to the 3-sigma outlier rule.
CONTINUOUS_FIELDS: tuple[str, ...] = (
    "height_cm",
    "weight_kg",
    "sleep_hours",
    "glycemia",
    "ldl",
    "hdl",
    "triglycerides",
    "total_cholesterol",
    "systolic",
    "diastolic",
)


@dataclass(frozen=True)
class ExclusionReport:
    excluded_per_field: dict[str, int]
    excluded_rows: int


def clean_continuous(
    records: Sequence[RawRecord], fields: Sequence[str] = CONTINUOUS_FIELDS
) -> tuple[list[RawRecord], ExclusionReport]:
    """Drop records with any designated field beyond mean +/- 3 sigma.

    Statistics are computed once over the non-missing values of the input
    batch itself. A constant field (sigma = 0) excludes nothing.
    """
    stats: dict[str, tuple[float, float]] = {}
    for f in fields:
        values = np.array([getattr(r, f) for r in records if getattr(r, f) is not None], dtype=float)
        if values.size:
            stats[f] = (float(values.mean()), float(values.std()))
    per_field = {f: 0 for f in fields}
    kept: list[RawRecord] = []
    for r in records:
        out = False
        for f in fields:
            v = getattr(r, f)
            if v is None or f not in stats:
                continue
            mean, sd = stats[f]
            if abs(v - mean) > 3.0 * sd:
                per_field[f] += 1
                out = True
        if not out:
            kept.append(r)
    return kept, ExclusionReport(per_field, len(records) - len(kept))


# --- discretization ---------------------------------------------------------

AGE_EDGES = (34.0, 44.0, 54.0)
BMI_EDGES = (18.5, 25.0, 30.0)


class DiscretizeError(ValueError):
    """Record cannot be coded (e.g. age outside the study range)."""


def ses_cutpoints(records: Sequence[RawRecord]) -> tuple[float, float]:
    """Default socioeconomic-score cuts: mean +/- one standard deviation."""
    values = np.array(
        [r.ses_score for r in records if r.ses_score is not None], dtype=float
    )
    if values.size == 0:
        raise DiscretizeError("no socioeconomic scores available to derive cut points")
    return float(values.mean() - values.std()), float(values.mean() + values.std())


def discretize(
    record: RawRecord, ses_cuts: tuple[float, float] | None = None
) -> dict[str, str | None]:
    """Code a raw record into reference-schema state labels.

    Returns a map variable -> label, with None where the inputs needed for
    that variable are missing. Age must lie in (24, 64].
    """
    if record.age_years is None:
        raise DiscretizeError("age is required")
    age = float(record.age_years)
    if not (24.0 < age <= 64.0):
        raise DiscretizeError(f"age {age} outside (24, 64]")

    out: dict[str, str | None] = {}
    out["v_sex"] = record.sex
    age_bands = ("(24,34]", "(34,44]", "(44,54]", "(54,64]")
    band = 0
    for edge in AGE_EDGES:
        if age > edge:
            band += 1
    out["v_age"] = age_bands[band]

    if record.ses_score is None or ses_cuts is None:
        out["v_SES"] = None
    else:
        lo, hi = ses_cuts
        if record.ses_score < lo:
            out["v_SES"] = "1"
        elif record.ses_score <= hi:
            out["v_SES"] = "2"
        else:
            out["v_SES"] = "3"

    if record.height_cm is None or record.weight_kg is None or record.height_cm <= 0:
        out["v_BMI"] = None
    else:
        bmi = record.weight_kg / (record.height_cm / 100.0) ** 2
        if bmi < BMI_EDGES[0]:
            out["v_BMI"] = "underweight"
        elif bmi < BMI_EDGES[1]:
            out["v_BMI"] = "normal"
        elif bmi < BMI_EDGES[2]:
            out["v_BMI"] = "overweight"
        else:
            out["v_BMI"] = "obese"

    out["v_PA"] = record.activity

    if record.sleep_hours is None:
        out["v_SD"] = None
    elif record.sleep_hours < 6.0:
        out["v_SD"] = "short"
    elif record.sleep_hours <= 9.0:
        out["v_SD"] = "normal"
    else:
        out["v_SD"] = "excessive"

    out["v_alc"] = record.alcohol
    out["v_smok"] = record.smoking
    out["v_anx"] = _yes_no(record.anxiety)
    out["v_dep"] = _yes_no(record.depression)

    if record.hypertension_medicated:
        out["v_hypten"] = "yes"
    elif record.systolic is None and record.diastolic is None:
        out["v_hypten"] = None
    else:
        high = (record.systolic is not None and record.systolic >= 139.0) or (
            record.diastolic is not None and record.diastolic >= 90.0
        )
        out["v_hypten"] = "yes" if high else "no"

    if record.cholesterol_medicated:
        out["v_hypchol"] = "yes"
    else:
        lipids = (record.ldl, record.hdl, record.triglycerides, record.total_cholesterol)
        if all(v is None for v in lipids):
            out["v_hypchol"] = None
        else:
            high = (
                (record.ldl is not None and record.ldl >= 130.0)
                or (record.hdl is not None and record.hdl <= 40.0)
                or (record.triglycerides is not None and record.triglycerides >= 150.0)
                or (record.total_cholesterol is not None and record.total_cholesterol >= 200.0)
            )
            out["v_hypchol"] = "yes" if high else "no"

    if record.diabetes_medicated:
        out["v_diab"] = "yes"
    elif record.glycemia is None:
        out["v_diab"] = None
    else:
        out["v_diab"] = "yes" if record.glycemia >= 125.0 else "no"

    out["v_CRC"] = _yes_no(record.crc)
    return out


def _yes_no(flag: bool | None) -> str | None:
    if flag is None:
        return None
    return "yes" if flag else "no"


def records_to_dataset(
    records: Sequence[RawRecord],
    schema: NetworkSchema,
    ses_cuts: tuple[float, float] | None = None,
    name: str = "records",
) -> tuple[Dataset, list[tuple[int, str]]]:
    """Discretize a batch of raw records against the reference schema.

    SES cuts default to the batch's mean +/- one standard deviation. Records
    whose age is out of range are rejected and listed as (index, reason).
    """
    if ses_cuts is None:
        try:
            ses_cuts = ses_cutpoints(records)
        except DiscretizeError:
            ses_cuts = None
    rows: list[list[int]] = []
    years: list[int] = []
    rejected: list[tuple[int, str]] = []
    for i, rec in enumerate(records):
        try:
            labels = discretize(rec, ses_cuts)
        except DiscretizeError as e:
            rejected.append((i, str(e)))
            continue
        coded = []
        for var in schema.variables:
            label = labels.get(var.name)
            coded.append(MISSING if label is None else var.states.index(label))
        rows.append(coded)
        years.append(rec.year)
    codes = np.asarray(rows, dtype=np.int16).reshape(len(rows), len(schema))
    return Dataset(schema, codes, np.asarray(years, dtype=np.int32), name), rejected


def split_by_year(ds: Dataset) -> list[Dataset]:
    """Split into per-year datasets ordered by year."""
    out = []
    for year in sorted(set(ds.years.tolist())):
        mask = ds.years == year
        out.append(ds.select(mask, name=f"{ds.name}:{year}"))
    return out
