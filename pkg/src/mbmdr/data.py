"""Dataset container, CSV/TSV ingestion and stratified cross-validation splits.

A dataset holds n samples of q discrete features (level codes starting at 0,
missing entries allowed) together with a binary phenotype (0 = control,
1 = case). Feature level counts are inferred from the data unless given
explicitly. Datasets are immutable after construction and safe to share
between worker processes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibilityError, ValidationError

MISSING = -1

DEFAULT_PHENO_COL = "PHENOTYPE"


@dataclass(frozen=True)
class GenotypeDataset:
    """n x q matrix of discrete feature levels plus a binary phenotype.

    Attributes
    ----------
    genotypes : ndarray of shape (n, q), dtype int16
        Level codes in [0, levels[j]) or ``MISSING`` (-1).
    phenotype : ndarray of shape (n,), dtype int8
        0 for controls, 1 for cases.
    levels : ndarray of shape (q,)
        Number of levels per feature (>= 2).
    feature_names : tuple of str
    sample_ids : tuple of str
    """

    genotypes: np.ndarray
    phenotype: np.ndarray
    levels: np.ndarray
    feature_names: tuple[str, ...]
    sample_ids: tuple[str, ...]

    def __post_init__(self):
        g = self.genotypes
        y = self.phenotype
        if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] == 0:
            raise ValidationError("empty dataset: need at least one sample and one feature")
        n, q = g.shape
        if y.shape != (n,):
            raise ValidationError(f"phenotype length {y.shape} does not match n={n}")
        if not np.isin(y, (0, 1)).all():
            raise ValidationError("phenotype must contain only 0 (control) and 1 (case)")
        if not (y == 1).any() or not (y == 0).any():
            raise ValidationError("need at least one case and one control")
        if self.levels.shape != (q,):
            raise ValidationError("levels must have one entry per feature")
        if (self.levels < 2).any():
            bad = self.feature_names[int(np.argmin(self.levels))]
            raise ValidationError(f"feature {bad!r} has fewer than 2 levels")
        observed = np.where(g == MISSING, 0, g)
        if (g < MISSING).any() or (observed >= self.levels[None, :]).any():
            rows, cols = np.where((g < MISSING) | (observed >= self.levels[None, :]))
            raise ValidationError(
                f"genotype out of range for feature {self.feature_names[cols[0]]!r}"
                f" at sample {self.sample_ids[rows[0]]!r}"
            )
        if len(set(self.feature_names)) != q:
            raise ValidationError("feature names must be unique")
        if len(set(self.sample_ids)) != n:
            raise ValidationError("sample ids must be unique")
        g.setflags(write=False)
        y.setflags(write=False)
        self.levels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.genotypes.shape[0]

    @property
    def q(self) -> int:
        return self.genotypes.shape[1]

    @property
    def n_cases(self) -> int:
        return int((self.phenotype == 1).sum())

    @property
    def n_controls(self) -> int:
        return int((self.phenotype == 0).sum())

    @property
    def case_fraction(self) -> float:
        return self.n_cases / self.n

    def subset(self, rows: np.ndarray) -> "GenotypeDataset":
        """New dataset restricted to the given sample indices (levels kept)."""
        rows = np.asarray(rows)
        return GenotypeDataset(
            genotypes=self.genotypes[rows].copy(),
            phenotype=self.phenotype[rows].copy(),
            levels=self.levels.copy(),
            feature_names=self.feature_names,
            sample_ids=tuple(self.sample_ids[i] for i in rows),
        )


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified k-fold assignment: fold index in [0, k) per sample."""

    k: int
    assignment: np.ndarray
    seed: int

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (train, test) for one fold."""
        test = np.flatnonzero(self.assignment == fold)
        train = np.flatnonzero(self.assignment != fold)
        return train, test


def make_dataset(genotypes, phenotype, levels=None, feature_names=None, sample_ids=None) -> GenotypeDataset:
    """Build a validated dataset from arrays, inferring metadata when omitted."""
    g = np.asarray(genotypes, dtype=np.int16)
    y = np.asarray(phenotype, dtype=np.int8)
    if g.ndim != 2:
        raise ValidationError("genotypes must be a 2-d array")
    n, q = g.shape
    if levels is None:
        observed = np.where(g == MISSING, 0, g)
        levels = np.maximum(observed.max(axis=0) + 1, 2).astype(np.int64)
    elif np.ndim(levels) == 0:
        levels = np.full(q, int(levels), dtype=np.int64)
    else:
        levels = np.asarray(levels, dtype=np.int64)
    if feature_names is None:
        feature_names = tuple(f"SNP{j + 1}" for j in range(q))
    if sample_ids is None:
        sample_ids = tuple(f"S{i + 1}" for i in range(n))
    return GenotypeDataset(g, y, levels, tuple(feature_names), tuple(sample_ids))


def _parse_cell(text: str, row: int, col_name: str, what: str) -> int:
    text = text.strip()
    if text == "NA":
        return MISSING
    try:
        value = int(text)
    except ValueError:
        raise ValidationError(
            f"malformed {what} {text!r} at row {row}, column {col_name!r}"
        ) from None
    if value < 0:
        raise ValidationError(f"negative {what} {value} at row {row}, column {col_name!r}")
    return value


def load_dataset(path, fmt: str | None = None, pheno_col: str = DEFAULT_PHENO_COL,
                 levels=None) -> GenotypeDataset:
    """Read a CSV/TSV file with a header row into a GenotypeDataset.

    One column (``pheno_col``) holds the 0/1 phenotype; every other column is
    a feature coded as a non-negative integer level or the literal ``NA``.
    ``fmt`` is "csv" or "tsv"; by default it is inferred from the file suffix.
    ``levels`` optionally overrides the per-feature level counts inferred from
    the data ((max observed level) + 1).
    """
    path = str(path)
    if fmt is None:
        fmt = "tsv" if path.endswith((".tsv", ".txt")) else "csv"
    if fmt not in ("csv", "tsv"):
        raise ValidationError(f"unknown format {fmt!r} (expected csv or tsv)")
    delim = "\t" if fmt == "tsv" else ","
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delim)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if pheno_col not in header:
            raise ValidationError(f"{path}: phenotype column {pheno_col!r} not found")
        pheno_idx = header.index(pheno_col)
        feature_names = [h for i, h in enumerate(header) if i != pheno_idx]
        if not feature_names:
            raise ValidationError(f"{path}: no feature columns")
        geno_rows: list[list[int]] = []
        pheno: list[int] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            p = _parse_cell(row[pheno_idx], row_no, pheno_col, "phenotype")
            if p not in (0, 1):
                raise ValidationError(
                    f"{path}: phenotype value {row[pheno_idx].strip()!r} at row {row_no}"
                    " is not 0 or 1"
                )
            pheno.append(p)
            geno_rows.append(
                [_parse_cell(c, row_no, header[i], "genotype")
                 for i, c in enumerate(row) if i != pheno_idx]
            )
    if not geno_rows:
        raise ValidationError(f"{path}: no data rows")
    return make_dataset(np.array(geno_rows, dtype=np.int16),
                        np.array(pheno, dtype=np.int8),
                        levels=levels, feature_names=feature_names)


def write_dataset(ds: GenotypeDataset, path, fmt: str | None = None,
                  pheno_col: str = DEFAULT_PHENO_COL) -> None:
    """Write a dataset back to CSV/TSV (phenotype column first, NA for missing)."""
    path = str(path)
    if fmt is None:
        fmt = "tsv" if path.endswith((".tsv", ".txt")) else "csv"
    delim = "\t" if fmt == "tsv" else ","
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delim, lineterminator="\n")
        writer.writerow([pheno_col, *ds.feature_names])
        for i in range(ds.n):
            row = [str(int(ds.phenotype[i]))]
            row.extend("NA" if v == MISSING else str(int(v)) for v in ds.genotypes[i])
            writer.writerow(row)


def stratified_kfold(ds: GenotypeDataset, k: int, seed: int) -> FoldAssignment:
    """Deterministic stratified k-fold assignment.

    Cases and controls are shuffled separately with the given seed and dealt
    round-robin, so every fold's case fraction stays within 1/min-fold-size of
    the global fraction.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if min(ds.n_cases, ds.n_controls) < k:
        raise InfeasibilityError(
            f"cannot split {ds.n_cases} cases / {ds.n_controls} controls into {k} stratified folds"
        )
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n, dtype=np.int64)
    for cls in (1, 0):
        idx = np.flatnonzero(ds.phenotype == cls)
        rng.shuffle(idx)
        assignment[idx] = np.arange(idx.size) % k
    return FoldAssignment(k=k, assignment=assignment, seed=seed)
