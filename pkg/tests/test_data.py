import numpy as np
import pytest

from mbmdr import (
    MISSING,
    GenotypeDataset,
    InfeasibilityError,
    ValidationError,
    load_dataset,
    make_dataset,
    stratified_kfold,
    write_dataset,
)

from conftest import random_dataset


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadDataset:
    def test_small_file(self, tmp_path):
        p = write_csv(tmp_path / "d.csv",
                      "PHENOTYPE,A,B\n0,0,2\n1,1,0\n0,2,1\n1,0,2\n")
        ds = load_dataset(p)
        assert ds.n == 4 and ds.q == 2
        assert tuple(ds.levels) == (3, 3)
        assert list(ds.phenotype) == [0, 1, 0, 1]
        assert ds.feature_names == ("A", "B")

    def test_na_is_missing(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "PHENOTYPE,A\n0,NA\n1,1\n0,0\n")
        ds = load_dataset(p)
        assert ds.genotypes[0, 0] == MISSING
        assert ds.genotypes[1, 0] == 1

    def test_bad_phenotype_names_row(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "PHENOTYPE,A\n0,1\n2,0\n")
        with pytest.raises(ValidationError, match="row 3"):
            load_dataset(p)

    def test_malformed_cell_names_row_and_column(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "PHENOTYPE,A,B\n0,1,x\n1,0,1\n")
        with pytest.raises(ValidationError, match="row 2.*'B'"):
            load_dataset(p)

    def test_empty_file_and_no_rows(self, tmp_path):
        with pytest.raises(ValidationError, match="empty"):
            load_dataset(write_csv(tmp_path / "e.csv", ""))
        with pytest.raises(ValidationError, match="no data rows"):
            load_dataset(write_csv(tmp_path / "h.csv", "PHENOTYPE,A\n"))

    def test_missing_pheno_column(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "OUTCOME,A\n0,1\n1,0\n")
        with pytest.raises(ValidationError, match="PHENOTYPE"):
            load_dataset(p)
        ds = load_dataset(p, pheno_col="OUTCOME")
        assert ds.n == 2

    def test_tsv_and_crlf(self, tmp_path):
        p = write_csv(tmp_path / "d.tsv", "PHENOTYPE\tA\r\n0\t1\r\n1\t2\r\n")
        ds = load_dataset(p)
        assert ds.n == 2 and tuple(ds.levels) == (3,)

    def test_level_override(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "PHENOTYPE,A\n0,0\n1,1\n")
        assert tuple(load_dataset(p).levels) == (2,)
        assert tuple(load_dataset(p, levels=3).levels) == (3,)

    def test_round_trip(self, tmp_path, rng):
        ds = random_dataset(rng, n=30, q=4, missing_rate=0.1)
        path = tmp_path / "rt.csv"
        write_dataset(ds, path)
        back = load_dataset(path, levels=ds.levels)
        assert (back.genotypes == ds.genotypes).all()
        assert (back.phenotype == ds.phenotype).all()
        assert back.feature_names == ds.feature_names
        # byte-level round trip: writing the reloaded dataset reproduces the file
        path2 = tmp_path / "rt2.csv"
        write_dataset(back, path2)
        assert path.read_bytes() == path2.read_bytes()


class TestDatasetValidation:
    def test_requires_both_classes(self):
        with pytest.raises(ValidationError, match="case and one control"):
            make_dataset([[0], [1]], [1, 1])

    def test_rejects_out_of_range_level(self):
        with pytest.raises(ValidationError, match="out of range"):
            make_dataset([[0], [3]], [0, 1], levels=[3])

    def test_rejects_bad_phenotype(self):
        with pytest.raises(ValidationError, match="phenotype"):
            make_dataset([[0], [1]], [0, 2])

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValidationError, match="unique"):
            make_dataset([[0, 1], [1, 0]], [0, 1], feature_names=("A", "A"))

    def test_immutable_after_load(self):
        ds = make_dataset([[0], [1]], [0, 1])
        with pytest.raises(ValueError):
            ds.genotypes[0, 0] = 1


class TestStratifiedKfold:
    def test_balanced_folds(self):
        y = [1] * 5 + [0] * 5
        ds = make_dataset(np.zeros((10, 1), dtype=int) + [[0]], y, levels=[2])
        folds = stratified_kfold(ds, 5, seed=1)
        for f in range(5):
            members = folds.assignment == f
            assert members.sum() == 2
            assert ds.phenotype[members].sum() == 1  # exactly one case per fold

    def test_deterministic(self, rng):
        ds = random_dataset(rng, n=40, q=2)
        a = stratified_kfold(ds, 4, seed=9).assignment
        b = stratified_kfold(ds, 4, seed=9).assignment
        assert (a == b).all()
        c = stratified_kfold(ds, 4, seed=10).assignment
        assert (a != c).any()

    def test_infeasible_split(self):
        y = [1, 1, 1] + [0] * 7
        ds = make_dataset(np.zeros((10, 1), dtype=int), y, levels=[2])
        with pytest.raises(InfeasibilityError):
            stratified_kfold(ds, 5, seed=0)

    def test_partition_and_stratification(self, rng):
        for trial in range(10):
            n = int(rng.integers(20, 80))
            k = int(rng.integers(2, 6))
            ds = random_dataset(rng, n=n, q=2)
            if min(ds.n_cases, ds.n_controls) < k:
                continue
            folds = stratified_kfold(ds, k, seed=trial)
            # every sample in exactly one fold, no fold empty
            assert folds.assignment.min() >= 0 and folds.assignment.max() < k
            sizes = np.bincount(folds.assignment, minlength=k)
            assert (sizes > 0).all()
            global_frac = ds.case_fraction
            for f in range(k):
                members = folds.assignment == f
                frac = ds.phenotype[members].mean()
                assert abs(frac - global_frac) <= 1.0 / sizes.min() + 1e-12

    def test_train_test_disjoint(self, rng):
        ds = random_dataset(rng, n=30, q=2)
        folds = stratified_kfold(ds, 3, seed=0)
        for f in range(3):
            train, test = folds.train_test(f)
            assert not set(train) & set(test)
            assert len(train) + len(test) == ds.n
