import io
import json

import numpy as np
import pytest

from palettediag.ensemble import (
    Partition,
    _readonly,
    expand_hard_labels,
    load_ensemble,
    make_ensemble,
    normalized_rows,
    row_distribution,
    save_ensemble,
    stack_ensemble,
)
from palettediag.errors import EmptyGroupError, EnsembleValidationError

from conftest import soft_partition


def doc_bytes(doc):
    return json.dumps(doc).encode("utf-8")


class TestLoadJson:
    def test_hard_labels_expand_to_one_hot(self):
        doc = {
            "n_vertices": 4,
            "partitions": [
                {"name": "s", "kind": "soft",
                 "assignment": [[0.2, 0.3, 0.1, 0.4], [0.5, 0.5, 0.5, 0.5]]},
                {"name": "h", "kind": "hard", "labels": [0, 0, 1, 1]},
            ],
        }
        ens = load_ensemble(doc_bytes(doc))
        assert len(ens.partitions) == 2
        hard = ens.partitions[1]
        assert hard.assignment.shape == (2, 4)
        expected = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=float)
        assert np.array_equal(hard.assignment, expected)

    def test_mismatched_n_names_both_partitions(self):
        doc = {
            "n_vertices": 4,
            "partitions": [
                {"name": "first", "kind": "hard", "labels": [0, 0, 1, 1]},
                {"name": "second", "kind": "hard", "labels": [0, 1, 0, 1, 0]},
            ],
        }
        with pytest.raises(EnsembleValidationError) as exc:
            load_ensemble(doc_bytes(doc))
        assert "first" in str(exc.value) and "second" in str(exc.value)

    def test_empty_partition_list(self):
        with pytest.raises(EnsembleValidationError):
            load_ensemble(doc_bytes({"n_vertices": 3, "partitions": []}))

    def test_entry_out_of_range_reports_location(self):
        doc = {
            "n_vertices": 2,
            "partitions": [
                {"name": "bad", "kind": "soft", "assignment": [[0.5, 1.5]]},
            ],
        }
        with pytest.raises(EnsembleValidationError) as exc:
            load_ensemble(doc_bytes(doc))
        assert "bad" in str(exc.value)

    def test_nan_rejected(self):
        doc = {
            "n_vertices": 2,
            "partitions": [
                {"name": "nan", "kind": "soft",
                 "assignment": [[0.5, float("nan")]]},
            ],
        }
        with pytest.raises(EnsembleValidationError):
            load_ensemble(doc_bytes(doc))

    def test_column_sum_above_one_rejected(self):
        doc = {
            "n_vertices": 2,
            "partitions": [
                {"name": "over", "kind": "soft",
                 "assignment": [[0.8, 0.5], [0.5, 0.4]]},
            ],
        }
        with pytest.raises(EnsembleValidationError):
            load_ensemble(doc_bytes(doc))

    def test_negative_hard_label_rejected(self):
        doc = {
            "n_vertices": 3,
            "partitions": [
                {"name": "h", "kind": "hard", "labels": [0, -1, 1]},
            ],
        }
        with pytest.raises(EnsembleValidationError):
            load_ensemble(doc_bytes(doc))

    def test_parse_failure(self):
        with pytest.raises(EnsembleValidationError):
            load_ensemble(b"{not json")

    def test_file_object_and_path(self, tmp_path):
        doc = {
            "n_vertices": 3,
            "partitions": [
                {"name": "h", "kind": "hard", "labels": [0, 1, 1]},
            ],
        }
        ens1 = load_ensemble(io.BytesIO(doc_bytes(doc)))
        path = tmp_path / "e.json"
        path.write_bytes(doc_bytes(doc))
        ens2 = load_ensemble(str(path))
        assert ens1.content_hash() == ens2.content_hash()

    def test_vertex_names_length_checked(self):
        doc = {
            "n_vertices": 3,
            "vertex_names": ["a", "b"],
            "partitions": [
                {"name": "h", "kind": "hard", "labels": [0, 1, 1]},
            ],
        }
        with pytest.raises(EnsembleValidationError):
            load_ensemble(doc_bytes(doc))


class TestRoundTrip:
    def test_json_round_trip_exact(self, tmp_path, noisy_copies_ensemble):
        path = tmp_path / "ens.json"
        save_ensemble(noisy_copies_ensemble, str(path))
        again = load_ensemble(str(path))
        for a, b in zip(noisy_copies_ensemble.partitions, again.partitions):
            assert a.name == b.name
            assert np.max(np.abs(a.assignment - b.assignment)) <= 1e-12

    def test_csv_dir_round_trip(self, tmp_path):
        ens = make_ensemble([
            soft_partition("alpha", [[0.25, 0.75], [0.5, 0.25]]),
            soft_partition("beta", [[1.0, 0.0]]),
        ])
        d = tmp_path / "csvs"
        save_ensemble(ens, str(d), format="csv-dir")
        again = load_ensemble(str(d), format="csv-dir")
        # csv-dir order is alphabetical by file name
        assert [p.name for p in again.partitions] == ["alpha", "beta"]
        for a, b in zip(ens.partitions, again.partitions):
            assert np.max(np.abs(a.assignment - b.assignment)) <= 1e-12

    def test_hard_resaves_as_soft(self, tmp_path):
        doc = {
            "n_vertices": 3,
            "partitions": [{"name": "h", "kind": "hard", "labels": [0, 1, 0]}],
        }
        ens = load_ensemble(doc_bytes(doc))
        out = ens.to_dict()
        assert out["partitions"][0]["kind"] == "soft"
        assert np.array_equal(
            np.asarray(out["partitions"][0]["assignment"]),
            ens.partitions[0].assignment,
        )


class TestStack:
    def test_row_count_is_sum_of_group_counts(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            n = int(rng.integers(3, 10))
            parts = []
            total = 0
            for li in range(int(rng.integers(1, 11))):
                m_l = int(rng.integers(1, 5))
                total += m_l
                mat = rng.random((m_l, n)) / m_l
                parts.append(soft_partition(f"p{li}", mat))
            stacked = stack_ensemble(make_ensemble(parts))
            assert stacked.entries.shape == (total, n)

    def test_row_order_and_labels(self):
        ens = make_ensemble([
            soft_partition("a", [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]]),
            soft_partition("b", [[0.2, 0.1], [0.4, 0.3], [0.6, 0.5],
                                 [0.05, 0.15]]),
        ])
        stacked = stack_ensemble(ens)
        assert stacked.entries.shape[0] == 7
        assert stacked.group_labels == (
            ("a", 0), ("a", 1), ("a", 2),
            ("b", 0), ("b", 1), ("b", 2), ("b", 3),
        )

    def test_hard_ensemble_columns_sum_to_l(self):
        rng = np.random.default_rng(1)
        for copies in (1, 3, 5):
            n, k = 12, 4
            labels = rng.integers(0, k, size=n)
            mat = np.zeros((k, n))
            mat[labels, np.arange(n)] = 1.0
            ens = make_ensemble(
                [soft_partition(f"c{i}", mat) for i in range(copies)]
            )
            stacked = stack_ensemble(ens)
            assert np.array_equal(
                stacked.entries.sum(axis=0), np.full(n, float(copies))
            )

    def test_identical_copies_duplicate_rows(self):
        rows = [[0.6, 0.1, 0.0], [0.2, 0.7, 0.3], [0.2, 0.2, 0.7]]
        ens = make_ensemble(
            [soft_partition(f"c{i}", rows) for i in range(4)]
        )
        stacked = stack_ensemble(ens)
        assert stacked.entries.shape[0] == 12
        for g in range(3):
            for off in (3, 6, 9):
                assert np.array_equal(
                    stacked.entries[g], stacked.entries[g + off]
                )

    def test_zero_rows_dropped_and_recorded(self):
        ens = make_ensemble([
            soft_partition("p", [[0.5, 0.5], [0.0, 0.0], [0.25, 0.25]]),
        ])
        stacked = stack_ensemble(ens)
        assert stacked.entries.shape[0] == 2
        assert ("p", 1) in stacked.dropped_groups
        assert stacked.group_labels == (("p", 0), ("p", 2))

    def test_all_rows_zero_is_an_error(self):
        ens = make_ensemble([soft_partition("z", [[0.0, 0.0]])])
        with pytest.raises(EmptyGroupError):
            stack_ensemble(ens)


class TestRowDistribution:
    def test_normalizes(self):
        ens = make_ensemble([soft_partition("p", [[1.0, 0.5, 0.5]])])
        stacked = stack_ensemble(ens)
        dist = row_distribution(stacked, 0)
        assert np.allclose(dist, [0.5, 0.25, 0.25])
        assert abs(dist.sum() - 1.0) <= 1e-12

    def test_one_hot_unchanged(self):
        ens = make_ensemble([soft_partition("p", [[0.0, 1.0, 0.0]])])
        dist = row_distribution(stack_ensemble(ens), 0)
        assert np.array_equal(dist, [0.0, 1.0, 0.0])

    def test_zero_row_is_empty_group(self):
        entries = _readonly(np.array([[0.0, 0.0]]))
        from palettediag.ensemble import AssignmentMatrix
        m = AssignmentMatrix(
            entries=entries, group_labels=(("p", 0),), n_vertices=2,
            dropped_groups=(),
        )
        with pytest.raises(EmptyGroupError):
            row_distribution(m, 0)
        with pytest.raises(EmptyGroupError):
            normalized_rows(entries)


class TestHashes:
    def test_content_hash_stable_and_sensitive(self):
        ens1 = make_ensemble([soft_partition("p", [[0.5, 0.5]])])
        ens2 = make_ensemble([soft_partition("p", [[0.5, 0.5]])])
        ens3 = make_ensemble([soft_partition("p", [[0.5, 0.25]])])
        assert ens1.content_hash() == ens2.content_hash()
        assert ens1.content_hash() != ens3.content_hash()

    def test_expand_hard_labels_k(self):
        mat = expand_hard_labels([2, 0, 2], "p")
        assert mat.shape == (3, 3)
        assert np.array_equal(
            mat, [[0, 1, 0], [0, 0, 0], [1, 0, 1]]
        )
