import numpy as np
import pytest
from sklearn.base import clone

from palettediag.ensemble import stack_ensemble
from palettediag.errors import ConfigError
from palettediag.estimators import GroupFilter, VertexSorter, as_assignment_matrix
from palettediag.pipeline import PipelineConfig, run_pipeline


class TestAsAssignmentMatrix:
    def test_array_conversion(self):
        m = as_assignment_matrix([[0.2, 0.8], [0.5, 0.1]])
        assert m.group_labels == (("rows", 0), ("rows", 1))
        assert m.n_vertices == 2
        assert not m.entries.flags.writeable

    def test_passthrough(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        assert as_assignment_matrix(m) is m

    def test_validation(self):
        with pytest.raises(ConfigError):
            as_assignment_matrix([0.2, 0.8])
        with pytest.raises(ConfigError):
            as_assignment_matrix([[0.2, np.nan]])
        with pytest.raises(ConfigError):
            as_assignment_matrix([[0.2, -0.1]])


class TestSklearnContract:
    def test_get_set_params(self):
        gf = GroupFilter(n_groups=5, alpha=0.7, seed=3, restarts=2)
        assert gf.get_params() == {
            "n_groups": 5, "alpha": 0.7, "seed": 3, "restarts": 2
        }
        gf.set_params(alpha=0.2)
        assert gf.alpha == 0.2
        vs = VertexSorter(n_neighbors=4)
        assert vs.get_params() == {"n_neighbors": 4}

    def test_clone_keeps_params_drops_state(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        gf = GroupFilter(n_groups=3, seed=7).fit(m)
        copy = clone(gf)
        assert copy.get_params() == gf.get_params()
        assert not hasattr(copy, "labels_")


class TestGroupFilter:
    def test_matches_pipeline_representatives(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        gf = GroupFilter(n_groups=3, alpha=0.5, seed=7).fit(m)
        result = run_pipeline(noisy_copies_ensemble, PipelineConfig(m=3, seed=7))
        payload = result.report.payload
        assert list(gf.representative_indices_) == payload["groups"]["representatives"]
        assert gf.labels_.tolist() == payload["groups"]["cluster"]
        assert np.array_equal(
            gf.reduced_.entries, np.asarray(payload["reduced"]["entries"])
        )

    def test_fitted_attributes(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        gf = GroupFilter(n_groups=3, seed=7).fit(m)
        assert gf.n_features_in_ == 12
        assert len(gf.labels_) == 12
        assert gf.objective_ >= 0
        assert gf.divergence_.symmetrized

    def test_transform_selects_rows(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        gf = GroupFilter(n_groups=3, seed=7).fit(m)
        out = gf.transform(m)
        assert out.shape == (3, 60)
        assert np.array_equal(
            out, m.entries[list(gf.representative_indices_)]
        )
        other = np.arange(12 * 60, dtype=float).reshape(12, 60)
        assert np.array_equal(
            gf.transform(other), other[list(gf.representative_indices_)]
        )

    def test_fit_transform(self, noisy_copies_ensemble):
        m = stack_ensemble(noisy_copies_ensemble)
        assert np.array_equal(
            GroupFilter(n_groups=3, seed=7).fit_transform(m),
            GroupFilter(n_groups=3, seed=7).fit(m).transform(m),
        )

    def test_not_fitted(self):
        with pytest.raises(ConfigError, match="not fitted"):
            GroupFilter().transform([[0.1, 0.2]])

    def test_row_count_mismatch(self, noisy_copies_ensemble):
        gf = GroupFilter(n_groups=3).fit(stack_ensemble(noisy_copies_ensemble))
        with pytest.raises(ConfigError, match="groups"):
            gf.transform(np.ones((5, 60)) * 0.1)


class TestVertexSorter:
    def manifold(self, n=30):
        t = np.arange(n) / (n - 1)
        return np.vstack([t, 1.0 - t])

    def test_learns_line_order(self):
        vs = VertexSorter(n_neighbors=5).fit(self.manifold())
        assert vs.order_.permutation == tuple(range(30))
        assert vs.n_features_in_ == 30

    def test_transform_applies_to_other_matrix(self):
        x = self.manifold()
        vs = VertexSorter(n_neighbors=5).fit(x)
        rng = np.random.default_rng(0)
        other = rng.random((4, 30)) * 0.2
        out = vs.transform(other)
        assert np.array_equal(out, other[:, list(vs.order_.permutation)])

    def test_shared_order_aligns_two_ensembles(
        self, noisy_copies_ensemble, split_ensemble
    ):
        a = stack_ensemble(noisy_copies_ensemble)
        b = stack_ensemble(split_ensemble)
        vs = VertexSorter().fit(a)
        ta, tb = vs.transform(a), vs.transform(b)
        assert ta.shape[1] == tb.shape[1] == 60
        perm = list(vs.order_.permutation)
        assert np.array_equal(tb, b.entries[:, perm])

    def test_not_fitted(self):
        with pytest.raises(ConfigError, match="not fitted"):
            VertexSorter().transform(self.manifold())

    def test_width_mismatch(self):
        vs = VertexSorter(n_neighbors=5).fit(self.manifold())
        with pytest.raises(ConfigError, match="vertices"):
            vs.transform(np.ones((2, 10)) * 0.3)

    def test_default_neighbor_count_used(self):
        vs = VertexSorter().fit(self.manifold())
        assert vs.order_.permutation == tuple(range(30))
