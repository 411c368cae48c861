import math
import os
from unittest import mock

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palettediag.divergence import alpha_divergence, divergence_matrix
from palettediag.ensemble import make_ensemble, stack_ensemble
from palettediag.errors import NumericalError

from conftest import soft_partition


def kl(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def random_distributions(rng, n, strictly_positive=True):
    raw = rng.random(n) + (1e-3 if strictly_positive else 0.0)
    return raw / raw.sum()


class TestClosedForm:
    def test_identical_distributions_zero(self):
        assert alpha_divergence([0.5, 0.5], [0.5, 0.5], 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_half(self):
        # (1/(0.5*0.5)) * (1 - 1^0.5 * 0.5^0.5) = 4 * (1 - sqrt(0.5))
        value = alpha_divergence([1.0, 0.0], [0.5, 0.5], 0.5)
        assert value == pytest.approx(4.0 * (1.0 - math.sqrt(0.5)), abs=1e-12)

    def test_alpha_one_is_kl(self):
        p, q = [0.7, 0.3], [0.5, 0.5]
        assert alpha_divergence(p, q, 1.0) == pytest.approx(kl(p, q), abs=1e-12)
        assert kl(p, q) == pytest.approx(0.08228, abs=5e-6)

    def test_alpha_zero_is_reverse_kl(self):
        p, q = [0.7, 0.3], [0.4, 0.6]
        assert alpha_divergence(p, q, 0.0) == pytest.approx(kl(q, p), abs=1e-12)

    def test_non_distribution_rejected(self):
        with pytest.raises(NumericalError):
            alpha_divergence([0.5, 0.6], [0.5, 0.5], 0.5)
        with pytest.raises(NumericalError):
            alpha_divergence([0.5, -0.1, 0.6], [0.3, 0.3, 0.4], 0.5)

    def test_non_finite_alpha_rejected(self):
        with pytest.raises(NumericalError):
            alpha_divergence([0.5, 0.5], [0.5, 0.5], float("nan"))

    def test_disjoint_support_midrange_exact(self):
        # sum p^a q^(1-a) = 0 so D = 1/(a(1-a))
        assert alpha_divergence([1.0, 0.0], [0.0, 1.0], 0.5) == pytest.approx(4.0)

    def test_disjoint_support_kl_finite_by_smoothing(self):
        v = alpha_divergence([1.0, 0.0], [0.0, 1.0], 1.0)
        assert math.isfinite(v) and v > 0


class TestLimitsAndDuality:
    def test_limit_continuity_at_one(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            p = random_distributions(rng, 6)
            q = random_distributions(rng, 6)
            ref = kl(p, q)
            for a in (1.0 - 1e-7, 1.0 + 1e-7):
                assert abs(alpha_divergence(p, q, a) - ref) <= 1e-4

    def test_limit_continuity_at_zero(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            p = random_distributions(rng, 5)
            q = random_distributions(rng, 5)
            ref = kl(q, p)
            for a in (-1e-7, 1e-7):
                assert abs(alpha_divergence(p, q, a) - ref) <= 1e-4

    def test_duality(self):
        rng = np.random.default_rng(44)
        for _ in range(200):
            p = random_distributions(rng, 7)
            q = random_distributions(rng, 7)
            a = float(rng.uniform(-0.5, 1.5))
            lhs = alpha_divergence(p, q, a)
            rhs = alpha_divergence(q, p, 1.0 - a)
            assert abs(lhs - rhs) <= 1e-10

    def test_nonnegativity_bulk(self):
        rng = np.random.default_rng(45)
        for _ in range(2500):
            p = random_distributions(rng, 4)
            q = random_distributions(rng, 4)
            for a in (0.25, 0.5, 0.75, 1.0):
                assert alpha_divergence(p, q, a) >= -1e-12

    @settings(max_examples=60, deadline=None)
    @given(
        raw_p=st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=6),
        raw_q=st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=6),
        a=st.floats(0.05, 0.95),
    )
    def test_property_nonneg_and_identity(self, raw_p, raw_q, a):
        n = min(len(raw_p), len(raw_q))
        p = np.asarray(raw_p[:n]) / np.sum(raw_p[:n])
        q = np.asarray(raw_q[:n]) / np.sum(raw_q[:n])
        assert alpha_divergence(p, q, a) >= -1e-12
        assert abs(alpha_divergence(p, p, a)) <= 1e-12


class TestMatrix:
    def build(self, rows):
        return stack_ensemble(make_ensemble([soft_partition("p", rows)]))

    def test_identical_rows_entry_zero(self):
        m = self.build([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
        d = divergence_matrix(m, alpha=0.5)
        assert d.entries[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_symmetrized_is_exactly_symmetric(self):
        rng = np.random.default_rng(3)
        m = self.build(rng.random((5, 7)) * 0.14)
        d = divergence_matrix(m, alpha=0.3, symmetrize=True)
        assert np.array_equal(d.entries, d.entries.T)
        assert np.array_equal(np.diag(d.entries), np.zeros(5))
        assert d.symmetrized

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(4)
        rows = rng.random((6, 5)) * 0.16
        m = self.build(rows)
        norm = rows / rows.sum(axis=1, keepdims=True)
        for alpha in (0.0, 0.3, 0.5, 1.0):
            d = divergence_matrix(m, alpha=alpha, symmetrize=False)
            for a in range(6):
                for b in range(6):
                    if a == b:
                        continue
                    expect = alpha_divergence(norm[a], norm[b], alpha)
                    assert d.entries[a, b] == pytest.approx(expect, abs=1e-12)

    def test_worker_count_bit_identical(self):
        rng = np.random.default_rng(5)
        m = self.build(rng.random((12, 9)) * 0.08)
        serial = divergence_matrix(m, alpha=0.4, n_workers=1)
        parallel = divergence_matrix(m, alpha=0.4, n_workers=4)
        assert serial.entries.tobytes() == parallel.entries.tobytes()

    def test_palette_threads_env(self):
        rng = np.random.default_rng(6)
        m = self.build(rng.random((8, 6)) * 0.1)
        base = divergence_matrix(m, alpha=0.6)
        with mock.patch.dict(os.environ, {"PALETTE_THREADS": "3"}):
            capped = divergence_matrix(m, alpha=0.6)
        assert base.entries.tobytes() == capped.entries.tobytes()

    def test_alpha_outside_unit_with_zeros_raises(self):
        m = self.build([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(NumericalError):
            divergence_matrix(m, alpha=2.0)

    def test_alpha_outside_unit_with_positive_rows_ok(self):
        rng = np.random.default_rng(7)
        m = self.build(rng.random((4, 5)) * 0.2 + 0.01)
        d = divergence_matrix(m, alpha=2.0)
        assert np.all(np.isfinite(d.entries))
