import math

import numpy as np
import pytest

from entmoments import montecarlo as mc
from entmoments.eigen import jacobi_eigh
from entmoments.kernel import Dims
from entmoments.moments import max_entropy
from entmoments.stats import MomentAccumulator


class TestAccumulator:
    def test_matches_numpy(self):
        x = np.random.default_rng(0).gamma(2.0, size=5000)
        acc = MomentAccumulator()
        for part in np.array_split(x, 7):
            acc.update(part)
        d = x - x.mean()
        assert acc.count == 5000
        assert acc.mean == pytest.approx(x.mean(), rel=1e-13)
        assert acc.variance == pytest.approx(x.var(ddof=1), rel=1e-12)
        assert acc.m3 == pytest.approx(np.sum(d ** 3), rel=1e-10)
        assert acc.fourth_central == pytest.approx(np.mean(d ** 4), rel=1e-11)

    def test_merge_grouping(self):
        x = np.random.default_rng(1).normal(3.0, 2.0, size=3000)
        a, b, c = (MomentAccumulator.from_batch(p) for p in np.array_split(x, 3))
        left = MomentAccumulator.from_batch([])
        left.merge(a)
        left.merge(b)
        left.merge(c)
        bc = MomentAccumulator.from_batch([])
        bc.merge(b)
        bc.merge(c)
        right = MomentAccumulator.from_batch([])
        right.merge(a)
        right.merge(bc)
        for attr in ("mean", "m2", "m3", "m4"):
            assert getattr(left, attr) == pytest.approx(getattr(right, attr), rel=1e-12, abs=1e-9)

    def test_standard_errors(self):
        x = np.random.default_rng(2).exponential(size=4000)
        acc = MomentAccumulator.from_batch(x)
        assert acc.se_mean == pytest.approx(x.std(ddof=1) / math.sqrt(4000), rel=1e-12)
        m4 = np.mean((x - x.mean()) ** 4)
        v = x.var()
        assert acc.se_variance == pytest.approx(math.sqrt((m4 - v * v) / 4000), rel=1e-11)


class TestJacobi:
    def test_reconstruction(self):
        gen = mc.substream(5, 0)
        y = mc.ginibre(Dims(5, 7), gen, 50)
        w = y @ np.conj(np.swapaxes(y, 1, 2))
        w /= np.real(np.einsum("bii->b", w))[:, None, None]
        lam, vec, ok = jacobi_eigh(w)
        assert ok.all()
        rebuilt = vec @ (lam[..., None] * np.conj(np.swapaxes(vec, 1, 2)))
        err = np.linalg.norm(rebuilt - w, axis=(1, 2)) / np.linalg.norm(w, axis=(1, 2))
        assert err.max() <= 1e-10
        assert np.allclose(np.sort(lam, axis=1), np.linalg.eigvalsh(w), atol=1e-14)

    def test_already_diagonal(self):
        lam, vec, ok = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
        assert ok and np.array_equal(lam, [3.0, 1.0, 2.0])
        assert np.array_equal(vec, np.eye(3))

    def test_degenerate(self):
        a = np.ones((4, 4)) + 0j
        lam, _, ok = jacobi_eigh(a)
        assert ok
        assert np.allclose(np.sort(lam), [0, 0, 0, 4], atol=1e-14)


class TestSampling:
    def test_unit_variance_entries(self):
        z = mc.complex_normal(mc.substream(0, 0), 200_000)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=4 * math.sqrt(1 / 200_000))
        assert abs(np.mean(z)) < 4 * math.sqrt(1 / 200_000)
        assert np.mean(z.real ** 2) == pytest.approx(0.5, abs=0.01)

    def test_substreams_differ(self):
        a = mc.substream(9, 0).random(4)
        b = mc.substream(9, 1).random(4)
        c = mc.substream(9, 0).random(4)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, c)

    def test_single_level(self):
        spec = mc.sample_spectrum(Dims(1, 4), mc.substream(0, 0))
        assert spec.values == (1.0,)

    def test_normalized_and_sorted(self):
        lams, ok = mc.sample_spectra(Dims(4, 6), mc.substream(3, 0), 500)
        assert ok.all()
        assert np.all(np.abs(lams.sum(axis=1) - 1) <= 1e-12)
        assert np.all(np.diff(lams, axis=1) <= 0)
        assert np.all(lams >= 0)

    def test_scale_invariance(self):
        y = mc.ginibre(Dims(3, 5), mc.substream(4, 0), 20)
        a, _ = mc.spectra_of(y)
        b, _ = mc.spectra_of(2.0 * y)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15)

    def test_spectrum_validation(self):
        assert mc.Spectrum((0.25, 0.75)).values == (0.75, 0.25)
        with pytest.raises(ValueError):
            mc.Spectrum((0.5, 0.6))
        with pytest.raises(ValueError):
            mc.Spectrum((1.1, -0.1))

    def test_largest_eigenvalue_stable_across_seeds(self):
        d = Dims(2, 2)
        means = []
        for seed in (1, 2):
            lams, _ = mc.sample_spectra(d, mc.substream(seed, 0), 100_000)
            means.append(MomentAccumulator.from_batch(lams[:, 0]))
        diff = abs(means[0].mean - means[1].mean)
        assert diff <= 4 * math.hypot(means[0].se_mean, means[1].se_mean)


class TestEntropies:
    def test_separable(self):
        spec = mc.Spectrum((1.0, 0.0, 0.0))
        assert mc.tsallis_of(spec, 2) == 0.0
        assert mc.von_neumann_of(spec) == 0.0

    def test_maximally_entangled(self):
        for m in (2, 3, 5):
            spec = mc.Spectrum(tuple([1 / m] * m))
            assert mc.tsallis_of(spec, 2) == pytest.approx(1 - 1 / m, rel=1e-14)
            assert mc.tsallis_of(spec, 2) == pytest.approx(max_entropy(m, 2), rel=1e-14)
            assert mc.tsallis_of(spec, 0.5) == pytest.approx(max_entropy(m, 0.5), rel=1e-14)
        assert mc.von_neumann_of(mc.Spectrum((0.5, 0.5))) == pytest.approx(math.log(2), rel=1e-15)

    def test_negative_order_zero_eigenvalue(self):
        with pytest.raises(ValueError):
            mc.tsallis_of(mc.Spectrum((1.0, 0.0)), -0.3)
        assert mc.tsallis_of(mc.Spectrum((0.5, 0.5)), -0.3) > 0

    def test_excluded_orders(self):
        with pytest.raises(ValueError):
            mc.tsallis_of(mc.Spectrum((0.5, 0.5)), 1)
        with pytest.raises(ValueError):
            mc.tsallis_of(mc.Spectrum((0.5, 0.5)), 0)


class TestRunMc:
    def test_single_level_exact_zero(self):
        est = mc.run_mc(Dims(1, 3), 2, 10_000, seed=17)
        assert (est.mean, est.variance) == (0.0, 0.0)

    def test_deterministic(self):
        a = mc.run_mc(Dims(2, 3), 2.5, 20_000, seed=8, chunk=3000)
        b = mc.run_mc(Dims(2, 3), 2.5, 20_000, seed=8, chunk=3000)
        assert a == b

    def test_deterministic_with_workers(self):
        a = mc.run_mc(Dims(2, 2), 2, 20_000, seed=8, workers=3)
        b = mc.run_mc(Dims(2, 2), 2, 20_000, seed=8, workers=3)
        assert a == b
        assert a.samples == 20_000

    def test_worker_count_invariance(self):
        one = mc.run_mc(Dims(2, 2), 2, 100_000, seed=21, workers=1)
        four = mc.run_mc(Dims(2, 2), 2, 100_000, seed=21, workers=4)
        assert one != four
        assert abs(one.mean - four.mean) <= 6 * math.hypot(one.se_mean, four.se_mean)
        assert abs(one.variance - four.variance) <= 6 * math.hypot(one.se_variance,
                                                                   four.se_variance)

    def test_purity_mean(self):
        # E[sum lambda^2] = 1 - E[T_2] = 4/5 for two qubits
        lams, _ = mc.sample_spectra(Dims(2, 2), mc.substream(12, 0), 200_000)
        acc = MomentAccumulator.from_batch(np.sum(lams ** 2, axis=1))
        assert abs(acc.mean - 0.8) <= 4 * acc.se_mean

    def test_von_neumann_mean(self):
        est = mc.run_mc(Dims(2, 2), 1, 100_000, seed=3)
        assert abs(est.mean - 1 / 3) <= 4 * est.se_mean

    def test_negative_order_rejections(self):
        est = mc.run_mc(Dims(2, 2), -0.3, 20_000, seed=4)
        assert est.rejected >= 0
        assert est.samples + est.rejected == 20_000
        assert est.conditional == (est.rejected > 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            mc.run_mc(Dims(2, 2), 2, 9_999)
        with pytest.raises(ValueError):
            mc.run_mc(Dims(2, 2), 2, 10_000, workers=0)
        with pytest.raises(ValueError):
            mc.run_mc(Dims(2, 2), 0, 10_000)

    def test_abort_on_solver_failure(self, monkeypatch):
        def broken(a, *args, **kw):
            a = np.asarray(a)
            return np.real(np.einsum("...ii->...i", a)), None, np.zeros(a.shape[0], dtype=bool)

        monkeypatch.setattr(mc, "jacobi_eigh", broken)
        with pytest.raises(mc.McAbort):
            mc.run_mc(Dims(2, 2), 2, 10_000)

    def test_env_default_workers(self, monkeypatch):
        monkeypatch.setenv("ENTMOMENTS_WORKERS", "3")
        assert mc.default_workers() == 3
        monkeypatch.delenv("ENTMOMENTS_WORKERS")
        assert mc.default_workers() == 1
