"""Window standardization, spectrum statistics, thresholds, localization."""
import math

import numpy as np
import pytest

from gridspectra import (
    Calibration,
    ClassSignature,
    CriteriaTriple,
    DegenerateColumnError,
    DetectionReport,
    StandardizedWindow,
    chain_network,
    covariance_spectrum,
    criteria,
    detect_and_classify,
    impedance_matrix,
    localize,
    mp_bounds,
    ring_spectrum,
    standardize,
    whiten,
)


def gauss(n: int, t: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, t))


class TestStandardize:
    def test_reference_column(self):
        raw = np.tile(np.array([[1.0], [2.0], [3.0]]), (1, 3))
        w = standardize(raw)
        expected = np.array([-1.0, 0.0, 1.0]) / math.sqrt(3.0)
        for j in range(3):
            np.testing.assert_allclose(w.matrix[:, j], expected, atol=1e-12)

    def test_column_variance_is_one_over_n(self):
        w = standardize(gauss(8, 40, 0))
        np.testing.assert_allclose(w.matrix.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(
            w.matrix.std(axis=0, ddof=1) ** 2, 1.0 / 8.0, atol=1e-12
        )

    def test_idempotent(self):
        w1 = standardize(gauss(6, 30, 1))
        w2 = standardize(w1.matrix)
        np.testing.assert_allclose(w2.matrix, w1.matrix, atol=1e-12)

    def test_window_shape_limits(self):
        with pytest.raises(ValueError, match="T >= N"):
            standardize(gauss(5, 3, 2))
        with pytest.raises(ValueError, match="2 nodes"):
            standardize(gauss(1, 5, 2))
        with pytest.raises(ValueError, match="N x T"):
            standardize(np.zeros(5))

    def test_constant_column_named(self):
        raw = gauss(4, 10, 3)
        raw[:, 7] = 2.5
        with pytest.raises(DegenerateColumnError, match="column 7"):
            standardize(raw)

    def test_fixed_scale(self):
        raw = gauss(4, 10, 4)
        w = standardize(raw, scale=0.5)
        centered = raw - raw.mean(axis=0, keepdims=True)
        np.testing.assert_allclose(w.matrix, centered / (2.0 * 0.5), atol=1e-12)

    def test_fixed_scale_tolerates_constant_columns(self):
        raw = gauss(4, 10, 5)
        raw[:, 2] = 1.0
        w = standardize(raw, scale=1.0)
        np.testing.assert_allclose(w.matrix[:, 2], 0.0, atol=1e-15)

    def test_fixed_scale_must_be_positive(self):
        with pytest.raises(ValueError, match="scale"):
            standardize(gauss(4, 10, 6), scale=0.0)

    def test_sigma_m_carried(self):
        assert standardize(gauss(3, 9, 7), sigma_m=2e-3).sigma_m == 2e-3


class TestStandardizedWindow:
    def test_properties(self):
        w = StandardizedWindow(np.zeros((4, 10)))
        assert (w.n, w.t) == (4, 10)
        assert w.c == pytest.approx(0.4)

    def test_rejects_nonfinite(self):
        m = np.zeros((3, 6))
        m[1, 2] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            StandardizedWindow(m)

    def test_rejects_negative_noise(self):
        with pytest.raises(ValueError, match=">= 0"):
            StandardizedWindow(np.zeros((3, 6)), sigma_m=-1.0)


class TestMpBounds:
    def test_quarter_ratio(self):
        assert mp_bounds(25, 100) == (pytest.approx(0.25), pytest.approx(2.25))

    def test_square_window(self):
        lo, hi = mp_bounds(50, 50)
        assert lo == pytest.approx(0.0)
        assert hi == pytest.approx(4.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            mp_bounds(0, 10)
        with pytest.raises(ValueError):
            mp_bounds(10, 5)


class TestCovarianceSpectrum:
    def test_orthonormal_rows_give_unit_spectrum(self):
        n, t = 6, 24
        q, _ = np.linalg.qr(gauss(t, n, 8))
        w = StandardizedWindow(math.sqrt(t / n) * q.T)
        np.testing.assert_allclose(covariance_spectrum(w), 1.0, atol=1e-9)

    def test_descending_real(self):
        spec = covariance_spectrum(standardize(gauss(10, 50, 9)))
        assert spec.shape == (10,)
        assert np.all(np.diff(spec) <= 0)
        assert np.all(spec >= 0)

    def test_iid_data_respects_mp_edges(self):
        outliers = []
        for seed in range(5):
            w = standardize(gauss(60, 600, 100 + seed))
            spec = covariance_spectrum(w)
            lo, hi = mp_bounds(60, 600)
            assert spec[0] < 1.2 * hi
            outliers.append(np.mean((spec < lo) | (spec > hi)))
        assert np.median(outliers) <= 0.05

    def test_amplified_row_escapes_bulk(self):
        raw = gauss(30, 300, 10)
        raw[4] *= 10.0
        spec = covariance_spectrum(standardize(raw))
        assert spec[0] > 1.5 * mp_bounds(30, 300)[1]


class TestRingSpectrum:
    def test_iid_mean_modulus_near_one(self):
        values = [
            np.mean(np.abs(ring_spectrum(standardize(gauss(100, 400, 200 + s)))))
            for s in range(5)
        ]
        assert 0.85 < np.median(values) < 1.05

    def test_dominant_row_shrinks_mean_modulus(self):
        # a single overwhelming row drags most ring eigenvalues inward
        h0 = np.mean(np.abs(ring_spectrum(standardize(gauss(30, 400, 301)))))
        raw = gauss(30, 400, 301)
        raw[7] *= 200.0
        spiked = np.mean(np.abs(ring_spectrum(standardize(raw))))
        assert spiked < h0 - 0.25

    def test_zero_window(self):
        spec = ring_spectrum(StandardizedWindow(np.zeros((4, 8))))
        np.testing.assert_array_equal(spec, 0.0)


class TestCriteria:
    def test_consistent_with_components(self):
        w = standardize(gauss(20, 100, 11))
        triple = criteria(w)
        spec = covariance_spectrum(w)
        lo, hi = mp_bounds(20, 100)
        assert triple.c_mpl1 == pytest.approx(spec[0] / hi)
        assert triple.c_mpl2 == pytest.approx(float(np.mean((spec < lo) | (spec > hi))))
        assert triple.c_srl == pytest.approx(float(np.mean(np.abs(ring_spectrum(w)))))

    def test_triple_validation(self):
        with pytest.raises(ValueError, match="c_mpl1"):
            CriteriaTriple(c_srl=0.9, c_mpl1=0.0, c_mpl2=0.1)
        with pytest.raises(ValueError, match="c_mpl2"):
            CriteriaTriple(c_srl=0.9, c_mpl1=1.0, c_mpl2=1.5)
        with pytest.raises(ValueError, match="c_srl"):
            CriteriaTriple(c_srl=float("nan"), c_mpl1=1.0, c_mpl2=0.0)

    def test_as_dict(self):
        triple = CriteriaTriple(c_srl=0.9, c_mpl1=1.1, c_mpl2=0.05)
        assert triple.as_dict() == {"c_srl": 0.9, "c_mpl1": 1.1, "c_mpl2": 0.05}


def toy_calibration(signatures=()) -> Calibration:
    return Calibration(
        n=10,
        t=100,
        sigma_m=1e-3,
        seeds=(1, 2, 3),
        intervals={
            "c_srl": (0.8, 1.0),
            "c_mpl1": (0.5, 1.5),
            "c_mpl2": (-0.01, 0.2),
        },
        signatures=signatures,
    )


class TestDetectAndClassify:
    def test_inside_all_intervals(self):
        triple = CriteriaTriple(c_srl=0.9, c_mpl1=1.0, c_mpl2=0.1)
        assert detect_and_classify(triple, toy_calibration()) == (False, "none")

    def test_boundary_value_flags(self):
        triple = CriteriaTriple(c_srl=0.8, c_mpl1=1.0, c_mpl2=0.1)
        flag, label = detect_and_classify(triple, toy_calibration())
        assert flag

    def test_no_signatures_label_unknown(self):
        triple = CriteriaTriple(c_srl=0.2, c_mpl1=5.0, c_mpl2=0.5)
        assert detect_and_classify(triple, toy_calibration()) == (True, "unknown")

    def test_nearest_signature_wins(self):
        sigs = (
            ClassSignature("A", 0.5, 2.0, 0.5),
            ClassSignature("B", 0.1, 6.0, 0.8),
        )
        cal = toy_calibration(sigs)
        big = CriteriaTriple(c_srl=0.1, c_mpl1=10.0**6, c_mpl2=0.85)
        assert detect_and_classify(big, cal) == (True, "B")
        mild = CriteriaTriple(c_srl=0.55, c_mpl1=10.0**2.1, c_mpl2=0.45)
        assert detect_and_classify(mild, cal) == (True, "A")

    def test_distance_tie_prefers_earlier_signature(self):
        sigs = (
            ClassSignature("C", 0.4, 2.0, 0.5),
            ClassSignature("D", 0.6, 2.0, 0.5),
        )
        triple = CriteriaTriple(c_srl=0.5, c_mpl1=10.0**2, c_mpl2=0.5)
        assert detect_and_classify(triple, toy_calibration(sigs)) == (True, "C")

    def test_requires_calibration(self):
        triple = CriteriaTriple(c_srl=0.9, c_mpl1=1.0, c_mpl2=0.1)
        with pytest.raises(ValueError, match="calibration"):
            detect_and_classify(triple, None)


class TestCalibrationObject:
    def test_interval_keys_required(self):
        with pytest.raises(ValueError, match="missing"):
            Calibration(
                n=5, t=50, sigma_m=0.0, seeds=(), intervals={"c_srl": (0.0, 1.0)}
            )

    def test_interval_order_required(self):
        with pytest.raises(ValueError, match="lo"):
            Calibration(
                n=5,
                t=50,
                sigma_m=0.0,
                seeds=(),
                intervals={
                    "c_srl": (1.0, 0.0),
                    "c_mpl1": (0.0, 1.0),
                    "c_mpl2": (0.0, 1.0),
                },
            )

    def test_duplicate_signature_labels(self):
        with pytest.raises(ValueError, match="duplicate"):
            toy_calibration(
                (ClassSignature("A", 0.1, 1.0, 0.1), ClassSignature("A", 0.2, 2.0, 0.2))
            )

    def test_omega_shape_checked(self):
        with pytest.raises(ValueError, match="omega_ref"):
            Calibration(
                n=5,
                t=50,
                sigma_m=0.0,
                seeds=(),
                intervals={
                    "c_srl": (0.0, 1.0),
                    "c_mpl1": (0.0, 1.0),
                    "c_mpl2": (0.0, 1.0),
                },
                omega_ref=np.eye(4),
            )

    def test_geometry_checked(self):
        with pytest.raises(ValueError, match="T >= N"):
            Calibration(
                n=10,
                t=5,
                sigma_m=0.0,
                seeds=(),
                intervals={
                    "c_srl": (0.0, 1.0),
                    "c_mpl1": (0.0, 1.0),
                    "c_mpl2": (0.0, 1.0),
                },
            )

    def test_json_round_trip(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        cal = Calibration(
            n=10,
            t=100,
            sigma_m=2e-3,
            seeds=(5, 6, 7),
            intervals={
                "c_srl": (0.8, 1.0),
                "c_mpl1": (0.5, 1.5),
                "c_mpl2": (0.0, 0.2),
            },
            signatures=(ClassSignature("GL", 0.6, 1.7, 0.1),),
            sigma_scale=1.5e-3,
            omega_ref=(a @ a.conj().T),
        )
        back = Calibration.from_json(cal.to_json())
        assert back.n == cal.n
        assert back.t == cal.t
        assert back.seeds == cal.seeds
        assert back.intervals == cal.intervals
        assert back.signatures == cal.signatures
        assert back.sigma_scale == cal.sigma_scale
        np.testing.assert_allclose(back.omega_ref, cal.omega_ref, atol=1e-15)
        # canonical serialization: a round trip is byte-stable
        assert back.to_json() == cal.to_json()

    def test_json_optional_fields_absent(self):
        back = Calibration.from_json(toy_calibration().to_json())
        assert back.sigma_scale is None
        assert back.omega_ref is None


class TestDetectionReport:
    def test_unflagged_invariants(self):
        triple = CriteriaTriple(c_srl=0.9, c_mpl1=1.0, c_mpl2=0.1)
        with pytest.raises(ValueError, match="node"):
            DetectionReport(
                criteria=triple, flag=False, label="none", node=3,
                thresholds={}, n=10, t=100,
            )
        with pytest.raises(ValueError, match="none"):
            DetectionReport(
                criteria=triple, flag=False, label="GL", node=None,
                thresholds={}, n=10, t=100,
            )


class TestWhiten:
    def test_identity_reference_only_rescales(self):
        w = standardize(gauss(6, 30, 13))
        out = whiten(w, np.eye(6))
        np.testing.assert_allclose(out.matrix, w.matrix / math.sqrt(6.0), atol=1e-12)
        assert out.sigma_m == w.sigma_m

    def test_correlated_data_flattens_to_bulk(self):
        # data with covariance omega whitens back onto the M-P bulk
        rng = np.random.default_rng(14)
        mix = rng.standard_normal((20, 20))
        omega = mix @ mix.T + 0.5 * np.eye(20)
        raw = np.linalg.cholesky(omega) @ rng.standard_normal((20, 2000))
        w = StandardizedWindow(raw)
        colored = covariance_spectrum(StandardizedWindow(raw / math.sqrt(20.0)))
        flat = covariance_spectrum(whiten(w, omega))
        lo, hi = mp_bounds(20, 2000)
        assert colored[0] / hi > 2.0
        assert flat[0] / hi < 1.2
        assert flat[-1] > 0.5 * lo

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="omega_ref"):
            whiten(standardize(gauss(4, 12, 15)), np.eye(5))


class TestLocalize:
    def build_window(self, gain: float, node: int = 5, seed: int = 5):
        graph = chain_network(11)
        z = impedance_matrix(graph)
        rng = np.random.default_rng(seed)
        cur = (
            rng.standard_normal((10, 4000)) + 1j * rng.standard_normal((10, 4000))
        ) / math.sqrt(2.0)
        cur[node - 1] *= gain
        w = StandardizedWindow((z @ cur) / math.sqrt(10.0))
        return w, z @ z.conj().T, z

    def test_amplified_bus_found(self):
        w, omega, z = self.build_window(8.0)
        assert localize(w, omega, z) == 5

    def test_disconnected_bus_found(self):
        w, omega, z = self.build_window(0.0)
        assert localize(w, omega, z) == 5

    def test_other_bus(self):
        w, omega, z = self.build_window(9.0, node=8, seed=6)
        assert localize(w, omega, z) == 8

    def test_shape_validation(self):
        w, omega, z = self.build_window(8.0)
        with pytest.raises(ValueError, match="omega_ref"):
            localize(w, np.eye(4), z)
        with pytest.raises(ValueError, match="impedance"):
            localize(w, omega, np.eye(4))
