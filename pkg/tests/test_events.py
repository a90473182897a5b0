"""Event specs, current-row scaling, impedance matrix, rank-one prediction."""
import numpy as np
import pytest

from gridspectra import (
    EVENT_CLASSES,
    EVENT_PRESETS,
    EventSpec,
    apply_event,
    chain_network,
    common_path_matrix,
    compensation_source,
    from_preset,
    impedance_matrix,
    nodal_admittance,
    perturbation_matrix,
    random_tree_network,
)
from gridspectra.linalg import inverse_sqrt_hermitian


class TestEventSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match=">= -1"):
            EventSpec(node=1, alpha=-1.5)
        with pytest.raises(ValueError, match="reference"):
            EventSpec(node=0, alpha=0.5)
        with pytest.raises(ValueError, match="onset"):
            EventSpec(node=1, alpha=0.5, onset=-1)
        with pytest.raises(ValueError, match="duration"):
            EventSpec(node=1, alpha=0.5, duration=-2)
        with pytest.raises(ValueError, match="unknown event class"):
            EventSpec(node=1, alpha=0.5, label="XX")

    def test_span_defaults_to_window_end(self):
        spec = EventSpec(node=1, alpha=0.5, onset=10)
        assert spec.span(100) == (10, 100)

    def test_span_clips_duration(self):
        spec = EventSpec(node=1, alpha=0.5, onset=90, duration=50)
        assert spec.span(100) == (90, 100)

    def test_span_rejects_late_onset(self):
        spec = EventSpec(node=1, alpha=0.5, onset=100)
        with pytest.raises(ValueError, match="onset"):
            spec.span(100)


class TestPresets:
    def test_catalogue_is_complete(self):
        assert tuple(EVENT_PRESETS) == EVENT_CLASSES
        for preset in EVENT_PRESETS.values():
            assert preset.alpha >= -1.0
            assert 0.0 < preset.duration_frac <= 1.0

    def test_disconnection_preset(self):
        assert EVENT_PRESETS["GL"].alpha == -1.0

    def test_from_preset_anchors_at_window_end(self):
        spec = from_preset("FLT", node=3, t=500)
        assert spec.label == "FLT"
        assert spec.node == 3
        assert spec.span(500) == (350, 500)

    def test_from_preset_onset_override(self):
        spec = from_preset("SC", node=2, t=200, onset=10)
        duration = max(1, round(EVENT_PRESETS["SC"].duration_frac * 200))
        assert spec.span(200) == (10, 10 + duration)

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            from_preset("NOPE", node=1, t=100)


class TestApplyEvent:
    def test_zero_alpha_is_identity(self):
        rng = np.random.default_rng(0)
        series = rng.standard_normal((4, 30))
        out = apply_event(series, EventSpec(node=2, alpha=0.0))
        np.testing.assert_array_equal(out, series)

    def test_disconnection_zeroes_span(self):
        series = np.ones((3, 10))
        out = apply_event(series, EventSpec(node=2, alpha=-1.0, onset=4, duration=3))
        np.testing.assert_array_equal(out[1, 4:7], 0.0)
        np.testing.assert_array_equal(out[1, :4], 1.0)
        np.testing.assert_array_equal(out[1, 7:], 1.0)
        np.testing.assert_array_equal(out[0], 1.0)
        np.testing.assert_array_equal(out[2], 1.0)

    def test_input_untouched(self):
        series = np.ones((2, 5))
        apply_event(series, EventSpec(node=1, alpha=3.0))
        np.testing.assert_array_equal(series, 1.0)

    def test_gains_compose(self):
        rng = np.random.default_rng(1)
        series = rng.standard_normal((3, 12))
        a1, a2 = 0.4, -0.3
        once = apply_event(series, EventSpec(node=3, alpha=(1 + a1) * (1 + a2) - 1))
        twice = apply_event(
            apply_event(series, EventSpec(node=3, alpha=a1)),
            EventSpec(node=3, alpha=a2),
        )
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_node_outside_network(self):
        with pytest.raises(ValueError, match="outside"):
            apply_event(np.ones((3, 5)), EventSpec(node=4, alpha=0.5))

    def test_needs_2d(self):
        with pytest.raises(ValueError, match="2-D"):
            apply_event(np.ones(5), EventSpec(node=1, alpha=0.5))


class TestImpedanceMatrix:
    def test_single_edge(self):
        g = chain_network(2, r=0.3, x=0.7)
        np.testing.assert_allclose(impedance_matrix(g), [[0.3 + 0.7j]], atol=1e-12)

    def test_entries_are_complex_common_path(self):
        g = random_tree_network(14, np.random.default_rng(6))
        z = impedance_matrix(g)
        expected = common_path_matrix(g, "resistance") + 1j * common_path_matrix(
            g, "reactance"
        )
        np.testing.assert_allclose(z, expected, atol=1e-10)

    def test_inverse_of_admittance(self):
        g = chain_network(6)
        z = impedance_matrix(g)
        np.testing.assert_allclose(z @ nodal_admittance(g), np.eye(5), atol=1e-10)


class TestPerturbationMatrix:
    def build(self, alpha: float, node: int = 3):
        g = chain_network(6)
        z = impedance_matrix(g)
        rng = np.random.default_rng(8)
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        omega = a @ a.conj().T + np.eye(5)
        return z, omega, perturbation_matrix(z, omega, EventSpec(node=node, alpha=alpha))

    def test_zero_alpha_gives_zero_matrix(self):
        _, _, p = self.build(0.0)
        np.testing.assert_array_equal(p.matrix, 0.0)
        assert p.coefficient == 0.0

    def test_hermitian_rank_one(self):
        _, _, p = self.build(0.7)
        np.testing.assert_allclose(p.matrix, p.matrix.conj().T, atol=1e-12)
        s = np.linalg.svd(p.matrix, compute_uv=False)
        assert s[1] <= 1e-12 * s[0]

    def test_single_shifted_eigenvalue(self):
        z, omega, p = self.build(0.7)
        direction = inverse_sqrt_hermitian(omega) @ z[:, 2]
        expected = 1.0 + p.coefficient * np.linalg.norm(direction) ** 2
        vals = np.sort(np.linalg.eigvalsh(np.eye(5) + p.matrix))
        np.testing.assert_allclose(vals[:4], 1.0, atol=1e-9)
        assert vals[4] == pytest.approx(expected, rel=1e-9)

    def test_disconnection_pulls_eigenvalue_down(self):
        _, _, p = self.build(-1.0)
        assert p.coefficient == -1.0
        vals = np.sort(np.linalg.eigvalsh(np.eye(5) + p.matrix))
        assert vals[0] < 1.0 - 1e-6
        np.testing.assert_allclose(vals[1:], 1.0, atol=1e-9)

    def test_shape_validation(self):
        g = chain_network(6)
        z = impedance_matrix(g)
        with pytest.raises(ValueError, match="conformable"):
            perturbation_matrix(z, np.eye(4), EventSpec(node=1, alpha=0.5))
        with pytest.raises(ValueError, match="outside"):
            perturbation_matrix(z, np.eye(5), EventSpec(node=6, alpha=0.5))


def test_compensation_source():
    assert compensation_source(2 + 1j, 3 + 5j) == 1 + 4j
    assert compensation_source(1.5 + 0j, 1.5 + 0j) == 0.0
