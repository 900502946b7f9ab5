import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsesense.errors import DegenerateSequence, InternalConsistencyError, ValidationError
from pulsesense.su2 import (
    HalfAngles,
    PhaseMode,
    Propagator,
    SequenceSpec,
    asymptotic_probability,
    clamp_probability,
    compose,
    flip_sign,
    n_pass_alternating,
    n_pass_same,
    sequence_probability,
    sequence_probability_array,
)
from pulsesense.verification import iterated_product, random_su2


def su2_from_angles(x, y, z):
    # Hopf-style parameterization covering all of SU(2)
    a = math.cos(x) * cmath.exp(1j * y)
    b = math.sin(x) * cmath.exp(1j * z)
    return Propagator.from_raw(a, b)


angles = st.tuples(
    st.floats(0, math.pi / 2), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi)
)


class TestPropagator:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            Propagator(0.9, 0.0)

    def test_from_raw_renormalizes_small_defect(self):
        u = Propagator.from_raw(1 + 1e-12, 0.0)
        assert abs(u.a) == pytest.approx(1.0, abs=1e-15)

    def test_from_raw_rejects_large_defect(self):
        with pytest.raises(InternalConsistencyError):
            Propagator.from_raw(1.1, 0.0)

    def test_matrix_layout_and_phases(self):
        u = Propagator.from_raw(0.6j, 0.8)
        m = u.matrix
        assert m[0, 1] == pytest.approx(-0.8)
        assert m[1, 1] == pytest.approx(-0.6j)
        assert np.linalg.det(m) == pytest.approx(1.0)
        assert u.p == pytest.approx(0.64) and u.q == pytest.approx(0.36)
        assert u.xi == pytest.approx(math.pi / 2) and u.eta == pytest.approx(0.0)

    def test_from_matrix_roundtrip(self):
        u = su2_from_angles(0.3, 1.1, -2.0)
        v = Propagator.from_matrix(u.matrix)
        assert v.a == pytest.approx(u.a) and v.b == pytest.approx(u.b)


class TestSequenceSpec:
    @pytest.mark.parametrize("n", [0, -1, 2.5, True])
    def test_rejects_bad_counts(self, n):
        with pytest.raises(ValidationError):
            SequenceSpec(n)

    def test_phase_mode_from_string(self):
        s = SequenceSpec(4, "alternating")
        assert s.phase_mode is PhaseMode.ALTERNATING and s.alternating

    def test_unknown_phase_mode(self):
        with pytest.raises(ValueError):
            SequenceSpec(2, "random")


class TestPowers:
    def test_pi_pulse_same_phase(self):
        u = Propagator(0.0, 1.0)
        assert sequence_probability(u, SequenceSpec(3)) == pytest.approx(1.0)
        assert sequence_probability(u, SequenceSpec(4)) == pytest.approx(0.0, abs=1e-15)

    def test_identity_power(self):
        v = n_pass_same(Propagator.identity(), 37)
        assert v.a == pytest.approx(1.0) and abs(v.b) < 1e-15

    def test_minus_identity_power(self):
        # theta = pi, removable singularity of sin(N theta)/sin(theta)
        v = n_pass_same(Propagator(-1.0, 0.0), 5)
        assert v.a == pytest.approx(-1.0)

    def test_alternating_pair_cancels_for_real_a(self):
        u = su2_from_angles(0.7, 0.0, 0.4)
        v = n_pass_alternating(u, 2)
        assert abs(v.b) < 1e-15

    def test_degenerate_alternating(self):
        u = Propagator(1j, 0.0)
        with pytest.raises(DegenerateSequence):
            n_pass_alternating(u, 4)
        with pytest.raises(DegenerateSequence):
            sequence_probability_array(np.array([1j]), np.array([0j]), SequenceSpec(4, "alternating"))

    def test_single_alternating_pulse_is_not_degenerate(self):
        assert sequence_probability(Propagator(1j, 0.0), SequenceSpec(1, "alternating")) == 0.0

    def test_half_angles_match_arccos(self):
        u = su2_from_angles(0.4, 0.9, 0.1)
        h = HalfAngles.of(u)
        assert h.theta == pytest.approx(math.acos(u.a.real))
        assert h.big_theta == pytest.approx(math.acos(1 - 2 * u.a.imag ** 2))

    def test_compose_order(self):
        u, v = su2_from_angles(0.3, 0.2, 0.1), su2_from_angles(1.0, -0.5, 2.0)
        w = compose(v, u)
        assert np.allclose(w.matrix, v.matrix @ u.matrix, atol=1e-14)

    def test_flip_sign_matches_negated_rabi(self):
        u = su2_from_angles(0.5, 0.3, 1.2)
        assert np.allclose(flip_sign(u).matrix, np.diag([1, -1]) @ u.matrix @ np.diag([1, -1]))


@settings(max_examples=300, deadline=None)
@given(angles, st.integers(1, 64), st.sampled_from(["same", "alternating"]))
def test_closed_form_matches_iterated_product(ang, n, mode):
    u = su2_from_angles(*ang)
    seq = SequenceSpec(n, mode)
    if seq.alternating and n > 1 and math.hypot(u.a.real, abs(u.b)) <= 1e-12:
        return
    v = n_pass_alternating(u, n) if seq.alternating else n_pass_same(u, n)
    assert np.max(np.abs(v.matrix - iterated_product(u, seq))) <= 1e-12


def test_thousand_random_su2():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        u = random_su2(rng)
        n = int(rng.integers(1, 65))
        for mode in ("same", "alternating"):
            seq = SequenceSpec(n, mode)
            v = n_pass_alternating(u, n) if seq.alternating else n_pass_same(u, n)
            worst = max(worst, float(np.max(np.abs(v.matrix - iterated_product(u, seq)))))
    assert worst <= 1e-12


@settings(max_examples=200, deadline=None)
@given(angles, st.integers(1, 40), st.sampled_from(["same", "alternating"]))
def test_probability_in_unit_interval(ang, n, mode):
    u = su2_from_angles(*ang)
    try:
        p = sequence_probability(u, SequenceSpec(n, mode))
    except DegenerateSequence:
        return
    assert 0.0 <= p <= 1.0


@settings(max_examples=200, deadline=None)
@given(angles, st.floats(-math.pi, math.pi), st.integers(1, 40), st.sampled_from(["same", "alternating"]))
def test_probability_independent_of_phase_of_b(ang, phi, n, mode):
    u = su2_from_angles(*ang)
    w = Propagator.from_raw(u.a, u.b * cmath.exp(1j * phi))
    seq = SequenceSpec(n, mode)
    try:
        p1, p2 = sequence_probability(u, seq), sequence_probability(w, seq)
    except DegenerateSequence:
        return
    assert p1 == pytest.approx(p2, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(angles)
def test_single_pulse_probability(ang):
    u = su2_from_angles(*ang)
    for mode in ("same", "alternating"):
        assert sequence_probability(u, SequenceSpec(1, mode)) == pytest.approx(u.p, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(angles, st.integers(1, 64), st.sampled_from(["same", "alternating"]))
def test_vectorized_matches_scalar(ang, n, mode):
    u = su2_from_angles(*ang)
    seq = SequenceSpec(n, mode)
    try:
        ref = sequence_probability(u, seq)
    except DegenerateSequence:
        return
    got = sequence_probability_array(np.array([u.a]), np.array([u.b]), seq)
    assert got[0] == pytest.approx(ref, abs=1e-12)


class TestAsymptotic:
    def test_sixteen_fold_same_phase_growth(self):
        # same a_r, N = 8 vs N = 2 even sequences: 16x the deviation
        a = complex(1e-3, 2e-3)
        p2 = asymptotic_probability(a, SequenceSpec(2)).value
        p8 = asymptotic_probability(a, SequenceSpec(8)).value
        assert p8 / p2 == pytest.approx(16.0)

    def test_matches_exact_near_inversion(self):
        # leading order: error is O(|a|^2), independent of N
        a = complex(2e-4, 3e-4)
        u = Propagator.from_raw(a, math.sqrt(1 - abs(a) ** 2))
        for n in (2, 3, 8, 9):
            for mode in ("same", "alternating"):
                seq = SequenceSpec(n, mode)
                approx = asymptotic_probability(a, seq)
                assert approx.valid
                assert approx.value == pytest.approx(sequence_probability(u, seq), abs=2 * abs(a) ** 2)

    def test_validity_flag(self):
        assert not asymptotic_probability(0.5, SequenceSpec(2)).valid


def test_clamp_probability():
    assert clamp_probability(1.0 + 1e-13) == 1.0
    assert clamp_probability(-1e-13) == 0.0
    with pytest.raises(InternalConsistencyError):
        clamp_probability(1.001)
