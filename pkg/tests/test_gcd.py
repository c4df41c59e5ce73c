import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfxemu.emulator import FxStateVector
from qfxemu.gcd import (
    alignment_index, central_angle, gcd_distance, gcd_distances, sphere_coords,
)
from qfxemu.oracle import RefStateVector

unit_complex = st.tuples(st.floats(0, 1), st.floats(-math.pi, math.pi)).map(
    lambda p: p[0] * complex(math.cos(p[1]), math.sin(p[1])))


def test_identical_vectors():
    v = np.array([0.6, 0.8j])
    assert gcd_distance(v, v).max_distance == 0.0


def test_antipodal_basis_states():
    rep = gcd_distance(RefStateVector.zero_state(1), np.array([0, 1], dtype=complex))
    assert rep.max_distance == pytest.approx(math.pi)
    assert rep.worst_index == 0
    assert not rep.passed


def test_accepts_fixed_point_state():
    rep = gcd_distance(RefStateVector.zero_state(2), FxStateVector.zero_state(2),
                       circuit_id="zero")
    assert rep.passed and rep.max_distance == 0.0 and rep.nq == 2
    assert rep.circuit_id == "zero"


def test_sphere_coordinates():
    colat, lon = sphere_coords(np.array([1, 0, 1j * R]))
    assert colat[0] == 0 and colat[1] == pytest.approx(math.pi)
    assert colat[2] == pytest.approx(math.pi / 2)
    assert lon[2] == pytest.approx(math.pi / 2)


R = 1 / math.sqrt(2)


def test_zero_amplitudes_ignore_phase():
    assert central_angle(np.array([0j]), np.array([1e-30j])) == pytest.approx(0.0, abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        gcd_distances(np.ones(2), np.ones(4))


@given(unit_complex, unit_complex)
def test_premetric(a, b):
    d_ab = central_angle(np.array([a]), np.array([b]))[0]
    d_ba = central_angle(np.array([b]), np.array([a]))[0]
    assert central_angle(np.array([a]), np.array([a]))[0] <= 1e-7
    assert d_ab == pytest.approx(d_ba, abs=1e-12)
    assert 0.0 <= d_ab <= math.pi


@given(st.integers(0, 2 ** 32 - 1), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_phase_invariance(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    ref = rng.normal(size=8) + 1j * rng.normal(size=8)
    ref /= np.linalg.norm(ref)
    test = ref + 0.05 * (rng.normal(size=8) + 1j * rng.normal(size=8))
    test /= np.linalg.norm(test)
    base = gcd_distances(ref, test)
    moved = gcd_distances(ref * np.exp(1j * alpha), test * np.exp(1j * beta))
    assert np.abs(base - moved).max() <= 1e-9


def test_alignment_prefers_lowest_index_on_ties():
    assert alignment_index(np.array([0.5, -0.5j, 0.5, 0.5])) == 0
    assert alignment_index(np.array([0.1, 0.7, 0.7j])) == 1


def test_global_phase_only_difference_passes():
    v = np.array([R, 0, 0, R]) * np.exp(0.3j)
    assert gcd_distance(np.array([R, 0, 0, R]), v).max_distance <= 1e-12


def test_report_serialization():
    rep = gcd_distance(np.array([1, 0]), np.array([1, 0]), circuit_id="c")
    doc = json.loads(rep.to_json(include_distances=True))
    assert doc["circuit_id"] == "c" and doc["distances"] == [0.0, 0.0]
    assert "distances" not in rep.to_dict()
    assert rep.summary().startswith("PASS c ")
