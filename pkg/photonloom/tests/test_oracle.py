import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonloom.detection import DetectorSemantics, enumerate_outcomes
from photonloom.elements import ModeTransform, bs, lift_apply
from photonloom.emission import CouplingParams
from photonloom.fock import BasisTerm, HybridState, ModeId, tensor
from photonloom.oracle import (
    DenseBasis,
    DenseBasisError,
    dense_apply,
    dense_lift,
    dense_outcomes,
    from_dense,
    to_dense,
    verify_protocol,
)
from photonloom.protocols import ProtocolParams, Variant

from .helpers import (
    MODE_POOL,
    in_place_transforms,
    routing_transforms,
    single_photon,
    small_states,
)

X = ModeId("x", "H")
Y = ModeId("y", "H")


def deviation(s1, s2):
    terms = set(s1.terms) | set(s2.terms)
    return max(abs(s1.terms.get(t, 0) - s2.terms.get(t, 0)) for t in terms)


def dense_step(state, t):
    basis = DenseBasis.spanning([state], extra_modes=t.modes)
    vector = dense_apply(dense_lift(t, basis), to_dense(state, basis), basis)
    return from_dense(vector, basis)


def test_basis_layout():
    basis = DenseBasis([Y, X], atom_count=1, max_photons=2)
    assert basis.modes == (X, Y)
    assert basis.photonic_dimension == 6
    assert basis.size == 18
    assert basis.occupations[:3] == [(0, 0), (0, 1), (1, 0)]
    assert basis.index(BasisTerm("e")) == 0
    assert basis.index(BasisTerm("l", {X: 1})) == 6 + 2
    for i in range(basis.size):
        assert basis.index(basis.term(i)) == i


def test_basis_errors():
    basis = DenseBasis([X], atom_count=1, max_photons=1)
    with pytest.raises(DenseBasisError):
        basis.index(BasisTerm("l", {Y: 1}))
    with pytest.raises(DenseBasisError):
        basis.index(BasisTerm("l", {X: 2}))
    with pytest.raises(DenseBasisError):
        basis.index(BasisTerm("ll", {X: 1}))
    with pytest.raises(DenseBasisError):
        DenseBasis([X], atom_count=1, max_photons=5)
    with pytest.raises(DenseBasisError):
        from_dense(np.zeros(3), basis)


def test_basis_cap():
    with pytest.raises(DenseBasisError):
        DenseBasis(MODE_POOL, atom_count=8, max_photons=4)

    modes = [ModeId(port, pol) for port in "pqrsxy" for pol in "HV"]
    basis = DenseBasis(modes, atom_count=0, max_photons=4)
    with pytest.raises(DenseBasisError):
        dense_lift(bs("p", "q", "p", "q"), basis)


@settings(deadline=None, max_examples=50)
@given(small_states(atom_count=2))
def test_dense_round_trip(state):
    basis = DenseBasis.spanning([state])
    vector = to_dense(state, basis)
    assert np.linalg.norm(vector) ** 2 == pytest.approx(state.norm_squared())
    assert from_dense(vector, basis).isclose(state)


def test_identity_lifts_to_identity():
    t = ModeTransform([X, Y], [X, Y], np.eye(2))
    basis = DenseBasis([X, Y], atom_count=0, max_photons=3)
    assert np.allclose(dense_lift(t, basis), np.eye(basis.photonic_dimension))


@settings(deadline=None, max_examples=50)
@given(in_place_transforms())
def test_single_photon_block_is_the_mode_matrix(t):
    basis = DenseBasis(t.modes, atom_count=0, max_photons=1)
    matrix = dense_lift(t, basis)
    position = {mode: i for i, mode in enumerate(basis.modes)}

    def occupation(mode):
        counts = [0] * len(basis.modes)
        counts[position[mode]] = 1
        return basis.occupation_index(counts)

    for k, source in enumerate(t.inputs):
        for j, target in enumerate(t.outputs):
            assert matrix[occupation(target), occupation(source)] == pytest.approx(
                t.matrix[j, k]
            )


@settings(deadline=None, max_examples=50)
@given(in_place_transforms())
def test_in_place_transforms_lift_to_unitaries(t):
    basis = DenseBasis(t.modes, atom_count=0, max_photons=3)
    matrix = dense_lift(t, basis)
    identity = np.eye(basis.photonic_dimension)
    assert np.allclose(matrix.conj().T @ matrix, identity, atol=1e-10)


def test_hong_ou_mandel_in_the_dense_engine():
    state = tensor(single_photon(X, "l"), single_photon(Y, "r"))
    out = dense_step(state, bs("x", "y", "x", "y"))
    assert out.amplitude("lr", {X: 1, Y: 1}) == pytest.approx(0, abs=1e-15)
    assert out.amplitude("lr", {X: 2}) == pytest.approx(1j / math.sqrt(2))
    assert out.amplitude("lr", {Y: 2}) == pytest.approx(1j / math.sqrt(2))


@settings(deadline=None, max_examples=200)
@given(st.data())
def test_dense_engine_matches_lift_apply(data):
    transforms = data.draw(st.lists(in_place_transforms(), min_size=1, max_size=3))
    state = data.draw(small_states(atom_count=2))
    sparse = dense = state
    for t in transforms:
        sparse = lift_apply(sparse, t)
        dense = dense_step(dense, t)
        assert deviation(sparse, dense) <= 1e-10


@settings(deadline=None, max_examples=100)
@given(st.data())
def test_dense_routing_matches_lift_apply(data):
    t = data.draw(routing_transforms())
    state = data.draw(small_states(modes=list(t.inputs)))
    assert deviation(lift_apply(state, t), dense_step(state, t)) <= 1e-10


def test_dense_outcomes_match_enumerate_outcomes(subtests):
    state = HybridState(
        1,
        {
            BasisTerm("l", {X: 1}): 1 / math.sqrt(3),
            BasisTerm("r", {Y: 1}): 1 / math.sqrt(3),
            BasisTerm("e", {X: 2}): 1 / math.sqrt(3),
        },
    )
    for sem in DetectorSemantics:
        with subtests.test(semantics=sem.value):
            dense = dense_outcomes(state, [X, Y], sem)
            sparse = {}
            for record in enumerate_outcomes(state, [X, Y], sem):
                key = (record.discarded, record.pattern.fired)
                sparse[key] = sparse.get(key, 0) + record.probability
            assert dense.keys() == sparse.keys()
            for key, probability in sparse.items():
                assert dense[key] == pytest.approx(probability)


def test_verify_protocol_passes(variant):
    report = verify_protocol(variant)
    assert report.passed
    assert report.steps > 0
    assert report.dense_total_probability == pytest.approx(
        report.sparse_total_probability, abs=1e-10
    )


def test_verify_protocol_bunching_stages():
    report = verify_protocol("w-bunching")
    stages = report.stage_probabilities
    assert stages["P_t'"] == pytest.approx(3 / 8, abs=1e-10)
    assert stages["P_s(OUT)"] == pytest.approx(1 / 4, abs=1e-10)
    assert report.dense_total_probability == pytest.approx(3 / 128, abs=1e-10)

    notes = "\n".join(report.notes)
    assert "P_s = 0.25000000 matches Ω⁴/(2Ω⁴+8λ_l²λ_r²)" in notes
    assert "P_W(OUT) = 0.02343750 matches" in notes


def test_verify_protocol_away_from_the_ideal_point(subtests):
    for variant, p in [
        (
            Variant.GHZ,
            ProtocolParams(
                CouplingParams(1.3, 0.8, theta=1.0),
                keep_vacuum_term=True,
                semantics=DetectorSemantics.THRESHOLD,
            ),
        ),
        (
            Variant.W_BUNCHING_WITH_F2,
            ProtocolParams(CouplingParams(0.7, 1.0), bs_transmittance=0.3),
        ),
    ]:
        with subtests.test(variant=variant.value):
            report = verify_protocol(variant, p)
            assert report.passed
            assert report.variant is variant
