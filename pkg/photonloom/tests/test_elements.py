import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonloom.elements import (
    DuplicatePortError,
    ModeTransform,
    NonIsometricTransformError,
    PhaseConvention,
    TransmittanceError,
    bs,
    fs_pbs,
    lift_apply,
    pbs,
    qwp,
)
from photonloom.fock import BasisTerm, HybridState, ModeId, tensor

from .helpers import (
    MODE_POOL,
    in_place_transforms,
    random_unitary,
    single_photon,
    small_states,
)

R = 1 / math.sqrt(2)


def m(text):
    return ModeId.parse(text)


def test_pbs_routes_by_polarization(subtests):
    t = pbs("B", "C", out_t="c", out_r="d")
    for source, expected in [("BH", "cH"), ("BV", "dV"), ("CV", "cV"), ("CH", "dH")]:
        with subtests.test(source=source):
            out = lift_apply(single_photon(m(source)), t)
            assert out.amplitude("l", {m(expected): 1}) == 1
            assert len(out) == 1


def test_fs_pbs_in_place():
    t = fs_pbs("a")
    v = lift_apply(single_photon(m("aV")), t)
    h = lift_apply(single_photon(m("aH")), t)
    assert v.amplitude("l", {m("aF"): 1}) == pytest.approx(R)
    assert v.amplitude("l", {m("aS"): 1}) == pytest.approx(R)
    assert h.amplitude("l", {m("aF"): 1}) == pytest.approx(R)
    assert h.amplitude("l", {m("aS"): 1}) == pytest.approx(-R)


def test_fs_pbs_separate_ports():
    t = fs_pbs("a", out_f="f", out_s="s")
    assert set(t.outputs) == {m("fF"), m("sS")}
    with pytest.raises(DuplicatePortError):
        fs_pbs("a", out_f="a", out_s="s")


def test_bs_conventions(subtests):
    for convention, sign in [
        (PhaseConvention.SYMMETRIC_I, 1),
        (PhaseConvention.PART2_BS1, 1),
        (PhaseConvention.PART2_BS2, -1),
    ]:
        with subtests.test(convention=convention.value):
            t = bs("x", "y", "u", "w", 0.5, convention)
            out = lift_apply(single_photon(m("xV")), t)
            assert out.amplitude("l", {m("uV"): 1}) == pytest.approx(R)
            assert out.amplitude("l", {m("wV"): 1}) == pytest.approx(sign * 1j * R)


def test_bs_transmittance():
    t = bs("x", "y", "u", "w", 0.3)
    out = lift_apply(single_photon(m("xH")), t)
    assert abs(out.amplitude("l", {m("uH"): 1})) ** 2 == pytest.approx(0.3)
    assert abs(out.amplitude("l", {m("wH"): 1})) ** 2 == pytest.approx(0.7)
    for bad in [-0.1, 1.5]:
        with pytest.raises(TransmittanceError):
            bs("x", "y", "u", "w", bad)


def test_hong_ou_mandel_bunching():
    state = tensor(single_photon(m("xH"), "l"), single_photon(m("yH"), "r"))
    out = lift_apply(state, bs("x", "y", "u", "w"))
    assert out.amplitude("lr", {m("uH"): 1, m("wH"): 1}) == 0
    assert out.amplitude("lr", {m("uH"): 2}) == pytest.approx(1j * R)
    assert out.amplitude("lr", {m("wH"): 2}) == pytest.approx(1j * R)
    assert out.norm_squared() == pytest.approx(1)


def test_two_photon_fock_state_through_splitter():
    # |2> -> (|2,0> + 2i|1,1> - |0,2>)/2 in the symmetric convention
    state = HybridState(1, {BasisTerm("l", {m("xV"): 2}): 1})
    out = lift_apply(state, bs("x", "y", "u", "w"))
    assert out.amplitude("l", {m("uV"): 2}) == pytest.approx(0.5)
    assert out.amplitude("l", {m("uV"): 1, m("wV"): 1}) == pytest.approx(1j * R)
    assert out.amplitude("l", {m("wV"): 2}) == pytest.approx(-0.5)


def test_qwp():
    t = qwp("A")
    assert lift_apply(single_photon(m("AL")), t).amplitude("l", {m("AV"): 1}) == 1
    assert lift_apply(single_photon(m("AR")), t).amplitude("l", {m("AH"): 1}) == 1


def test_modes_outside_transform_pass_through():
    state = single_photon(m("zH"))
    assert lift_apply(state, bs("x", "y", "u", "w")).isclose(state)


def test_non_isometric_transform():
    with pytest.raises(NonIsometricTransformError):
        ModeTransform([m("xH")], [m("uH")], [[0.5]])
    lossy = ModeTransform([m("xH")], [m("uH")], [[0.5]], lossy=True)
    out = lift_apply(single_photon(m("xH")), lossy)
    assert out.norm_squared() == pytest.approx(0.25)


def test_transform_shape_and_duplicates():
    with pytest.raises(ValueError):
        ModeTransform([m("xH")], [m("uH"), m("wH")], [[1.0]])
    with pytest.raises(DuplicatePortError):
        ModeTransform([m("xH"), m("xH")], [m("uH"), m("wH")], np.eye(2))
    with pytest.raises(DuplicatePortError):
        pbs("a", "a", "b", "c")


def test_compose_is_block_diagonal():
    t = ModeTransform.compose(qwp("A"), qwp("B"))
    assert t.matrix.shape == (4, 4)
    assert t.is_isometry()
    assert t.inputs == (m("AL"), m("AR"), m("BL"), m("BR"))


@settings(deadline=None, max_examples=50)
@given(in_place_transforms(), small_states())
def test_isometries_preserve_norm(t, state):
    assert lift_apply(state, t).norm_squared() == pytest.approx(
        state.norm_squared(), abs=1e-10
    )


@settings(deadline=None, max_examples=50)
@given(
    st.lists(st.sampled_from(MODE_POOL[:4]), min_size=1, max_size=4, unique=True),
    st.integers(0, 2 ** 32 - 1),
    small_states(modes=MODE_POOL[:4], max_photons=2),
    small_states(modes=MODE_POOL[4:], max_photons=2),
)
def test_transforms_commute_with_tensor_on_disjoint_modes(modes, seed, s1, s2):
    t = ModeTransform(modes, modes, random_unitary(len(modes), seed))
    before = lift_apply(tensor(s1, s2), t)
    after = tensor(lift_apply(s1, t), s2)
    assert before.isclose(after, tol=1e-10)
