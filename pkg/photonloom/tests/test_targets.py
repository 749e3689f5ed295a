import math

import pytest

from photonloom.fock import BasisTerm, HybridState, ModeId, ZeroNormError
from photonloom.targets import Target, fidelity, ghz, target_state, w, w_tilde


def test_targets_are_unit_norm_and_orthogonal(subtests):
    for target in Target:
        with subtests.test(target=target.value):
            state = target_state(target)
            assert state.norm_squared() == pytest.approx(1)
            assert fidelity(state, target) == pytest.approx(1)

    assert fidelity(ghz(1), Target.GHZ_MINUS) == pytest.approx(0)
    assert fidelity(w(), Target.W_TILDE) == pytest.approx(0)
    assert fidelity(w(), Target.GHZ_PLUS) == pytest.approx(0)


def test_fidelity_normalises():
    assert fidelity(w().scaled(0.1), Target.W) == pytest.approx(1)


def test_fidelity_of_partial_overlap():
    s = HybridState(3, {BasisTerm("lll"): 1})
    assert fidelity(s, Target.GHZ_PLUS) == pytest.approx(0.5)
    assert fidelity(s, w_tilde()) == 0


def test_fidelity_traces_out_other_atoms_and_photons():
    mode = ModeId("x", "H")
    amplitude = 1 / math.sqrt(2)
    # the fourth atom is entangled with the first three, so tracing it out
    # leaves an equal mixture of GHZ+ and GHZ-
    s = HybridState(
        4,
        {
            BasisTerm("llll", {mode: 1}): amplitude / math.sqrt(2),
            BasisTerm("rrrl", {mode: 1}): amplitude / math.sqrt(2),
            BasisTerm("lllr"): amplitude / math.sqrt(2),
            BasisTerm("rrrr"): -amplitude / math.sqrt(2),
        },
    )
    assert fidelity(s, Target.GHZ_PLUS, positions=(0, 1, 2)) == pytest.approx(0.5)

    # positions pick the atoms, in order
    s = HybridState(4, {BasisTerm("rlll"): 1})
    assert fidelity(s, HybridState(3, {BasisTerm("lll"): 1}), (1, 2, 3)) == 1


def test_fidelity_errors():
    with pytest.raises(ZeroNormError):
        fidelity(HybridState.empty(3), Target.W)
    with pytest.raises(ValueError):
        fidelity(w(), Target.W, positions=(0, 1))
