"""
The GHZ and W target states and fidelity against them.
"""
import enum
import math
from collections import defaultdict

from . import settings
from .fock import AtomLevel, BasisTerm, HybridState, ZeroNormError

L = AtomLevel.GROUND_L
R = AtomLevel.GROUND_R


class Target(str, enum.Enum):
    GHZ_PLUS = "GHZ+"
    GHZ_MINUS = "GHZ-"
    W = "W"
    W_TILDE = "W~"


def _uniform(configs, signs=None):
    signs = signs or [1] * len(configs)
    norm = math.sqrt(len(configs))
    return HybridState(
        3, {BasisTerm(c): sign / norm for c, sign in zip(configs, signs)}
    )


def ghz(sign=1):
    """(|lll> ± |rrr>)/√2"""

    return _uniform([(L, L, L), (R, R, R)], [1, sign])


def w():
    """(|llr> + |lrl> + |rll>)/√3"""

    return _uniform([(L, L, R), (L, R, L), (R, L, L)])


def w_tilde():
    """(|rrl> + |rlr> + |lrr>)/√3"""

    return _uniform([(R, R, L), (R, L, R), (L, R, R)])


def target_state(target):
    return {
        Target.GHZ_PLUS: lambda: ghz(1),
        Target.GHZ_MINUS: lambda: ghz(-1),
        Target.W: w,
        Target.W_TILDE: w_tilde,
    }[Target(target)]()


def fidelity(state, target, positions=None):
    """Return <target|ρ|target>, where ρ is state normalised and reduced to the
    atoms at positions.

    Atoms outside positions, and any photons still in state, are traced out.
    target may be a Target or a HybridState without photons.
    """

    if not isinstance(target, HybridState):
        target = target_state(target)
    if positions is None:
        positions = range(state.atom_count)
    positions = tuple(positions)
    if len(positions) != target.atom_count:
        raise ValueError(
            f"Fidelity over {len(positions)} atoms against a "
            f"{target.atom_count}-atom target"
        )

    norm_squared = state.norm_squared()
    if math.sqrt(norm_squared) <= settings.NORM_EPSILON:
        raise ZeroNormError("Fidelity of an effectively-zero state is undefined")

    kept = set(positions)
    target_amplitudes = {term.atoms: a for term, a in target.terms.items()}
    overlaps = defaultdict(complex)
    for term, amplitude in state.terms.items():
        reduced = tuple(term.atoms[i] for i in positions)
        spectators = (
            tuple(level for i, level in enumerate(term.atoms) if i not in kept),
            term.occupation,
        )
        t = target_amplitudes.get(reduced)
        if t is not None:
            overlaps[spectators] += t.conjugate() * amplitude

    return sum(abs(o) ** 2 for o in overlaps.values()) / norm_squared
