"""
Post-QWP atom-photon states of single atom-cavity systems.

An excited Λ atom in its cavity evolves to

    cos(θ)|e>|vac> + sin(θ)(λ_l|g_l>|L> + λ_r|g_r>|R>)/Ω

and the quarter-wave plate behind the cavity turns L into V and R into H.  The
plate is folded in here, so emitted photons are V/H on the configured port.
"""
import math
from functools import reduce

import attr
import structlog

from .fock import (
    AtomLevel,
    BasisTerm,
    HybridState,
    ModeId,
    new_product_state,
    tensor,
)

logger = structlog.get_logger()


class DuplicateAtomError(ValueError):
    pass


def _positive(instance, attribute, value):
    if not value > 0 or math.isinf(value):
        raise ValueError(f"{attribute.name} must be > 0, got {value}")


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ValueError(f"{attribute.name} must be finite, got {value}")


@attr.s(frozen=True)
class CouplingParams:
    lambda_l = attr.ib(converter=float, validator=_positive)
    lambda_r = attr.ib(converter=float, validator=_positive)
    theta = attr.ib(default=math.pi / 2, converter=float, validator=_finite)

    @property
    def omega(self):
        return math.hypot(self.lambda_l, self.lambda_r)

    @property
    def p_emit(self):
        """P₁, the probability that the atom emits a photon at all."""

        return math.sin(self.theta) ** 2

    def weights(self):
        """Return the (g_l, g_r) branch amplitudes of an emitted photon."""

        return self.lambda_l / self.omega, self.lambda_r / self.omega

    def scaled_to(self, ratio):
        """Return a copy with λ_l = ratio and λ_r = 1."""

        return attr.evolve(self, lambda_l=ratio, lambda_r=1.0)


@attr.s(frozen=True)
class EmissionConfig:
    coupling = attr.ib(validator=attr.validators.instance_of(CouplingParams))
    atom_index = attr.ib()
    output_port = attr.ib(converter=str)
    keep_vacuum_term = attr.ib(default=False, converter=bool)


def emit(cfg):
    """Return the single-atom state produced by cfg."""

    c = cfg.coupling
    w_l, w_r = c.weights()
    sin = math.sin(c.theta)
    v = ModeId(cfg.output_port, "V")
    h = ModeId(cfg.output_port, "H")
    terms = {
        BasisTerm([AtomLevel.GROUND_L], [(v, 1)]): sin * w_l,
        BasisTerm([AtomLevel.GROUND_R], [(h, 1)]): sin * w_r,
    }
    if cfg.keep_vacuum_term:
        terms[BasisTerm([AtomLevel.EXCITED])] = math.cos(c.theta)
    return HybridState(1, terms)


def idle(level):
    """Return a single atom parked in level with no photon."""

    return new_product_state([level])


def _configuration_weights(state):
    weights = {}
    for term in state.terms:
        weights[term.atoms] = weights.get(term.atoms, 0.0) + abs(state.terms[term]) ** 2
    return weights


def combine(states, shared_ports=False):
    """Tensor single-atom states together in order.

    With shared_ports, photons landing in a common mode are composed by
    creation operators, which inflates multi-photon terms by their bosonic
    factors.  Each atomic configuration is then rescaled to the weight it
    carries in the product of the individual states, so every term's squared
    amplitude is the product of the single-emission weights of its atoms.
    """

    states = list(states)
    combined = reduce(
        lambda s1, s2: tensor(s1, s2, shared_ports=shared_ports),
        states,
        HybridState.vacuum(),
    )
    if not shared_ports:
        return combined

    expected = {(): 1.0}
    for state in states:
        single = _configuration_weights(state)
        expected = {
            key + sub: weight * sub_weight
            for key, weight in expected.items()
            for sub, sub_weight in single.items()
        }
    actual = _configuration_weights(combined)
    scale = {
        key: math.sqrt(expected[key] / weight)
        for key, weight in actual.items()
        if weight > 0
    }
    return HybridState(
        combined.atom_count,
        {t: a * scale[t.atoms] for t, a in combined.terms.items()},
    )


def emit_all(cfgs, shared_port=None):
    """Return the joint state of several emitters.

    Without shared_port this is the plain tensor product of emit() over cfgs,
    in order.  With shared_port every photon branch is emitted into that one
    port, giving the bunched input whose photons can no longer be traced back to
    their cavities.
    """

    cfgs = list(cfgs)
    indices = [cfg.atom_index for cfg in cfgs]
    duplicates = sorted({str(i) for i in indices if indices.count(i) > 1})
    if duplicates:
        raise DuplicateAtomError(f"Duplicate atom indices: {', '.join(duplicates)}")
    if not cfgs:
        raise ValueError("emit_all needs at least one emission config")

    if shared_port is not None:
        cfgs = [attr.evolve(cfg, output_port=shared_port) for cfg in cfgs]
    state = combine((emit(cfg) for cfg in cfgs), shared_ports=shared_port is not None)
    logger.debug(
        "Emitted Photons",
        atoms=len(cfgs),
        shared_port=shared_port,
        terms=len(state),
    )
    return state
