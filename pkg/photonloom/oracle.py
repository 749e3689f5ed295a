"""
Dense reference implementation over the full truncated Fock basis.

Nothing here uses the sparse transform code in elements.py.  A ModeTransform
contributes its mode lists and matrix only; the Fock-space action is built from
the multinomial expansion of the rewritten creation operators, so agreement
between the two engines is a real check.

Basis order
    flat index = atomic index * photonic dimension + occupation index

    Atomic configurations run over itertools.product("elr", repeat=atoms).
    Occupations are count vectors over the sorted modes, ordered by total
    photon number and then lexicographically, so the vacuum comes first.
"""
import functools
import itertools
import math
from collections import defaultdict

import attr
import numpy as np
import structlog

from . import settings
from .detection import DetectorSemantics, enumerate_outcomes
from .elements import lift_apply
from .emission import EmissionConfig, emit, emit_all
from .fock import AtomLevel, BasisTerm, HybridState, ModeId, tensor
from .protocols import (
    AUX_ARM_BANKS,
    MAIN_ARM_BANKS,
    ProtocolParams,
    Variant,
    bunching_notes,
    bunching_splitter,
    compare_formula,
    ghz_bank,
    ghz_elements,
    merging_splitter,
    part2_elements,
    quoted_formulas,
    run_protocol,
    w_bank,
)

logger = structlog.get_logger()

LEVELS = (AtomLevel.EXCITED, AtomLevel.GROUND_L, AtomLevel.GROUND_R)


class DenseBasisError(ValueError):
    pass


def _mode_set(values):
    return tuple(
        sorted({m if isinstance(m, ModeId) else ModeId.parse(m) for m in values})
    )


def _compositions(n, parts):
    """Yield every tuple of parts non-negative integers summing to n."""

    for bins in itertools.combinations_with_replacement(range(parts), n):
        counts = [0] * parts
        for i in bins:
            counts[i] += 1
        yield tuple(counts)


@attr.s(frozen=True, eq=False)
class DenseBasis:
    modes = attr.ib(converter=_mode_set)
    atom_count = attr.ib(converter=int)
    max_photons = attr.ib(default=settings.MAX_PHOTONS, converter=int)

    def __attrs_post_init__(self):
        if not 0 <= self.max_photons <= settings.MAX_PHOTONS:
            raise DenseBasisError(
                f"max_photons must lie in [0, {settings.MAX_PHOTONS}], "
                f"got {self.max_photons}"
            )
        if self.size > settings.DENSE_BASIS_CAP:
            raise DenseBasisError(
                f"Basis of {self.size} vectors exceeds the cap of "
                f"{settings.DENSE_BASIS_CAP}"
            )

    @classmethod
    def spanning(cls, states, extra_modes=()):
        """The smallest basis holding every state, plus extra_modes."""

        states = list(states)
        modes = set(extra_modes)
        for s in states:
            modes |= s.modes
        photons = max((n for s in states for n in s.photon_numbers()), default=0)
        return cls(modes, states[0].atom_count, photons)

    @property
    def atomic_dimension(self):
        return len(LEVELS) ** self.atom_count

    @property
    def photonic_dimension(self):
        return math.comb(len(self.modes) + self.max_photons, self.max_photons)

    @property
    def size(self):
        return self.atomic_dimension * self.photonic_dimension

    @functools.cached_property
    def configs(self):
        return list(itertools.product(LEVELS, repeat=self.atom_count))

    @functools.cached_property
    def occupations(self):
        return [
            counts
            for total in range(self.max_photons + 1)
            for counts in sorted(_compositions(total, len(self.modes)))
        ]

    @functools.cached_property
    def _config_index(self):
        return {config: i for i, config in enumerate(self.configs)}

    @functools.cached_property
    def _occupation_index(self):
        return {counts: i for i, counts in enumerate(self.occupations)}

    @functools.cached_property
    def _mode_index(self):
        return {mode: i for i, mode in enumerate(self.modes)}

    def occupation_index(self, counts):
        return self._occupation_index[tuple(counts)]

    def index(self, term):
        if len(term.atoms) != self.atom_count:
            raise DenseBasisError(
                f"Term has {len(term.atoms)} atoms, basis has {self.atom_count}"
            )
        counts = [0] * len(self.modes)
        for mode, n in term.occupation:
            position = self._mode_index.get(mode)
            if position is None:
                raise DenseBasisError(f"Mode {mode} is outside the basis")
            counts[position] = n
        if sum(counts) > self.max_photons:
            raise DenseBasisError(
                f"Term with {sum(counts)} photons exceeds the basis cut-off "
                f"{self.max_photons}"
            )
        return (
            self._config_index[term.atoms] * self.photonic_dimension
            + self.occupation_index(counts)
        )

    def term(self, index):
        config, occupation = divmod(index, self.photonic_dimension)
        return BasisTerm(
            self.configs[config], zip(self.modes, self.occupations[occupation])
        )


def to_dense(s, basis):
    if s.atom_count != basis.atom_count:
        raise DenseBasisError(
            f"State has {s.atom_count} atoms, basis has {basis.atom_count}"
        )
    vector = np.zeros(basis.size, dtype=complex)
    for term, amplitude in s.terms.items():
        vector[basis.index(term)] = amplitude
    return vector


def from_dense(vector, basis):
    vector = np.asarray(vector, dtype=complex)
    if vector.shape != (basis.size,):
        raise DenseBasisError(
            f"Vector of shape {vector.shape} does not fit a basis of {basis.size}"
        )
    support = np.flatnonzero(np.abs(vector) >= settings.AMPLITUDE_EPSILON)
    return HybridState(
        basis.atom_count, {basis.term(int(i)): vector[i] for i in support}
    )


def _expansion(column, n, output_count):
    """Expand (Σ_j column[j] a†_j)^n / √n! into (counts, coefficient) pairs."""

    terms = []
    for split in _compositions(n, output_count):
        coefficient = complex(math.factorial(n))
        for j, k in enumerate(split):
            coefficient *= complex(column[j]) ** k / math.factorial(k)
        if coefficient:
            terms.append((split, coefficient / math.sqrt(math.factorial(n))))
    return terms


def dense_lift(t, basis):
    """Return the photonic_dimension × photonic_dimension matrix of t on basis.

    The matrix acts on the occupation index only; atoms are untouched.
    """

    missing = t.modes - set(basis.modes)
    if missing:
        names = ", ".join(str(m) for m in sorted(missing))
        raise DenseBasisError(f"Transform modes outside the basis: {names}")
    dimension = basis.photonic_dimension
    if dimension ** 2 > settings.DENSE_BASIS_CAP:
        raise DenseBasisError(
            f"Transform matrix of {dimension}² entries exceeds the cap of "
            f"{settings.DENSE_BASIS_CAP}"
        )

    position = {mode: i for i, mode in enumerate(basis.modes)}
    inputs = [position[m] for m in t.inputs]
    outputs = [position[m] for m in t.outputs]

    matrix = np.zeros((dimension, dimension), dtype=complex)
    for column, counts in enumerate(basis.occupations):
        passthrough = list(counts)
        for i in inputs:
            passthrough[i] = 0
        expansions = [
            _expansion(t.matrix[:, k], counts[i], len(outputs))
            for k, i in enumerate(inputs)
            if counts[i]
        ]

        for choice in itertools.product(*expansions):
            created = [0] * len(counts)
            amplitude = 1 + 0j
            for split, coefficient in choice:
                amplitude *= coefficient
                for j, k in enumerate(split):
                    created[outputs[j]] += k
            final = [p + c for p, c in zip(passthrough, created)]
            for p, n in zip(passthrough, final):
                amplitude *= math.sqrt(math.factorial(n) / math.factorial(p))
            matrix[basis.occupation_index(final), column] += amplitude
    return matrix


def dense_apply(matrix, vector, basis):
    """Apply a photonic matrix from dense_lift() to a full basis vector."""

    amplitudes = vector.reshape(basis.atomic_dimension, basis.photonic_dimension)
    return (amplitudes @ matrix.T).reshape(-1)


def dense_outcomes(s, detectors, sem=DetectorSemantics.EXACTLY_ONE):
    """Return {(discarded, fired modes): probability} for s, by projecting its
    dense vector onto every occupation of the basis."""

    detectors = _mode_set(detectors)
    sem = DetectorSemantics(sem)
    basis = DenseBasis.spanning([s], extra_modes=detectors)
    amplitudes = to_dense(s, basis).reshape(
        basis.atomic_dimension, basis.photonic_dimension
    )
    weights = (np.abs(amplitudes) ** 2).sum(axis=0)
    positions = [basis.modes.index(d) for d in detectors]

    outcomes = defaultdict(float)
    for counts, weight in zip(basis.occupations, weights):
        if not weight:
            continue
        clicks = [counts[i] for i in positions]
        discarded = any(sem.rejects(n) for n in clicks)
        fired = frozenset(d for d, n in zip(detectors, clicks) if n >= 1)
        outcomes[(discarded, fired)] += float(weight)
    return dict(outcomes)


def _deviation(s1, s2):
    terms = set(s1.terms) | set(s2.terms)
    return max(
        (abs(s1.terms.get(t, 0) - s2.terms.get(t, 0)) for t in terms), default=0.0
    )


def _ratio(numerator, denominator):
    if denominator <= settings.NORM_EPSILON:
        return float("nan")
    return numerator / denominator


def _weight(state, predicate):
    return math.fsum(abs(a) ** 2 for t, a in state.terms.items() if predicate(t))


def _fraction(state, numerator, denominator):
    return _ratio(_weight(state, numerator), _weight(state, denominator))


@attr.s(frozen=True)
class VerificationReport:
    variant = attr.ib()
    tolerance = attr.ib()
    steps = attr.ib()
    max_amplitude_deviation = attr.ib()
    max_probability_deviation = attr.ib()
    dense_total_probability = attr.ib()
    sparse_total_probability = attr.ib()
    stage_probabilities = attr.ib(factory=dict)
    notes = attr.ib(default=(), converter=tuple)

    @property
    def passed(self):
        worst = max(self.max_amplitude_deviation, self.max_probability_deviation)
        return worst <= self.tolerance


class _DenseRun:
    """Pushes states through the dense engine, checking every element against
    lift_apply() and every detection against the sparse report."""

    def __init__(self, p, report):
        self.p = p
        self.report = report
        self.steps = 0
        self.max_amplitude = 0.0
        self.max_probability = 0.0
        self.heralded = {}

    def emission(self, index, port):
        return EmissionConfig(self.p.coupling, index, port, self.p.keep_vacuum_term)

    def apply(self, state, element):
        basis = DenseBasis.spanning([state], extra_modes=element.modes)
        vector = dense_apply(dense_lift(element, basis), to_dense(state, basis), basis)
        dense = from_dense(vector, basis)
        deviation = _deviation(dense, lift_apply(state, element))
        self.max_amplitude = max(self.max_amplitude, deviation)
        self.steps += 1
        return dense

    def run(self, state, elements):
        for element in elements:
            state = self.apply(state, element)
        return state

    def detect(self, state, bank):
        sparse_state = self.report.detected_states[bank.name]
        self.max_amplitude = max(self.max_amplitude, _deviation(state, sparse_state))

        dense = dense_outcomes(state, bank.detectors, self.p.semantics)
        sparse = {
            (r.discarded, r.pattern.fired): r.probability
            for r in enumerate_outcomes(sparse_state, bank.detectors, self.p.semantics)
        }
        for key in set(dense) | set(sparse):
            deviation = abs(dense.get(key, 0.0) - sparse.get(key, 0.0))
            self.max_probability = max(self.max_probability, deviation)

        heralded = math.fsum(
            probability
            for (discarded, fired), probability in dense.items()
            if not discarded and bank.target_for(fired) is not None
        )
        self.heralded[bank.name] = heralded
        return heralded

    @property
    def total(self):
        return math.fsum(self.heralded.values())


def _verify_ghz(run):
    state = emit_all(run.emission(i, port) for i, port in enumerate("ABC", 1))
    state = run.run(state, ghz_elements())
    heralded = run.detect(state, ghz_bank())
    return {"P1": run.p.coupling.p_emit, "P_GHZ": heralded}, []


def _verify_w_direct(run):
    p = run.p
    state = emit_all((run.emission(i, "OUT") for i in (1, 2, 3)), shared_port="OUT")
    three = _weight(state, lambda term: term.photon_count == 3)
    state = run.run(state, part2_elements("OUT", "", p.bs_transmittance))
    heralded = run.detect(state, w_bank())
    p_prime = _ratio(heralded, three)
    stages = {"P1": p.coupling.p_emit, "P'": p_prime}
    notes = [compare_formula("P'", p_prime, *quoted_formulas(p.coupling)["P'"])]
    return stages, notes


def _verify_w_bunching(run):
    p = run.p
    t = p.bs_transmittance
    state = emit_all([run.emission(1, "A"), run.emission(2, "B")])
    state = run.apply(state, bunching_splitter(t))

    def two(term):
        return term.photon_count == 2

    stages = {
        "P1": p.coupling.p_emit,
        "P_t'": _fraction(state, lambda term: term.port_count("t'") == 2, two),
    }
    arms = [(False, "t'", MAIN_ARM_BANKS)]
    if p.variant.has_aux:
        stages["P_s'"] = _fraction(state, lambda term: term.port_count("s'") == 2, two)
        arms.append((True, "s'", AUX_ARM_BANKS))

    for auxiliary, port, banks in arms:
        branch = state.filter(lambda term: term.port_count(port) == 2)
        index, source = ("3'", "C'") if auxiliary else (3, "C")
        merged = tensor(branch, emit(run.emission(index, source)))
        merged = run.apply(merged, merging_splitter(t, auxiliary))
        three = _weight(merged, lambda term: term.photon_count == 3)

        for name, bank_port, suffix in banks[: 2 if p.variant.has_f2 else 1]:
            selected = merged.filter(lambda term: term.port_count(bank_port) == 3)
            selected_norm = selected.norm_squared()
            stages[f"P_s({name})"] = _ratio(selected_norm, three)
            final = run.run(selected, part2_elements(bank_port, suffix, t))
            heralded = run.detect(final, w_bank(name, suffix))
            stages[f"P'({name})"] = _ratio(heralded, selected_norm)

    notes = bunching_notes(p.coupling, stages)
    product = (
        stages["P1"] ** 3
        * stages["P_t'"]
        * stages["P_s(OUT)"]
        * stages["P'(OUT)"]
    )
    notes.append(
        compare_formula("P_W(OUT)", run.heralded["OUT"], "P1³·P_t'·P_s·P'", product)
    )
    return stages, notes


VERIFIERS = {
    Variant.GHZ: _verify_ghz,
    Variant.W_DIRECT: _verify_w_direct,
    Variant.W_BUNCHING: _verify_w_bunching,
    Variant.W_BUNCHING_WITH_F2: _verify_w_bunching,
    Variant.W_BUNCHING_WITH_F1_AUX: _verify_w_bunching,
}


def verify_protocol(variant, p=None, tol=1e-10):
    """Re-run variant stage by stage in the dense engine and compare every
    amplitude and outcome probability with the sparse engine."""

    variant = Variant.parse(variant)
    p = ProtocolParams.ideal(variant) if p is None else attr.evolve(p, variant=variant)
    report = run_protocol(p)

    run = _DenseRun(p, report)
    stages, notes = VERIFIERS[variant](run)
    sparse_total = report.total_success_probability
    run.max_probability = max(run.max_probability, abs(run.total - sparse_total))

    result = VerificationReport(
        variant=variant,
        tolerance=tol,
        steps=run.steps,
        max_amplitude_deviation=run.max_amplitude,
        max_probability_deviation=run.max_probability,
        dense_total_probability=run.total,
        sparse_total_probability=sparse_total,
        stage_probabilities=stages,
        notes=notes,
    )
    logger.info(
        "Verified Protocol",
        variant=variant.value,
        steps=result.steps,
        max_amplitude_deviation=result.max_amplitude_deviation,
        max_probability_deviation=result.max_probability_deviation,
        passed=result.passed,
    )
    return result
