"""
End-to-end drivers for the three heralded-entanglement setups.

GHZ
    Atoms 1, 2, 3 emit into ports A, B, C.  PBS1 mixes B and C into c and d,
    PBS2 mixes d and A into a and b, and an FS-PBS on each of a, b, c rotates
    V/H into F/S.  One click on each of a, b, c heralds GHZ+ when the number of
    F clicks is odd and GHZ- otherwise.

W, direct
    All three photons enter one port OUT (the ideal bunched input).  PBS1 sends
    V to a' and H to b', BS1 splits a' into a, b and BS2 splits b' into c, d.
    Three distinct clicks among (a,V), (b,V), (c,H), (d,H) herald W when both a
    and b fired and W~ otherwise.  This detection stage is called "part 2".

W, by bunching
    BS1'(A, B -> t', s') followed by post-selection of both photons in t';
    atom 3 then emits into C and BS2'(t', C -> OUT, F2) is followed by
    post-selection of all three photons in OUT, then part 2.  The F2 extension
    runs part 2 on F2 as well.  The auxiliary extension also keeps the s'
    bunching, mixes it with an auxiliary atom 3' emitting into C' on
    BS2''(s', C' -> OUT', F2'), and runs part 2 on both outputs.

The bunching stages are post-selected explicitly so their probabilities can be
reported.  Everything that is not post-selected stays in the probability
ledger as a discarded or no-click outcome.
"""
import enum
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor

import attr
import structlog

from . import settings
from .detection import DetectorSemantics, enumerate_outcomes
from .elements import PhaseConvention, bs, fs_pbs, lift_apply, pbs
from .emission import CouplingParams, EmissionConfig, emit, emit_all
from .fock import ModeId, tensor
from .targets import Target, fidelity

logger = structlog.get_logger()

# A computed stage probability "matches" a quoted closed form within this.
FORMULA_TOLERANCE = 1e-9


class Variant(str, enum.Enum):
    GHZ = "ghz"
    W_DIRECT = "w_direct"
    W_BUNCHING = "w_bunching"
    W_BUNCHING_WITH_F2 = "w_bunching_with_f2"
    W_BUNCHING_WITH_F1_AUX = "w_bunching_with_f1_aux"

    @property
    def is_bunching(self):
        return self.value.startswith("w_bunching")

    @property
    def has_f2(self):
        return self in (Variant.W_BUNCHING_WITH_F2, Variant.W_BUNCHING_WITH_F1_AUX)

    @property
    def has_aux(self):
        return self is Variant.W_BUNCHING_WITH_F1_AUX

    @classmethod
    def parse(cls, value):
        """Accept a Variant, its value, or the CLI spelling (w-direct)."""

        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower().replace("-", "_"))


def _transmittance(instance, attribute, value):
    if not 0 <= value <= 1:
        raise ValueError(f"{attribute.name} must lie in [0, 1], got {value}")


@attr.s(frozen=True)
class ProtocolParams:
    coupling = attr.ib(validator=attr.validators.instance_of(CouplingParams))
    semantics = attr.ib(
        default=DetectorSemantics.EXACTLY_ONE, converter=DetectorSemantics
    )
    keep_vacuum_term = attr.ib(default=False, converter=bool)
    bs_transmittance = attr.ib(default=0.5, converter=float, validator=_transmittance)
    variant = attr.ib(default=Variant.GHZ, converter=Variant.parse)

    @classmethod
    def ideal(cls, variant=Variant.GHZ, **kwargs):
        """Symmetric couplings, θ = π/2, 50/50 beam splitters."""

        return cls(CouplingParams(1.0, 1.0), variant=variant, **kwargs)


@attr.s(frozen=True)
class DetectorBank:
    """A set of detectors that heralds on its own.

    roles maps each detector mode to the letter the herald rule uses: the port
    letter for the GHZ bank, a/b/c/d for a part 2 bank.  atoms are the positions
    of the heralded atoms in the state the bank looks at.
    """

    name = attr.ib()
    kind = attr.ib(validator=attr.validators.in_(["ghz", "w"]))
    roles = attr.ib(converter=lambda roles: tuple(sorted(dict(roles).items())))
    atoms = attr.ib(default=(0, 1, 2), converter=tuple)

    @property
    def detectors(self):
        return tuple(mode for mode, _ in self.roles)

    def target_for(self, fired):
        """Return the Target heralded by the fired detectors, or None."""

        roles = dict(self.roles)
        fired = [mode for mode in fired if mode in roles]
        if len(fired) != 3:
            return None
        letters = {roles[mode] for mode in fired}
        if len(letters) != 3:
            return None
        if self.kind == "ghz":
            f_count = sum(1 for mode in fired if mode.polarization.value == "F")
            return Target.GHZ_PLUS if f_count % 2 else Target.GHZ_MINUS
        return Target.W if {"a", "b"} <= letters else Target.W_TILDE


def ghz_bank(atoms=(0, 1, 2)):
    return DetectorBank(
        "GHZ",
        "ghz",
        {ModeId(port, pol): port for port in "abc" for pol in "FS"},
        atoms,
    )


def w_bank(name="OUT", suffix="", atoms=(0, 1, 2)):
    roles = {
        ModeId("a" + suffix, "V"): "a",
        ModeId("b" + suffix, "V"): "b",
        ModeId("c" + suffix, "H"): "c",
        ModeId("d" + suffix, "H"): "d",
    }
    return DetectorBank(name, "w", roles, atoms)


def ghz_elements():
    """PBS1, PBS2 and the three FS-PBSs, in beam order."""

    return [
        pbs("B", "C", out_t="c", out_r="d"),
        pbs("d", "A", out_t="a", out_r="b"),
        fs_pbs("a"),
        fs_pbs("b"),
        fs_pbs("c"),
    ]


def part2_elements(source="OUT", suffix="", transmittance=0.5):
    """PBS1 (V -> a', H -> b'), BS1 (a' -> a, b) and BS2 (b' -> c, d).

    suffix is appended to every port part 2 creates, so several copies can sit
    in one network.
    """

    return [
        pbs(source, "v1" + suffix, out_t="b'" + suffix, out_r="a'" + suffix),
        bs(
            "a'" + suffix,
            "v2" + suffix,
            "a" + suffix,
            "b" + suffix,
            transmittance,
            PhaseConvention.PART2_BS1,
        ),
        bs(
            "b'" + suffix,
            "v3" + suffix,
            "c" + suffix,
            "d" + suffix,
            transmittance,
            PhaseConvention.PART2_BS2,
        ),
    ]


def bunching_splitter(transmittance=0.5):
    """BS1'(A, B -> t', s')"""

    return bs("A", "B", "t'", "s'", transmittance)


def merging_splitter(transmittance=0.5, auxiliary=False):
    """BS2'(t', C -> OUT, F2), or BS2''(s', C' -> OUT', F2') for the auxiliary
    arm."""

    if auxiliary:
        return bs("s'", "C'", "OUT'", "F2'", transmittance)
    return bs("t'", "C", "OUT", "F2", transmittance)


# (bank name, port the bank reads, suffix of its part 2 ports)
MAIN_ARM_BANKS = [("OUT", "OUT", ""), ("F2", "F2", "@F2")]
AUX_ARM_BANKS = [("OUT'", "OUT'", "@OUT'"), ("F2'", "F2'", "@F2'")]

WIRING_NOTE = (
    "wiring: BS1'(A,B->t',s'); BS2'(t',C->OUT,F2); BS2''(s',C'->OUT',F2'); "
    "part 2 = PBS1(V->a',H->b'), BS1(a'->a,b), BS2(b'->c,d) on each bank"
)


@attr.s(frozen=True)
class Setup:
    """The whole network of a variant as one circuit.

    sources lists (atom label, port) in atom order.  With shared_port every
    photon is emitted into that port as the ideal bunched input.
    """

    variant = attr.ib()
    sources = attr.ib(converter=tuple)
    elements = attr.ib(converter=tuple)
    banks = attr.ib(converter=tuple)
    shared_port = attr.ib(default=None)

    @property
    def detectors(self):
        return tuple(m for bank in self.banks for m in bank.detectors)


def build_setup(p):
    """Return the single-network form of p.variant."""

    t = p.bs_transmittance
    variant = p.variant
    if variant is Variant.GHZ:
        return Setup(
            variant,
            [("1", "A"), ("2", "B"), ("3", "C")],
            ghz_elements(),
            [ghz_bank()],
        )
    if variant is Variant.W_DIRECT:
        return Setup(
            variant,
            [("1", "OUT"), ("2", "OUT"), ("3", "OUT")],
            part2_elements("OUT", "", t),
            [w_bank()],
            shared_port="OUT",
        )

    sources = [("1", "A"), ("2", "B"), ("3", "C")]
    elements = [bunching_splitter(t), merging_splitter(t)]
    arms = [(MAIN_ARM_BANKS, (0, 1, 2))]
    if variant.has_aux:
        sources.append(("3'", "C'"))
        elements.append(merging_splitter(t, auxiliary=True))
        arms.append((AUX_ARM_BANKS, (0, 1, 3)))

    banks = []
    for arm_banks, atoms in arms:
        for name, port, suffix in arm_banks[: 2 if variant.has_f2 else 1]:
            elements.extend(part2_elements(port, suffix, t))
            banks.append(w_bank(name, suffix, atoms))
    return Setup(variant, sources, elements, banks)


@attr.s(frozen=True)
class ProtocolOutcome:
    """A heralded click pattern and what it heralds."""

    bank = attr.ib()
    pattern = attr.ib()
    probability = attr.ib()
    target = attr.ib()
    fidelity = attr.ib()
    record = attr.ib(repr=False)

    @property
    def conditional_atoms(self):
        return self.record.conditional_atoms


@attr.s(frozen=True)
class Ledger:
    heralded = attr.ib(default=0.0)
    discarded = attr.ib(default=0.0)
    no_click = attr.ib(default=0.0)

    @property
    def total(self):
        return self.heralded + self.discarded + self.no_click


@attr.s(frozen=True, eq=False)
class ProtocolReport:
    params = attr.ib()
    outcomes = attr.ib(converter=tuple)
    total_success_probability = attr.ib()
    per_target_yield = attr.ib()
    stage_probabilities = attr.ib()
    ledger = attr.ib()
    notes = attr.ib(converter=tuple)
    detected_states = attr.ib(factory=dict, repr=False)

    @property
    def variant(self):
        return self.params.variant

    def fidelity_range(self):
        fidelities = [o.fidelity for o in self.outcomes]
        if not fidelities:
            return float("nan"), float("nan")
        return min(fidelities), max(fidelities)


class _Tally:
    """Collects heralds and the probability ledger while a protocol runs."""

    def __init__(self, input_norm):
        self.input_norm = input_norm
        self.outcomes = []
        self.detected_states = {}
        self.heralded = 0.0
        self.discarded = 0.0
        self.no_click = 0.0

    def reject(self, state):
        for term, amplitude in state.terms.items():
            if term.photon_count:
                self.discarded += abs(amplitude) ** 2
            else:
                self.no_click += abs(amplitude) ** 2

    def detect(self, state, bank, semantics):
        self.detected_states[bank.name] = state
        for record in enumerate_outcomes(state, bank.detectors, semantics):
            target = None
            if not record.discarded:
                target = bank.target_for(record.pattern.fired)
            if target is None:
                if record.pattern.fired:
                    self.discarded += record.probability
                else:
                    self.no_click += record.probability
                continue

            self.heralded += record.probability
            self.outcomes.append(
                ProtocolOutcome(
                    bank=bank.name,
                    pattern=record.pattern,
                    probability=record.probability,
                    target=target,
                    fidelity=record.mean(
                        lambda atoms: fidelity(atoms, target, bank.atoms)
                    ),
                    record=record,
                )
            )

    def report(self, params, stage_probabilities, notes):
        ledger = Ledger(self.heralded, self.discarded, self.no_click)
        assert abs(ledger.total - self.input_norm) <= 1e-10, (
            f"Probability ledger sums to {ledger.total}, "
            f"expected {self.input_norm}"
        )

        per_target = defaultdict(float)
        for outcome in self.outcomes:
            per_target[outcome.target] += outcome.probability
        total = math.fsum(o.probability for o in self.outcomes)

        logger.info(
            "Ran Protocol",
            variant=params.variant.value,
            total_success_probability=total,
            heralds=len(self.outcomes),
        )
        return ProtocolReport(
            params=params,
            outcomes=self.outcomes,
            total_success_probability=total,
            per_target_yield=dict(per_target),
            stage_probabilities=stage_probabilities,
            ledger=ledger,
            notes=notes,
            detected_states=self.detected_states,
        )


def _ratio(numerator, denominator):
    if denominator <= settings.NORM_EPSILON:
        return float("nan")
    return numerator / denominator


def _weight(state, predicate):
    return math.fsum(abs(a) ** 2 for t, a in state.terms.items() if predicate(t))


def compare_formula(label, computed, formula, value):
    matched = abs(computed - value) <= FORMULA_TOLERANCE
    verdict = "matches" if matched else "differs from"
    return f"{label} = {computed:.8f} {verdict} {formula} = {value:.8f}"


def _emission(p, index, port):
    return EmissionConfig(p.coupling, index, port, p.keep_vacuum_term)


def _require(p, *variants):
    if p.variant not in variants:
        names = ", ".join(v.value for v in variants)
        raise ValueError(f"Variant {p.variant.value} is not one of {names}")


def run_ghz(p):
    _require(p, Variant.GHZ)
    state = emit_all(_emission(p, i, port) for i, port in enumerate("ABC", 1))
    tally = _Tally(state.norm_squared())
    pbs1, pbs2, *rotations = ghz_elements()

    state = lift_apply(state, pbs1)
    p2 = _ratio(
        _weight(state, lambda t: t.port_count("c") == 1 and t.port_count("d") == 1),
        _weight(state, lambda t: t.port_count("c") + t.port_count("d") == 2),
    )

    state = lift_apply(state, pbs2)
    p3 = _ratio(
        _weight(state, lambda t: all(t.port_count(x) == 1 for x in "abc")),
        _weight(
            state,
            lambda t: t.port_count("c") == 1
            and t.port_count("a") + t.port_count("b") == 2,
        ),
    )

    for rotation in rotations:
        state = lift_apply(state, rotation)
    tally.detect(state, ghz_bank(), p.semantics)

    p1 = p.coupling.p_emit
    stages = {"P1": p1, "P2": p2, "P3": p3}
    total = math.fsum(o.probability for o in tally.outcomes)
    notes = [compare_formula("P_GHZ", total, "P1³·P2·P3", p1 ** 3 * p2 * p3)]
    return tally.report(p, stages, notes)


def run_w_direct(p):
    _require(p, Variant.W_DIRECT)
    state = emit_all(
        (_emission(p, i, "OUT") for i in (1, 2, 3)),
        shared_port="OUT",
    )
    tally = _Tally(state.norm_squared())
    three = _weight(state, lambda t: t.photon_count == 3)

    for element in part2_elements("OUT", "", p.bs_transmittance):
        state = lift_apply(state, element)
    tally.detect(state, w_bank(), p.semantics)

    heralded = math.fsum(o.probability for o in tally.outcomes)
    p_prime = _ratio(heralded, three)
    stages = {"P1": p.coupling.p_emit, "P'": p_prime}
    notes = [compare_formula("P'", p_prime, *quoted_formulas(p.coupling)["P'"])]
    return tally.report(p, stages, notes)


def _run_arm(p, tally, branch, auxiliary, stages):
    """Merge a bunched pair with the third atom and run part 2 on each bank of
    the arm."""

    t = p.bs_transmittance
    index, port = ("3'", "C'") if auxiliary else (3, "C")
    state = tensor(branch, emit(_emission(p, index, port)))
    # without the vacuum term the third emitter has norm P1 < 1
    tally.input_norm += state.norm_squared() - branch.norm_squared()
    state = lift_apply(state, merging_splitter(t, auxiliary))
    three = _weight(state, lambda term: term.photon_count == 3)

    banks = AUX_ARM_BANKS if auxiliary else MAIN_ARM_BANKS
    banks = banks[: 2 if p.variant.has_f2 else 1]
    kept = set()
    for name, bank_port, suffix in banks:
        selected = state.filter(lambda term: term.port_count(bank_port) == 3)
        kept.update(selected.terms)
        selected_norm = selected.norm_squared()
        stages[f"P_s({name})"] = _ratio(selected_norm, three)

        for element in part2_elements(bank_port, suffix, t):
            selected = lift_apply(selected, element)
        before = tally.heralded
        tally.detect(selected, w_bank(name, suffix), p.semantics)
        stages[f"P'({name})"] = _ratio(tally.heralded - before, selected_norm)

    tally.reject(state.filter(lambda term: term not in kept))


def run_w_bunching(p):
    _require(
        p,
        Variant.W_BUNCHING,
        Variant.W_BUNCHING_WITH_F2,
        Variant.W_BUNCHING_WITH_F1_AUX,
    )
    t = p.bs_transmittance
    state = emit_all([_emission(p, 1, "A"), _emission(p, 2, "B")])
    # _run_arm() adds the third emitters to input_norm
    tally = _Tally(state.norm_squared())

    state = lift_apply(state, bunching_splitter(t))
    two = _weight(state, lambda term: term.photon_count == 2)
    in_t = state.filter(lambda term: term.port_count("t'") == 2)
    in_s = state.filter(lambda term: term.port_count("s'") == 2)

    stages = {"P1": p.coupling.p_emit, "P_t'": _ratio(in_t.norm_squared(), two)}
    _run_arm(p, tally, in_t, auxiliary=False, stages=stages)
    if p.variant.has_aux:
        stages["P_s'"] = _ratio(in_s.norm_squared(), two)
        _run_arm(p, tally, in_s, auxiliary=True, stages=stages)
        tally.reject(
            state.filter(
                lambda term: term.port_count("t'") != 2 and term.port_count("s'") != 2
            )
        )
    else:
        tally.reject(state.filter(lambda term: term.port_count("t'") != 2))

    notes = [WIRING_NOTE] + bunching_notes(p.coupling, stages)
    return tally.report(p, stages, notes)


def quoted_formulas(coupling):
    """The closed forms quoted for the W setups, keyed by the stage they
    describe.  The two P_s entries disagree with each other."""

    ab = coupling.lambda_l ** 2 * coupling.lambda_r ** 2
    omega4 = coupling.omega ** 4
    return {
        "P'": ("2λ_l²λ_r²/Ω⁴", 2 * ab / omega4),
        "P_t'": ("Ω⁴/(2Ω⁴+4λ_l²λ_r²)", omega4 / (2 * omega4 + 4 * ab)),
        "P_s": [
            ("Ω⁴/(2Ω⁴+8λ_l²λ_r²)", omega4 / (2 * omega4 + 8 * ab)),
            ("Ω⁴/(4Ω⁴+8λ_l²λ_r²)", omega4 / (4 * omega4 + 8 * ab)),
        ],
    }


def bunching_notes(coupling, stages):
    """Compare computed P_t', P_s and P' with the quoted closed forms."""

    formulas = quoted_formulas(coupling)
    notes = [compare_formula("P_t'", stages["P_t'"], *formulas["P_t'"])]
    notes.extend(
        compare_formula("P_s", stages["P_s(OUT)"], *f) for f in formulas["P_s"]
    )
    notes.append(compare_formula("P'", stages["P'(OUT)"], *formulas["P'"]))
    return notes


RUNNERS = {
    Variant.GHZ: run_ghz,
    Variant.W_DIRECT: run_w_direct,
    Variant.W_BUNCHING: run_w_bunching,
    Variant.W_BUNCHING_WITH_F2: run_w_bunching,
    Variant.W_BUNCHING_WITH_F1_AUX: run_w_bunching,
}


def run_protocol(p):
    return RUNNERS[p.variant](p)


@attr.s(frozen=True)
class SweepRow:
    value = attr.ib()
    total_probability = attr.ib()
    min_fidelity = attr.ib()
    max_fidelity = attr.ib()


def _sweep(parameter, values, points, workers):
    with ThreadPoolExecutor(max_workers=settings.worker_count(workers)) as executor:
        reports = list(executor.map(run_protocol, points))

    rows = []
    for value, report in zip(values, reports):
        low, high = report.fidelity_range()
        rows.append(SweepRow(value, report.total_success_probability, low, high))
    logger.info(
        "Ran Sweep",
        parameter=parameter,
        variant=points[0].variant.value if points else None,
        points=len(rows),
    )
    return rows


def sweep_coupling_ratio(variant, ratios, params=None, workers=None):
    """Run variant once per λ_l/λ_r ratio (λ_r = 1); rows keep input order."""

    ratios = [float(r) for r in ratios]
    bad = [r for r in ratios if not r > 0]
    if bad:
        raise ValueError(f"Coupling ratios must be > 0, got {bad}")
    params = params or ProtocolParams.ideal()
    points = [
        attr.evolve(params, variant=variant, coupling=params.coupling.scaled_to(r))
        for r in ratios
    ]
    return _sweep("ratio", ratios, points, workers)


def sweep_bs_imbalance(variant, transmittances, params=None, workers=None):
    """Run variant once per beam-splitter transmittance; rows keep input order."""

    transmittances = [float(t) for t in transmittances]
    bad = [t for t in transmittances if not 0 <= t <= 1]
    if bad:
        raise ValueError(f"Transmittances must lie in [0, 1], got {bad}")
    params = params or ProtocolParams.ideal()
    points = [
        attr.evolve(params, variant=variant, bs_transmittance=t)
        for t in transmittances
    ]
    return _sweep("bs_t", transmittances, points, workers)
