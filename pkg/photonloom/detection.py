"""
Detector clicks, outcome enumeration and post-selection.

Two detector models are supported.  A number-resolving detector "fires" only on
exactly one photon; two or more photons in one detector route the whole term to
a discarded outcome.  A threshold detector fires on one photon or more and
cannot tell how many arrived.
"""
import enum
from collections import defaultdict

import attr
import structlog

from . import settings
from .fock import HybridState, ModeId, normalize, reduced_atomic_state

logger = structlog.get_logger()


class DetectorSemantics(str, enum.Enum):
    EXACTLY_ONE = "exact1"
    THRESHOLD = "threshold"

    def fires(self, count):
        if self is DetectorSemantics.EXACTLY_ONE:
            return count == 1
        return count >= 1

    def rejects(self, count):
        return self is DetectorSemantics.EXACTLY_ONE and count >= 2


def _modes(values):
    return frozenset(m if isinstance(m, ModeId) else ModeId.parse(m) for m in values)


@attr.s(frozen=True)
class ClickPattern:
    """The detectors that fired and the ones required to stay silent.

    Detector modes in neither set are unconstrained.
    """

    fired = attr.ib(converter=_modes)
    silent = attr.ib(default=frozenset(), converter=_modes)

    @fired.validator
    def _check_disjoint(self, attribute, value):
        overlap = value & self.silent
        if overlap:
            names = ", ".join(str(m) for m in sorted(overlap))
            raise ValueError(f"Modes both fired and silent: {names}")

    @classmethod
    def of(cls, fired, detectors):
        """Build the pattern over the detector set where exactly fired clicked."""

        fired = _modes(fired)
        return cls(fired, _modes(detectors) - fired)

    @property
    def ports(self):
        return {m.port for m in self.fired}

    def sort_key(self):
        return tuple(sorted(self.fired))

    def label(self):
        return " ".join(str(m) for m in sorted(self.fired)) or "-"

    def __str__(self):
        return self.label()


@attr.s(frozen=True)
class OutcomeComponent:
    """One full photonic occupation compatible with a pattern."""

    probability = attr.ib()
    atoms = attr.ib()
    occupation = attr.ib(default=())


@attr.s(frozen=True)
class OutcomeRecord:
    pattern = attr.ib()
    probability = attr.ib()
    components = attr.ib(converter=tuple, default=())
    discarded = attr.ib(default=False)

    @property
    def conditional_atoms(self):
        """Unit-norm atomic state heralded by the pattern, or None when several
        occupations map to it and the heralded state is a mixture."""

        if len(self.components) == 1:
            return self.components[0].atoms
        return None

    @property
    def is_mixed(self):
        return len(self.components) > 1

    def mean(self, fn):
        """Probability-weighted mean of fn(atoms) over the components."""

        total = sum(c.probability for c in self.components)
        if not total:
            return float("nan")
        return sum(c.probability * fn(c.atoms) for c in self.components) / total


def _counts(term, detectors):
    return {mode: n for mode, n in term.occupation if mode in detectors}


def enumerate_outcomes(s, detectors, sem=DetectorSemantics.EXACTLY_ONE):
    """Split s into one record per realised click pattern.

    Records come back in canonical order: kept patterns first, then discarded
    ones, each sorted by their fired modes.  Probabilities (including the
    discarded records) add up to the squared norm of s.
    """

    detectors = _modes(detectors)
    sem = DetectorSemantics(sem)

    by_occupation = defaultdict(dict)
    for term, amplitude in s.terms.items():
        by_occupation[term.occupation][term] = amplitude

    grouped = defaultdict(list)
    for occupation, terms in by_occupation.items():
        branch = HybridState(s.atom_count, terms)
        counts = {m: n for m, n in occupation if m in detectors}
        discarded = any(sem.rejects(n) for n in counts.values())
        fired = frozenset(m for m, n in counts.items() if n >= 1)
        grouped[(discarded, fired)].append((occupation, branch))

    if not s.terms:
        grouped[(False, frozenset())] = []

    records = []
    for (discarded, fired), branches in grouped.items():
        components = []
        for occupation, branch in sorted(branches, key=lambda b: b[0]):
            p = branch.norm_squared()
            if p ** 0.5 <= settings.NORM_EPSILON:
                continue
            atoms, _ = normalize(reduced_atomic_state(branch))
            components.append(OutcomeComponent(p, atoms, occupation))
        records.append(
            OutcomeRecord(
                pattern=ClickPattern.of(fired, detectors),
                probability=sum(c.probability for c in components),
                components=components,
                discarded=discarded,
            )
        )

    records.sort(key=lambda r: (r.discarded, r.pattern.sort_key()))
    logger.debug("Enumerated Outcomes", patterns=len(records), terms=len(s))
    return records


def _matches(term, pattern, sem):
    for mode in pattern.fired:
        if not sem.fires(term.count(mode)):
            return False
    for mode in pattern.silent:
        if term.count(mode):
            return False
    return True


def _conditional(branch, atom_count):
    probability = branch.norm_squared()
    if probability ** 0.5 <= settings.NORM_EPSILON:
        return 0.0, HybridState.empty(atom_count)
    atoms, _ = normalize(reduced_atomic_state(branch))
    return probability, atoms


def post_select(s, pattern, sem=DetectorSemantics.EXACTLY_ONE):
    """Return (probability, unit-norm conditional atomic state) for pattern.

    A pattern nothing in s can produce gives (0.0, empty state).  A pattern
    reached by several photonic occupations has no pure conditional state and
    raises NonUniformOccupationError.
    """

    sem = DetectorSemantics(sem)
    branch = s.filter(lambda term: _matches(term, pattern, sem))
    return _conditional(branch, s.atom_count)


def sequential_project(s, ordered_clicks, sem=DetectorSemantics.EXACTLY_ONE, silent=()):
    """Apply the clicks one detector at a time, renormalising between steps,
    then the optional silent detectors.

    The returned probability is the product of the step probabilities times
    the squared norm of s, which is what post_select() would report for the
    simultaneous pattern.
    """

    ordered_clicks = [
        m if isinstance(m, ModeId) else ModeId.parse(m) for m in ordered_clicks
    ]
    if len(set(ordered_clicks)) != len(ordered_clicks):
        raise ValueError("Clicks must name distinct detector modes")
    sem = DetectorSemantics(sem)

    steps = [ClickPattern([mode]) for mode in ordered_clicks]
    if silent:
        steps.append(ClickPattern([], silent))

    current = s
    probability = s.norm_squared()
    for step in steps:
        before = current.norm_squared()
        branch = current.filter(lambda term: _matches(term, step, sem))
        after = branch.norm_squared()
        if after ** 0.5 <= settings.NORM_EPSILON:
            return 0.0, HybridState.empty(s.atom_count)
        probability *= after / before
        current, _ = normalize(branch)

    _, atoms = _conditional(current, s.atom_count)
    return probability, atoms
