"""
Sparse algebra of hybrid atom-photon states.

A HybridState is a superposition of BasisTerms.  Each BasisTerm pairs an ordered
list of atomic levels (one per tracked atom) with a photonic Fock occupation
(a sorted tuple of (ModeId, count) pairs, zero counts never stored).

Fock kets use the standard normalisation |n> = (a†)^n |0> / sqrt(n!).  Every
multi-photon amplitude in the package is produced by repeated application of
creation operators, so the sqrt(n!) factors come out of the ladder action and
are never inserted by hand.
"""
import cmath
import enum
import math
from collections import defaultdict

import attr

from . import settings


class TruncationError(ValueError):
    pass


class ModeOverlapError(ValueError):
    pass


class AtomCountMismatchError(ValueError):
    pass


class ZeroNormError(ValueError):
    pass


class NonUniformOccupationError(ValueError):
    pass


class AtomLevel(str, enum.Enum):
    EXCITED = "e"
    GROUND_L = "l"
    GROUND_R = "r"


class Polarization(str, enum.Enum):
    L = "L"
    R = "R"
    H = "H"
    V = "V"
    F = "F"
    S = "S"


def _port(value):
    value = str(value)
    if not value or any(c in value for c in " |,:"):
        raise ValueError(f"Invalid port name {value!r}")
    return value


@attr.s(frozen=True, order=True, slots=True)
class ModeId:
    """A photonic mode: a spatial port and a polarization."""

    port = attr.ib(converter=_port)
    polarization = attr.ib(converter=Polarization)

    def __str__(self):
        return f"{self.port}{self.polarization.value}"

    @classmethod
    def parse(cls, text):
        """Build a ModeId from its string form, eg "a'V" -> ModeId("a'", "V")."""

        text = text.strip()
        return cls(text[:-1], text[-1])


def modes(ports, polarizations):
    """Return the ModeIds for every combination of ports and polarizations."""

    return [ModeId(port, pol) for port in ports for pol in polarizations]


def _canonical_occupation(occupation):
    if isinstance(occupation, dict):
        occupation = occupation.items()
    counts = defaultdict(int)
    for mode, n in occupation:
        if n < 0:
            raise ValueError(f"Negative photon count {n} for mode {mode}")
        counts[mode] += n
    return tuple(sorted((mode, n) for mode, n in counts.items() if n))


@attr.s(frozen=True, order=True, slots=True)
class BasisTerm:
    atoms = attr.ib(converter=lambda levels: tuple(AtomLevel(a) for a in levels))
    occupation = attr.ib(default=(), converter=_canonical_occupation)

    @property
    def photon_count(self):
        return sum(n for _, n in self.occupation)

    def count(self, mode):
        for m, n in self.occupation:
            if m == mode:
                return n
        return 0

    def port_count(self, port):
        """Photons in port, summed over polarizations."""

        return sum(n for m, n in self.occupation if m.port == port)

    def occupation_map(self):
        return dict(self.occupation)

    def levels(self):
        return "".join(level.value for level in self.atoms)


def _prune(terms):
    if isinstance(terms, dict):
        terms = terms.items()
    return {
        term: complex(amplitude)
        for term, amplitude in terms
        if abs(amplitude) >= settings.AMPLITUDE_EPSILON
    }


@attr.s(frozen=True, eq=False)
class HybridState:
    """An immutable sparse superposition of BasisTerms.

    States may be subnormalized: a post-selected branch keeps the squared norm
    it had in the parent state, so the probability of reaching it is its
    squared norm.
    """

    atom_count = attr.ib()
    terms = attr.ib(factory=dict, converter=_prune)

    def __attrs_post_init__(self):
        if self.atom_count < 0:
            raise ValueError(f"atom_count must be non-negative, got {self.atom_count}")
        for term in self.terms:
            if len(term.atoms) != self.atom_count:
                raise AtomCountMismatchError(
                    f"Term {term.levels()} has {len(term.atoms)} atoms, "
                    f"expected {self.atom_count}"
                )
            if term.photon_count > settings.MAX_PHOTONS:
                raise TruncationError(
                    f"Term with {term.photon_count} photons exceeds the truncation "
                    f"N_max={settings.MAX_PHOTONS}"
                )

    @classmethod
    def vacuum(cls, atom_count=0):
        """The photonic vacuum with no atoms.  Identity for tensor()."""

        if atom_count:
            raise ValueError("Use new_product_state() for states with atoms")
        return cls(0, {BasisTerm((), ()): 1})

    @classmethod
    def empty(cls, atom_count):
        """The zero vector.  Stands in for the conditional state of an impossible
        outcome."""

        return cls(atom_count, {})

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"<HybridState atoms={self.atom_count} terms={len(self.terms)}>"

    def items(self):
        """Yield (term, amplitude) pairs in canonical order."""

        for term in sorted(self.terms):
            yield term, self.terms[term]

    def amplitude(self, atoms, occupation=()):
        return self.terms.get(BasisTerm(atoms, occupation), 0j)

    def norm_squared(self):
        return math.fsum(abs(a) ** 2 for a in self.terms.values())

    @property
    def is_empty(self):
        return not self.terms

    @property
    def modes(self):
        """Set of modes holding at least one photon in some term."""

        return {mode for term in self.terms for mode, _ in term.occupation}

    def photon_numbers(self):
        return {term.photon_count for term in self.terms}

    def scaled(self, factor):
        return HybridState(
            self.atom_count, {t: a * factor for t, a in self.terms.items()}
        )

    def plus(self, other):
        if other.atom_count != self.atom_count:
            raise AtomCountMismatchError(
                f"Cannot add states of {self.atom_count} and {other.atom_count} atoms"
            )
        terms = defaultdict(complex, self.terms)
        for term, amplitude in other.terms.items():
            terms[term] += amplitude
        return HybridState(self.atom_count, terms)

    def filter(self, predicate):
        """Return the (unnormalized) projection onto terms satisfying predicate."""

        return HybridState(
            self.atom_count, {t: a for t, a in self.terms.items() if predicate(t)}
        )

    def isclose(self, other, tol=1e-12, up_to_phase=False):
        """Compare amplitudes term by term.  With up_to_phase, a global phase is
        divided out first."""

        if other.atom_count != self.atom_count:
            return False
        phase = 1
        if up_to_phase:
            overlap = inner_product(other, self)
            if abs(overlap) > settings.NORM_EPSILON:
                phase = overlap / abs(overlap)
        for term in set(self.terms) | set(other.terms):
            if abs(self.terms.get(term, 0) - phase * other.terms.get(term, 0)) > tol:
                return False
        return True

    def to_snapshot(self):
        """Serialise as one line per term, in canonical order:

            <levels> | <mode:count,...> | <re> <im>

        with amplitudes printed to 17 significant digits.
        """

        lines = []
        for term, amplitude in self.items():
            occupation = ",".join(f"{mode}:{n}" for mode, n in term.occupation)
            lines.append(
                f"{term.levels()} | {occupation} | "
                f"{amplitude.real:.17g} {amplitude.imag:.17g}"
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_snapshot(cls, text, atom_count=None):
        terms = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            levels, occupation, amplitude = (part.strip() for part in line.split("|"))
            pairs = []
            for item in filter(None, occupation.split(",")):
                mode, n = item.rsplit(":", 1)
                pairs.append((ModeId.parse(mode), int(n)))
            re, im = amplitude.split()
            term = BasisTerm(tuple(levels), pairs)
            terms[term] = complex(float(re), float(im))
            if atom_count is None:
                atom_count = len(term.atoms)
        if atom_count is None:
            raise ValueError("Cannot infer atom_count from an empty snapshot")
        return cls(atom_count, terms)


def _raise_mode(occupation, mode):
    """Apply a† for mode to a mutable occupation dict, returning the ladder
    factor sqrt(n+1)."""

    n = occupation.get(mode, 0)
    occupation[mode] = n + 1
    return math.sqrt(n + 1)


def new_product_state(atoms):
    """Return |atoms> ⊗ |vac> with amplitude 1."""

    atoms = tuple(AtomLevel(a) for a in atoms)
    if not atoms:
        raise ValueError("A product state needs at least one atom")
    return HybridState(len(atoms), {BasisTerm(atoms, ()): 1})


def tensor(s1, s2, shared_ports=False):
    """Return the tensor product of two states.

    Atom lists concatenate.  When the two states populate a common mode (only
    allowed with shared_ports), the photons of s2 are created on top of those of
    s1, so bosonic enhancement factors appear exactly as repeated creation
    operators produce them.
    """

    overlap = s1.modes & s2.modes
    if overlap and not shared_ports:
        names = ", ".join(str(m) for m in sorted(overlap))
        raise ModeOverlapError(f"States share modes {names}; pass shared_ports=True")

    terms = defaultdict(complex)
    for t1, a1 in s1.terms.items():
        for t2, a2 in s2.terms.items():
            occupation = t1.occupation_map()
            factor = 1.0
            for mode, n in t2.occupation:
                for _ in range(n):
                    factor *= _raise_mode(occupation, mode)
                # s2 carried |n> = (a†)^n|0>/sqrt(n!)
                factor /= math.sqrt(math.factorial(n))
            terms[BasisTerm(t1.atoms + t2.atoms, occupation)] += a1 * a2 * factor
    return HybridState(s1.atom_count + s2.atom_count, terms)


def apply_creation(s, mode):
    """Apply a† for mode to every term of s."""

    terms = defaultdict(complex)
    for term, amplitude in s.terms.items():
        if term.photon_count + 1 > settings.MAX_PHOTONS:
            raise TruncationError(
                f"Creating a photon in {mode} exceeds N_max={settings.MAX_PHOTONS}"
            )
        occupation = term.occupation_map()
        factor = _raise_mode(occupation, mode)
        terms[BasisTerm(term.atoms, occupation)] += amplitude * factor
    return HybridState(s.atom_count, terms)


def inner_product(s1, s2):
    """Return <s1|s2>, conjugate-linear in s1."""

    if s1.atom_count != s2.atom_count:
        raise AtomCountMismatchError(
            f"Cannot take the inner product of states of {s1.atom_count} and "
            f"{s2.atom_count} atoms"
        )
    if len(s2.terms) < len(s1.terms):
        return sum(
            (a2 * s1.terms.get(t, 0).conjugate() for t, a2 in s2.terms.items()), 0j
        )
    return sum((a1.conjugate() * s2.terms.get(t, 0) for t, a1 in s1.terms.items()), 0j)


def normalize(s):
    """Return (unit-norm state, original squared norm)."""

    norm_squared = s.norm_squared()
    if math.sqrt(norm_squared) <= settings.NORM_EPSILON:
        raise ZeroNormError("Cannot normalize an effectively-zero state")
    return s.scaled(1 / math.sqrt(norm_squared)), norm_squared


def reduced_atomic_state(s):
    """Strip the photonic factor from a state whose terms all share one
    occupation, keeping the atomic amplitudes as they are."""

    occupations = {term.occupation for term in s.terms}
    if len(occupations) > 1:
        raise NonUniformOccupationError(
            f"State has {len(occupations)} distinct photonic occupations; "
            "enumerate detection outcomes before reducing"
        )
    return HybridState(
        s.atom_count, {BasisTerm(t.atoms, ()): a for t, a in s.terms.items()}
    )


def global_phase(amplitude):
    """Return the unit-modulus phase of amplitude (1 for zero)."""

    if abs(amplitude) <= settings.NORM_EPSILON:
        return 1
    return cmath.exp(1j * cmath.phase(amplitude))
