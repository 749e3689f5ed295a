"""
Linear-optical elements as transforms on creation operators.

A ModeTransform rewrites every input creation operator as a linear combination
of output creation operators:

    a†_in -> Σ_out matrix[out, in] · a†_out

lift_apply() carries that rewrite into Fock space, term by term.  Modes a
transform does not consume are left alone.
"""
import enum
import math
from collections import defaultdict

import attr
import numpy as np

from . import settings
from .fock import BasisTerm, HybridState, ModeId, TruncationError


class NonIsometricTransformError(ValueError):
    pass


class DuplicatePortError(ValueError):
    pass


class TransmittanceError(ValueError):
    pass


class PhaseConvention(str, enum.Enum):
    """Sign of the reflected amplitude of a beam splitter.

    SYMMETRIC_I and PART2_BS1 both reflect with +i; PART2_BS2 reflects with -i,
    so a photon entering BS2 leaves as (|c> - i|d>)/√2.
    """

    SYMMETRIC_I = "symmetric_i"
    PART2_BS1 = "part2_bs1"
    PART2_BS2 = "part2_bs2"

    @property
    def reflection_sign(self):
        return -1 if self is PhaseConvention.PART2_BS2 else 1


def _distinct(kind, items):
    items = list(items)
    duplicates = sorted({str(i) for i in items if items.count(i) > 1})
    if duplicates:
        raise DuplicatePortError(f"Duplicate {kind}: {', '.join(duplicates)}")


def _as_matrix(value):
    return np.array(value, dtype=complex)


@attr.s(frozen=True, eq=False)
class ModeTransform:
    """An outputs × inputs matrix acting on creation operators.

    Lossless transforms must be isometries (matrix† · matrix = 1).  Pass
    lossy=True to build anything else.
    """

    inputs = attr.ib(converter=tuple)
    outputs = attr.ib(converter=tuple)
    matrix = attr.ib(converter=_as_matrix)
    name = attr.ib(default="", kw_only=True)
    lossy = attr.ib(default=False, kw_only=True)

    def __attrs_post_init__(self):
        _distinct("input modes", self.inputs)
        _distinct("output modes", self.outputs)
        shape = (len(self.outputs), len(self.inputs))
        if self.matrix.shape != shape:
            raise ValueError(
                f"Transform matrix has shape {self.matrix.shape}, expected {shape}"
            )
        if not self.lossy and not self.is_isometry():
            raise NonIsometricTransformError(
                f"Transform {self.name or '<unnamed>'} is not an isometry; "
                "pass lossy=True to apply it anyway"
            )

    def __repr__(self):
        return f"<ModeTransform {self.name or '<unnamed>'} {len(self.inputs)} inputs>"

    def is_isometry(self, tol=settings.ISOMETRY_TOLERANCE):
        gram = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(gram - np.eye(len(self.inputs))), initial=0) <= tol)

    @property
    def modes(self):
        return set(self.inputs) | set(self.outputs)

    def column(self, mode):
        """Return [(output mode, coefficient)] for the non-zero entries of the
        column belonging to input mode."""

        i = self.inputs.index(mode)
        return [
            (out, self.matrix[j, i])
            for j, out in enumerate(self.outputs)
            if abs(self.matrix[j, i]) >= settings.AMPLITUDE_EPSILON
        ]

    @classmethod
    def compose(cls, *transforms, name=""):
        """Stack transforms acting on disjoint inputs into one transform."""

        inputs = [m for t in transforms for m in t.inputs]
        outputs = [m for t in transforms for m in t.outputs]
        matrix = np.zeros((len(outputs), len(inputs)), dtype=complex)
        row = col = 0
        for t in transforms:
            rows, cols = t.matrix.shape
            matrix[row : row + rows, col : col + cols] = t.matrix
            row += rows
            col += cols
        return cls(
            inputs,
            outputs,
            matrix,
            name=name or "+".join(t.name for t in transforms),
            lossy=any(t.lossy for t in transforms),
        )


def lift_apply(s, t):
    """Apply t to every photon of s that sits in one of t's input modes.

    Each term is rebuilt from its untouched photons by applying the rewritten
    creation operators one photon at a time, so the √n! factors come out of
    the ladder action.
    """

    columns = {mode: t.column(mode) for mode in t.inputs}
    terms = defaultdict(complex)
    for term, amplitude in s.terms.items():
        consumed = [(m, n) for m, n in term.occupation if m in columns]
        if not consumed:
            terms[term] += amplitude
            continue

        passthrough = tuple((m, n) for m, n in term.occupation if m not in columns)
        norm = math.prod(math.factorial(n) for _, n in consumed)
        partial = {passthrough: amplitude / math.sqrt(norm)}
        for mode, n in consumed:
            for _ in range(n):
                partial = _create_each(partial, columns[mode])

        for occupation, value in partial.items():
            terms[BasisTerm(term.atoms, occupation)] += value

    return HybridState(s.atom_count, terms)


def _create_each(partial, column):
    out = defaultdict(complex)
    for occupation, value in partial.items():
        if sum(n for _, n in occupation) + 1 > settings.MAX_PHOTONS:
            raise TruncationError(
                f"Transform output exceeds the truncation N_max={settings.MAX_PHOTONS}"
            )
        counts = dict(occupation)
        for mode, coefficient in column:
            n = counts.get(mode, 0)
            raised = dict(counts)
            raised[mode] = n + 1
            key = tuple(sorted(raised.items()))
            out[key] += value * coefficient * math.sqrt(n + 1)
    return out


def pbs(in1, in2, out_t, out_r):
    """Polarizing beam splitter: transmits H and reflects V.

    H on in1 and V on in2 leave through out_t; V on in1 and H on in2 leave
    through out_r.
    """

    _distinct("ports", [in1, in2, out_t, out_r])
    routes = [
        (ModeId(in1, "H"), ModeId(out_t, "H")),
        (ModeId(in1, "V"), ModeId(out_r, "V")),
        (ModeId(in2, "V"), ModeId(out_t, "V")),
        (ModeId(in2, "H"), ModeId(out_r, "H")),
    ]
    return ModeTransform(
        [i for i, _ in routes],
        [o for _, o in routes],
        np.eye(4),
        name=f"PBS({in1},{in2}->{out_t},{out_r})",
    )


def fs_pbs(port, out_f=None, out_s=None):
    """PBS rotated into the F/S basis.

    V -> (F + S)/√2 and H -> (F - S)/√2.  With out_f and out_s omitted the
    rotation happens in place, so detectors sit on (port, F) and (port, S).
    """

    out_f = port if out_f is None else out_f
    out_s = port if out_s is None else out_s
    if not (out_f == out_s == port):
        _distinct("ports", [port, out_f, out_s])

    r = 1 / math.sqrt(2)
    return ModeTransform(
        [ModeId(port, "V"), ModeId(port, "H")],
        [ModeId(out_f, "F"), ModeId(out_s, "S")],
        [[r, r], [r, -r]],
        name=f"FS-PBS({port})",
    )


def bs(
    in1,
    in2,
    out1,
    out2,
    transmittance=0.5,
    phase_convention=PhaseConvention.SYMMETRIC_I,
    polarizations=("H", "V"),
):
    """Polarization-independent beam splitter.

    Per polarization the matrix is [[√T, ±i√R], [±i√R, √T]] with rows
    (out1, out2) and columns (in1, in2), the sign set by phase_convention.
    """

    if not 0 <= transmittance <= 1:
        raise TransmittanceError(
            f"Transmittance must lie in [0, 1], got {transmittance}"
        )
    _distinct("input ports", [in1, in2])
    _distinct("output ports", [out1, out2])

    phase_convention = PhaseConvention(phase_convention)
    t = math.sqrt(transmittance)
    r = phase_convention.reflection_sign * 1j * math.sqrt(1 - transmittance)
    block = [[t, r], [r, t]]

    return ModeTransform.compose(
        *(
            ModeTransform(
                [ModeId(in1, pol), ModeId(in2, pol)],
                [ModeId(out1, pol), ModeId(out2, pol)],
                block,
            )
            for pol in polarizations
        ),
        name=f"BS({in1},{in2}->{out1},{out2};T={transmittance:g})",
    )


def qwp(port):
    """Quarter-wave plate behind a cavity: L -> V and R -> H on the same port."""

    return ModeTransform(
        [ModeId(port, "L"), ModeId(port, "R")],
        [ModeId(port, "V"), ModeId(port, "H")],
        np.eye(2),
        name=f"QWP({port})",
    )
