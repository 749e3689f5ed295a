import math

import numpy as np
from hypothesis import strategies as st

from photonloom.elements import ModeTransform
from photonloom.fock import BasisTerm, HybridState, ModeId

# a small pool of modes for randomized circuits
MODE_POOL = [ModeId(port, pol) for port in "pqrs" for pol in "HV"]


def random_unitary(n, seed):
    """Return a Haar-random n×n unitary, from the QR decomposition of a complex
    Gaussian matrix."""

    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def single_photon(mode, level="l"):
    """Return |level>|1_mode>."""

    return HybridState(1, {BasisTerm([level], [(mode, 1)]): 1})


def normalized(terms, atom_count=1):
    norm = math.sqrt(sum(abs(a) ** 2 for a in terms.values()))
    return HybridState(atom_count, {t: a / norm for t, a in terms.items()})


@st.composite
def couplings(draw):
    """(λ_l, λ_r) pairs over two decades."""

    lambda_l = draw(st.floats(0.1, 10, allow_nan=False, allow_infinity=False))
    lambda_r = draw(st.floats(0.1, 10, allow_nan=False, allow_infinity=False))
    return lambda_l, lambda_r


@st.composite
def in_place_transforms(draw, max_modes=4):
    """A random unitary acting on a random subset of MODE_POOL, in place."""

    modes = draw(
        st.lists(
            st.sampled_from(MODE_POOL), min_size=1, max_size=max_modes, unique=True
        )
    )
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return ModeTransform(modes, modes, random_unitary(len(modes), seed))


@st.composite
def routing_transforms(draw, max_modes=3):
    """A random isometry from some modes of MODE_POOL onto others, disjoint
    from the inputs."""

    pool = draw(st.permutations(MODE_POOL))
    n_in = draw(st.integers(1, max_modes))
    n_out = draw(st.integers(n_in, max_modes + 1))
    inputs, outputs = pool[:n_in], pool[n_in : n_in + n_out]
    seed = draw(st.integers(0, 2 ** 32 - 1))
    matrix = random_unitary(n_out, seed)[:, :n_in]
    return ModeTransform(inputs, outputs, matrix)


@st.composite
def small_states(draw, modes=MODE_POOL, atom_count=1, max_photons=3, max_terms=6):
    """A random unit-norm state over modes with at most max_photons photons."""

    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        atoms = draw(
            st.lists(st.sampled_from("elr"), min_size=atom_count, max_size=atom_count)
        )
        photons = draw(st.lists(st.sampled_from(modes), max_size=max_photons))
        occupation = {}
        for mode in photons:
            occupation[mode] = occupation.get(mode, 0) + 1
        re = draw(st.floats(-1, 1, allow_nan=False))
        im = draw(st.floats(-1, 1, allow_nan=False))
        terms[BasisTerm(atoms, occupation)] = complex(re, im)
    if sum(abs(a) ** 2 for a in terms.values()) < 1e-6:
        terms = {next(iter(terms)): 1}
    return normalized(terms, atom_count)
