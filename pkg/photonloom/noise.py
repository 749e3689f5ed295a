"""
Monte Carlo estimates of herald yield and fidelity under imperfections.

Each trial draws, per atom: whether it was prepared in |e>, whether it emitted,
and whether its photon survived collection, detection and the coincidence
window.  The surviving photons are pushed through the single-network form of
the setup, one full photonic occupation is sampled, and Poisson dark counts
are added on every bank detector before the click rule is applied.

Trials are independent: trial i draws from SeedSequence(seed, spawn_key=(i,)),
so an estimate does not depend on how the trials are split across workers.
"""
import functools
import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
import structlog

from . import settings
from .detection import ClickPattern, DetectorSemantics
from .elements import lift_apply
from .emission import EmissionConfig, combine, emit, idle
from .fock import AtomLevel
from .protocols import build_setup
from .targets import fidelity, target_state

logger = structlog.get_logger()

# per-atom source outcome when the photon survives
PHOTON = "photon"

BATCH_SIZE = 2000


def _probability(instance, attribute, value):
    if not 0 <= value <= 1:
        raise ValueError(f"{attribute.name} must lie in [0, 1], got {value}")


def _non_negative(instance, attribute, value):
    if not value >= 0 or math.isinf(value):
        raise ValueError(f"{attribute.name} must be >= 0, got {value}")


def _seed(instance, attribute, value):
    if not 0 <= value < 2 ** 64:
        raise ValueError(f"{attribute.name} must be a 64-bit unsigned integer")


@attr.s(frozen=True)
class NoiseParams:
    p_excitation = attr.ib(default=1.0, converter=float, validator=_probability)
    p_collect = attr.ib(default=1.0, converter=float, validator=_probability)
    p_detect = attr.ib(default=1.0, converter=float, validator=_probability)
    dark_rate = attr.ib(default=0.0, converter=float, validator=_non_negative)
    p_window = attr.ib(default=1.0, converter=float, validator=_probability)
    seed = attr.ib(default=0, converter=int, validator=_seed)

    @property
    def p_survive(self):
        return self.p_collect * self.p_detect * self.p_window


@attr.s(frozen=True)
class TrialRecord:
    trial = attr.ib()
    heralded = attr.ib()
    pattern = attr.ib(default=None)
    fidelity = attr.ib(default=None)
    false_herald = attr.ib(default=False)
    bank = attr.ib(default=None)
    target = attr.ib(default=None)


@attr.s(frozen=True)
class Estimate:
    trials = attr.ib()
    heralds = attr.ib()
    yield_ = attr.ib()
    mean_fidelity = attr.ib()
    fidelity_ci95 = attr.ib()
    false_herald_rate = attr.ib()
    records = attr.ib(default=(), repr=False, converter=tuple)

    def __iter__(self):
        yield self.yield_
        yield self.mean_fidelity
        yield self.fidelity_ci95
        yield self.false_herald_rate


def _rng(seed, trial_index):
    sequence = np.random.SeedSequence(seed, spawn_key=(trial_index,))
    return np.random.default_rng(sequence)


def _draw_sources(p, n, rng, count):
    """Return one source outcome per atom: PHOTON or the level the atom is left
    in without a photon."""

    w_l, _ = p.coupling.weights()
    g_l, g_r = AtomLevel.GROUND_L, AtomLevel.GROUND_R
    outcomes = []
    for _ in range(count):
        if rng.random() >= n.p_excitation:
            outcome = g_l if rng.random() < 0.5 else g_r
        elif rng.random() >= p.coupling.p_emit:
            outcome = AtomLevel.EXCITED
        elif rng.random() >= n.p_survive:
            # the lost photon still carried the atom's which-level information
            outcome = g_l if rng.random() < w_l ** 2 else g_r
        else:
            outcome = PHOTON
        outcomes.append(outcome)
    return tuple(outcomes)


@attr.s(frozen=True, eq=False)
class _Network:
    state = attr.ib()
    occupations = attr.ib()
    cumulative = attr.ib()


@functools.lru_cache(maxsize=None)
def _setup(p):
    return build_setup(p)


@functools.lru_cache(maxsize=None)
def _network(p, sources):
    """Final state of the setup for one tuple of source outcomes, with the
    distribution of its photonic occupations."""

    setup = _setup(p)
    states = []
    for (index, port), outcome in zip(setup.sources, sources):
        if outcome == PHOTON:
            cfg = EmissionConfig(
                attr.evolve(p.coupling, theta=math.pi / 2),
                index,
                setup.shared_port or port,
            )
            states.append(emit(cfg))
        else:
            states.append(idle(outcome))

    state = combine(states, shared_ports=setup.shared_port is not None)
    for element in setup.elements:
        state = lift_apply(state, element)

    weights = {}
    for term, amplitude in state.terms.items():
        key = term.occupation
        weights[key] = weights.get(key, 0.0) + abs(amplitude) ** 2
    occupations = sorted(weights)
    cumulative = np.cumsum([weights[o] for o in occupations])
    cumulative /= cumulative[-1]
    return _Network(state, occupations, cumulative)


def _clicks(counts, detectors, semantics):
    """Return the fired detectors, or None when a number-resolving detector saw
    two or more photons."""

    if any(semantics.rejects(counts.get(d, 0)) for d in detectors):
        return None
    return frozenset(d for d in detectors if semantics.fires(counts.get(d, 0)))


def sample_trial(p, n, trial_index):
    """Run one noisy trial of p.variant."""

    rng = _rng(n.seed, trial_index)
    setup = _setup(p)
    sources = _draw_sources(p, n, rng, len(setup.sources))
    network = _network(p, sources)

    index = np.searchsorted(network.cumulative, rng.random(), side="right")
    occupation = network.occupations[min(int(index), len(network.occupations) - 1)]
    true_counts = dict(occupation)
    counts = dict(true_counts)
    if n.dark_rate:
        for detector in setup.detectors:
            dark = int(rng.poisson(n.dark_rate))
            if dark:
                counts[detector] = min(
                    counts.get(detector, 0) + dark, settings.MAX_PHOTONS
                )

    semantics = DetectorSemantics(p.semantics)
    for bank in setup.banks:
        fired = _clicks(counts, bank.detectors, semantics)
        target = None if fired is None else bank.target_for(fired)
        if target is None:
            continue

        genuine = _clicks(true_counts, bank.detectors, semantics) == fired
        conditional = network.state.filter(lambda term: term.occupation == occupation)
        return TrialRecord(
            trial=trial_index,
            heralded=True,
            pattern=ClickPattern.of(fired, bank.detectors),
            fidelity=fidelity(conditional, target_state(target), bank.atoms),
            false_herald=not genuine,
            bank=bank.name,
            target=target,
        )

    return TrialRecord(trial=trial_index, heralded=False)


def _run_batch(p, n, indices):
    return [sample_trial(p, n, i) for i in indices]


def estimate(p, n, trials, workers=None, keep_records=False):
    """Estimate (yield, mean fidelity, 95% half-width, false-herald rate).

    The yield counts every herald.  Fidelity statistics cover genuine heralds
    only; the false-herald rate is per trial.

    Trials run in batches of BATCH_SIZE on a thread pool of workers threads.
    The batches are pure Python, so the GIL runs them one at a time and extra
    workers do not shorten a run.  Each trial seeds its own generator from
    (seed, trial), so the records are the same for any worker count.
    """

    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    batches = [
        range(start, min(start + BATCH_SIZE, trials))
        for start in range(0, trials, BATCH_SIZE)
    ]
    with ThreadPoolExecutor(max_workers=settings.worker_count(workers)) as executor:
        results = executor.map(lambda batch: _run_batch(p, n, batch), batches)
        records = [record for batch in results for record in batch]

    heralds = [r for r in records if r.heralded]
    genuine = np.array([r.fidelity for r in heralds if not r.false_herald])
    false_heralds = sum(1 for r in heralds if r.false_herald)

    if len(genuine):
        mean_fidelity = float(genuine.mean())
    else:
        mean_fidelity = float("nan")
    if len(genuine) > 1:
        ci95 = float(1.96 * genuine.std(ddof=1) / math.sqrt(len(genuine)))
    else:
        ci95 = 0.0

    result = Estimate(
        trials=trials,
        heralds=len(heralds),
        yield_=len(heralds) / trials,
        mean_fidelity=mean_fidelity,
        fidelity_ci95=ci95,
        false_herald_rate=false_heralds / trials,
        records=records if keep_records else (),
    )
    logger.info(
        "Estimated Yield",
        variant=p.variant.value,
        trials=trials,
        yield_=result.yield_,
        mean_fidelity=result.mean_fidelity,
        false_herald_rate=result.false_herald_rate,
    )
    return result
