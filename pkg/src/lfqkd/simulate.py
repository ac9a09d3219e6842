"""Seeded Monte Carlo of the two-detector squashing-model measurement.

Each trial is one pulse: Alice draws a uniform bit and basis, Bob an
independent uniform basis, and the channel (or the adversary) decides which
of Bob's two threshold detectors fire. The squashing view reduces every
pulse to a classical outcome flag — no click, single click with a bit, or
double click — so no density-matrix machinery is needed for these scenarios.

Pre-processing follows the loophole-free rule: single clicks keep their bit,
while no-clicks and double clicks receive a uniformly random bit. Records
mark the randomly assigned bits so the key can be restricted to the
single-click string while the random assignments still enter the overall
QBER. Tallies are taken over basis-matched (sifted) pulses; Q_s and E_s
estimate the analytic channel model of the matching source.

Determinism: a batch is a pure function of (model, adversary, n_pulses,
seed, dark_count). Pulses are generated in fixed-size shards of
``SHARD_SIZE``; shard i uses a dedicated generator seeded from child i of
``numpy.random.SeedSequence(seed)``. Shards are independent, and tallies
merge by addition, so the result does not depend on how shard execution is
scheduled.

Two adversaries are modeled. The extreme time-shift attack makes one
uniformly chosen detector fully active and the other inactive (Bob-side
transmittance 1 for the active one, 0 for the other; the channel is treated
as lossless so the 50% loss is Eve's). The strong-pulse attack measures
Alice's state in a uniform basis and resends ``n_photons`` copies of the
result without loss: a matching Bob basis reproduces Eve's bit, a
conjugate basis double-clicks except with probability 2**(1 - n_photons).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

import numpy as np

from .rates import (
    CoherentDecoy,
    CoherentDecoyMemory,
    DetectionStats,
    SinglePhoton,
    SourceModel,
    coherent_memory_stats,
    coherent_stats,
    key_rate,
    key_rate_coherent,
    key_rate_single_click,
    single_photon_stats,
)

#: Pulses per RNG shard. Part of the seed-derivation rule: changing it
#: changes which generator produces which pulse, hence the batch contents.
SHARD_SIZE = 1 << 18

DEFAULT_STRONG_PULSE_PHOTONS = 20


class Basis(IntEnum):
    Z = 0
    X = 1


class ClickKind(IntEnum):
    NO_CLICK = 0
    SINGLE = 1
    DOUBLE = 2


@dataclass(frozen=True)
class ClickOutcome:
    """Detector outcome of one pulse; ``bit`` is set only for single clicks."""

    kind: ClickKind
    bit: int | None = None

    def __post_init__(self) -> None:
        if self.kind == ClickKind.SINGLE:
            if self.bit not in (0, 1):
                raise ValueError(f"a single click needs bit 0 or 1, got {self.bit}")
        elif self.bit is not None:
            raise ValueError(f"{self.kind.name} carries no bit, got {self.bit}")


NO_CLICK = ClickOutcome(ClickKind.NO_CLICK)
DOUBLE_CLICK = ClickOutcome(ClickKind.DOUBLE)


def single_click(bit: int) -> ClickOutcome:
    return ClickOutcome(ClickKind.SINGLE, bit)


@dataclass(frozen=True)
class ExtremeTimeShift:
    """One uniformly chosen detector active per pulse, the other dead."""

    tag = "time_shift"


@dataclass(frozen=True)
class StrongPulse:
    """Intercept-resend with an ``n_photons``-copy replacement pulse."""

    n_photons: int = DEFAULT_STRONG_PULSE_PHOTONS

    tag = "strong_pulse"

    def __post_init__(self) -> None:
        if self.n_photons < 1:
            raise ValueError(f"n_photons must be >= 1, got {self.n_photons}")


AdversaryStrategy = Union[None, ExtremeTimeShift, StrongPulse]


@dataclass(frozen=True)
class TrialRecord:
    """One pulse after pre-processing.

    ``from_random_assignment`` is true exactly when the outcome was a
    no-click or double click, so the assigned bit was drawn uniformly
    instead of coming from a detector.
    """

    alice_bit: int
    alice_basis: Basis
    bob_basis: Basis
    outcome: ClickOutcome
    assigned_bit: int
    from_random_assignment: bool


@dataclass(frozen=True)
class TrialBatch:
    """Sifted tallies of a simulation run.

    ``n_pulses`` counts basis-matched pulses (the sifted population over
    which Q_s and E_s are defined); ``n_generated`` is the number of pulses
    drawn before sifting. Error counts compare the assigned bit against
    Alice's bit within the sifted population, split by click class so both
    the loophole-free and the traditional post-processing can be evaluated
    from one batch.
    """

    n_pulses: int
    n_single: int
    n_single_errors: int
    n_double: int
    n_none: int
    seed: int
    scenario_tag: str
    model_tag: str
    n_generated: int
    n_double_errors: int
    n_none_errors: int

    @property
    def is_degenerate(self) -> bool:
        """True when the batch has no single clicks at all."""
        return self.n_single == 0

    def summary(self) -> dict:
        """Summary dict in the pinned schema, including the empirical rate."""
        stats = empirical_stats(self)
        return {
            "scenario": self.scenario_tag,
            "model": self.model_tag,
            "n_pulses": self.n_pulses,
            "seed": self.seed,
            "n_single": self.n_single,
            "n_double": self.n_double,
            "n_none": self.n_none,
            "n_single_errors": self.n_single_errors,
            "q_s": stats.q_s,
            "e_s": stats.e_s,
            "rate": key_rate_single_click(stats).rate,
        }


def _scenario_tag(adversary: AdversaryStrategy) -> str:
    if adversary is None:
        return "honest"
    return adversary.tag


def _shards(seed: int, n_pulses: int):
    n_shards = -(-n_pulses // SHARD_SIZE)
    children = np.random.SeedSequence(seed).spawn(n_shards)
    for i, child in enumerate(children):
        shard_n = min(SHARD_SIZE, n_pulses - i * SHARD_SIZE)
        yield np.random.default_rng(child), shard_n


def _honest_hits(model, alice_bits, matched, n, rng, dark_count):
    """Detector hit masks (hit0, hit1) for the honest channel of ``model``."""
    if isinstance(model, CoherentDecoy):
        # Poisson thinning: photons surviving loss are Poisson(eta*mu).
        detected = rng.poisson(model.eta * model.mu, size=n)
        u = rng.random(n)
        mm_bits = rng.integers(0, 2, size=n, dtype=np.int8)
        has = detected > 0
        # Matched bases: every survivor routes to the correct detector with
        # probability 1-e_d, independently; a single click needs them all on
        # one side. Mismatched bases: every survivor routes uniformly.
        p_all_correct = np.power(1.0 - model.e_d, detected)
        p_all_wrong = np.power(model.e_d, detected)
        m_single_correct = u < p_all_correct
        m_single_wrong = ~m_single_correct & (u < p_all_correct + p_all_wrong)
        m_single = m_single_correct | m_single_wrong
        m_bits = np.where(m_single_wrong, alice_bits ^ 1, alice_bits)
        with np.errstate(over="ignore"):
            p_one_side = np.power(2.0, 1.0 - detected.astype(np.float64))
        mm_single = u < p_one_side
        single = has & np.where(matched, m_single, mm_single)
        double = has & ~np.where(matched, m_single, mm_single)
        bits = np.where(matched, m_bits, mm_bits).astype(np.int8)
        hit0 = (single & (bits == 0)) | double
        hit1 = (single & (bits == 1)) | double
    else:
        if isinstance(model, SinglePhoton):
            clicked = rng.random(n) < model.eta
        else:  # CoherentDecoyMemory: trials are conditioned on the trigger.
            clicked = rng.random(n) < model.eta_m
        flips = rng.random(n) < model.e_d
        mm_bits = rng.integers(0, 2, size=n, dtype=np.int8)
        dest = np.where(matched, alice_bits ^ flips.astype(np.int8), mm_bits)
        hit0 = clicked & (dest == 0)
        hit1 = clicked & (dest == 1)
    if dark_count > 0.0:
        hit0 = hit0 | (rng.random(n) < dark_count)
        hit1 = hit1 | (rng.random(n) < dark_count)
    return hit0, hit1


def _time_shift_hits(model, alice_bits, matched, n, rng):
    # Channel transmittance forced to 1: all loss in the batch is Eve's.
    flips = rng.random(n) < model.e_d
    mm_bits = rng.integers(0, 2, size=n, dtype=np.int8)
    dest = np.where(matched, alice_bits ^ flips.astype(np.int8), mm_bits)
    active = rng.integers(0, 2, size=n, dtype=np.int8)
    clicked = dest == active
    return clicked & (dest == 0), clicked & (dest == 1)


def _strong_pulse_hits(adversary, alice_bits, alice_bases, bob_bases, n, rng):
    eve_bases = rng.integers(0, 2, size=n, dtype=np.int8)
    eve_rand = rng.integers(0, 2, size=n, dtype=np.int8)
    eve_bits = np.where(eve_bases == alice_bases, alice_bits, eve_rand).astype(np.int8)
    same_basis = bob_bases == eve_bases
    u = rng.random(n)
    conj_bits = rng.integers(0, 2, size=n, dtype=np.int8)
    one_side = u < 2.0 ** (1 - adversary.n_photons)
    single = same_basis | one_side
    bits = np.where(same_basis, eve_bits, conj_bits).astype(np.int8)
    double = ~single
    hit0 = (single & (bits == 0)) | double
    hit1 = (single & (bits == 1)) | double
    return hit0, hit1


def _simulate_shard(model, adversary, n, rng, dark_count):
    """Per-pulse arrays for one shard; the RNG draw order is fixed."""
    alice_bits = rng.integers(0, 2, size=n, dtype=np.int8)
    alice_bases = rng.integers(0, 2, size=n, dtype=np.int8)
    bob_bases = rng.integers(0, 2, size=n, dtype=np.int8)
    matched = alice_bases == bob_bases

    if adversary is None:
        hit0, hit1 = _honest_hits(model, alice_bits, matched, n, rng, dark_count)
    elif isinstance(adversary, ExtremeTimeShift):
        hit0, hit1 = _time_shift_hits(model, alice_bits, matched, n, rng)
    elif isinstance(adversary, StrongPulse):
        hit0, hit1 = _strong_pulse_hits(
            adversary, alice_bits, alice_bases, bob_bases, n, rng
        )
    else:
        raise TypeError(f"unknown adversary strategy: {adversary!r}")

    assign_bits = rng.integers(0, 2, size=n, dtype=np.int8)
    single = hit0 ^ hit1
    double = hit0 & hit1
    assigned = np.where(single, hit1.astype(np.int8), assign_bits)
    return {
        "alice_bits": alice_bits,
        "alice_bases": alice_bases,
        "bob_bases": bob_bases,
        "matched": matched,
        "single": single,
        "double": double,
        "none": ~(hit0 | hit1),
        "assigned": assigned,
    }


def run_trials(
    model: SourceModel,
    adversary: AdversaryStrategy = None,
    n_pulses: int = 1_000_000,
    seed: int = 0,
    dark_count: float = 0.0,
) -> TrialBatch:
    """Simulate ``n_pulses`` pulses and return the sifted tallies.

    ``n_pulses`` counts generated pulses; the returned batch's ``n_pulses``
    is the basis-matched subset those tallies cover. Identical arguments
    produce a bit-identical batch. ``dark_count`` adds independent spurious
    clicks per detector and is a modeling hook only — it is rejected by the
    closed-form comparisons, not here.
    """
    if n_pulses <= 0:
        raise ValueError(f"n_pulses must be positive, got {n_pulses}")
    if not 0.0 <= dark_count <= 1.0:
        raise ValueError(f"dark_count must be in [0, 1], got {dark_count}")
    if not isinstance(model, (SinglePhoton, CoherentDecoy, CoherentDecoyMemory)):
        raise TypeError(f"unknown source model: {model!r}")

    n_sifted = n_single = n_single_err = 0
    n_double = n_double_err = n_none = n_none_err = 0
    for rng, shard_n in _shards(seed, n_pulses):
        a = _simulate_shard(model, adversary, shard_n, rng, dark_count)
        m = a["matched"]
        err = a["assigned"] != a["alice_bits"]
        n_sifted += int(m.sum())
        n_single += int((a["single"] & m).sum())
        n_single_err += int((a["single"] & m & err).sum())
        n_double += int((a["double"] & m).sum())
        n_double_err += int((a["double"] & m & err).sum())
        n_none += int((a["none"] & m).sum())
        n_none_err += int((a["none"] & m & err).sum())

    return TrialBatch(
        n_pulses=n_sifted,
        n_single=n_single,
        n_single_errors=n_single_err,
        n_double=n_double,
        n_none=n_none,
        seed=seed,
        scenario_tag=_scenario_tag(adversary),
        model_tag=model.tag,
        n_generated=n_pulses,
        n_double_errors=n_double_err,
        n_none_errors=n_none_err,
    )


def trial_records(
    model: SourceModel,
    adversary: AdversaryStrategy = None,
    n_pulses: int = 1000,
    seed: int = 0,
    dark_count: float = 0.0,
) -> list[TrialRecord]:
    """Per-pulse records of the same pulse stream ``run_trials`` tallies.

    Materializes one object per pulse (including basis-mismatched ones), so
    keep ``n_pulses`` moderate.
    """
    if n_pulses <= 0:
        raise ValueError(f"n_pulses must be positive, got {n_pulses}")
    records: list[TrialRecord] = []
    for rng, shard_n in _shards(seed, n_pulses):
        a = _simulate_shard(model, adversary, shard_n, rng, dark_count)
        for i in range(shard_n):
            if a["single"][i]:
                outcome = single_click(int(a["assigned"][i]))
            elif a["double"][i]:
                outcome = DOUBLE_CLICK
            else:
                outcome = NO_CLICK
            records.append(
                TrialRecord(
                    alice_bit=int(a["alice_bits"][i]),
                    alice_basis=Basis(int(a["alice_bases"][i])),
                    bob_basis=Basis(int(a["bob_bases"][i])),
                    outcome=outcome,
                    assigned_bit=int(a["assigned"][i]),
                    from_random_assignment=outcome.kind != ClickKind.SINGLE,
                )
            )
    return records


def empirical_stats(batch: TrialBatch) -> DetectionStats:
    """Empirical (Q_s, E_s) of a batch.

    ``e_s`` is 0 for a degenerate batch (no single clicks); check
    ``batch.is_degenerate`` before trusting it.
    """
    q_s = batch.n_single / batch.n_pulses
    e_s = batch.n_single_errors / max(batch.n_single, 1)
    return DetectionStats(q_s=q_s, e_s=e_s)


@dataclass(frozen=True)
class ComparisonReport:
    """Empirical-vs-analytic agreement for an honest batch.

    z-scores are under binomial standard errors at the analytic values; the
    pass flags allow ``q_s_offset_budget`` of systematic offset on top of
    3 sigma. The budget is the probability of >= 2 detected photons — the
    part of the coherent model the closed form neglects — and zero for the
    single-photon and memory models.
    """

    q_s_z_score: float
    e_s_z_score: float
    rate_gap: float
    q_s_offset_budget: float
    q_s_pass: bool
    e_s_pass: bool

    @property
    def passed(self) -> bool:
        return self.q_s_pass and self.e_s_pass

    def to_dict(self) -> dict:
        return {
            "q_s_z_score": self.q_s_z_score,
            "e_s_z_score": self.e_s_z_score,
            "rate_gap": self.rate_gap,
            "q_s_offset_budget": self.q_s_offset_budget,
            "q_s_pass": self.q_s_pass,
            "e_s_pass": self.e_s_pass,
            "passed": self.passed,
        }


def _z_score(observed: float, expected: float, n: int) -> float:
    se = math.sqrt(expected * (1.0 - expected) / n) if n > 0 else 0.0
    if se == 0.0:
        if observed == expected:
            return 0.0
        return math.copysign(math.inf, observed - expected)
    return (observed - expected) / se


def _within(observed: float, expected: float, n: int, budget: float) -> bool:
    se = math.sqrt(expected * (1.0 - expected) / n) if n > 0 else 0.0
    return abs(observed - expected) <= budget + 3.0 * se


def compare_to_analytic(model: SourceModel, batch: TrialBatch) -> ComparisonReport:
    """Check a batch's (Q_s, E_s) and rate against the closed-form model.

    Only honest batches have an analytic prediction; adversarial batches are
    rejected. The rate gap compares the rate formula evaluated on empirical
    stats against the fully analytic rate.
    """
    if batch.scenario_tag != "honest":
        raise ValueError(
            f"no analytic prediction for scenario {batch.scenario_tag!r}; "
            "compare honest batches only"
        )

    params = model.system_params()
    if isinstance(model, SinglePhoton):
        stats = single_photon_stats(params)
        empirical_rate = key_rate_single_click(empirical_stats(batch)).rate
        budget = 0.0
    elif isinstance(model, CoherentDecoy):
        stats, p_1, y_1, delta_1 = coherent_stats(params)
        empirical_rate = key_rate_coherent(empirical_stats(batch), p_1, y_1, delta_1).rate
        lam = model.eta * model.mu
        budget = -math.expm1(-lam) - lam * math.exp(-lam)
    elif isinstance(model, CoherentDecoyMemory):
        stats, p_1, y_1, delta_1 = coherent_memory_stats(params)
        empirical_rate = key_rate_coherent(empirical_stats(batch), p_1, y_1, delta_1).rate
        budget = 0.0
    else:
        raise TypeError(f"unknown source model: {model!r}")

    emp = empirical_stats(batch)
    q_z = _z_score(emp.q_s, stats.q_s, batch.n_pulses)
    if batch.is_degenerate:
        e_z = math.nan
        e_pass = False
    else:
        e_z = _z_score(emp.e_s, stats.e_s, batch.n_single)
        e_pass = _within(emp.e_s, stats.e_s, batch.n_single, budget)
    return ComparisonReport(
        q_s_z_score=q_z,
        e_s_z_score=e_z,
        rate_gap=abs(empirical_rate - key_rate(model).rate),
        q_s_offset_budget=budget,
        q_s_pass=_within(emp.q_s, stats.q_s, batch.n_pulses, budget),
        e_s_pass=e_pass,
    )


def apply_extreme_time_shift(destined_bit: int, rng: np.random.Generator) -> ClickOutcome:
    """Outcome of one pulse under the extreme time-shift attack.

    ``destined_bit`` is the detector the pulse would reach absent the
    attack. Eve activates a uniformly chosen detector; the pulse clicks only
    if it lands on the active one, so every produced bit is known to Eve.
    """
    if destined_bit not in (0, 1):
        raise ValueError(f"destined_bit must be 0 or 1, got {destined_bit}")
    active = int(rng.integers(0, 2))
    if destined_bit == active:
        return single_click(destined_bit)
    return NO_CLICK


def apply_strong_pulse(
    alice_bit: int,
    alice_basis: Basis | int,
    bob_basis: Basis | int,
    n_photons: int = DEFAULT_STRONG_PULSE_PHOTONS,
    rng: np.random.Generator | None = None,
) -> ClickOutcome:
    """Outcome of one pulse under the strong-pulse attack.

    Eve measures in a uniform basis (learning Alice's bit when the bases
    match, a uniform bit otherwise) and resends ``n_photons`` copies without
    loss. A Bob basis equal to Eve's always single-clicks with Eve's bit; a
    conjugate basis routes every copy 50/50 and double-clicks unless all
    copies land on one side, which happens with probability
    ``2**(1 - n_photons)``.
    """
    if alice_bit not in (0, 1):
        raise ValueError(f"alice_bit must be 0 or 1, got {alice_bit}")
    if n_photons < 1:
        raise ValueError(f"n_photons must be >= 1, got {n_photons}")
    if rng is None:
        raise ValueError("an explicit rng is required for reproducibility")
    eve_basis = int(rng.integers(0, 2))
    if eve_basis == int(alice_basis):
        eve_bit = alice_bit
    else:
        eve_bit = int(rng.integers(0, 2))
    if int(bob_basis) == eve_basis:
        return single_click(eve_bit)
    if rng.random() < 2.0 ** (1 - n_photons):
        return single_click(int(rng.integers(0, 2)))
    return DOUBLE_CLICK
