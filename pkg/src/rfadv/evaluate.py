"""Power-ratio metrics, accuracy measurement and the experiment sweeps.

Perturbation power follows the same mean-square-per-time-sample convention
as dataset.measure_power (||r||^2 / 128), so PSR and PNR are dimensionally
consistent with frame power. Signal power is measured on the received
frame (signal plus channel noise); noise power is derived from the frame's
SNR tag, which keeps PNR[dB] = PSR[dB] + SNR[dB] exact by construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from statistics import median

import numpy as np

from .attacks import (
    Perturbation,
    circular_shift,
    craft_adversarial_bisection,
    craft_uap_iterative_baseline,
    craft_uap_pca,
    jamming_noise,
    model_input,
)
from .dataset import FRAME_LEN, measure_power
from .errors import ValidationError
from .nn import Model


@dataclass(frozen=True)
class PowerRatios:
    psr_db: float
    pnr_db: float
    snr_db: float

    def __post_init__(self):
        if abs(self.pnr_db - (self.psr_db + self.snr_db)) > 1e-9:
            raise ValidationError(
                f"pnr {self.pnr_db} != psr {self.psr_db} + snr {self.snr_db}"
            )

    @classmethod
    def from_psr(cls, psr_db: float, snr_db: float) -> "PowerRatios":
        return cls(psr_db=psr_db, pnr_db=psr_db + snr_db, snr_db=snr_db)

    @classmethod
    def from_pnr(cls, pnr_db: float, snr_db: float) -> "PowerRatios":
        return cls(psr_db=pnr_db - snr_db, pnr_db=pnr_db, snr_db=snr_db)


def perturbation_power(perturbation) -> float:
    values = getattr(perturbation, "values", perturbation)
    values = np.asarray(values, dtype=np.float64)
    return float((values * values).sum() / FRAME_LEN)


def psr_db(perturbation, signal_power: float) -> float:
    """10*log10(perturbation power / signal power); -inf for a zero vector."""
    if signal_power <= 0:
        raise ValidationError(f"signal power must be positive, got {signal_power}")
    power = perturbation_power(perturbation)
    if power == 0.0:
        return float("-inf")
    return 10.0 * np.log10(power / signal_power)


def budget_from_pnr(pnr_db: float, snr_db: float, signal_power: float) -> float:
    """Perturbation norm whose power sits pnr_db above the tag-implied noise."""
    if signal_power <= 0:
        raise ValidationError(f"signal power must be positive, got {signal_power}")
    noise_power = signal_power * 10.0 ** (-snr_db / 10.0)
    return float(np.sqrt(FRAME_LEN * noise_power * 10.0 ** (pnr_db / 10.0)))


def budget_from_psr(psr_db_value: float, signal_power: float) -> float:
    return budget_from_pnr(psr_db_value, 0.0, signal_power)


@dataclass
class EvalStats:
    n: int
    accuracy_clean: float
    accuracy_all: float
    accuracy_clean_correct: float
    fooling_rate: float


@dataclass
class SweepRow:
    x_db: float  # grid value; nan on the no-attack reference row
    attack: str
    snr_db: float
    accuracy_clean: float
    accuracy_all: float
    accuracy_clean_correct: float
    fooling_rate: float
    n: int


@dataclass
class SweepTable:
    rows: list[SweepRow]

    def __post_init__(self):
        for row in self.rows:
            for value in (row.accuracy_clean, row.accuracy_all,
                          row.accuracy_clean_correct, row.fooling_rate):
                if not (0.0 <= value <= 1.0):
                    raise ValidationError(
                        f"rate {value} outside [0, 1] in row {row}"
                    )
        self.rows.sort(key=lambda r: (np.isnan(r.x_db), r.x_db, r.attack))

    def by_attack(self, name: str) -> list[SweepRow]:
        return [r for r in self.rows if r.attack == name]


def evaluate(model: Model, examples, attack=None, shift_seed=None) -> EvalStats:
    """Accuracy and fooling rate under an optional attack.

    attack may be None, a fixed Perturbation (universal; optionally
    circular-shifted per example when shift_seed is set), or a callable
    (model, example) -> Perturbation for input-specific attacks.
    """
    if not examples:
        raise ValidationError("evaluation needs at least one example")
    shift_rng = (np.random.default_rng(shift_seed)
                 if shift_seed is not None else None)
    n = len(examples)
    clean_ok = 0
    attacked_ok = 0
    attacked_ok_on_clean_correct = 0
    fooled = 0
    for ex in examples:
        x = model_input(model, ex.frame)
        clean_pred = model.predict_label(x)
        clean_correct = clean_pred == ex.mod_id
        clean_ok += clean_correct
        if attack is None:
            adv_pred = clean_pred
        else:
            if isinstance(attack, Perturbation):
                r = attack
                if shift_rng is not None:
                    r = circular_shift(r, int(shift_rng.integers(0, FRAME_LEN)))
            else:
                r = attack(model, ex)
            adv_pred = model.predict_label(r.apply_to(x))
        attacked_ok += adv_pred == ex.mod_id
        if clean_correct:
            attacked_ok_on_clean_correct += adv_pred == ex.mod_id
        fooled += adv_pred != clean_pred
    return EvalStats(
        n=n,
        accuracy_clean=clean_ok / n,
        accuracy_all=attacked_ok / n,
        accuracy_clean_correct=(attacked_ok_on_clean_correct / clean_ok
                                if clean_ok else 0.0),
        fooling_rate=fooled / n,
    )


def accuracy(model: Model, examples, attack=None, shift_seed=None):
    """(accuracy over all examples, fooling rate) under the given attack."""
    stats = evaluate(model, examples, attack=attack, shift_seed=shift_seed)
    return stats.accuracy_all, stats.fooling_rate


def _reference_row(model, examples, snr_db) -> SweepRow:
    stats = evaluate(model, examples)
    return SweepRow(x_db=float("nan"), attack="none", snr_db=snr_db,
                    accuracy_clean=stats.accuracy_clean,
                    accuracy_all=stats.accuracy_all,
                    accuracy_clean_correct=stats.accuracy_clean_correct,
                    fooling_rate=stats.fooling_rate, n=stats.n)


def _stats_row(x_db, attack_name, snr_db, stats) -> SweepRow:
    return SweepRow(x_db=float(x_db), attack=attack_name, snr_db=snr_db,
                    accuracy_clean=stats.accuracy_clean,
                    accuracy_all=stats.accuracy_all,
                    accuracy_clean_correct=stats.accuracy_clean_correct,
                    fooling_rate=stats.fooling_rate, n=stats.n)


def sweep_pnr(model: Model, examples_at_snr, pnr_grid_db,
              eps_acc_rel: float = 1 / 64) -> SweepTable:
    """Accuracy versus PNR under the per-input bisection attack.

    The budget is derived per example from its measured received power and
    the shared SNR tag. Includes the no-attack reference row.
    """
    snrs = {ex.snr_db for ex in examples_at_snr}
    if len(snrs) != 1:
        raise ValidationError(f"examples must share one SNR tag, got {sorted(snrs)}")
    snr = snrs.pop()
    rows = [_reference_row(model, examples_at_snr, snr)]
    for pnr in sorted(pnr_grid_db):

        def per_input(mdl, ex, _pnr=pnr):
            p_max = budget_from_pnr(_pnr, ex.snr_db, measure_power(ex.frame))
            outcome = craft_adversarial_bisection(
                mdl, model_input(mdl, ex.frame), ex.mod_id,
                eps_acc=p_max * eps_acc_rel, p_max=p_max)
            return outcome.perturbation

        stats = evaluate(model, examples_at_snr, attack=per_input)
        rows.append(_stats_row(pnr, "bisection", snr, stats))
    return SweepTable(rows)


UAP_ATTACKS = ("uap_pca", "uap_iterative", "jamming")


def craft_universal(model: Model, attack: str, craft_samples, p_max: float,
                    seed: int = 0, max_epochs: int = 3,
                    target_fool_rate: float = 0.8):
    """Dispatch one universal perturbation; returns (Perturbation, UapSpec|None)."""
    if attack == "uap_pca":
        return craft_uap_pca(model, craft_samples, p_max)
    if attack == "uap_iterative":
        return craft_uap_iterative_baseline(
            model, craft_samples, p_max,
            max_epochs=max_epochs, target_fool_rate=target_fool_rate)
    if attack == "jamming":
        mean = np.mean([model_input(model, ex.frame).ravel()
                        for ex in craft_samples], axis=0)
        return jamming_noise(mean, p_max, np.random.default_rng(seed)), None
    raise ValidationError(f"unknown attack {attack!r}; expected one of "
                          f"{UAP_ATTACKS}")


def sweep_psr(model: Model, examples, psr_grid_db, attack: str,
              craft_samples=None, seed: int = 0, max_epochs: int = 3,
              target_fool_rate: float = 0.8,
              include_reference: bool = True) -> SweepTable:
    """Accuracy versus PSR for one universal attack, crafted once per point
    with the budget set from the mean received signal power."""
    if not examples:
        raise ValidationError("sweep needs at least one example")
    if craft_samples is None:
        craft_samples = examples
    mean_power = float(np.mean([measure_power(ex.frame) for ex in examples]))
    snr = float(np.mean([ex.snr_db for ex in examples]))
    rows = [_reference_row(model, examples, snr)] if include_reference else []
    for psr in sorted(psr_grid_db):
        p_max = budget_from_psr(psr, mean_power)
        r, _spec = craft_universal(model, attack, craft_samples, p_max,
                                   seed=seed, max_epochs=max_epochs,
                                   target_fool_rate=target_fool_rate)
        stats = evaluate(model, examples, attack=r)
        rows.append(_stats_row(psr, attack, snr, stats))
    return SweepTable(rows)


def transfer_eval(source_model: Model, target_model: Model, examples,
                  p_max: float, shift_seed=None, craft_samples=None,
                  ) -> SweepTable:
    """Black-box transfer: craft the UAP on the source model, apply it to
    the target, optionally with a random circular shift per example; the
    white-box UAP (crafted on the target itself) is evaluated alongside."""
    if not examples:
        raise ValidationError("transfer evaluation needs examples")
    if craft_samples is None:
        craft_samples = examples
    mean_power = float(np.mean([measure_power(ex.frame) for ex in examples]))
    snr = float(np.mean([ex.snr_db for ex in examples]))
    x_db = 10.0 * np.log10((p_max ** 2 / FRAME_LEN) / mean_power)
    black, _ = craft_uap_pca(source_model, craft_samples, p_max)
    white, _ = craft_uap_pca(target_model, craft_samples, p_max)
    rows = [_reference_row(target_model, examples, snr)]
    variants = [("uap_whitebox", white, None), ("uap_blackbox", black, None)]
    if shift_seed is not None:
        variants += [("uap_whitebox_shifted", white, shift_seed),
                     ("uap_blackbox_shifted", black, shift_seed)]
    for name, r, shift in variants:
        stats = evaluate(target_model, examples, attack=r, shift_seed=shift)
        rows.append(_stats_row(x_db, name, snr, stats))
    return SweepTable(rows)


@dataclass
class BenchRow:
    psr_db: float
    seconds_pca: float
    seconds_iterative: float

    @property
    def ratio(self) -> float:
        return self.seconds_iterative / self.seconds_pca


def runtime_benchmark(model: Model, samples, psr_grid_db, n_repeats: int = 1,
                      max_epochs: int = 2, target_fool_rate: float = 0.8,
                      ) -> list[BenchRow]:
    """Median wall-clock crafting time of the PCA UAP versus the iterative
    baseline at each PSR point. The PCA direction does not depend on the
    budget, but each grid point re-runs the full crafting for honest
    end-to-end numbers. Runs single-threaded; do not fan this out."""
    if len(samples) < 2:
        raise ValidationError("benchmark needs at least 2 samples")
    mean_power = float(np.mean([measure_power(ex.frame) for ex in samples]))
    rows = []
    for psr in sorted(psr_grid_db):
        p_max = budget_from_psr(psr, mean_power)
        t_pca, t_iter = [], []
        for _ in range(n_repeats):
            start = time.perf_counter()
            craft_uap_pca(model, samples, p_max)
            t_pca.append(time.perf_counter() - start)
            start = time.perf_counter()
            craft_uap_iterative_baseline(model, samples, p_max,
                                         max_epochs=max_epochs,
                                         target_fool_rate=target_fool_rate)
            t_iter.append(time.perf_counter() - start)
        rows.append(BenchRow(psr_db=float(psr), seconds_pca=median(t_pca),
                             seconds_iterative=median(t_iter)))
    return rows
