"""Perturbation crafting: gradient attacks, bisection search, PCA UAPs,
an iterative UAP baseline, jamming noise and circular time shifts.

All crafting is pure given (model, inputs, seed): per-class and per-sample
work is merged in fixed class/sample order, so results do not depend on
scheduling even if a caller fans the loops out over a shared read-only
model.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateGradientError, ValidationError
from .nn import Model, input_gradient, one_hot

NORM_SLACK = 1e-6


@dataclass
class Perturbation:
    """Additive perturbation with an L2 budget.

    values is a flat vector with as many entries as the attacked model's
    input (256 for I/Q frames, reshaped to 2x128 when added to a frame).
    """

    values: np.ndarray
    norm_budget: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.norm_budget < 0:
            raise ValidationError(f"norm budget must be >= 0, got {self.norm_budget}")
        if self.norm > self.norm_budget + NORM_SLACK:
            raise ValidationError(
                f"perturbation norm {self.norm:.6g} exceeds budget "
                f"{self.norm_budget:.6g}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def apply_to(self, x: np.ndarray) -> np.ndarray:
        return x + self.values.reshape(x.shape).astype(x.dtype, copy=False)


@dataclass
class AttackOutcome:
    """Result of one input-specific attack."""

    perturbation: Perturbation
    epsilon_star: float
    target_class: int | None
    fooled: bool
    queries: int = 0

    def __post_init__(self):
        if abs(self.perturbation.norm - self.epsilon_star) > 1e-5:
            raise ValidationError(
                f"epsilon_star {self.epsilon_star:.6g} != perturbation norm "
                f"{self.perturbation.norm:.6g}"
            )


@dataclass
class UapSpec:
    sample_count: int
    p_max: float
    crafting_time_seconds: float
    source_model: str = "model"

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValidationError("UAP crafting needs at least one sample")


def model_input(model: Model, frame: np.ndarray) -> np.ndarray:
    """Reshape a frame (or flat vector) to the model's input shape; the
    row-major order keeps the I row ahead of the Q row either way."""
    return np.asarray(frame).reshape(model.input_shape)


def fgm(model: Model, x, y, alpha: float, mode: str = "nontargeted") -> Perturbation:
    """One-step gradient attack: r = -alpha*g (targeted), +alpha*g otherwise."""
    if mode not in ("targeted", "nontargeted"):
        raise ValidationError(f"mode must be targeted or nontargeted, got {mode!r}")
    g = input_gradient(model, x, y).astype(np.float64).ravel()
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        raise DegenerateGradientError(
            "loss gradient w.r.t. the input is zero; no direction to follow"
        )
    sign = -1.0 if mode == "targeted" else 1.0
    r = sign * alpha * g
    return Perturbation(values=r, norm_budget=float(alpha) * gnorm)


def craft_adversarial_bisection(model: Model, x, l_true: int, eps_acc: float,
                                p_max: float) -> AttackOutcome:
    """Minimum-power input-specific attack via per-class bisection.

    For every class c the loss gradient toward the one-hot label e_c gives
    a unit direction; stepping x - eps * direction, the smallest fooling
    eps is bisected over [0, p_max] to width <= eps_acc. Classes whose
    full-budget step does not change the label are infeasible and excluded
    from the argmin, so a fooled=True outcome is always a real label flip.
    queries counts model evaluations (forwards plus gradient calls).
    """
    if eps_acc <= 0:
        raise ValidationError(f"eps_acc must be positive, got {eps_acc}")
    if p_max <= 0:
        raise ValidationError(f"p_max must be positive, got {p_max}")
    x = model_input(model, x).astype(np.float64)
    queries = 0

    def label_at(point) -> int:
        nonlocal queries
        queries += 1
        return model.predict_label(point)

    if label_at(x) != l_true:
        zero = Perturbation(np.zeros(x.size), norm_budget=p_max)
        return AttackOutcome(zero, epsilon_star=0.0, target_class=None,
                             fooled=True, queries=queries)

    num_classes = model.num_classes
    directions: dict[int, np.ndarray] = {}
    eps_by_class: dict[int, float] = {}
    fallback_class: int | None = None
    for c in range(num_classes):
        g = input_gradient(model, x, one_hot(c, num_classes))
        queries += 1
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            continue
        direction = g.astype(np.float64) / gnorm
        directions[c] = direction
        if fallback_class is None:
            fallback_class = c
        if label_at(x - p_max * direction) == l_true:
            continue  # full budget cannot flip along this direction
        eps_max, eps_min = p_max, 0.0
        while eps_max - eps_min > eps_acc:
            eps_ave = 0.5 * (eps_max + eps_min)
            if label_at(x - eps_ave * direction) == l_true:
                eps_min = eps_ave
            else:
                eps_max = eps_ave
        eps_by_class[c] = eps_max

    if not directions:
        raise DegenerateGradientError(
            "every class gradient is zero; the model is locally constant"
        )
    if not eps_by_class:
        direction = directions[fallback_class]
        best_effort = Perturbation(-p_max * direction.reshape(-1),
                                   norm_budget=p_max)
        return AttackOutcome(best_effort, epsilon_star=p_max,
                             target_class=None, fooled=False, queries=queries)

    target = min(eps_by_class, key=lambda c: (eps_by_class[c], c))
    eps_star = eps_by_class[target]
    r = Perturbation(-eps_star * directions[target].reshape(-1),
                     norm_budget=p_max)
    return AttackOutcome(r, epsilon_star=eps_star, target_class=target,
                         fooled=True, queries=queries)


def _direction_grid(dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, 360, endpoint=False)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # Fibonacci sphere for dim 3.
    n = 400
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.stack([np.sin(phi) * np.cos(theta),
                     np.sin(phi) * np.sin(theta),
                     np.cos(phi)], axis=1)


def oracle_min_perturbation(model, x, l_true: int, grid_step: float,
                            p_max: float) -> float:
    """Brute-force minimum perturbation norm on a dense direction grid.

    Test-scale oracle for toy models (input dimension <= 3); returns p_max
    as an infeasibility sentinel. Only needs model.predict_label.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size > 3:
        raise ValidationError(
            f"oracle is toy-scale only (dim <= 3), got dim {x.size}"
        )
    dirs = _direction_grid(x.size)
    for eps in np.arange(grid_step, p_max + 0.5 * grid_step, grid_step):
        for d in dirs:
            if model.predict_label(x + eps * d.reshape(x.shape)) != l_true:
                return float(eps)
    return float(p_max)


def first_principal_direction(X, tol: float = 1e-8, max_iters: int = 1000,
                              seed: int = 0) -> np.ndarray:
    """Dominant right-singular direction of X via power iteration on X^T X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or not np.any(X):
        raise ValidationError("X must be a nonzero 2-D matrix")
    A = X.T @ X
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    residual = np.inf
    for _ in range(max_iters):
        w = A @ v
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= tol * max(lam, 1e-30):
            return v
        wnorm = float(np.linalg.norm(w))
        if wnorm == 0.0:
            v = rng.standard_normal(A.shape[0])
            v /= np.linalg.norm(v)
            continue
        v = w / wnorm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations", residual
    )


def _clean_predictions(model: Model, xs: list[np.ndarray]) -> list[int]:
    return [model.predict_label(x) for x in xs]


def _fooling_rate(model: Model, xs, clean_preds, r_values) -> float:
    fooled = 0
    for x, pred in zip(xs, clean_preds):
        x_adv = x + r_values.reshape(x.shape).astype(x.dtype, copy=False)
        if model.predict_label(x_adv) != pred:
            fooled += 1
    return fooled / len(xs)


def craft_uap_pca(model: Model, samples, p_max: float) -> tuple[Perturbation, UapSpec]:
    """Universal perturbation from the first principal direction of the
    stacked normalized per-sample loss gradients.

    The singular direction's sign is arbitrary, so both signs are scored
    by fooling rate on the crafting samples and the stronger one is kept
    (+ wins ties). The result has norm exactly p_max.
    """
    if p_max <= 0:
        raise ValidationError(f"p_max must be positive, got {p_max}")
    start = time.perf_counter()
    xs = [model_input(model, ex.frame) for ex in samples]
    rows = []
    for ex, x in zip(samples, xs):
        g = input_gradient(model, x, one_hot(ex.mod_id, model.num_classes))
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            warnings.warn("dropping a crafting sample with zero gradient",
                          stacklevel=2)
            continue
        rows.append(g.astype(np.float64).ravel() / gnorm)
    if len(rows) < 2:
        raise DegenerateGradientError(
            f"need at least 2 samples with nonzero gradients, got {len(rows)}"
        )
    v1 = first_principal_direction(np.stack(rows))
    v1 = v1 / np.linalg.norm(v1)
    clean = _clean_predictions(model, xs)
    plus = _fooling_rate(model, xs, clean, p_max * v1)
    minus = _fooling_rate(model, xs, clean, -p_max * v1)
    signed = v1 if plus >= minus else -v1
    r = Perturbation(values=p_max * signed, norm_budget=p_max)
    spec = UapSpec(sample_count=len(rows), p_max=p_max,
                   crafting_time_seconds=time.perf_counter() - start,
                   source_model=model.name)
    return r, spec


def craft_uap_iterative_baseline(model: Model, samples, p_max: float,
                                 max_epochs: int, target_fool_rate: float,
                                 eps_acc: float | None = None,
                                 ) -> tuple[Perturbation, UapSpec]:
    """Simplified iterative UAP baseline: accumulate per-sample bisection
    perturbations for still-unfooled samples, projecting onto the L2 ball
    after each addition, until the crafting fooling rate reaches the target
    or the epoch budget runs out."""
    if len(samples) < 2:
        raise ValidationError("iterative baseline needs at least 2 samples")
    if eps_acc is None:
        eps_acc = p_max / 64.0
    start = time.perf_counter()
    xs = [model_input(model, ex.frame).astype(np.float64) for ex in samples]
    clean = _clean_predictions(model, xs)
    r = np.zeros(xs[0].size)
    epochs = 0
    while epochs < max_epochs and _fooling_rate(model, xs, clean, r) < target_fool_rate:
        epochs += 1
        for x, pred in zip(xs, clean):
            x_adv = x + r.reshape(x.shape)
            if model.predict_label(x_adv) != pred:
                continue
            outcome = craft_adversarial_bisection(model, x_adv, pred,
                                                  eps_acc=eps_acc, p_max=p_max)
            if not outcome.fooled:
                continue
            r = r + outcome.perturbation.values
            rnorm = float(np.linalg.norm(r))
            if rnorm > p_max:
                r *= p_max / rnorm
    spec = UapSpec(sample_count=len(samples), p_max=p_max,
                   crafting_time_seconds=time.perf_counter() - start,
                   source_model=model.name)
    return Perturbation(values=r, norm_budget=p_max), spec


def jamming_noise(sample_mean, p_max: float, rng) -> Perturbation:
    """Gaussian jamming centered at the data mean, rescaled to norm p_max."""
    if p_max <= 0:
        raise ValidationError(f"p_max must be positive, got {p_max}")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    mean = np.asarray(sample_mean, dtype=np.float64).ravel()
    z = mean + rng.standard_normal(mean.size)
    znorm = float(np.linalg.norm(z))
    while znorm == 0.0:
        z = mean + rng.standard_normal(mean.size)
        znorm = float(np.linalg.norm(z))
    return Perturbation(values=z * (p_max / znorm), norm_budget=p_max)


def circular_shift(p: Perturbation, k: int) -> Perturbation:
    """Rotate the I and Q rows together by k time samples (k mod width)."""
    rows = p.values.reshape(2, -1)
    shifted = np.roll(rows, int(k) % rows.shape[1], axis=1)
    return Perturbation(values=shifted.ravel(), norm_budget=p.norm_budget)
