import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import dense_model, random_toy_2d, toy_logistic
from rfadv import attacks as atk
from rfadv import nn
from rfadv.dataset import Example
from rfadv.errors import (
    ConvergenceError,
    DegenerateGradientError,
    ValidationError,
)


def grid_min_flip_along(model, x, l_true, direction, step, p_max):
    """Independent oracle: smallest eps with x + eps*direction misclassified."""
    direction = direction / np.linalg.norm(direction)
    for eps in np.arange(step, p_max + step / 2, step):
        if model.predict_label(x + eps * direction) != l_true:
            return float(eps)
    return float(p_max)


# --- fgm ----------------------------------------------------------------

def test_fgm_zero_alpha_gives_zero_perturbation():
    r = atk.fgm(toy_logistic(), np.array([0.5]), np.array([1.0, 0.0]), 0.0)
    assert r.norm == 0.0


def test_fgm_norm_is_alpha_times_gradient_norm():
    model = toy_logistic()
    x, y = np.array([0.5]), np.array([1.0, 0.0])
    g = nn.input_gradient(model, x, y)
    r = atk.fgm(model, x, y, alpha=0.25)
    assert r.norm == pytest.approx(0.25 * float(np.linalg.norm(g)), rel=1e-9)


def test_fgm_targeted_descends_loss():
    model = random_toy_2d(0, hidden=6)
    x = np.array([0.4, -0.2])
    y = nn.one_hot(2, 3)
    base = nn.cross_entropy(model.forward(x), y)
    r = atk.fgm(model, x, y, alpha=1e-3, mode="targeted")
    after = nn.cross_entropy(model.forward(x + r.values.reshape(x.shape)), y)
    assert after <= base


def test_fgm_nontargeted_sign_matches_loss_gradient():
    model = toy_logistic()
    x = np.array([0.5])
    y_true = np.array([1.0, 0.0])
    g = nn.input_gradient(model, x, y_true)
    r = atk.fgm(model, x, y_true, alpha=0.1, mode="nontargeted")
    assert np.sign(r.values[0]) == np.sign(g[0])
    # following the gradient reduces the true-class probability
    p_before = model.forward(x)[0]
    p_after = model.forward(x + r.values)[0]
    assert p_after < p_before


def test_fgm_zero_gradient_raises():
    model = dense_model([np.zeros((1, 2))])
    with pytest.raises(DegenerateGradientError):
        atk.fgm(model, np.array([1.0]), np.array([1.0, 0.0]), 0.1)


def test_fgm_rejects_unknown_mode():
    with pytest.raises(ValidationError):
        atk.fgm(toy_logistic(), np.array([0.5]), np.array([1.0, 0.0]),
                0.1, mode="sideways")


# --- bisection attack ----------------------------------------------------

def test_bisection_on_toy_logistic_finds_boundary_distance():
    model = toy_logistic()
    x = np.array([0.5])
    out = atk.craft_adversarial_bisection(model, x, l_true=0,
                                          eps_acc=0.01, p_max=1.0)
    assert out.fooled
    assert 0.5 <= out.epsilon_star <= 0.51
    assert out.target_class == 1
    assert model.predict_label(x + out.perturbation.values) != 0
    # independent verification by plain grid search along the direction
    direction = out.perturbation.values / out.perturbation.norm
    oracle = grid_min_flip_along(model, x, 0, direction, 0.001, 1.0)
    assert abs(out.epsilon_star - oracle) <= 0.01 + 0.001


def test_bisection_already_misclassified_returns_zero():
    model = toy_logistic()
    out = atk.craft_adversarial_bisection(model, np.array([-0.3]), l_true=0,
                                          eps_acc=0.01, p_max=1.0)
    assert out.fooled
    assert out.epsilon_star == 0.0
    assert out.perturbation.norm == 0.0


def test_bisection_infeasible_budget():
    model = toy_logistic()
    out = atk.craft_adversarial_bisection(model, np.array([0.5]), l_true=0,
                                          eps_acc=0.01, p_max=0.3)
    assert not out.fooled
    assert out.target_class is None
    assert out.epsilon_star == pytest.approx(0.3)
    assert out.perturbation.norm == pytest.approx(0.3, abs=1e-9)


def test_bisection_minimality_along_chosen_direction():
    # shrinking eps by 2*eps_acc along the same direction stops fooling
    for seed in range(5):
        model = random_toy_2d(seed)
        x = np.random.default_rng(seed).uniform(-1, 1, size=2)
        l_true = model.predict_label(x)
        out = atk.craft_adversarial_bisection(model, x, l_true,
                                              eps_acc=0.002, p_max=3.0)
        if not out.fooled or out.epsilon_star <= 2 * 0.002:
            continue
        direction = out.perturbation.values / out.perturbation.norm
        shorter = x + (out.epsilon_star - 2 * 0.002) * direction
        assert model.predict_label(shorter) == l_true


def test_bisection_all_zero_gradients_raises():
    model = dense_model([np.zeros((2, 3))])
    with pytest.raises(DegenerateGradientError):
        atk.craft_adversarial_bisection(model, np.array([0.1, 0.2]), 0,
                                        eps_acc=0.01, p_max=1.0)


def test_bisection_validates_parameters():
    model = toy_logistic()
    with pytest.raises(ValidationError):
        atk.craft_adversarial_bisection(model, np.array([0.5]), 0,
                                        eps_acc=0.0, p_max=1.0)
    with pytest.raises(ValidationError):
        atk.craft_adversarial_bisection(model, np.array([0.5]), 0,
                                        eps_acc=0.1, p_max=-1.0)


# --- oracle --------------------------------------------------------------

def test_oracle_on_toy_logistic():
    model = toy_logistic()
    got = atk.oracle_min_perturbation(model, np.array([0.5]), 0,
                                      grid_step=0.01, p_max=1.0)
    # the exact boundary tie at eps=0.5 still predicts the true class,
    # so the grid flips one step later
    assert 0.5 - 0.01 <= got <= 0.5 + 0.0101


def test_oracle_on_boundary_is_tiny():
    model = toy_logistic()
    got = atk.oracle_min_perturbation(model, np.array([0.0]), 0,
                                      grid_step=0.01, p_max=1.0)
    assert got <= 0.02


def test_oracle_infeasible_returns_p_max_sentinel():
    model = toy_logistic()
    got = atk.oracle_min_perturbation(model, np.array([0.9]), 0,
                                      grid_step=0.05, p_max=0.2)
    assert got == 0.2


class RadialToy:
    """predict 0 inside the circle of the given radius, 1 outside."""

    def __init__(self, radius):
        self.radius = radius

    def predict_label(self, x):
        return 0 if float(np.linalg.norm(x)) < self.radius else 1


def test_oracle_matches_distance_to_radial_boundary():
    model = RadialToy(radius=1.0)
    rng = np.random.default_rng(7)
    for _ in range(8):
        x = rng.uniform(-0.8, 0.8, size=2)
        l_true = model.predict_label(x)
        expected = abs(1.0 - float(np.linalg.norm(x)))
        got = atk.oracle_min_perturbation(model, x, l_true,
                                          grid_step=0.005, p_max=2.5)
        assert got == pytest.approx(expected, abs=0.02)


def test_oracle_rejects_high_dimension():
    with pytest.raises(ValidationError):
        atk.oracle_min_perturbation(toy_logistic(), np.zeros(4), 0, 0.1, 1.0)


# --- power iteration ------------------------------------------------------

def test_first_principal_direction_single_row():
    u = np.array([3.0, 4.0])
    v = atk.first_principal_direction(u[None, :])
    assert min(np.linalg.norm(v - u / 5), np.linalg.norm(v + u / 5)) < 1e-8


def test_first_principal_direction_dominant_axis():
    X = np.array([[3.0, 0.0], [0.0, 1.0]])
    v = atk.first_principal_direction(X)
    assert abs(abs(v[0]) - 1.0) < 1e-8
    assert abs(v[1]) < 1e-6


def test_first_principal_direction_two_clusters():
    u = np.array([1.0, 0.0, 0.0, 0.0])
    w = np.array([0.0, 1.0, 0.0, 0.0])
    X = np.stack([u] * 9 + [w])
    # oracle: dense eigendecomposition of X^T X
    evals, evecs = np.linalg.eigh(X.T @ X)
    top = evecs[:, np.argmax(evals)]
    v = atk.first_principal_direction(X)
    assert min(np.linalg.norm(v - top), np.linalg.norm(v + top)) < 1e-6
    assert min(np.linalg.norm(v - u), np.linalg.norm(v + u)) < 1e-6


def test_first_principal_direction_rayleigh_quotient_matches_eigh():
    for seed in range(5):
        X = np.random.default_rng(seed).standard_normal((10, 8))
        v = atk.first_principal_direction(X)
        lam = float(v @ (X.T @ X) @ v)
        top = float(np.max(np.linalg.eigvalsh(X.T @ X)))
        assert lam == pytest.approx(top, rel=1e-6)


def test_first_principal_direction_matches_svd_on_wide_matrices():
    for seed in range(3):
        X = np.random.default_rng(seed).standard_normal((50, 256))
        v = atk.first_principal_direction(X)
        s = np.linalg.svd(X)[2][0]
        assert min(np.linalg.norm(v - s), np.linalg.norm(v + s)) < 1e-4


def test_first_principal_direction_variance_maximality():
    X = np.random.default_rng(4).standard_normal((20, 16))
    v = atk.first_principal_direction(X)
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = rng.standard_normal(16)
        w /= np.linalg.norm(w)
        assert np.linalg.norm(X @ v) >= np.linalg.norm(X @ w) - 1e-9


def test_power_iteration_non_convergence_raises_with_residual():
    # nearly degenerate top eigenvalues converge too slowly for one iteration
    X = np.diag([1.0, 0.999999])
    with pytest.raises(ConvergenceError) as excinfo:
        atk.first_principal_direction(X, max_iters=1)
    assert excinfo.value.residual > 0


# --- PCA UAP --------------------------------------------------------------

def linear_frame_model(seed=0):
    rng = np.random.default_rng(seed)
    return dense_model([rng.standard_normal((4, 3))])


def frame_examples(frames, labels):
    return [Example(frame=np.asarray(f, dtype=np.float32), mod_id=l, snr_db=0)
            for f, l in zip(frames, labels)]


def test_uap_pca_identical_gradients_recover_direction():
    model = linear_frame_model()
    x = np.array([0.2, -0.1, 0.4, 0.3])
    samples = frame_examples([x] * 5, [0] * 5)
    g = nn.input_gradient(model, x, nn.one_hot(0, 3))
    u = g / np.linalg.norm(g)
    r, spec = atk.craft_uap_pca(model, samples, p_max=0.7)
    assert r.norm == pytest.approx(0.7, abs=1e-9)
    direction = r.values / r.norm
    assert min(np.linalg.norm(direction - u),
               np.linalg.norm(direction + u)) < 1e-6
    assert spec.sample_count == 5
    assert spec.p_max == 0.7
    assert spec.crafting_time_seconds >= 0


def test_uap_pca_scaling_budget_scales_output_linearly():
    model = linear_frame_model(1)
    rng = np.random.default_rng(2)
    samples = frame_examples(rng.standard_normal((6, 4)), [0, 1, 2, 0, 1, 2])
    r1, _ = atk.craft_uap_pca(model, samples, p_max=0.5)
    r2, _ = atk.craft_uap_pca(model, samples, p_max=1.0)
    np.testing.assert_allclose(2 * r1.values, r2.values, atol=1e-9)


def test_uap_pca_needs_two_nonzero_gradient_samples():
    model = dense_model([np.zeros((4, 3))])
    samples = frame_examples(np.ones((3, 4)), [0, 1, 2])
    with pytest.raises(DegenerateGradientError):
        with pytest.warns(UserWarning, match="zero gradient"):
            atk.craft_uap_pca(model, samples, p_max=1.0)


# --- iterative baseline ----------------------------------------------------

def test_iterative_baseline_zero_target_returns_zero_perturbation():
    model = linear_frame_model()
    samples = frame_examples(np.random.default_rng(0).standard_normal((4, 4)),
                             [0, 1, 2, 0])
    r, spec = atk.craft_uap_iterative_baseline(model, samples, p_max=1.0,
                                               max_epochs=5,
                                               target_fool_rate=0.0)
    assert r.norm == 0.0
    assert spec.crafting_time_seconds >= 0


def test_iterative_baseline_respects_budget_and_fools():
    model = random_toy_2d(3)
    rng = np.random.default_rng(4)
    frames = rng.uniform(-1, 1, size=(8, 2))
    labels = [model.predict_label(f) for f in frames]
    samples = frame_examples(frames, labels)
    r, _ = atk.craft_uap_iterative_baseline(model, samples, p_max=2.0,
                                            max_epochs=3,
                                            target_fool_rate=0.9)
    assert r.norm <= 2.0 + 1e-9
    fooled = sum(model.predict_label(f + r.values) != l
                 for f, l in zip(frames, labels))
    assert fooled >= 1


def test_iterative_baseline_needs_two_samples():
    with pytest.raises(ValidationError):
        atk.craft_uap_iterative_baseline(linear_frame_model(),
                                         frame_examples([[1, 0, 0, 0]], [0]),
                                         1.0, 1, 0.5)


# --- jamming ---------------------------------------------------------------

def test_jamming_norm_is_exact():
    r = atk.jamming_noise(np.zeros(256), p_max=2.5, rng=0)
    assert r.norm == pytest.approx(2.5, abs=1e-6)


def test_jamming_seeds_differ_but_norms_match():
    mean = np.zeros(64)
    a = atk.jamming_noise(mean, 1.0, rng=1)
    b = atk.jamming_noise(mean, 1.0, rng=2)
    assert not np.allclose(a.values, b.values)
    assert a.norm == pytest.approx(b.norm, abs=1e-9)


def test_jamming_mean_direction_follows_sample_mean():
    # law of large numbers: the average draw aligns with the sample mean
    mean = np.zeros(8)
    mean[0] = 3.0
    rng = np.random.default_rng(0)
    draws = np.stack([atk.jamming_noise(mean, 1.0, rng).values
                      for _ in range(10000)])
    avg = draws.mean(axis=0)
    cos = float(avg @ mean) / (np.linalg.norm(avg) * np.linalg.norm(mean))
    assert cos > 0.99


# --- circular shift ---------------------------------------------------------

def pert256(seed):
    values = np.random.default_rng(seed).standard_normal(256)
    return atk.Perturbation(values=values, norm_budget=float(
        np.linalg.norm(values)) + 1e-9)


def test_circular_shift_identity_cases():
    p = pert256(0)
    np.testing.assert_array_equal(atk.circular_shift(p, 0).values, p.values)
    np.testing.assert_array_equal(atk.circular_shift(p, 128).values, p.values)


def test_circular_shift_moves_rows_together():
    values = np.zeros(256)
    values[0] = 1.0    # I row, t=0
    values[128] = 2.0  # Q row, t=0
    p = atk.Perturbation(values=values, norm_budget=3.0)
    s = atk.circular_shift(p, 5).values.reshape(2, 128)
    assert s[0, 5] == 1.0 and s[1, 5] == 2.0
    assert s[0, 0] == 0.0 and s[1, 0] == 0.0


@given(st.integers(-300, 300), st.integers(-300, 300), st.integers(0, 50))
def test_circular_shift_group_property_and_norm(k1, k2, seed):
    p = pert256(seed)
    a = atk.circular_shift(atk.circular_shift(p, k1), k2)
    b = atk.circular_shift(p, (k1 + k2) % 128)
    np.testing.assert_array_equal(a.values, b.values)
    # entries are preserved exactly; the recomputed norm may differ in the
    # final ulp from float summation order
    assert sorted(a.values) == sorted(p.values)
    assert a.norm == pytest.approx(p.norm, rel=1e-12)


def test_perturbation_budget_invariant_enforced():
    with pytest.raises(ValidationError):
        atk.Perturbation(values=np.ones(4), norm_budget=1.0)
