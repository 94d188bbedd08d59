import itertools

import numpy as np
import pytest

from sigsurv.common.exceptions import SignatureError
from sigsurv.pipelines.signature.tensor import (
    AugmentedPath,
    SignatureTensor,
    augment_path,
    chen_product,
    count_coefficients,
    path_signature,
    segment_signature,
    words,
)

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)


def random_path(rng: np.random.Generator, d: int, n_knots: int, scale: float = 1.0) -> AugmentedPath:
    times = np.cumsum(rng.uniform(0.1, 1.0, n_knots))
    values = rng.normal(scale=scale, size=(n_knots, d - 1))
    return AugmentedPath(times=times, points=np.column_stack([times, values]))


def quadrature_signature(points: np.ndarray, word: tuple[int, ...], s: float) -> float:
    """
    Iterated integral of ``word`` over the knot-parametrized path up to parameter ``s``, by nested
    Gauss-Legendre quadrature on every linear piece (exact for the polynomial integrands).
    """
    if not word:
        return 1.0
    increments = np.diff(points, axis=0)
    total = 0.0
    for seg in range(increments.shape[0]):
        a, b = float(seg), min(seg + 1.0, s)
        if b <= a:
            break
        nodes = (b - a) / 2 * GAUSS_NODES + (a + b) / 2
        inner = [quadrature_signature(points, word[:-1], u) for u in nodes]
        total += (b - a) / 2 * float(np.dot(GAUSS_WEIGHTS, inner)) * increments[seg, word[-1]]
    return total


def join(first: AugmentedPath, second: AugmentedPath) -> AugmentedPath:
    tail = second.points[1:] - second.points[0] + first.points[-1]
    points = np.vstack([first.points, tail])
    return AugmentedPath(times=points[:, 0], points=points)


# ---- coefficient counts ----


def test_count_coefficients_at_bert_scale():
    assert count_coefficients(768, 3) == 453_575_425


@pytest.mark.parametrize("d, level", list(itertools.product(range(2, 11), range(1, 6))))
def test_count_coefficients_matches_brute_force(d, level):
    assert count_coefficients(d, level) == sum(d**k for k in range(level + 1))
    assert count_coefficients(d, level) == len(list(words(d, level)))


def test_count_coefficients_limits():
    assert count_coefficients(2, 62) == 2**63 - 1
    with pytest.raises(OverflowError):
        count_coefficients(2, 63)
    with pytest.raises(ValueError):
        count_coefficients(1, 3)
    with pytest.raises(ValueError):
        count_coefficients(3, 0)


# ---- signature values ----


def test_signature_matches_quadrature_oracle():
    rng = np.random.default_rng(20)
    for _ in range(20):
        d, n_knots, level = int(rng.integers(2, 4)), int(rng.integers(2, 6)), int(rng.integers(1, 4))
        path = random_path(rng, d, n_knots)

        signature = path_signature(path, level)
        oracle = np.array([quadrature_signature(path.points, w, n_knots - 1.0) for w in words(d, level)])

        np.testing.assert_allclose(signature.coeffs, oracle, rtol=1e-8, atol=1e-12)


def test_segment_signature_is_tensor_exponential():
    delta = np.array([0.5, -2.0])
    signature = segment_signature(delta, 3)

    assert signature[()] == 1.0
    assert signature[(1,)] == -2.0
    assert signature[(0, 1)] == pytest.approx(0.5 * -2.0 / 2)
    assert signature[(1, 1, 0)] == pytest.approx(4.0 * 0.5 / 6)


def test_level_one_is_total_increment():
    rng = np.random.default_rng(1)
    path = random_path(rng, 3, 5)

    np.testing.assert_allclose(path_signature(path, 2).levels()[1], path.points[-1] - path.points[0])


def test_chen_identity():
    rng = np.random.default_rng(2)
    for _ in range(100):
        d, level = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        first = random_path(rng, d, int(rng.integers(2, 6)), scale=0.5)
        second = random_path(rng, d, int(rng.integers(2, 6)), scale=0.5)

        joined = path_signature(join(first, second), level)
        product = chen_product(path_signature(first, level), path_signature(second, level))

        assert np.max(np.abs(joined.coeffs - product.coeffs)) < 1e-12


def test_shuffle_identity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        signature = path_signature(random_path(rng, d, int(rng.integers(2, 7))), 2)
        for i, j in itertools.product(range(d), repeat=2):
            lhs = signature[(i,)] * signature[(j,)]
            rhs = signature[(i, j)] + signature[(j, i)]
            assert abs(lhs - rhs) < 1e-12


def test_trivial_tensor_is_identity_of_product():
    rng = np.random.default_rng(4)
    signature = path_signature(random_path(rng, 3, 4), 3)

    np.testing.assert_allclose(chen_product(SignatureTensor.trivial(3, 3), signature).coeffs, signature.coeffs)


def test_chen_product_shape_mismatch():
    with pytest.raises(SignatureError, match="shape mismatch"):
        chen_product(SignatureTensor.trivial(2, 2), SignatureTensor.trivial(3, 2))


# ---- path augmentation ----


def test_unit_interval_is_invariant_to_time_rescaling_and_translation():
    rng = np.random.default_rng(5)
    times = np.array([0.0, 30.0, 45.0, 400.0])
    values = rng.normal(size=(4, 2))

    base = path_signature(augment_path(times, values), 3).coeffs
    stretched = path_signature(augment_path(3.0 * times + 10.0, values + 7.0), 3).coeffs

    np.testing.assert_allclose(stretched, base, atol=1e-12)


def test_days_scale_keeps_raw_times():
    path = augment_path(np.array([0.0, 10.0]), np.array([[1.0], [2.0]]), time_scale="days")

    np.testing.assert_array_equal(path.points, [[0.0, 1.0], [10.0, 2.0]])


def test_single_report_moves_only_in_time():
    path = augment_path(np.array([12.0]), np.array([[3.0, 4.0]]))
    signature = path_signature(path, 2)

    assert signature[(0,)] == 1.0
    assert signature[(0, 0)] == 0.5
    assert signature[(1,)] == 0.0
    assert signature[(1, 2)] == 0.0


def test_augment_path_rejects_empty_series():
    with pytest.raises(SignatureError, match="zero reports"):
        augment_path(np.array([]), np.empty((0, 2)))


def test_augmented_path_requires_increasing_times():
    with pytest.raises(SignatureError, match="strictly increasing"):
        AugmentedPath(times=np.array([0.0, 0.0]), points=np.array([[0.0, 1.0], [0.0, 2.0]]))
