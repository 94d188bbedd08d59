import numpy as np
import pytest

from sigsurv.common.exceptions import CompressionError
from sigsurv.pipelines.compression.transform import CompressionMap, fit_pca, project, project_cohort
from tests.conftest import random_vector_cohort


@pytest.fixture
def embeddings():
    """Fixture providing 300 anisotropic vectors in 6 dimensions."""
    rng = np.random.default_rng(0)
    return rng.normal(size=(300, 6)) * np.array([5.0, 3.0, 2.0, 1.0, 0.5, 0.1]) + 7.0


def test_fit_pca_shapes_and_orthonormality(embeddings):
    cmap = fit_pca(embeddings, 3)

    assert (cmap.p, cmap.p_bar) == (6, 3)
    np.testing.assert_allclose(cmap.components @ cmap.components.T, np.eye(3), atol=1e-12)
    assert np.all(np.diff(cmap.explained_variance) <= 0)
    np.testing.assert_allclose(cmap.mean, embeddings.mean(axis=0))


def test_component_signs_are_fixed(embeddings):
    cmap = fit_pca(embeddings, 4)

    pivots = cmap.components[np.arange(4), np.argmax(np.abs(cmap.components), axis=1)]
    assert np.all(pivots > 0)


def test_fit_pca_is_deterministic(embeddings):
    first, second = fit_pca(embeddings, 3), fit_pca(embeddings, 3)

    np.testing.assert_array_equal(first.components, second.components)


def test_full_rank_projection_preserves_distances(embeddings):
    cmap = fit_pca(embeddings, 6)
    coords = project(cmap, embeddings)

    np.testing.assert_allclose(
        np.linalg.norm(coords[0] - coords[1]), np.linalg.norm(embeddings[0] - embeddings[1]), rtol=1e-10
    )


def test_projected_training_data_is_centered(embeddings):
    coords = project(fit_pca(embeddings, 3), embeddings)

    np.testing.assert_allclose(coords.mean(axis=0), 0.0, atol=1e-10)


def test_project_single_vector_matches_matrix(embeddings):
    cmap = fit_pca(embeddings, 2)

    np.testing.assert_allclose(project(cmap, embeddings[5]), project(cmap, embeddings)[5])


def test_whitened_coordinates_have_unit_variance(embeddings):
    coords = project(fit_pca(embeddings, 3, whiten=True), embeddings)

    np.testing.assert_allclose(coords.var(axis=0, ddof=1), 1.0, rtol=1e-10)


@pytest.mark.parametrize("p_bar", [1, 3, 6])
def test_projection_never_expands_centered_norm(embeddings, p_bar):
    cmap = fit_pca(embeddings, p_bar)
    unseen = np.random.default_rng(1).normal(size=(200, 6)) * 10.0

    projected = np.linalg.norm(project(cmap, unseen), axis=1)
    centered = np.linalg.norm(unseen - cmap.mean, axis=1)
    assert np.all(projected <= centered + 1e-12)


def test_captured_variance_grows_with_p_bar(embeddings):
    captured = [fit_pca(embeddings, p_bar).explained_variance.sum() for p_bar in range(1, 7)]

    assert np.all(np.diff(captured) >= 0)
    np.testing.assert_allclose(captured[-1], np.var(embeddings, axis=0, ddof=1).sum(), rtol=1e-10)


def test_known_diagonal_covariance_is_recovered():
    rng = np.random.default_rng(11)
    data = rng.normal(size=(20_000, 4)) * np.sqrt([4.0, 1.0, 0.25, 0.0625])

    cmap = fit_pca(data, 3)

    np.testing.assert_allclose(cmap.explained_variance, [4.0, 1.0, 0.25], rtol=0.05)
    reference = np.sort(np.linalg.eigvalsh(np.cov(data, rowvar=False)))[::-1][:3]
    np.testing.assert_allclose(cmap.explained_variance, reference, rtol=1e-8)


def test_map_depends_on_training_vectors_only(embeddings):
    train, test = embeddings[:200], embeddings[200:].copy()
    cmap = fit_pca(train, 3)
    before = (cmap.mean.copy(), cmap.components.copy(), cmap.explained_variance.copy())

    project(cmap, test)
    test[0] += 1e3
    project(cmap, test)
    refit = fit_pca(train, 3)

    for fitted, saved, again in zip((cmap.mean, cmap.components, cmap.explained_variance), before,
                                    (refit.mean, refit.components, refit.explained_variance), strict=True):
        np.testing.assert_array_equal(fitted, saved)
        np.testing.assert_array_equal(again, saved)


@pytest.mark.parametrize(
    "data, p_bar, message",
    [
        (np.ones((10, 3)), 2, "zero-variance"),
        (np.random.default_rng(0).normal(size=(3, 5)), 3, "insufficient samples"),
        (np.random.default_rng(0).normal(size=(10, 3)), 4, "p_bar must lie"),
        (np.random.default_rng(0).normal(size=(10, 3)), 0, "p_bar must lie"),
    ],
)
def test_fit_pca_errors(data, p_bar, message):
    with pytest.raises(CompressionError, match=message):
        fit_pca(data, p_bar)


def test_project_dimension_mismatch(embeddings):
    with pytest.raises(CompressionError, match="dimension mismatch"):
        project(fit_pca(embeddings, 2), np.zeros(5))


def test_map_rejects_non_orthonormal_rows():
    with pytest.raises(CompressionError, match="orthonormal"):
        CompressionMap(mean=np.zeros(2), components=np.array([[1.0, 1.0]]), explained_variance=np.array([1.0]))


def test_project_cohort_keeps_times_and_outcomes():
    cohort = random_vector_cohort(30, 5, seed=2)
    cmap = fit_pca(cohort.all_embeddings(), 2)

    projected = project_cohort(cmap, cohort)

    assert projected.embedding_dim == 2
    assert projected.patient_ids == cohort.patient_ids
    np.testing.assert_array_equal(projected.get("P000").times, cohort.get("P000").times)
    np.testing.assert_allclose(projected.all_embeddings(), project(cmap, cohort.all_embeddings()))
