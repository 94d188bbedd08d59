import pytest

from sigsurv.common.config.run_config import RunConfig
from sigsurv.pipelines.synthetic.generator import SynthConfig, generate_cohort
from sigsurv.pipelines.synthetic.load import write_synthetic


@pytest.fixture(scope="module")
def synthetic_inputs(tmp_path_factory):
    """Fixture writing a small synthetic vector-mode cohort once per module."""
    out_dir = tmp_path_factory.mktemp("inputs")
    cohort, truth = generate_cohort(SynthConfig(n_patients=200, p=6, latent_dim=2, trend_strength=1.0, seed=4))
    return write_synthetic(cohort, truth, out_dir)


@pytest.fixture
def run_config(synthetic_inputs, tmp_path):
    """Fixture providing a fast run configuration over the synthetic inputs."""
    return RunConfig(
        embeddings_path=synthetic_inputs["embeddings"],
        outcomes_path=synthetic_inputs["outcomes"],
        out_dir=tmp_path / "run",
        seed=3,
        n_test_folds=2,
        cv_folds=3,
        p_bar=3,
        signature_level=2,
        lambda_grid={"kind": "log", "start": 1.0, "stop": 16.0, "num": 3},
        report_counts=(1, 2, 4),
        n_jobs=1,
    )
