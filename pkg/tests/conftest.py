import numpy as np
import pytest

from legal_sbd.crf import TrainingConfig
from legal_sbd.pipeline import train_on_documents
from legal_sbd.synthetic import make_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """A dozen plain synthetic documents, enough for pipeline tests."""
    return make_corpus(12, seed=101)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    """A quickly trained model for serialization/prediction tests."""
    return train_on_documents(
        small_corpus, TrainingConfig(max_iterations=40, convergence_tol=1e-7)
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
