import pytest

from hinfill import derive_schema, train_builtin_lm, train_classifier
from hinfill.fixture import build_hypothesis_fixture, build_lp_fixture, build_planted_fixture


@pytest.fixture(scope="session")
def planted():
    hin, labels = build_planted_fixture()
    return hin, labels


@pytest.fixture(scope="session")
def planted_hin(planted):
    return planted[0]


@pytest.fixture(scope="session")
def planted_schema(planted_hin):
    return derive_schema(planted_hin)


@pytest.fixture(scope="session")
def planted_lm(planted_hin):
    return train_builtin_lm(planted_hin, order=3, smoothing=0.1, dim=32, epochs=3, seed=7)


@pytest.fixture(scope="session")
def planted_classifier(planted_hin, planted_lm):
    return train_classifier(planted_hin, planted_lm, lam=1.0, lr=0.5, epochs=40, seed=7)


@pytest.fixture(scope="session")
def lp_hin():
    return build_lp_fixture()


@pytest.fixture(scope="session")
def hyp_hin():
    return build_hypothesis_fixture()
