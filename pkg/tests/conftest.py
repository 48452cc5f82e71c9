import shutil
import tempfile
from pathlib import Path

import pytest

from riskscale.core.claims import Exponential, Hyperexponential, RiskModel
from riskscale.core.model_config import load_model_config

DATA = Path(__file__).parent / "data"


@pytest.fixture()
def tmpdir():
    d = Path(tempfile.mkdtemp(prefix="riskscale-"))
    try:
        yield d
    finally:
        shutil.rmtree(d, ignore_errors=True)


@pytest.fixture()
def data_dir():
    return DATA


@pytest.fixture()
def exp_model():
    # mu = 2, c = 3/4, lam = 1/2
    return RiskModel(c=0.75, lam=0.5, claims=Exponential(2.0))


@pytest.fixture()
def hyperexp2_model():
    # f = (2/3)e^-x + (2/3)e^-2x, lam = 1, loading 1 (c = 5/3)
    claims = Hyperexponential.from_density([2 / 3, 2 / 3], [1.0, 2.0])
    return RiskModel.from_loading(1.0, claims, 1.0)


@pytest.fixture()
def hyperexp3_model():
    claims = Hyperexponential.from_density([12 / 83, 42 / 83, 150 / 83], [1.0, 2.0, 3.0])
    return RiskModel(c=1.0, lam=1.0, claims=claims)


@pytest.fixture()
def oscillating_model():
    # damped cosine density, decay 1, phase 2, frequency 20, lam = 1, loading 1
    return load_model_config(DATA / "oscillating.yaml").build()
