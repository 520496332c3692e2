from pathlib import Path

import pytest

import ridgeline as rl

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def clx() -> rl.MachineSpec:
    return rl.MachineSpec("clx", 4.2e12, 105e9, 12e9)


@pytest.fixture
def mlp4096() -> rl.MlpSpec:
    return rl.MlpSpec(layers=(rl.LayerSpec(4096, 4096),))


@pytest.fixture
def ideal_allreduce() -> rl.AllReduceModel:
    return rl.AllReduceModel(rl.AllReduceAlgorithm.IDEAL)


@pytest.fixture
def machine_config_path() -> Path:
    return DATA_DIR / "clx.json"


@pytest.fixture
def mlp_config_path() -> Path:
    return DATA_DIR / "mlp512.json"


@pytest.fixture
def raw_config_path() -> Path:
    return DATA_DIR / "raw_balance.json"
