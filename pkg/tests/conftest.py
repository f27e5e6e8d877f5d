import pytest

from padiclf.pipeline import JobConfig, build_symbol, lift_symbol, _DATA


def _config(name):
    return str(_DATA / "configs" / f"{name}.json")


@pytest.fixture(scope="session")
def control_config():
    return JobConfig.load(_config("control_11a_p5"))


@pytest.fixture(scope="session")
def control_symbol(control_config):
    return build_symbol(control_config)


@pytest.fixture(scope="session")
def control_lift(control_config, control_symbol):
    return lift_symbol(control_symbol, control_config)


@pytest.fixture(scope="session")
def wt4_config():
    return JobConfig.load(_config("wt4_lv5_p5"))


@pytest.fixture(scope="session")
def wt4_symbol(wt4_config):
    return build_symbol(wt4_config)


@pytest.fixture(scope="session")
def wt4_lift(wt4_config, wt4_symbol):
    return lift_symbol(wt4_symbol, wt4_config)
