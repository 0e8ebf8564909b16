from __future__ import annotations

import pytest

from settings import Settings


def test_defaults():
    settings = Settings.from_env(env={})
    assert settings.precision_bits == 256
    assert settings.sig_digits == 10
    assert settings.workers >= 1
    assert settings.log_level == "WARNING"


def test_values_from_env():
    env = {
        "YAMABOUND_PRECISION_BITS": "512",
        "YAMABOUND_DIGITS": "15",
        "YAMABOUND_WORKERS": "3",
        "YAMABOUND_LOG_LEVEL": "debug",
    }
    assert Settings.from_env(env=env) == Settings(512, 15, 3, "DEBUG")


def test_blank_values_fall_back():
    assert Settings.from_env(env={"YAMABOUND_DIGITS": " "}).sig_digits == 10


@pytest.mark.parametrize("env", [
    {"YAMABOUND_PRECISION_BITS": "12"},
    {"YAMABOUND_DIGITS": "ten"},
    {"YAMABOUND_WORKERS": "0"},
    {"YAMABOUND_LOG_LEVEL": "LOUD"},
])
def test_invalid_values(env):
    with pytest.raises(ValueError):
        Settings.from_env(env=env)
