import configparser
import pathlib
import tempfile

import pytest

config_path = pathlib.Path(__file__).parent / "config_files"


@pytest.fixture
def parsac_ini() -> str:
    return str(config_path / "parsac.ini")


@pytest.fixture
def parsac_config(parsac_ini) -> configparser.ConfigParser:
    config = configparser.ConfigParser()
    config.read(parsac_ini)
    return config


@pytest.fixture
def temp_file() -> str:
    with tempfile.NamedTemporaryFile() as f:
        yield f.name
