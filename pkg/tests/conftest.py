pytest_plugins = [
    "tests.fixtures.scenes",
    "tests.fixtures.config",
]
