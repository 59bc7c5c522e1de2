import json
import os

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))


@pytest.fixture(scope="session")
def frozen():
    with open(os.path.join(HERE, "fixtures", "frozen.json")) as fh:
        return json.load(fh)
