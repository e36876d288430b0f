import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from attnseg.synthetic import write_golden_sample


@pytest.fixture(scope="session")
def golden_manifest(tmp_path_factory):
    return write_golden_sample(tmp_path_factory.mktemp("golden"))
