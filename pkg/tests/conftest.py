import os
import sys
import warnings

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

warnings.filterwarnings("ignore", category=UserWarning)
warnings.filterwarnings("ignore", message=".*IntegrationWarning.*")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def icosphere3():
    from conewave.geometry import icosphere_mesh

    return icosphere_mesh(3)


@pytest.fixture(scope="session")
def bubble_field():
    from conewave.medium import SpeedField

    return SpeedField("tanh-inclusion", c_plus=1.0, c_minus=0.227, delta=0.2,
                      radius=1.0, center=(0.0, 0.0, 0.0), dim=3)
