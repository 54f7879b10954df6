import numpy as np
import pytest

from kerrdimer.experiments import sweep_loss
from kerrdimer.model import preset


@pytest.fixture(scope="session")
def fig2():
    params, _ = preset("paper_fig2")
    return params


@pytest.fixture(scope="session")
def loss_sweep(fig2):
    """Shared dual-backend loss sweep over the figure range."""
    return sweep_loss(fig2, np.linspace(0.0, 12.0, 61))
