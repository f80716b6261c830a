import numpy as np
import pytest

from twrpower.channels import ChannelSet


def scalar_channels(h1r=1.0, h2r=1.0, hr1=1.0, hr2=1.0, s_r=1.0, s1=1.0, s2=1.0):
    m = lambda v: np.array([[v]], dtype=complex)
    return ChannelSet(m(h1r), m(h2r), m(hr1), m(hr2), s_r, s1, s2)


@pytest.fixture
def unit_scalar():
    return scalar_channels()
