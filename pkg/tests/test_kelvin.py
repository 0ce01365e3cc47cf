import numpy as np
import pytest
from numpy.testing import assert_allclose

from hartree.errors import DomainError
from hartree.kelvin import kelvin, kelvin_deviation, sphere_invariance_scan
from hartree.model import BubbleSpec, bubble
from hartree.radial import RadialField


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_fixed_sphere(grid6, delta):
    U = bubble(6, BubbleSpec(delta), grid6)
    assert kelvin_deviation(U, delta) <= 1e-4


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_mapping_law(grid6, delta, lam):
    U = bubble(6, BubbleSpec(delta), grid6)
    V = bubble(6, BubbleSpec(lam * lam / delta), grid6)
    K = kelvin(U, lam)
    r = grid6.nodes
    m = (r >= lam * lam / grid6.R_max) & (r <= 25.0)
    assert np.max(np.abs(K.values[m] - V.values[m])) / V.values[0] <= 1e-4


def test_kelvin_value_at_origin(grid6):
    U = bubble(6, BubbleSpec(1.0), grid6)
    K = kelvin(U, 2.0)
    assert_allclose(K.values[0], bubble(6, BubbleSpec(4.0), grid6).values[0], rtol=1e-3)
    g = RadialField.from_function(grid6, lambda r: np.exp(-r * r))
    assert kelvin(g, 1.0).values[0] == 0.0


def test_kelvin_errors(grid6):
    U = bubble(6, BubbleSpec(1.0), grid6)
    for lam in (0.0, -1.0, np.inf):
        with pytest.raises(DomainError):
            kelvin(U, lam)
    slow = RadialField.from_function(grid6, lambda r: 1 / (1 + r), 1.0)
    with pytest.raises(DomainError):
        kelvin(slow, 1.0)


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_scan_finds_radius(grid6, delta):
    U = bubble(6, BubbleSpec(delta), grid6)
    scan = sphere_invariance_scan(U, (0.1 * delta, 10 * delta), 48)
    assert abs(scan.argmin_lambda - delta) / delta < 0.01
    devs = np.array(scan.deviations)
    assert np.all(devs >= 0)
    lams = np.array(scan.lambdas)
    assert np.all(devs[np.abs(lams / delta - 1) > 0.05] > 10 * scan.min_deviation)


def test_scan_errors(grid6_coarse):
    U = bubble(6, BubbleSpec(1.0), grid6_coarse)
    with pytest.raises(DomainError):
        sphere_invariance_scan(U, (2.0, 1.0))
    with pytest.raises(DomainError):
        sphere_invariance_scan(U, (0.5, 2.0), 2)
