import math

import pytest

from filmbounds.params import Params, PhysicalParams, rescale_physical


def test_params_validation():
    Params(sigma=0.5, gamma=0.0)
    with pytest.raises(ValueError):
        Params(sigma=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        Params(sigma=1.0, gamma=1.0)
    with pytest.raises(ValueError):
        Params(sigma=0.5, gamma=-1.0)
    with pytest.raises(ValueError):
        Params(sigma=0.5, gamma=1.0, l1=2.0, l2=1.0)


def test_params_helpers():
    p = Params(sigma=0.2, gamma=3.0, l1=0.5, l2=2.0)
    assert p.sl1 == 0.2 * 0.5
    assert p.area == 1.0
    assert p.with_l2(4.0).l2 == 4.0


def _physical(**overrides):
    base = dict(
        film_thickness=1e-3,
        youngs_modulus=1.0e9,
        poisson_ratio=0.0,
        compression_ratio=0.06,
        bond_energy_density=10.0,
        l1=1.0,
        l2=2.0,
    )
    base.update(overrides)
    return PhysicalParams(**base)


def test_rescale_compression_bound():
    with pytest.raises(ValueError):
        _physical(compression_ratio=1.0)


def test_rescale_sigma_formula():
    # h_f chosen so sigma = h_f / (l1 sqrt(6 eps)) = 0.01 at eps = 0.06
    eps = 0.06
    h_f = 0.01 * math.sqrt(6.0 * eps)
    p = rescale_physical(_physical(film_thickness=h_f, compression_ratio=eps))
    assert p.sigma == pytest.approx(0.01, rel=1e-12)


def test_rescale_gamma_unit_value():
    # gamma_* = E h_f eps^2 / 2 with nu = 0 gives gamma = 1
    eps, h_f, e_mod = 0.06, 1e-3, 2.0e9
    gamma_star = e_mod * h_f * eps**2 / 2.0
    p = rescale_physical(
        _physical(film_thickness=h_f, youngs_modulus=e_mod,
                  compression_ratio=eps, bond_energy_density=gamma_star)
    )
    assert p.gamma == pytest.approx(1.0, rel=1e-12)


def test_rescale_keeps_poisson_factor():
    eps, h_f, e_mod = 0.06, 1e-3, 2.0e9
    gamma_star = e_mod * h_f * eps**2 / 2.0
    nu = 0.3
    p = rescale_physical(
        _physical(film_thickness=h_f, youngs_modulus=e_mod, poisson_ratio=nu,
                  compression_ratio=eps, bond_energy_density=gamma_star)
    )
    assert p.gamma == pytest.approx(1.0 - nu**2, rel=1e-12)


def test_rescale_rejects_out_of_range_sigma():
    with pytest.raises(ValueError):
        rescale_physical(_physical(film_thickness=0.5, compression_ratio=0.01))
