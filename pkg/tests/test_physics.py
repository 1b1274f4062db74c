import warnings

import pytest

from evapfront.errors import ConfigError
from evapfront.physics import (
    MaterialProps, derive_interface_constants, preset,
)


def _mat(rho, cp, k=1.0):
    return MaterialProps(rho=rho, cp=cp, k=k)


def test_beta_is_rho_times_cp():
    m = _mat(3.5, 2.0)
    assert m.beta == 3.5 * 2.0


@pytest.mark.parametrize("field,value", [("rho", -1.0), ("rho", 0.0),
                                         ("cp", 0.0), ("k", -0.1)])
def test_material_validation(field, value):
    kwargs = {"rho": 1.0, "cp": 1.0, "k": 1.0}
    kwargs[field] = value
    with pytest.raises(ConfigError):
        MaterialProps(**kwargs)


def test_zero_conduction_warns_but_builds():
    with pytest.warns(UserWarning, match="zero conduction"):
        m = MaterialProps(rho=1.0, cp=1.0, k=0.0)
    assert m.k == 0.0


def test_interface_constants_arithmetic():
    # rho_v=1, rho_l=2, cp_v=1, cp_l=3, t_delta=2, h_lv=5.
    vapor = _mat(1.0, 1.0)
    liquid = _mat(2.0, 3.0)
    ip = derive_interface_constants(vapor, liquid, t_delta=2.0, h_lv=5.0)
    assert ip.gamma == 0.5
    assert ip.c0 == (6.0 * 0.5 - 1.0) * 4.0 == 8.0
    assert ip.c1 == 2.0 * 2.0 * 1.0 * 5.0 == 20.0


def test_c0_zero_when_heat_capacities_match():
    with pytest.warns(UserWarning, match="cp_l <= cp_v"):
        ip = derive_interface_constants(_mat(1.0, 2.0), _mat(4.0, 2.0),
                                        t_delta=3.0, h_lv=1.0)
    assert ip.c0 == 0.0


def test_gamma_unity_for_equal_densities():
    with pytest.warns(UserWarning, match="gamma"):
        ip = derive_interface_constants(_mat(2.0, 1.0), _mat(2.0, 2.0),
                                        t_delta=1.0, h_lv=1.0)
    assert ip.gamma == 1.0


def test_matches_independent_recomputation():
    vapor = _mat(0.59, 2080.0)
    liquid = _mat(958.0, 4217.0)
    ip = derive_interface_constants(vapor, liquid, t_delta=373.15, h_lv=2.26e6)
    gamma = 0.59 / 958.0
    assert ip.gamma == gamma
    assert ip.c0 == (958.0 * 4217.0 * gamma - 0.59 * 2080.0) * 373.15 ** 2
    assert ip.c1 == 2.0 * 373.15 * 0.59 * 2.26e6


def test_negative_t_delta_rejected():
    with pytest.raises(ConfigError):
        derive_interface_constants(_mat(1, 1), _mat(2, 2), t_delta=-1.0, h_lv=1.0)


def test_zero_t_delta_warns():
    with pytest.warns(UserWarning, match="t_delta = 0"):
        ip = derive_interface_constants(_mat(1, 1), _mat(2, 2),
                                        t_delta=0.0, h_lv=1.0)
    assert ip.c1 == 0.0


def test_nonpositive_latent_heat_rejected():
    with pytest.raises(ConfigError):
        derive_interface_constants(_mat(1, 1), _mat(2, 2), t_delta=1.0, h_lv=0.0)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("condensation")


@pytest.mark.parametrize("name", ["stefan", "sucking"])
def test_presets_validate(name):
    # Deferred import: config pulls in the whole solver stack.
    from evapfront.config import document_to_manifest, validate_manifest
    doc = preset(name)
    manifest = document_to_manifest(doc)
    validate_manifest(manifest)


def test_stefan_layout_vapor_left():
    doc = preset("stefan")
    dom = doc["domain"]
    assert dom["x0"] < dom["x_delta0"] < dom["xn"]
    # Vapor is the superheated phase adjacent to the left boundary.
    assert doc["initial"]["vapor"]["kind"] == "stefan_similarity"
    assert doc["initial"]["vapor"]["wall"] > doc["interface"]["t_delta"]
    assert doc["initial"]["liquid"] == {"kind": "uniform",
                                        "value": doc["interface"]["t_delta"]}


def test_sucking_liquid_superheated_everywhere():
    doc = preset("sucking")
    t_delta = doc["interface"]["t_delta"]
    liq = doc["initial"]["liquid"]
    assert liq["kind"] == "linear"
    assert min(liq["left"], liq["right"]) >= t_delta


def test_derivation_is_pure():
    vapor = _mat(1.0, 1.0)
    liquid = _mat(2.0, 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = derive_interface_constants(vapor, liquid, 2.0, 5.0)
        b = derive_interface_constants(vapor, liquid, 2.0, 5.0)
    assert a == b
