"""Parametric families of stable tail dependence functions."""

from taildep.models.base import ModelFamily, SpectralMeasure
from taildep.models.elliptical import (
    NU_MAX,
    NU_MIN,
    EllipticalFamily,
    EllipticalParams,
    angular_norm,
    ell_invert,
    ell_l,
    ell_partials,
    ell_phi,
    ell_psi,
    ell_R,
)
from taildep.models.two_point import (
    J,
    TwoPointFamily,
    TwoPointParams,
    factor_to_tp,
    tp_invert,
    tp_l,
    tp_partials,
    tp_phi,
    tp_phi_jacobian,
    tp_R,
    tp_spectral,
    tp_to_factor,
)

FAMILIES = {"two-point": TwoPointFamily, "elliptical": EllipticalFamily}


def get_family(name):
    try:
        return FAMILIES[name]()
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


__all__ = [
    "ModelFamily",
    "SpectralMeasure",
    "TwoPointFamily",
    "TwoPointParams",
    "EllipticalFamily",
    "EllipticalParams",
    "NU_MIN",
    "NU_MAX",
    "FAMILIES",
    "get_family",
    "J",
    "tp_l",
    "tp_R",
    "tp_spectral",
    "tp_phi",
    "tp_phi_jacobian",
    "tp_invert",
    "tp_partials",
    "factor_to_tp",
    "tp_to_factor",
    "ell_R",
    "ell_l",
    "ell_partials",
    "ell_phi",
    "ell_psi",
    "ell_invert",
    "angular_norm",
]
