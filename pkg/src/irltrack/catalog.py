"""Named registries for plants and references used by experiment configs.

Entries are builder callables taking the config section's extra keys (a
plain dict of floats/strings) and returning a validated object.  Tests and
downstream users may register additional entries.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .models import AffinePlant, ReferenceModel

_PLANTS: dict = {}
_REFERENCES: dict = {}


def register_plant(name: str):
    def deco(builder):
        _PLANTS[name] = builder
        return builder
    return deco


def register_reference(name: str):
    def deco(builder):
        _REFERENCES[name] = builder
        return builder
    return deco


def make_plant(name: str, params: dict | None = None) -> AffinePlant:
    try:
        builder = _PLANTS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown plant {name!r}; available: {sorted(_PLANTS)}") from None
    return builder(params or {})


def make_reference(name: str, params: dict | None = None) -> ReferenceModel:
    try:
        builder = _REFERENCES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown reference {name!r}; available: {sorted(_REFERENCES)}") from None
    return builder(params or {})


def plant_names():
    return sorted(_PLANTS)


def reference_names():
    return sorted(_REFERENCES)


@register_plant("linear_osc")
def _linear_osc(params):
    omega = float(params.get("omega", 0.5))
    gain = float(params.get("gain", 1.0))
    A = np.array([[0.0, omega], [-omega, 0.0]])
    B = np.array([[0.0], [gain]])
    return AffinePlant(n=2, m=1, f=lambda x: A @ x, g=lambda x: B.copy(),
                       name="linear_osc").validate()


@register_plant("zero")
def _zero_plant(params):
    n = int(params.get("n", 1))
    m = int(params.get("m", 1))
    return AffinePlant(n=n, m=m, f=lambda x: np.zeros(n),
                       g=lambda x: np.zeros((n, m)), name="zero").validate()


@register_plant("integrator")
def _integrator(params):
    n = int(params.get("n", 1))
    return AffinePlant(n=n, m=n, f=lambda x: np.zeros(n), g=lambda x: np.eye(n),
                       name="integrator").validate()


@register_reference("zero")
def _zero_ref(params):
    n = int(params.get("n", 1))
    return ReferenceModel(H=lambda xd: np.zeros(n), x_d0=np.zeros(n),
                          name="zero").validate()


@register_reference("harmonic")
def _harmonic_ref(params):
    omega = float(params.get("omega", 0.5))
    x0 = params.get("x_d0", (1.0, 0.0))
    if isinstance(x0, str):
        x0 = [float(tok) for tok in x0.replace(",", " ").split()]
    H = np.array([[0.0, omega], [-omega, 0.0]])
    return ReferenceModel(H=lambda xd: H @ xd, x_d0=np.asarray(x0, dtype=float),
                          name="harmonic").validate()
