"""Dielectric and magnetic response at imaginary frequency, and sign classes.

All frequencies share the solver's inverse-length unit (hbar = c = 1).  The
potential of a nonmagnetic body is ``V = k^2 (eps_body - eps_medium)``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

CONDUCTOR_EPS = 1e8
KINDS = ("vacuum", "constant", "drude", "plasma", "lorentz")


@dataclass(frozen=True)
class MaterialModel:
    """Analytic response model evaluated on the imaginary frequency axis.

    Parameters
    ----------
    kind : str
        one of ``vacuum``, ``constant``, ``drude``, ``plasma``, ``lorentz``
    eps, mu : float
        constant permittivity and permeability (``constant`` kind; ``mu`` is
        honoured for every kind but only the Mie path accepts ``mu != 1``)
    omega_p, gamma : float
        plasma frequency and relaxation rate (``drude``/``plasma``)
    oscillators : tuple of (strength, frequency, width)
        ``lorentz`` terms ``f w0^2 / (w0^2 + k^2 + g k)``
    """

    kind: str = "vacuum"
    eps: float = 1.0
    mu: float = 1.0
    omega_p: float = 0.0
    gamma: float = 0.0
    oscillators: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown material kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "constant" and self.eps < 1.0:
            raise ValueError("a constant permittivity below 1 violates causality on the imaginary axis")
        if self.mu <= 0:
            raise ValueError("permeability must be positive")

    @property
    def is_magnetic(self):
        return self.mu != 1.0

    def eps_at(self, k):
        return eps_at(self, k)

    def mu_at(self, k):
        return self.mu


def vacuum():
    return MaterialModel("vacuum")


def constant(eps, mu=1.0):
    return MaterialModel("constant", eps=float(eps), mu=float(mu))


def conductor():
    """Large-permittivity stand-in for an ideal conductor."""
    return constant(CONDUCTOR_EPS)


def drude(omega_p, gamma):
    return MaterialModel("drude", omega_p=float(omega_p), gamma=float(gamma))


def plasma(omega_p):
    return MaterialModel("plasma", omega_p=float(omega_p))


def lorentz(oscillators):
    return MaterialModel("lorentz", oscillators=tuple(tuple(map(float, o)) for o in oscillators))


def eps_at(model: MaterialModel, k):
    """Permittivity eps(ik) for k > 0 (scalar or array)."""
    k = np.asarray(k, dtype=float)
    if model.kind == "vacuum":
        out = np.ones_like(k)
    elif model.kind == "constant":
        out = np.full_like(k, model.eps)
    elif model.kind in ("drude", "plasma"):
        g = model.gamma if model.kind == "drude" else 0.0
        out = 1.0 + model.omega_p**2 / (k * (k + g))
    else:
        out = np.ones_like(k)
        for f, w0, g in model.oscillators:
            out = out + f * w0**2 / (w0**2 + k * k + g * k)
    return float(out) if out.ndim == 0 else out


def mu_at(model: MaterialModel, k):
    return model.mu


def potential_strength(k, eps_body, eps_medium):
    """V = k^2 (eps_body - eps_medium); its sign is the body's sign class."""
    return k * k * (eps_body - eps_medium)


class SignClass(Enum):
    POSITIVE = 1
    NEGATIVE = -1
    INDEFINITE = 0

    @property
    def definite(self):
        return self is not SignClass.INDEFINITE

    def __int__(self):
        if not self.definite:
            raise ValueError("indefinite sign class has no numeric value")
        return self.value

    def __neg__(self):
        return SignClass(-self.value)


def sign_class(body: MaterialModel, medium: MaterialModel, k_samples) -> SignClass:
    """Sign of the body's potential over the sampled frequencies.

    Positive when eps_body >= eps_medium and mu_body <= mu_medium at every
    sample with at least one inequality strict; negative for the mirrored
    condition; indefinite otherwise.
    """
    ks = np.atleast_1d(np.asarray(k_samples, dtype=float))
    if ks.size == 0:
        raise ValueError("k_samples must be non-empty")
    de = np.atleast_1d(eps_at(body, ks) - eps_at(medium, ks))
    dm = np.full_like(de, mu_at(body, ks) - mu_at(medium, ks))
    if np.all((de >= 0) & (dm <= 0) & ((de > 0) | (dm < 0))):
        return SignClass.POSITIVE
    if np.all((de <= 0) & (dm >= 0) & ((de < 0) | (dm > 0))):
        return SignClass.NEGATIVE
    return SignClass.INDEFINITE


def from_dict(spec):
    """Build a model from a config mapping such as ``{kind: drude, omega_p: 9}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind is None:
        raise KeyError("kind")
    allowed = {
        "vacuum": set(),
        "constant": {"eps", "mu"},
        "drude": {"omega_p", "gamma"},
        "plasma": {"omega_p"},
        "lorentz": {"oscillators"},
    }
    if kind == "conductor":
        if spec:
            raise KeyError(next(iter(spec)))
        return conductor()
    if kind not in allowed:
        raise ValueError(f"unknown material kind {kind!r}")
    for key in spec:
        if key not in allowed[kind]:
            raise KeyError(key)
    if kind == "lorentz":
        return lorentz(spec.get("oscillators", []))
    return MaterialModel(kind, **spec)
