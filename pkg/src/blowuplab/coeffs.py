"""Coefficient families for the damped wave problem.

Damping laws b(t) carry exact analytic first derivatives; the propagation
speed a(t) and forcing weight f(t, x) are representative equality versions
of the one-sided growth bounds they must satisfy, built on the accumulated
reciprocal damping B(t) supplied by an auxiliary table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "DampingModel",
    "Perturbation",
    "ProblemSpec",
    "SingularEvaluation",
    "eval_b",
    "eval_db",
    "eval_a",
    "eval_f",
]

_KINDS = ("constant", "powerlaw", "perturbed")
_PERTURBATION_KINDS = ("log", "sin")


class SingularEvaluation(ValueError):
    """Forcing weight evaluated at a non-integrable point (delta < 0, r = 0)."""


@dataclass(frozen=True)
class Perturbation:
    """Slowly varying factor v(t) multiplying a power-law damping.

    Supported shapes:
      - ``log``: v(t) = log(e + t) ** exponent, any real exponent
      - ``sin``: v(t) = 1 + (1 + t)**exponent * sin((1 + t)**(-2*exponent)),
        exponent > 0

    Both satisfy t*v'/v -> 0, so they do not move the asymptotic damping
    profile.
    """

    kind: str
    exponent: float

    def __post_init__(self):
        if self.kind not in _PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "sin" and self.exponent <= 0:
            raise ValueError("sin perturbation requires a positive exponent")

    def value(self, t):
        if self.kind == "log":
            return np.log(np.e + t) ** self.exponent
        s = 1.0 + np.asarray(t, dtype=float)
        a = self.exponent
        return 1.0 + s**a * np.sin(s ** (-2.0 * a))

    def derivative(self, t):
        if self.kind == "log":
            g = self.exponent
            return g * np.log(np.e + t) ** (g - 1.0) / (np.e + t)
        s = 1.0 + np.asarray(t, dtype=float)
        a = self.exponent
        phase = s ** (-2.0 * a)
        return a * s ** (a - 1.0) * np.sin(phase) - 2.0 * a * s ** (-a - 1.0) * np.cos(phase)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "exponent": self.exponent}


@dataclass(frozen=True)
class DampingModel:
    """Positive C^1 damping coefficient b(t) with an exact derivative.

    ``constant``: b = mu.  ``powerlaw``: b = mu / (1+t)**kappa with
    kappa in (-1, 1].  ``perturbed``: power law times a catalog
    perturbation, kappa restricted to 0 < |kappa| < 1.
    """

    kind: str
    mu: float
    kappa: float = 0.0
    perturbation: Optional[Perturbation] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown damping kind {self.kind!r}")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.kind == "constant":
            object.__setattr__(self, "kappa", 0.0)
        elif not (-1.0 < self.kappa <= 1.0):
            raise ValueError("kappa must lie in (-1, 1]")
        if self.kind == "perturbed":
            if self.perturbation is None:
                raise ValueError("perturbed damping requires a perturbation")
            if not (0.0 < abs(self.kappa) < 1.0):
                raise ValueError("perturbed damping requires 0 < |kappa| < 1")

    @staticmethod
    def constant(mu: float) -> "DampingModel":
        return DampingModel("constant", mu)

    @staticmethod
    def power_law(mu: float, kappa: float) -> "DampingModel":
        return DampingModel("powerlaw", mu, kappa)

    @staticmethod
    def perturbed_power(mu: float, kappa: float, perturbation: Perturbation) -> "DampingModel":
        return DampingModel("perturbed", mu, kappa, perturbation)

    # -- closed-form facts used by the admissibility checker ---------------

    @property
    def borderline(self) -> bool:
        """True when kappa = 1, where admissibility additionally needs mu > 1."""
        return self.kind != "constant" and self.kappa == 1.0

    @property
    def analytically_admissible(self) -> bool:
        """Exact limit check: lim b'/b^2 > -1 and lim t b'/b < 1."""
        if self.kind == "constant":
            return True
        if self.kappa == 1.0:
            return self.mu > 1.0
        return True

    @property
    def growth_exponent(self) -> float:
        """Exponent q with B(t) comparable to t**q for large t (q = 1 + kappa)."""
        return 1.0 + (0.0 if self.kind == "constant" else self.kappa)

    def b(self, t):
        if self.kind == "constant":
            return self.mu * np.ones_like(np.asarray(t, dtype=float))
        base = self.mu * (1.0 + np.asarray(t, dtype=float)) ** (-self.kappa)
        if self.kind == "powerlaw":
            return base
        return base * self.perturbation.value(t)

    def db(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t)
        base = self.mu * (1.0 + t) ** (-self.kappa)
        dbase = -self.mu * self.kappa * (1.0 + t) ** (-self.kappa - 1.0)
        if self.kind == "powerlaw":
            return dbase
        return dbase * self.perturbation.value(t) + base * self.perturbation.derivative(t)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "mu": self.mu, "kappa": self.kappa}
        if self.perturbation is not None:
            out["perturbation"] = self.perturbation.to_dict()
        return out

    @staticmethod
    def from_dict(data: dict) -> "DampingModel":
        kind = str(data.get("kind", "")).lower()
        pert = data.get("perturbation")
        if isinstance(pert, dict):
            pert = Perturbation(str(pert["kind"]), float(pert.get("exponent", 1.0)))
        return DampingModel(kind, float(data["mu"]), float(data.get("kappa", 0.0)), pert)


def eval_b(model: DampingModel, t) -> float:
    """Damping coefficient b(t), t >= 0."""
    out = model.b(t)
    return float(out) if np.ndim(t) == 0 else out


def eval_db(model: DampingModel, t) -> float:
    """Exact derivative b'(t); no finite differencing involved."""
    out = model.db(t)
    return float(out) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class ProblemSpec:
    """Full parameter set of the nonexistence analysis.

    alpha < 1 controls the speed decay a(t) ~ B(t)**(-alpha); gamma > -1 and
    delta give the forcing growth f(t,x) ~ B(t)**gamma |x|**delta; c_a, c_f
    are the representative constants standing in for the one-sided bounds.
    """

    n: int
    alpha: float
    gamma: float
    delta: float
    p: float
    damping: DampingModel = field(default_factory=lambda: DampingModel.constant(1.0))
    c_a: float = 1.0
    c_f: float = 1.0

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("n must be a positive integer")
        if not self.alpha < 1.0:
            raise ValueError("alpha must be less than 1")
        if not self.gamma > -1.0:
            raise ValueError("gamma must exceed -1")
        if not self.p > 1.0:
            raise ValueError("p must exceed 1")
        if self.c_a <= 0 or self.c_f <= 0:
            raise ValueError("c_a and c_f must be positive")

    @property
    def p_conjugate(self) -> float:
        return self.p / (self.p - 1.0)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "alpha": self.alpha, "gamma": self.gamma,
            "delta": self.delta, "p": self.p, "damping": self.damping.to_dict(),
            "c_a": self.c_a, "c_f": self.c_f,
        }

    @staticmethod
    def from_dict(data: dict) -> "ProblemSpec":
        return ProblemSpec(
            n=int(data["n"]),
            alpha=float(data["alpha"]),
            gamma=float(data["gamma"]),
            delta=float(data["delta"]),
            p=float(data["p"]),
            damping=DampingModel.from_dict(data["damping"]),
            c_a=float(data.get("c_a", 1.0)),
            c_f=float(data.get("c_f", 1.0)),
        )


def _resolve_shift(aux, shift: Optional[float]) -> float:
    if shift is not None:
        return float(shift)
    return aux.B_unit_shift


def eval_a(spec: ProblemSpec, t, aux, shift: Optional[float] = None) -> float:
    """Representative speed a(t) = c_a * (B(t) + B0)**(-alpha).

    B0 defaults to B(1) so the formula stays finite at t = 0 when alpha > 0;
    only the large-time growth rate matters downstream, and the shift leaves
    it untouched.  alpha = 0 short-circuits to the constant c_a.
    """
    if spec.alpha == 0.0:
        return spec.c_a if np.ndim(t) == 0 else spec.c_a * np.ones_like(np.asarray(t, float))
    B0 = _resolve_shift(aux, shift)
    out = spec.c_a * (aux.B_at(t) + B0) ** (-spec.alpha)
    return float(out) if np.ndim(t) == 0 else out


def eval_f(spec: ProblemSpec, t, r, aux, shift: Optional[float] = None) -> float:
    """Representative forcing weight f = c_f * (B(t) + B0)**gamma * r**delta."""
    scalar = np.ndim(t) == 0 and np.ndim(r) == 0
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("radius must be nonnegative")
    if spec.delta < 0 and np.any(r_arr == 0):
        raise SingularEvaluation("forcing weight is singular at r = 0 for delta < 0")
    if spec.gamma == 0.0:
        tpart = 1.0
    else:
        B0 = _resolve_shift(aux, shift)
        tpart = (aux.B_at(t) + B0) ** spec.gamma
    rpart = np.ones_like(r_arr) if spec.delta == 0.0 else r_arr**spec.delta
    out = spec.c_f * tpart * rpart
    return float(out) if scalar else out
