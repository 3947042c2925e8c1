"""Radial finite-difference solver with blow-up detection.

Integrates u_tt - a(t) Lap u + b(t) u_t = f(t,r) |u|^p for radial data with
an explicit leapfrog scheme; the damping term is averaged between time
levels (semi-implicit), the radial Laplacian uses the symmetric ghost cell
at the origin, and homogeneous Dirichlet closes the outer edge.  Runs stop
at a sup-norm threshold (lifespan estimate by interpolation of the
crossing) or at the horizon.  A detected blow-up is numerical evidence of
nonexistence, not a proof, and says nothing about the mechanism.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .auxcalc import AuxTable, _plain_panel, build_aux_table
from .coeffs import ProblemSpec
from .functional import data_functional, sphere_area
from .quadrature import integrate_adaptive

__all__ = [
    "GaussianData",
    "SimSpec",
    "SimOutcome",
    "CflViolation",
    "run",
    "detect_blowup",
    "sweep_p",
    "convergence_test",
    "time_order_ratio",
]


class CflViolation(ValueError):
    """Requested time step exceeds the stability limit of the explicit scheme."""


@dataclass(frozen=True)
class GaussianData:
    """Radial Gaussian profile amplitude * exp(-(r/width)^2)."""

    amplitude: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def __call__(self, r):
        return self.amplitude * np.exp(-((np.asarray(r, float) / self.width) ** 2))

    def effective_radius(self, floor: float = 1e-14) -> float:
        """Radius beyond which the profile falls below ``floor``."""
        if self.amplitude == 0.0:
            return 0.0
        return self.width * math.sqrt(max(math.log(abs(self.amplitude) / floor), 0.0))

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "width": self.width}

    @staticmethod
    def from_dict(d: dict) -> "GaussianData":
        return GaussianData(float(d.get("amplitude", 0.0)), float(d.get("width", 1.0)))


@dataclass(frozen=True)
class SimSpec:
    """One radial simulation: problem, grid, horizon, data, thresholds.

    ``allow_boundary_reflections`` switches off the support-containment
    check at setup: decay studies deliberately run in a closed box where
    the reflecting Dirichlet wall plus damping drain the solution.
    """

    problem: ProblemSpec
    r_max: float
    J: int
    T_max: float
    cfl: float = 0.5
    dt: Optional[float] = None
    blowup_threshold: float = 1e6
    u0: GaussianData = field(default_factory=GaussianData)
    u1: GaussianData = field(default_factory=GaussianData)
    nonlinearity: float = 1.0
    allow_boundary_reflections: bool = False

    def __post_init__(self):
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.J < 16:
            raise ValueError("need at least 16 radial cells")
        if self.T_max <= 0:
            raise ValueError("T_max must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.problem.delta < 0:
            raise ValueError("simulation needs delta >= 0 (forcing singular at r = 0)")

    @property
    def dr(self) -> float:
        return self.r_max / self.J

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(), "r_max": self.r_max, "J": self.J,
            "T_max": self.T_max, "cfl": self.cfl, "dt": self.dt,
            "blowup_threshold": self.blowup_threshold,
            "data": {"u0": self.u0.to_dict(), "u1": self.u1.to_dict()},
            "nonlinearity": self.nonlinearity,
            "allow_boundary_reflections": self.allow_boundary_reflections,
        }

    @staticmethod
    def from_dict(d: dict) -> "SimSpec":
        data = d.get("data", {})
        return SimSpec(
            problem=ProblemSpec.from_dict(d["problem"]),
            r_max=float(d["r_max"]), J=int(d["J"]), T_max=float(d["T_max"]),
            cfl=float(d.get("cfl", 0.5)),
            dt=(None if d.get("dt") is None else float(d["dt"])),
            blowup_threshold=float(d.get("blowup_threshold", 1e6)),
            u0=GaussianData.from_dict(data.get("u0", {})),
            u1=GaussianData.from_dict(data.get("u1", {})),
            nonlinearity=float(d.get("nonlinearity", 1.0)),
            allow_boundary_reflections=bool(d.get("allow_boundary_reflections", False)),
        )


@dataclass(frozen=True)
class SimOutcome:
    """Verdict plus the sup-norm and energy traces of one run."""

    verdict: str                 # "blowup" | "survived" | "boundary_contaminated"
    t_star: Optional[float]
    hard_overflow: bool
    times: np.ndarray
    sup_norms: np.ndarray
    energies: np.ndarray
    dt: float
    dr: float
    r: np.ndarray                # radial grid
    final_u: np.ndarray          # field at the last completed step
    note: str = "numerical evidence only"


def detect_blowup(times: Sequence[float], sups: Sequence[float], threshold: float) -> Optional[float]:
    """First threshold crossing of a sampled trace, linearly interpolated."""
    times = np.asarray(times, float)
    sups = np.asarray(sups, float)
    above = np.nonzero(sups >= threshold)[0]
    if len(above) == 0:
        return None
    i = int(above[0])
    if i == 0:
        return float(times[0])
    t0, t1 = times[i - 1], times[i]
    s0, s1 = sups[i - 1], sups[i]
    if not np.isfinite(s1) or s1 == s0:
        return float(t1)
    return float(t0 + (threshold - s0) / (s1 - s0) * (t1 - t0))


def _radial_laplacian(u: np.ndarray, dr: float, n: int) -> np.ndarray:
    """u_rr + (n-1)/r u_r with the symmetric ghost cell at the origin.

    At r = 0 the radial term tends to (n-1) u_rr, so the whole operator
    becomes 2n (u_1 - u_0)/dr^2 there.  The outer edge is Dirichlet and is
    handled by the caller (u[-1] = 0 maintained).
    """
    lap = np.empty_like(u)
    inner = slice(1, -1)
    r = np.arange(1, len(u) - 1) * dr
    u_rr = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dr**2
    u_r = (u[2:] - u[:-2]) / (2.0 * dr)
    lap[inner] = u_rr + (n - 1) / r * u_r
    lap[0] = 2.0 * n * (u[1] - u[0]) / dr**2
    lap[-1] = 0.0
    return lap


def _coefficient_arrays(prob: ProblemSpec, aux: AuxTable, steps: int, dt: float):
    """a, b and the forcing time factor at every step time, precomputed."""
    ts = np.arange(steps + 1) * dt
    b = np.asarray(prob.damping.b(ts), float)
    if prob.alpha == 0.0 and prob.gamma == 0.0:
        a = np.full_like(ts, prob.c_a)
        ftime = np.full_like(ts, prob.c_f)
        return ts, a, b, ftime
    # accumulate B across the uniform step grid with one panel per step
    dB = np.array([
        _plain_panel(lambda x: 1.0 / prob.damping.b(x), float(ts[i]), float(ts[i + 1]))[0]
        for i in range(steps)
    ])
    B = np.concatenate(([0.0], np.cumsum(dB))) + aux.B_unit_shift
    a = prob.c_a * B ** (-prob.alpha) if prob.alpha != 0.0 else np.full_like(ts, prob.c_a)
    ftime = prob.c_f * B**prob.gamma if prob.gamma != 0.0 else np.full_like(ts, prob.c_f)
    return ts, a, b, ftime


def run(spec: SimSpec, aux: Optional[AuxTable] = None) -> SimOutcome:
    """Integrate one radial problem to blow-up, contamination or the horizon."""
    prob = spec.problem
    if aux is None:
        aux = build_aux_table(prob.damping, max(2.0, spec.T_max) * 1.01)
    dr = spec.dr
    n = prob.n

    # stability limit against the largest wave speed on [0, T_max]
    if prob.alpha == 0.0:
        sup_a = prob.c_a
    else:
        mask = aux.grid <= spec.T_max
        B_shifted = aux.B_vals[mask] + aux.B_unit_shift
        sup_a = float(np.max(prob.c_a * B_shifted ** (-prob.alpha)))
    dt_limit = spec.cfl * dr / math.sqrt(sup_a)
    dt = spec.dt if spec.dt is not None else dt_limit
    if dt > dt_limit * (1.0 + 1e-12):
        raise CflViolation(
            f"dt = {dt:g} exceeds the stability limit {dt_limit:g} "
            f"(cfl * dr / sqrt(sup a))"
        )

    if not spec.allow_boundary_reflections:
        if prob.alpha == 0.0:
            front = math.sqrt(prob.c_a) * spec.T_max
        else:
            front = integrate_adaptive(
                lambda tt: np.sqrt(
                    prob.c_a * (aux.B_at(tt) + aux.B_unit_shift) ** (-prob.alpha)
                ),
                0.0, spec.T_max, abs_tol=1e-6, rel_tol=1e-6,
            )
        reach = max(spec.u0.effective_radius(), spec.u1.effective_radius()) + front + 5 * dr
        if reach > spec.r_max:
            raise ValueError(
                f"support may reach the boundary (needs r_max >= {reach:g}); "
                "enlarge the domain or set allow_boundary_reflections"
            )

    steps = int(math.ceil(spec.T_max / dt))
    ts, a_arr, b_arr, ftime = _coefficient_arrays(prob, aux, steps, dt)

    r = np.arange(spec.J + 1) * dr
    rpow = r ** (n - 1) if n > 1 else np.ones_like(r)
    if prob.delta == 0.0:
        fspace = np.ones_like(r)
    else:
        fspace = r**prob.delta
    u_prev = spec.u0(r)
    u_prev[-1] = 0.0

    sup_hist = np.empty(steps + 1)
    energy_hist = np.empty(steps + 1)
    sup_hist[0] = float(np.max(np.abs(u_prev)))
    peak = sup_hist[0]

    lap0 = _radial_laplacian(u_prev, dr, n)
    v0 = spec.u1(r)
    v0[-1] = 0.0
    source0 = spec.nonlinearity * ftime[0] * fspace * np.abs(u_prev) ** prob.p
    accel0 = a_arr[0] * lap0 - b_arr[0] * v0 + source0
    u = u_prev + dt * v0 + 0.5 * dt**2 * accel0
    u[-1] = 0.0

    energy_hist[0] = _energy(v0, u_prev, a_arr[0], rpow, dr, n)

    verdict = "survived"
    t_star: Optional[float] = None
    hard_overflow = False
    contaminated = False
    guard = max(1, min(5, spec.J // 4))

    m_final = steps
    for m in range(1, steps + 1):
        sup_hist[m] = float(np.max(np.abs(u)))
        peak = max(peak, sup_hist[m])
        v_est = (u - u_prev) / dt
        energy_hist[m] = _energy(v_est, u, a_arr[m], rpow, dr, n)

        if not np.isfinite(sup_hist[m]):
            verdict = "blowup"
            hard_overflow = True
            t_star = float(ts[m - 1])
            m_final = m
            break
        if sup_hist[m] >= spec.blowup_threshold:
            verdict = "blowup"
            t_star = detect_blowup(ts[: m + 1], sup_hist[: m + 1], spec.blowup_threshold)
            m_final = m
            break
        if not spec.allow_boundary_reflections and not contaminated:
            if float(np.max(np.abs(u[-guard - 1:-1]))) > 1e-10 * max(peak, 1e-300):
                contaminated = True
        if m == steps:
            m_final = m
            break

        bh = 0.5 * dt * b_arr[m]
        with np.errstate(over="ignore", invalid="ignore"):
            lap = _radial_laplacian(u, dr, n)
            source = spec.nonlinearity * ftime[m] * fspace * np.abs(u) ** prob.p
            u_next = (
                2.0 * u - (1.0 - bh) * u_prev + dt**2 * (a_arr[m] * lap + source)
            ) / (1.0 + bh)
        u_next[-1] = 0.0
        u_prev, u = u, u_next

    if verdict != "blowup" and contaminated:
        verdict = "boundary_contaminated"

    return SimOutcome(
        verdict=verdict,
        t_star=t_star,
        hard_overflow=hard_overflow,
        times=ts[: m_final + 1].copy(),
        sup_norms=sup_hist[: m_final + 1].copy(),
        energies=energy_hist[: m_final + 1].copy(),
        dt=dt,
        dr=dr,
        r=r,
        final_u=u.copy(),
    )


def _energy(v: np.ndarray, u: np.ndarray, a: float, rpow: np.ndarray, dr: float, n: int) -> float:
    """Discrete kinetic + elastic energy with the radial surface weight."""
    u_r = np.gradient(u, dr)
    dens = 0.5 * v**2 + 0.5 * a * u_r**2
    return sphere_area(n) * float(np.trapezoid(dens * rpow, dx=dr))


def sweep_p(
    spec: SimSpec,
    p_list: Sequence[float],
    workers: int = 1,
    aux: Optional[AuxTable] = None,
) -> list[dict]:
    """Run the same problem across powers p; rows (p, verdict, t_star).

    Warns (but proceeds) when the data functional is not positive: the sign
    condition is the hypothesis under which nonexistence is asserted.
    """
    if aux is None:
        aux = build_aux_table(spec.problem.damping, max(2.0, spec.T_max) * 1.01)
    mass = data_functional(
        spec.u0, spec.u1, spec.problem.damping,
        n=spec.problem.n,
        r_max=max(spec.u0.effective_radius(), spec.u1.effective_radius(), 1.0) + 2.0,
        bhat1=aux.bhat1,
    )
    if mass <= 0:
        warnings.warn(
            f"data functional = {mass:g} is not positive; the nonexistence "
            "range does not apply to this data",
            stacklevel=2,
        )

    specs = [replace(spec, problem=replace(spec.problem, p=float(p))) for p in p_list]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda s: run(s, aux), specs))
    else:
        outcomes = [run(s, aux) for s in specs]
    return [
        {"p": float(p), "verdict": oc.verdict, "t_star": oc.t_star}
        for p, oc in zip(p_list, outcomes)
    ]


# ---------------------------------------------------------------------------
# manufactured-solution verification


def _manufactured_fields(n: int):
    """u = exp(-t) exp(-r^2) with the exact radial pieces."""
    def u(t, r):
        return np.exp(-t) * np.exp(-(r**2))

    def u_t(t, r):
        return -u(t, r)

    def lap(t, r):
        return (4.0 * r**2 - 2.0 * n) * u(t, r)

    return u, u_t, lap


def _weighted_l2(field: np.ndarray, rpow: np.ndarray, dr: float, n: int) -> float:
    return math.sqrt(sphere_area(n) * float(np.trapezoid(field**2 * rpow, dx=dr)))


def _run_manufactured(
    prob: ProblemSpec, aux: AuxTable, r_max: float, J: int, T_final: float,
    dt: Optional[float] = None, cfl: float = 0.5, return_field: bool = False,
):
    """March the linear scheme against the manufactured source.

    Returns the final-time weighted L2 error against the exact solution, or
    the final field itself when ``return_field`` is set.
    """
    n = prob.n
    dr = r_max / J
    ends = np.array([aux.B_unit_shift, aux.B_at(T_final) + aux.B_unit_shift])
    sup_a = prob.c_a if prob.alpha == 0.0 else float(np.max(prob.c_a * ends ** (-prob.alpha)))
    dt_limit = cfl * dr / math.sqrt(sup_a)
    dt = dt_limit if dt is None else dt
    if dt > dt_limit * (1.0 + 1e-12):
        raise CflViolation(f"dt = {dt:g} exceeds stability limit {dt_limit:g}")
    steps = max(1, int(round(T_final / dt)))
    dt = T_final / steps

    u_exact, u_t_exact, lap_exact = _manufactured_fields(n)
    ts, a_arr, b_arr, _ = _coefficient_arrays(prob, aux, steps, dt)

    r = np.arange(J + 1) * dr
    rpow = r ** (n - 1) if n > 1 else np.ones_like(r)

    def source(m: int):
        t = ts[m]
        return (u_exact(t, r) - a_arr[m] * lap_exact(t, r)
                + b_arr[m] * u_t_exact(t, r))

    u_prev = u_exact(0.0, r)
    v0 = u_t_exact(0.0, r)
    accel0 = a_arr[0] * _radial_laplacian(u_prev, dr, n) - b_arr[0] * v0 + source(0)
    u = u_prev + dt * v0 + 0.5 * dt**2 * accel0
    u[-1] = u_exact(dt, r[-1])

    for m in range(1, steps):
        lap = _radial_laplacian(u, dr, n)
        bh = 0.5 * dt * b_arr[m]
        u_next = (
            2.0 * u - (1.0 - bh) * u_prev + dt**2 * (a_arr[m] * lap + source(m))
        ) / (1.0 + bh)
        u_next[-1] = u_exact(ts[m + 1], r[-1])
        u_prev, u = u, u_next

    if return_field:
        return u
    return _weighted_l2(u - u_exact(T_final, r), rpow, dr, n)


def convergence_test(
    prob: ProblemSpec,
    aux: Optional[AuxTable] = None,
    r_max: float = 8.0,
    J: int = 64,
    T_final: float = 1.0,
) -> dict:
    """Richardson order check of the linear scheme at J, 2J, 4J cells.

    dt scales with dr (fixed CFL number), so the observed order combines
    space and time; both are second order.
    """
    if aux is None:
        aux = build_aux_table(prob.damping, max(2.0, T_final) * 1.01)
    errors = [
        _run_manufactured(prob, aux, r_max, jj, T_final) for jj in (J, 2 * J, 4 * J)
    ]
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
    return {
        "errors": errors,
        "orders": orders,
        "observed_order": orders[-1],
    }


def time_order_ratio(
    prob: ProblemSpec,
    aux: Optional[AuxTable] = None,
    r_max: float = 8.0,
    J: int = 512,
    T_final: float = 1.0,
) -> float:
    """Error ratio when dt alone is halved on a fine grid (expected near 4).

    The spatial error is frozen by comparing against a small-dt reference
    on the same grid, isolating the quadratic time error.
    """
    if aux is None:
        aux = build_aux_table(prob.damping, max(2.0, T_final) * 1.01)
    dr = r_max / J
    dt0 = 0.5 * dr / math.sqrt(prob.c_a)
    r = np.arange(J + 1) * dr
    rpow = r ** (prob.n - 1) if prob.n > 1 else np.ones_like(r)

    def field_at(dt: float) -> np.ndarray:
        return _run_manufactured(prob, aux, r_max, J, T_final, dt=dt, return_field=True)

    ref = field_at(dt0 / 16.0)
    e1 = _weighted_l2(field_at(dt0) - ref, rpow, dr, prob.n)
    e2 = _weighted_l2(field_at(dt0 / 2.0) - ref, rpow, dr, prob.n)
    return e1 / e2
