"""Independent 1-D radial cross-check of the 3-D solver.

For radially symmetric potentials the ground state can be computed on a
staggered radial mesh r_j = (j + 1/2) dr with a completely separate
discretization: shell-theorem accumulation for the Poisson solve,
r^2-weighted link sums for the kinetic term, trapezoid/midpoint radial
quadrature for the energies, and a banded (tridiagonal) Sobolev
preconditioner.  None of the 3-D grid code is reused, which is the point:
agreement of the two ground levels validates both paths.

The radial Poisson formula is the two-sided accumulation

    phi(r) = (1/r) * int_0^r s^2 u(s)^2 ds + int_r^rmax s u(s)^2 ds,

whose output is nonnegative and non-increasing by construction and whose
exterior value equals (enclosed mass)/r exactly in the discrete sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoDescentError, NonCoerciveError, ZeroFieldError
from .minimize import SolverConfig, TraceRow
from .nehari import _solve_fiber
from .potential import Constant, CoulombSingular, Potential

_STEP_FLOOR_FACTOR = 1e-12
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class RadialProfile:
    """Values on the staggered radial mesh r_j = (j + 1/2) * (r_max / n_r)."""

    r_max: float
    n_r: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.r_max <= 0:
            raise ValueError(f"need r_max > 0, got {self.r_max}")
        v = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        if v.size != self.n_r:
            raise ValueError(f"profile length {v.size} != n_r = {self.n_r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must all be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dr(self) -> float:
        return self.r_max / self.n_r

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr


def radial_solve_phi(u: RadialProfile) -> RadialProfile:
    """Shell-theorem Poisson solve by trapezoid accumulation."""
    r = u.nodes
    dr = u.dr
    q = u.values * u.values
    f_in = r * r * q  # integrand of the enclosed-mass integral
    f_out = r * q  # integrand of the exterior integral

    # M_j = int_0^{r_j} s^2 q ds: initial segment [0, r_0] uses q(r_0)
    m = np.empty(u.n_r)
    m[0] = q[0] * r[0] ** 3 / 3.0
    m[1:] = m[0] + np.cumsum(0.5 * dr * (f_in[:-1] + f_in[1:]))

    # T_j = int_{r_j}^{r_max} s q ds: the mesh end carries no tail (u ~ 0)
    t = np.zeros(u.n_r)
    seg = 0.5 * dr * (f_out[:-1] + f_out[1:])
    t[:-1] = np.cumsum(seg[::-1])[::-1]

    return RadialProfile(u.r_max, u.n_r, m / r + t)


def radial_quadrature(u: RadialProfile, integrand: np.ndarray) -> float:
    """4*pi * int f(r) r^2 dr by the midpoint rule on the staggered mesh."""
    return FOUR_PI * u.dr * float(np.sum(integrand * u.nodes**2))


def _sample_radial_potential(V: Potential, nodes: np.ndarray) -> np.ndarray:
    if isinstance(V, Constant):
        return np.full(nodes.size, float(V.V1))
    if isinstance(V, CoulombSingular):
        return V.V1 - V.lam * nodes ** (-float(V.alpha))
    raise ValueError(
        "the radial path handles radially symmetric potentials only "
        f"(Constant or CoulombSingular), got {type(V).__name__}"
    )


def _kinetic_link_weights(r: np.ndarray, dr: float) -> np.ndarray:
    """r^2 at the link midpoints j*dr for j = 1..n_r (zero-flux at r = 0)."""
    return (np.arange(1, r.size + 1) * dr) ** 2


def radial_kinetic_energy(u: RadialProfile) -> float:
    """4*pi * int u'(r)^2 r^2 dr as an r^2-weighted link sum.

    The link at r = 0 has weight zero (symmetry, u'(0) = 0) and the mesh
    end is closed by a zero ghost value (u(r_max) = 0).
    """
    dr = u.dr
    w = _kinetic_link_weights(u.nodes, dr)
    dv = np.diff(u.values, append=0.0)
    return FOUR_PI * dr * float(np.sum(w * (dv / dr) ** 2))


def _radial_minus_laplacian(vals: np.ndarray, dr: float, r: np.ndarray) -> np.ndarray:
    """-(u'' + (2/r) u') = -(1/r^2)(r^2 u')' in flux form matching the link energy."""
    w = _kinetic_link_weights(r, dr)
    dv = np.diff(vals, append=0.0) / dr
    flux = w * dv
    out = np.empty_like(vals)
    out[0] = -flux[0] / (dr * r[0] ** 2)
    out[1:] = -(flux[1:] - flux[:-1]) / (dr * r[1:] ** 2)
    return out


def radial_energy_breakdown(u: RadialProfile, v_vals: np.ndarray, p: float, phi: RadialProfile):
    from .functional import EnergyBreakdown

    q = u.values * u.values
    a1 = radial_kinetic_energy(u) + radial_quadrature(u, v_vals * q)
    b = radial_quadrature(u, phi.values * q)
    c = radial_quadrature(u, np.abs(u.values) ** (p + 1.0))
    return EnergyBreakdown.from_scalars(a1, b, c, p)


def _radial_residual(
    u: RadialProfile, v_vals: np.ndarray, p: float, phi: RadialProfile
) -> tuple[np.ndarray, float]:
    r = (
        _radial_minus_laplacian(u.values, u.dr, u.nodes)
        + (v_vals + phi.values) * u.values
        - np.sign(u.values) * np.abs(u.values) ** p
    )
    norm = math.sqrt(FOUR_PI * u.dr * float(np.sum(r * r * u.nodes**2)))
    return r, norm


def _radial_precondition(res: np.ndarray, dr: float, r: np.ndarray) -> np.ndarray:
    """( -lap_r + 1 )^{-1} res via a symmetrized tridiagonal solve."""
    n = res.size
    w = _kinetic_link_weights(r, dr)
    r2 = r * r
    diag = (w + np.concatenate(([0.0], w[:-1]))) / (dr * dr * r2) + 1.0
    upper = -w[:-1] / (dr * dr * np.sqrt(r2[:-1] * r2[1:]))
    ab = np.zeros((2, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    # symmetrize with the sqrt(r^2) similarity: solve D A D^-1 (D x) = D res
    scaled = scipy.linalg.solveh_banded(ab, res * r)
    return scaled / r


def _radial_h1(u: RadialProfile) -> float:
    return math.sqrt(
        radial_kinetic_energy(u) + radial_quadrature(u, u.values * u.values)
    )


def radial_ground_state(
    V: Potential,
    p: float,
    r_max: float = 30.0,
    n_r: int = 2048,
    cfg: SolverConfig | None = None,
) -> tuple[RadialProfile, RadialProfile, float]:
    """Radial ground level by the same projected descent as the 3-D path.

    Returns (u, phi, c_radial).  The default initial profile is a
    Gaussian of width r_max/20; cfg controls p-independent knobs (step,
    tolerance, max_iters, init width through cfg.init when it is a blob).
    """
    if cfg is None:
        cfg = SolverConfig(p=p)
    if not 3.0 < p < 5.0:
        raise ValueError(f"exponent must lie in (3, 5), got p={p}")

    dr = r_max / n_r
    nodes = (np.arange(n_r) + 0.5) * dr
    v_vals = _sample_radial_potential(V, nodes)

    width = r_max / 20.0
    init = getattr(cfg, "init", None)
    if init is not None and getattr(init, "width", None):
        width = init.width
    u = RadialProfile(r_max, n_r, np.exp(-(nodes**2) / (2.0 * width**2)))

    def breakdown_of(prof: RadialProfile, phi: RadialProfile):
        return radial_energy_breakdown(prof, v_vals, p, phi)

    phi = radial_solve_phi(u)
    eb = breakdown_of(u, phi)
    if eb.C <= 0.0:
        raise ZeroFieldError("initial radial profile has no L^(p+1) mass")
    if eb.A1 <= 0.0:
        raise NonCoerciveError("radial quadratic form not positive at the initial profile")
    t0, _, _ = _solve_fiber(eb.A1, eb.B, eb.C, p)
    u = RadialProfile(r_max, n_r, t0 * u.values)
    phi = RadialProfile(r_max, n_r, t0 * t0 * phi.values)
    eb = breakdown_of(u, phi)

    alpha = cfg.step
    floor = _STEP_FLOOR_FACTOR * cfg.step
    for k in range(cfg.max_iters + 1):
        res, rnorm = _radial_residual(u, v_vals, p, phi)
        if rnorm <= cfg.tol_residual * _radial_h1(u) or k == cfg.max_iters:
            break
        d = _radial_precondition(res, dr, nodes)
        alpha = min(cfg.step, 2.0 * alpha)
        accepted = False
        while alpha >= floor:
            cand = RadialProfile(r_max, n_r, u.values - alpha * d)
            phi_c = radial_solve_phi(cand)
            eb_c = breakdown_of(cand, phi_c)
            if eb_c.C > 0.0 and eb_c.A1 > 0.0:
                t, _, _ = _solve_fiber(eb_c.A1, eb_c.B, eb_c.C, p)
                i_trial = (
                    0.5 * t**2 * eb_c.A1
                    + 0.25 * t**4 * eb_c.B
                    - t ** (p + 1.0) * eb_c.C / (p + 1.0)
                )
                if i_trial <= eb.I:
                    u = RadialProfile(r_max, n_r, t * cand.values)
                    phi = RadialProfile(r_max, n_r, t * t * phi_c.values)
                    eb = breakdown_of(u, phi)
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            raise NoDescentError(f"radial backtracking stalled at iteration {k}")

    return u, phi, eb.I


def write_radial_csv(u: RadialProfile, phi: RadialProfile, path) -> None:
    """Dump the paired profiles as CSV with columns r,u,phi."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,u,phi\n")
        for r, uv, pv in zip(u.nodes, u.values, phi.values):
            fh.write(f"{float(r)!r},{float(uv)!r},{float(pv)!r}\n")
