"""p-harmonic measure of the arc of a sector-ball intersection.

solve_measure computes the discrete minimizer of the regularized p-Dirichlet
energy on a polar grid over B(0, R) in the sector, with Dirichlet data 1 on
the outer arc (or on the inner sub-arc variant), 0 on the radial sides and on
a small truncation ring near the apex.  The iteration is lagged diffusivity:
the nonlinear coefficient (|grad u|^2 + eps^2)^((p-2)/2) is frozen from the
previous iterate and the linearized equation is relaxed by red-black SOR
sweeps.  Robustness measures around the plain Picard loop, all no-ops in the
benign cases: continuation in p from the linear problem (steps of at most 1,
warm-started), a small SOR margin below the optimal relaxation factor for
the p > 2 stages, and adaptive damping of the Picard step triggered by the
two observed instability signatures (period-2 update flips at data-jump
nodes, slow regrowth of the update norm at the arc).  The discrete energy is
recorded per cycle as a convergence diagnostic.

mc_harmonic_measure is an independent walk-on-spheres Monte Carlo oracle for
the p = 2 case.  fit_slope extracts the radial decay exponent from a solved
field; comparability_constants bounds the ratio omega / (r/R)**k.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exponent import DomainError

FULL_ARC = "full_arc"
INNER_ARC = "inner_arc"
REGION_S2NU = "S_2nu"
REGION_SNU = "S_nu"


@dataclass(frozen=True)
class MeasureProblem:
    """Discrete p-harmonic measure problem on a polar grid.

    arc_target selects the Dirichlet data: FULL_ARC puts 1 on the whole arc,
    INNER_ARC on the sub-arc |phi| <= pi/(4 nu) only (data jumps get 1/2).
    """

    nu: float
    p: float
    R: float = 1.0
    n_r: int = 256
    n_phi: int = 256
    radial_spacing: str = "logarithmic"  # or "uniform"
    eps_reg: float = 1e-6
    tol: float = 1e-8
    max_iter: int = 4000
    arc_target: str = FULL_ARC
    rmin_frac: float = 1e-3
    inner_sweeps: int = 30

    def __post_init__(self):
        if not self.nu >= 0.5:
            raise DomainError(f"nu must be >= 0.5, got {self.nu}")
        if not (1.0 < self.p < math.inf):
            raise DomainError(f"measure solver requires finite p > 1, got {self.p}")
        if self.R <= 0:
            raise DomainError("R must be positive")
        if self.n_r < 8 or self.n_phi < 8:
            raise DomainError("grid must be at least 8 x 8")
        if self.eps_reg <= 0:
            raise DomainError("eps_reg must be positive")
        if self.radial_spacing not in ("logarithmic", "uniform"):
            raise DomainError(f"unknown radial spacing {self.radial_spacing!r}")
        if self.arc_target not in (FULL_ARC, INNER_ARC):
            raise DomainError(f"unknown arc target {self.arc_target!r}")

    @property
    def half_aperture(self) -> float:
        return math.pi / (2.0 * self.nu)


@dataclass
class MeasureSolution:
    problem: MeasureProblem
    r: np.ndarray
    phi: np.ndarray
    omega: np.ndarray  # shape (n_r, n_phi), values in [0, 1]
    iterations: int
    final_update: float
    converged: bool
    energy_history: list = field(default_factory=list)

    def ray_values(self, ray_angle: float) -> np.ndarray:
        """Field along a ray, linearly interpolated in phi between columns."""
        phi = self.phi
        if not phi[0] <= ray_angle <= phi[-1]:
            raise DomainError(f"ray angle {ray_angle} outside the sector")
        j = int(np.searchsorted(phi, ray_angle))
        if j == 0:
            return self.omega[:, 0].copy()
        t = (ray_angle - phi[j - 1]) / (phi[j] - phi[j - 1])
        return (1.0 - t) * self.omega[:, j - 1] + t * self.omega[:, j]

    def to_csv(self, path) -> None:
        """r, phi, omega triples with '#' header comments."""
        pr = self.problem
        lines = [
            f"# nu = {pr.nu!r}",
            f"# p = {pr.p!r}",
            f"# R = {pr.R!r}",
            f"# arc_target = {pr.arc_target}",
            "r,phi,omega",
        ]
        for i in range(len(self.r)):
            for j in range(len(self.phi)):
                lines.append(
                    f"{float(self.r[i])!r},{float(self.phi[j])!r},{float(self.omega[i, j])!r}"
                )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def summary(self) -> dict:
        pr = self.problem
        return {
            "nu": pr.nu,
            "p": pr.p,
            "R": pr.R,
            "grid": [pr.n_r, pr.n_phi],
            "radial_spacing": pr.radial_spacing,
            "eps_reg": pr.eps_reg,
            "tolerance": pr.tol,
            "arc_target": pr.arc_target,
            "iterations": self.iterations,
            "final_update": self.final_update,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    rms: float
    r_window: tuple
    ray_angle: float

    def __post_init__(self):
        if not self.r_window[0] < self.r_window[1]:
            raise DomainError("slope window must satisfy r_min < r_max")
        if self.rms < 0:
            raise ValueError("rms must be >= 0")


def _grids(problem: MeasureProblem):
    pr = problem
    rmin = pr.rmin_frac * pr.R
    if pr.radial_spacing == "logarithmic":
        r = rmin * (pr.R / rmin) ** np.linspace(0.0, 1.0, pr.n_r)
        r[-1] = pr.R
    else:
        r = np.linspace(rmin, pr.R, pr.n_r)
    alpha = pr.half_aperture
    phi = np.linspace(-alpha, alpha, pr.n_phi)
    return r, phi


def _boundary_data(problem: MeasureProblem, phi: np.ndarray) -> np.ndarray:
    arc = np.zeros_like(phi)
    if problem.arc_target == FULL_ARC:
        arc[:] = 1.0
        arc[0] = arc[-1] = 0.5  # data jump at the corners
    else:
        quarter = math.pi / (4.0 * problem.nu)
        dphi = phi[1] - phi[0]
        inside = np.abs(phi) < quarter - 1e-12
        arc[inside] = 1.0
        jump = np.isclose(np.abs(phi), quarter, atol=0.5 * dphi)
        arc[jump] = 0.5
    return arc


def _edge_grad2(u, r, rmid, hr, dphi):
    """|grad u|^2 at radial edges (i+1/2, j) and angular edges (i, j+1/2)."""
    ur_e = (u[1:, :] - u[:-1, :]) / hr[:, None]
    up_e = np.empty_like(ur_e)
    up_e[:, 1:-1] = (u[1:, 2:] - u[1:, :-2] + u[:-1, 2:] - u[:-1, :-2]) / (4 * dphi)
    up_e[:, 0] = (u[1:, 1] - u[1:, 0] + u[:-1, 1] - u[:-1, 0]) / (2 * dphi)
    up_e[:, -1] = (u[1:, -1] - u[1:, -2] + u[:-1, -1] - u[:-1, -2]) / (2 * dphi)
    grad2_r = ur_e**2 + (up_e / rmid[:, None]) ** 2

    up_a = (u[:, 1:] - u[:, :-1]) / dphi
    ur_a = np.empty_like(up_a)
    ur_a[1:-1, :] = (u[2:, 1:] - u[:-2, 1:] + u[2:, :-1] - u[:-2, :-1]) / (
        2 * (r[2:, None] - r[:-2, None])
    )
    ur_a[0, :] = (u[1, 1:] - u[0, 1:] + u[1, :-1] - u[0, :-1]) / (2 * (r[1] - r[0]))
    ur_a[-1, :] = (u[-1, 1:] - u[-2, 1:] + u[-1, :-1] - u[-2, :-1]) / (
        2 * (r[-1] - r[-2])
    )
    grad2_a = ur_a**2 + (up_a / r[:, None]) ** 2
    return grad2_r, grad2_a


def solve_measure(problem: MeasureProblem) -> MeasureSolution:
    """Lagged-diffusivity solve of the regularized p-Dirichlet minimizer.

    Stops when the max update over a coefficient cycle drops below
    problem.tol; non-convergence within max_iter cycles is reported on the
    returned solution rather than raised.
    """
    pr = problem
    r, phi = _grids(pr)
    dphi = phi[1] - phi[0]
    alpha = pr.half_aperture
    u = np.zeros((pr.n_r, pr.n_phi))
    u[-1, :] = _boundary_data(pr, phi)

    # initial iterate: harmonic-sector shape matching the arc data
    shape = np.cos(pr.nu * phi[None, 1:-1]).clip(0.0, 1.0)
    u[1:-1, 1:-1] = (r[1:-1, None] / pr.R) ** pr.nu * shape * u[-1, 1:-1].clip(0.0, 1.0)

    rmid = 0.5 * (r[1:] + r[:-1])
    hr = r[1:] - r[:-1]
    drc = np.empty_like(r)
    drc[1:-1] = rmid[1:] - rmid[:-1]
    drc[0] = rmid[0] - r[0]
    drc[-1] = r[-1] - rmid[-1]
    w_r = rmid[:, None] * hr[:, None] * dphi  # radial-edge quadrature weight
    w_a = r[:, None] * drc[:, None] * dphi  # angular-edge quadrature weight
    omega_opt = 2.0 / (1.0 + math.sin(math.pi / max(pr.n_r, pr.n_phi)))
    eps2 = pr.eps_reg**2

    aE = np.zeros_like(u)
    aW = np.zeros_like(u)
    aN = np.zeros_like(u)
    aS = np.zeros_like(u)
    history = []

    def picard(p_stage: float, tol: float, budget: int):
        """Damped lagged-diffusivity cycles at one exponent; updates u."""
        nonlocal u
        pm2h = 0.5 * (p_stage - 2.0)
        # near-optimal SOR for the stable stages; for p > 2 the composite
        # sweep/coefficient-update map needs a margin below omega_opt
        omega = omega_opt if p_stage <= 2.0 else 1.0 + 0.85 * (omega_opt - 1.0)
        tau = 1.0
        delta = math.inf
        best = math.inf
        du_prev = None
        for it in range(1, budget + 1):
            g_r, g_a = _edge_grad2(u, r, rmid, hr, dphi)
            history.append(float(
                0.5 * (np.sum(w_r * (g_r + eps2) ** (pr.p / 2.0))
                       + np.sum(w_a * (g_a + eps2) ** (pr.p / 2.0)))
            ))
            cE = (g_r + eps2) ** pm2h * rmid[:, None] * dphi / hr[:, None]
            cN = (g_a + eps2) ** pm2h * drc[:, None] / (r[:, None] * dphi)
            aE[:-1, :] = cE
            aW[1:, :] = cE
            aN[:, :-1] = cN
            aS[:, 1:] = cN
            uold = u.copy()
            for _ in range(pr.inner_sweeps):
                _kernels.sor_sweep(u, aW, aE, aS, aN, omega)
            np.clip(u, 0.0, 1.0, out=u)
            du = u - uold
            if p_stage != 2.0:
                # damp the Picard step on the two observed instability
                # signatures: period-2 flips (update direction reverses) and
                # slow eruptions (update norm regrows past its best)
                flip = 0.0
                if du_prev is not None:
                    nn = float(np.linalg.norm(du)) * float(np.linalg.norm(du_prev))
                    flip = float(np.sum(du * du_prev)) / nn if nn > 0.0 else 0.0
                delta_full = float(np.max(np.abs(du)))
                if flip < -0.3 or delta_full > 2.0 * best:
                    tau = max(0.5 * tau, 0.05)
                else:
                    tau = min(1.15 * tau, 1.0)
                best = min(best, delta_full)
                if tau < 1.0:
                    u = uold + tau * du
                du_prev = du
                delta = tau * delta_full
            else:
                delta = float(np.max(np.abs(du)))
            if delta < tol:
                return it, delta, True
        return budget, delta, False

    # continuation in p from the linear case, stepping by at most 1, so the
    # strongly nonlinear stages start from a nearby solution and the
    # coefficient spikes of a cold p > 2 start never form
    stages = [2.0]
    if pr.p > 2.0:
        q = 3.0
        while q < pr.p - 1e-12:
            stages.append(q)
            q += 1.0
        stages.append(pr.p)
    elif pr.p < 2.0:
        stages.append(pr.p)
    total = 0
    converged = False
    delta = math.inf
    for stage in stages:
        final = stage == stages[-1]
        tol = pr.tol if final else max(100.0 * pr.tol, 1e-7)
        left = pr.max_iter - total
        if left <= 0:
            converged = False
            break
        it, delta, converged = picard(stage, tol, left)
        total += it
    return MeasureSolution(
        problem=pr,
        r=r,
        phi=phi,
        omega=u,
        iterations=total,
        final_update=delta,
        converged=converged,
        energy_history=history,
    )


def fit_slope(solution: MeasureSolution, ray_angle: float = 0.0,
              r_window: tuple = (0.05, 0.4)) -> SlopeFit:
    """Least-squares slope of log omega against log r along a ray.

    The window is in absolute r units and must contain at least 8 grid radii
    strictly inside (0, R).
    """
    lo, hi = r_window
    R = solution.problem.R
    if not (0.0 < lo < hi < R):
        raise DomainError(f"window {r_window} must lie strictly inside (0, R)")
    vals = solution.ray_values(ray_angle)
    m = (solution.r >= lo) & (solution.r <= hi) & (vals > 0.0)
    if int(m.sum()) < 8:
        raise DomainError("slope window must contain at least 8 usable radii")
    x = np.log(solution.r[m])
    y = np.log(vals[m])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return SlopeFit(
        exponent=float(coef[0]),
        intercept=float(coef[1]),
        rms=float(np.sqrt(np.mean(resid**2))),
        r_window=(lo, hi),
        ray_angle=ray_angle,
    )


def comparability_constants(solution: MeasureSolution, k: float,
                            region: str = REGION_S2NU,
                            r_window: tuple | None = (0.02, 0.9),
                            margin_cells: int = 2):
    """(ratio_min, ratio_max) of omega(x) / (|x|/R)**k over a sector region.

    region selects the angular range: REGION_S2NU keeps |phi| <= pi/(4 nu),
    REGION_SNU the full sector.  A margin of grid cells is dropped at every
    boundary, and r_window (absolute units, None to disable) keeps the
    certificate away from the apex truncation ring and the arc layer, where
    the discrete field is boundary-layer rather than power-law.
    """
    if not k > 0:
        raise DomainError("k must be positive")
    pr = solution.problem
    r, phi = solution.r, solution.phi
    m = margin_cells
    i_lo, i_hi = m, len(r) - m
    j_lo, j_hi = m, len(phi) - m
    rr = r[i_lo:i_hi]
    pp = phi[j_lo:j_hi]
    om = solution.omega[i_lo:i_hi, j_lo:j_hi]
    if region == REGION_S2NU:
        jm = np.abs(pp) <= math.pi / (4.0 * pr.nu) + 1e-12
    elif region == REGION_SNU:
        jm = np.ones_like(pp, bool)
    else:
        raise DomainError(f"unknown region {region!r}")
    im = np.ones_like(rr, bool)
    if r_window is not None:
        im &= (rr >= r_window[0]) & (rr <= r_window[1])
    ratio = om[np.ix_(im, jm)] / (rr[im, None] / pr.R) ** k
    return float(ratio.min()), float(ratio.max())


def _sector_distance(x, y, alpha, R):
    """Distance to the boundary of B(0,R) in the sector, plus side distances."""
    r = np.hypot(x, y)
    ang = np.arctan2(y, x)
    d_arc = R - r
    dp = alpha - ang  # angular gap to the +alpha side
    dm = ang + alpha
    d1 = np.where(dp <= math.pi / 2.0, r * np.sin(dp), r)
    d2 = np.where(dm <= math.pi / 2.0, r * np.sin(dm), r)
    d_side = np.minimum(d1, d2)
    return np.minimum(d_arc, d_side), d_arc, d_side


def mc_harmonic_measure(nu: float, R: float, points, n_walks: int, seed: int,
                        shell: float = 1e-5, max_steps: int = 100000):
    """Walk-on-spheres estimate of harmonic (p = 2) measure of the arc.

    For each interior start point, n_walks Brownian paths are simulated by
    jumping to a uniform point on the largest centered disk inside the
    domain, absorbing within a shell*R boundary layer.  Returns a list of
    (estimate, stderr); stderr is the binomial standard error.  Deterministic
    for a fixed seed.
    """
    if not nu >= 0.5:
        raise DomainError(f"nu must be >= 0.5, got {nu}")
    alpha = math.pi / (2.0 * nu)
    rng = np.random.default_rng(seed)
    out = []
    for pt in points:
        r0, phi0 = (pt.r, pt.phi) if hasattr(pt, "r") else (pt[0], pt[1])
        if not (0 < r0 < R and abs(phi0) < alpha):
            raise DomainError(f"start point ({r0}, {phi0}) is not interior")
        x = np.full(n_walks, r0 * math.cos(phi0))
        y = np.full(n_walks, r0 * math.sin(phi0))
        alive = np.arange(n_walks)
        hit = np.zeros(n_walks, dtype=bool)
        for _ in range(max_steps):
            if alive.size == 0:
                break
            xa, ya = x[alive], y[alive]
            d, d_arc, d_side = _sector_distance(xa, ya, alpha, R)
            done = d < shell * R
            if done.any():
                absorbed = alive[done]
                hit[absorbed] = d_arc[done] <= d_side[done]
                alive = alive[~done]
                xa, ya, d = xa[~done], ya[~done], d[~done]
            if alive.size == 0:
                break
            ang = rng.random(alive.size) * (2.0 * math.pi)
            x[alive] = xa + d * np.cos(ang)
            y[alive] = ya + d * np.sin(ang)
        est = float(hit.mean())
        stderr = math.sqrt(max(est * (1.0 - est), 1e-12) / n_walks)
        out.append((est, stderr))
    return out


def write_summary_json(solution: MeasureSolution, path, extra: dict | None = None) -> None:
    data = solution.summary()
    if extra:
        data.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
