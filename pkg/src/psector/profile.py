"""Angular profiles f(phi) of separable p-harmonic functions r**k * f(phi).

Construction has four routes, selected by p:

* p = 2: closed trigonometric form f = cos(nu*phi).
* 2 < p < inf: implicit monotone angle map theta(phi) defined through an
  arctan formula, with f and f' explicit in theta.
* p = inf: the same map with a = 1 for nu >= 1, and for nu < 1 (aperture
  beyond pi) the degenerate profile with a flat plateau around phi = 0 and
  sinusoidal flanks.
* 1 < p < 2: conjugation through a stream function of the conjugate-exponent
  profile built on an extended angular domain, rotated back and renormalized.

All profiles are normalized to f(0) = 1 and tabulated on a uniform phi grid;
the table carries (phi, theta, f, f') and the realized band constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponent import (
    DomainError,
    conjugate_exponent,
    radial_exponent,
)

CASE_P2 = "P2_CLOSED"
CASE_GT2 = "P_GT2_ANGLEMAP"
CASE_INF = "P_INF_ANGLEMAP"
CASE_LT2 = "P_LT2_STREAM"

# treat |p - 2| below this as the closed p = 2 case (a, b overflow otherwise)
P2_SWITCH = 1e-6
# near theta = +-pi the tan(theta/2) substitution degenerates; the map value
# there is the full extended-domain boundary +-pi/nu
THETA_PI_EPS = 1e-9
# theta brackets shrink to this width; kept at machine precision because
# downstream second differences amplify any f noise by 1/h^2
ROOT_TOL = 5e-16


class ProfileInvariantError(RuntimeError):
    """A built profile violated one of its structural invariants."""


@dataclass(frozen=True)
class PolarPoint:
    r: float
    phi: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not abs(self.phi) <= math.pi:
            raise DomainError(f"|phi| must not exceed pi, got {self.phi}")


@dataclass(frozen=True)
class AngleMap:
    """Monotone reparametrization theta -> phi for the 2 < p <= inf profiles.

    phi(theta) = theta - (1 - 1/k) * sqrt(ak)/sqrt(ak - 1)
                 * [arctan(lam*tan(theta/2)) + arctan(tan(theta/2)/lam)]
    with lam = sqrt(ak - 1)/(sqrt(ak) + 1).  Strictly increasing on
    (-pi, pi) since dphi/dtheta = (a - cos^2)/(ak - cos^2) > 0, mapping
    [-pi/2, pi/2] onto [-pi/(2 nu), pi/(2 nu)] and (+-pi) to +-pi/nu.
    Degenerates to the identity when k = 1 (half-plane profiles).
    """

    nu: float
    p: float
    a: float
    k: float
    lam: float
    tol: float = ROOT_TOL

    @classmethod
    def for_params(cls, nu: float, p: float) -> "AngleMap":
        if p == math.inf and nu < 1.0 - 1e-12:
            raise DomainError(
                "the angle map does not represent the p = inf profile for nu < 1"
            )
        a = 1.0 if p == math.inf else (p - 1.0) / (p - 2.0)
        k = radial_exponent(nu, p)
        ak = a * k
        if ak <= 1.0 and not math.isclose(k, 1.0, abs_tol=1e-12):
            raise DomainError(f"angle map requires a*k > 1, got {ak}")
        lam = math.sqrt(max(ak - 1.0, 0.0)) / (math.sqrt(ak) + 1.0)
        return cls(nu=nu, p=p, a=a, k=k, lam=lam)

    @property
    def ak(self) -> float:
        return self.a * self.k

    @property
    def degenerate(self) -> bool:
        # k = 1 kills the arctan term; happens for nu = 1 (and p = inf, nu <= 1)
        return math.isclose(self.k, 1.0, abs_tol=1e-12)

    @property
    def normalization(self) -> float:
        """c such that f(0) = 1."""
        if self.degenerate:
            return 1.0
        return ((self.ak - 1.0) / self.ak) ** (-(self.k - 1.0) / 2.0)


def phi_of_theta(theta: float, amap: AngleMap) -> float:
    """Image of theta under the angle map; +-pi maps to +-pi/nu."""
    if not abs(theta) <= math.pi + 1e-12:
        raise DomainError(f"theta must lie in [-pi, pi], got {theta}")
    if amap.degenerate:
        return theta
    ak = amap.ak
    if ak <= 1.0:
        raise DomainError(f"angle map requires a*k > 1, got {ak}")
    if abs(theta) >= math.pi - THETA_PI_EPS:
        return math.copysign(math.pi / amap.nu, theta)
    t = math.tan(0.5 * theta)
    arcsum = math.atan(amap.lam * t) + math.atan(t / amap.lam)
    return theta - (1.0 - 1.0 / amap.k) * math.sqrt(ak) / math.sqrt(ak - 1.0) * arcsum


def dphi_dtheta(theta: float, amap: AngleMap) -> float:
    """Slope of the angle map: (a - cos^2 theta)/(ak - cos^2 theta)."""
    c2 = math.cos(theta) ** 2
    if amap.degenerate:
        return 1.0
    return (amap.a - c2) / (amap.ak - c2)


def theta_of_phi(phi: float, amap: AngleMap) -> float:
    """Inverse of the angle map by safeguarded secant over a bisection bracket.

    Odd symmetry is applied exactly, so theta(-phi) = -theta(phi) to the bit.
    """
    bound = math.pi / amap.nu
    if not abs(phi) <= bound + 1e-12:
        raise DomainError(f"|phi| must not exceed pi/nu = {bound}, got {phi}")
    if amap.degenerate:
        return phi
    target = min(abs(phi), bound)
    if target == 0.0:
        return 0.0
    if target >= bound - 1e-13 * max(1.0, bound):
        # extended-domain endpoint: the map is flat there, snap exactly
        return math.copysign(math.pi, phi)
    lo, flo = 0.0, -target
    hi, fhi = math.pi, bound - target
    for it in range(200):
        if hi - lo <= amap.tol:
            break
        # alternate secant and bisection steps; the forced bisection keeps the
        # bracket shrinking geometrically where the map is nearly flat (the
        # cubic degeneracy of the p = inf map at theta = 0)
        cand = None
        if it % 2 == 0 and flo != fhi:
            cand = lo - flo * (hi - lo) / (fhi - flo)
            if not (lo + 0.1 * amap.tol < cand < hi - 0.1 * amap.tol):
                cand = None
        if cand is None:
            cand = 0.5 * (lo + hi)
        if cand <= lo or cand >= hi:
            break  # bracket is at float resolution
        fc = phi_of_theta(cand, amap) - target
        if fc == 0.0:
            lo = hi = cand
            break
        if fc < 0.0:
            lo, flo = cand, fc
        else:
            hi, fhi = cand, fc
    return math.copysign(0.5 * (lo + hi), phi)


def eval_f_p2(phi: float, nu: float) -> tuple[float, float]:
    """Harmonic-case profile: (cos(nu*phi), -nu*sin(nu*phi))."""
    return math.cos(nu * phi), -nu * math.sin(nu * phi)


def _f_from_theta(theta: float, amap: AngleMap) -> tuple[float, float]:
    """(f, f') at a mapped angle: c*w^((k-1)/2)*cos(theta) and its phi-derivative
    -k*c*w^((k-1)/2)*sin(theta), with w = 1 - cos^2(theta)/(ak).

    Evaluated as (w/w0)^((k-1)/2) with w0 = w(0), which folds in the
    normalization c and makes f(0) = 1 exact.
    """
    k = amap.k
    if amap.degenerate:
        return math.cos(theta), -math.sin(theta)
    w = 1.0 - math.cos(theta) ** 2 / amap.ak
    w0 = 1.0 - 1.0 / amap.ak
    wp = (w / w0) ** ((k - 1.0) / 2.0)
    return wp * math.cos(theta), -k * wp * math.sin(theta)


@dataclass
class AngularProfile:
    """Tabulated angular profile with exact evaluators behind the table.

    The table spans [-pi/(2 nu), pi/(2 nu)]; exact evaluation is available on
    the extended domain up to pi/nu for the angle-map cases (needed by the
    stream construction).
    """

    nu: float
    p: float
    k: float
    c: float
    case: str
    phi: np.ndarray
    theta: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    band_inner_min_f: float
    band_outer_min_fprime: float
    boundary_residual: float
    _amap: AngleMap | None = None
    _conj: dict | None = field(default=None, repr=False)
    _plateau_phi: float | None = None
    _pchip: object = field(default=None, repr=False)

    @property
    def half_aperture(self) -> float:
        return math.pi / (2.0 * self.nu)

    @property
    def is_inf(self) -> bool:
        return self.p == math.inf

    def f_exact(self, phi: float) -> float:
        return self._eval(phi)[0]

    def fprime_exact(self, phi: float) -> float:
        return self._eval(phi)[1]

    def theta_exact(self, phi: float) -> float:
        return self._eval(phi)[2]

    def _eval(self, phi: float) -> tuple[float, float, float]:
        if self.case == CASE_P2:
            f, fp = eval_f_p2(phi, self.nu)
            return f, fp, self.nu * phi
        if self.case == CASE_LT2:
            return self._eval_stream(phi)
        if self._plateau_phi is not None:
            return self._eval_plateau(phi)
        alpha_ext = math.pi / self.nu
        if not abs(phi) <= alpha_ext + 1e-12:
            raise DomainError(f"|phi| exceeds the extended domain bound {alpha_ext}")
        th = theta_of_phi(phi, self._amap)
        f, fp = _f_from_theta(th, self._amap)
        return f, fp, th

    def _eval_plateau(self, phi: float) -> tuple[float, float, float]:
        alpha = self.half_aperture
        if not abs(phi) <= alpha + 1e-12:
            raise DomainError(f"|phi| exceeds the sector bound {alpha}")
        pj = self._plateau_phi
        if abs(phi) <= pj:
            return 1.0, 0.0, 0.0
        th = abs(phi) - pj
        return math.cos(th), -math.copysign(math.sin(th), phi), math.copysign(th, phi)

    def _eval_stream(self, phi: float) -> tuple[float, float, float]:
        alpha = self.half_aperture
        if not abs(phi) <= alpha + 1e-12:
            raise DomainError(f"|phi| exceeds the sector bound {alpha}")
        cj = self._conj
        psi = phi + alpha
        th = theta_of_phi(psi, cj["amap"])
        fb, fpb = _f_from_theta(th, cj["amap"])
        kp = cj["k_p"]
        mod = (kp * kp * fb * fb + fpb * fpb) ** ((cj["p_conj"] - 2.0) / 2.0)
        g = -(1.0 / cj["lam"]) * fpb * mod
        gp = kp * fb * mod
        return g / cj["g_max"], gp / cj["g_max"], th

    def interpolator(self):
        if self._pchip is None:
            from scipy.interpolate import PchipInterpolator

            self._pchip = PchipInterpolator(self.phi, self.f)
        return self._pchip


def stream_conjugate(base: AngularProfile, q: float):
    """Stream function of a conjugate-exponent profile, sampled on its grid.

    Given the profile for p = q/(q-1) > 2 tabulated on the extended domain,
    returns (g, gprime, stream_exponent) with
    g = -(1/lam) f' (k^2 f^2 + f'^2)^((p-2)/2),
    g' = k f (k^2 f^2 + f'^2)^((p-2)/2), lam = (p-1)(k-1)+1 = k(nu, q).
    """
    if not (1.0 < q < 2.0):
        raise DomainError(f"q must lie in (1, 2), got {q}")
    p = conjugate_exponent(q)
    if not math.isclose(base.p, p, rel_tol=1e-12):
        raise DomainError(f"base profile must use the conjugate exponent {p}, got {base.p}")
    k = base.k
    lam = (p - 1.0) * (k - 1.0) + 1.0
    mod = (k * k * base.f**2 + base.fprime**2) ** ((p - 2.0) / 2.0)
    g = -(1.0 / lam) * base.fprime * mod
    gprime = k * base.f * mod
    return g, gprime, lam


def _check_invariants(prof: AngularProfile) -> list[str]:
    bad = []
    f, fp, phi = prof.f, prof.fprime, prof.phi
    i0 = len(phi) // 2
    if abs(f[i0] - 1.0) > 1e-12:
        bad.append(f"f(0) = {f[i0]!r}, expected 1")
    if abs(fp[i0]) > 1e-9:
        bad.append(f"f'(0) = {fp[i0]!r}, expected 0")
    if prof.boundary_residual > 1e-9:
        bad.append(f"boundary residual {prof.boundary_residual!r} > 1e-9")
    if f.min() < -1e-12 or f.max() > 1.0 + 1e-12:
        bad.append(f"f range [{f.min()!r}, {f.max()!r}] outside [0, 1]")
    if np.max(np.abs(f - f[::-1])) > 1e-10:
        bad.append("f is not even in phi")
    if np.max(np.abs(fp + fp[::-1])) > 1e-10:
        bad.append("f' is not odd in phi")
    right = f[i0:]
    if np.max(np.diff(right)) > 1e-12:
        bad.append("f is not nonincreasing on [0, pi/(2 nu)]")
    if prof.band_inner_min_f <= 0.0:
        bad.append("min f on the inner quarter band is not positive")
    if prof.band_outer_min_fprime <= 0.0:
        bad.append("min |f'| on the outer band is not positive")
    return bad


def build_profile(sector, p, n_samples: int = 129) -> AngularProfile:
    """Construct and validate the angular profile for the sector and exponent.

    n_samples is rounded up to an odd count so phi = 0 is a node.  Dispatch:
    p = 2 closed form; p in (2, inf] angle map (plateau variant for p = inf,
    nu < 1); p in (1, 2) stream conjugation of the p/(p-1) profile on the
    extended domain, rotated by the half-aperture and renormalized.
    """
    nu = sector.nu if hasattr(sector, "nu") else float(sector)
    if not nu >= 0.5:
        raise DomainError(f"nu must be >= 0.5, got {nu}")
    p = float(p)
    if not (p == math.inf or p > 1.0):
        raise DomainError(f"p must be finite > 1 or inf, got {p}")
    if n_samples < 16:
        raise DomainError(f"n_samples must be >= 16, got {n_samples}")
    if n_samples % 2 == 0:
        n_samples += 1
    alpha = math.pi / (2.0 * nu)
    phi = np.linspace(-alpha, alpha, n_samples)

    if p != math.inf and abs(p - 2.0) < P2_SWITCH:
        k = nu
        theta = nu * phi
        f = np.cos(theta)
        fp = -nu * np.sin(theta)
        prof = AngularProfile(
            nu=nu, p=2.0, k=k, c=1.0, case=CASE_P2,
            phi=phi, theta=theta, f=f, fprime=fp,
            band_inner_min_f=_band_inner(phi, f, alpha),
            band_outer_min_fprime=_band_outer(phi, fp, alpha),
            boundary_residual=max(abs(f[0]), abs(f[-1])),
        )
    elif p == math.inf and nu < 1.0:
        k = 1.0
        pj = alpha - math.pi / 2.0
        prof = AngularProfile(
            nu=nu, p=p, k=k, c=1.0, case=CASE_INF,
            phi=phi, theta=np.zeros_like(phi), f=np.zeros_like(phi),
            fprime=np.zeros_like(phi),
            band_inner_min_f=0.0, band_outer_min_fprime=0.0,
            boundary_residual=0.0, _plateau_phi=pj,
        )
        _fill_table(prof)
    elif p == math.inf or p > 2.0:
        amap = AngleMap.for_params(nu, p)
        prof = AngularProfile(
            nu=nu, p=p, k=amap.k, c=amap.normalization,
            case=CASE_INF if p == math.inf else CASE_GT2,
            phi=phi, theta=np.zeros_like(phi), f=np.zeros_like(phi),
            fprime=np.zeros_like(phi),
            band_inner_min_f=0.0, band_outer_min_fprime=0.0,
            boundary_residual=0.0, _amap=amap,
        )
        _fill_table(prof)
    else:
        p_conj = conjugate_exponent(p)
        amap = AngleMap.for_params(nu, p_conj)
        lam = (p_conj - 1.0) * (amap.k - 1.0) + 1.0
        conj = {
            "amap": amap,
            "k_p": amap.k,
            "c_p": amap.normalization,
            "p_conj": p_conj,
            "lam": lam,
            "g_max": 1.0,
        }
        prof = AngularProfile(
            nu=nu, p=p, k=lam, c=1.0, case=CASE_LT2,
            phi=phi, theta=np.zeros_like(phi), f=np.zeros_like(phi),
            fprime=np.zeros_like(phi),
            band_inner_min_f=0.0, band_outer_min_fprime=0.0,
            boundary_residual=0.0, _conj=conj,
        )
        # g attains its maximum at theta = pi/2, i.e. the rotated origin;
        # normalizing through the evaluator itself makes f(0) = 1 exact
        conj["g_max"] = prof._eval(0.0)[0]
        _fill_table(prof)

    bad = _check_invariants(prof)
    if bad:
        raise ProfileInvariantError(
            f"profile(nu={nu}, p={p}) failed invariants: " + "; ".join(bad)
        )
    return prof


def _fill_table(prof: AngularProfile) -> None:
    vals = [prof._eval(x) for x in prof.phi]
    prof.f = np.array([v[0] for v in vals])
    prof.fprime = np.array([v[1] for v in vals])
    prof.theta = np.array([v[2] for v in vals])
    # enforce exact symmetry of the root-found table (oddness of theta)
    prof.boundary_residual = max(abs(prof.f[0]), abs(prof.f[-1]))
    alpha = prof.half_aperture
    prof.band_inner_min_f = _band_inner(prof.phi, prof.f, alpha)
    prof.band_outer_min_fprime = _band_outer(prof.phi, prof.fprime, alpha)


def _band_inner(phi, f, alpha):
    mask = np.abs(phi) <= alpha / 2.0 + 1e-14
    return float(np.min(f[mask]))


def _band_outer(phi, fp, alpha):
    # open complement: strictly between the quarter band and the boundary,
    # where f' vanishes only at isolated construction corners
    mask = (np.abs(phi) > alpha / 2.0 + 1e-14) & (np.abs(phi) < alpha - 1e-14)
    if not mask.any():
        return 0.0
    return float(np.min(np.abs(fp[mask])))


def eval_f(phi: float, prof: AngularProfile) -> float:
    """Profile value f(phi) through the exact construction-backed evaluator."""
    return prof.f_exact(phi)


def eval_fprime(phi: float, prof: AngularProfile) -> float:
    """Profile derivative f'(phi) through the exact evaluator."""
    return prof.fprime_exact(phi)


def eval_u(point: PolarPoint, prof: AngularProfile) -> float:
    """r**k * f(phi) with f interpolated from the table (monotone cubic)."""
    alpha = prof.half_aperture
    if not abs(point.phi) <= alpha + 1e-12:
        raise DomainError(f"point at phi = {point.phi} lies outside the sector")
    return point.r**prof.k * float(prof.interpolator()(point.phi))


def eval_u_exact(point: PolarPoint, prof: AngularProfile) -> float:
    """r**k * f(phi) through the exact evaluator (no table interpolation)."""
    alpha = prof.half_aperture
    if not abs(point.phi) <= alpha + 1e-12:
        raise DomainError(f"point at phi = {point.phi} lies outside the sector")
    return point.r**prof.k * prof.f_exact(point.phi)


def write_profile_csv(prof: AngularProfile, path) -> None:
    """CSV table with '#'-prefixed header comments (phi, theta, f, fprime)."""
    p_str = "inf" if prof.p == math.inf else repr(prof.p)
    lines = [
        f"# nu = {prof.nu!r}",
        f"# p = {p_str}",
        f"# k = {prof.k!r}",
        f"# case = {prof.case}",
        f"# c = {prof.c!r}",
        "phi,theta,f,fprime",
    ]
    for i in range(len(prof.phi)):
        lines.append(
            f"{float(prof.phi[i])!r},{float(prof.theta[i])!r},"
            f"{float(prof.f[i])!r},{float(prof.fprime[i])!r}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_profile_csv(path):
    """Inverse of write_profile_csv: (meta dict, structured column arrays)."""
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            elif not line.startswith("phi,"):
                rows.append([float(x) for x in line.split(",")])
    cols = np.array(rows)
    return meta, {
        "phi": cols[:, 0],
        "theta": cols[:, 1],
        "f": cols[:, 2],
        "fprime": cols[:, 3],
    }
