"""Focusing initial data: distribution, marker ensemble, initial fields.

The phase-space density at t=0 is, in reduced coordinates (r, rdot, phidot),

    f0 = eps**(alpha-k+2l) * H_eps(|r - |rdot| eps**(2l-k)|^2,
                                   |phidot - eps**(-l)|^2) * chi(r) * gate(rdot)

with gate(rdot) = 1 for rdot < 0 and 0 otherwise, H_eps the rescaled
velocity-profile bump

    H_eps(a, b) = eps**(-4k) * H(a / eps**(4k), b / eps**(4k)),

and chi the C^inf spatial cutoff supported on [1/2, 1], equal to 1 on
[5/8, 7/8].  H is any smooth nonnegative profile normalized so that
integral over R^2 of H(u1^2, u2^2) du1 du2 = 1 with support contained in
[0,1) x (0,1) in its squared arguments.

The profile support is a free choice, and we use a deliberately small one
(SUPPORT_A below): with the default tuple at desk scale eps**(2k) is close
to 1, so a profile filling the whole admissible square would populate
markers with near-zero radial speed.  Those never focus (their angular
momentum turns them around immediately) and the ensemble support radius
would stay pinned near 1.  Shrinking the support keeps every marker's
radial speed within a few percent of r * eps**(k-2l), which reproduces the
synchronized inward collapse the construction is about.

Sampling is a deterministic stratified midpoint lattice in (r, w1, w2)
where w1 = r - |rdot| eps**(2l-k) and w2 = phidot - eps**(-l); the
phase-space measure is 2*pi*r dr * r drdot dphidot, i.e. the weight of a
lattice cell is f0 * 2*pi*r^2 * eps**(k-2l) * dr * dw1 * dw2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SamplingError
from .params import FocusingParams

# Squared-argument support of the velocity profile: first argument in
# (0, SUPPORT_A), second in (SUPPORT_B_LO, SUPPORT_B_HI).  SUPPORT_A
# controls the spread of per-marker turnaround times; 2.5e-4 keeps the
# earliest and latest turnaround within ~2 field steps of each other for
# the desk-scale grids used by the verification battery.
SUPPORT_A = 2.5e-4
SUPPORT_B_LO = SUPPORT_A / 8.0
SUPPORT_B_HI = SUPPORT_A

_GL_NODES = 96


def bump(x):
    """Standard smooth bump exp(-1/(x(1-x))) on (0,1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (xi * (1.0 - xi)))
    return out if out.ndim else float(out)


def bump_deriv(x):
    """d/dx of the standard bump (analytic, for derivative budgets)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (xi * (1.0 - xi))) * (1.0 - 2.0 * xi) / (xi * (1.0 - xi)) ** 2
    return out if out.ndim else float(out)


def _gauss_legendre(a: float, b: float, n: int = _GL_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


class BumpProfile:
    """Normalized velocity-profile factor H(a, b) = Z * g(a/A) * g((b-Blo)/(Bhi-Blo)).

    Normalization Z is fixed by quadrature so that the plane integral of
    H(u1^2, u2^2) equals 1, and re-checked against an independent
    trapezoid rule at construction (1e-8 relative).
    """

    def __init__(self, a_hi: float = SUPPORT_A,
                 b_lo: float = SUPPORT_B_LO, b_hi: float = SUPPORT_B_HI):
        if not 0.0 < a_hi < 1.0:
            raise ValueError("a support must sit inside [0, 1)")
        if not 0.0 < b_lo < b_hi < 1.0:
            raise ValueError("b support must sit inside (0, 1)")
        self.a_hi = a_hi
        self.b_lo = b_lo
        self.b_hi = b_hi
        # I_a = integral over R of g(u^2 / a_hi) du, and same for the b factor
        xa, wa = _gauss_legendre(0.0, np.sqrt(a_hi))
        ia = 2.0 * float(np.sum(wa * bump(xa ** 2 / a_hi)))
        xb, wb = _gauss_legendre(np.sqrt(b_lo), np.sqrt(b_hi))
        ib = 2.0 * float(np.sum(wb * bump((xb ** 2 - b_lo) / (b_hi - b_lo))))
        self.z = 1.0 / (ia * ib)
        check = self.plane_integral_check()
        if abs(check - 1.0) > 1e-8:
            raise ConfigurationError(f"profile normalization off by {check - 1.0:.3e}")

    def __call__(self, a, b):
        return self.z * bump(np.asarray(a, dtype=float) / self.a_hi) * \
            bump((np.asarray(b, dtype=float) - self.b_lo) / (self.b_hi - self.b_lo))

    def rescaled(self, a, b, params: FocusingParams):
        """H_eps(a, b) = eps**(-4k) H(a/eps**4k, b/eps**4k)."""
        s = params.epsilon ** (4.0 * params.k)
        return self(np.asarray(a) / s, np.asarray(b) / s) / s

    def w1_max(self, params: FocusingParams) -> float:
        """Half-width of the support in w1 = r - |rdot| eps**(2l-k)."""
        return np.sqrt(self.a_hi) * params.epsilon ** (2.0 * params.k)

    def w2_band(self, params: FocusingParams) -> tuple[float, float]:
        """|w2| band of the support in w2 = phidot - eps**(-l)."""
        s = params.epsilon ** (2.0 * params.k)
        return np.sqrt(self.b_lo) * s, np.sqrt(self.b_hi) * s

    def plane_integral_check(self, n: int = 20001) -> float:
        """Independent trapezoid evaluation of the plane integral."""
        u1 = np.linspace(-np.sqrt(self.a_hi), np.sqrt(self.a_hi), n)
        u2 = np.linspace(np.sqrt(self.b_lo), np.sqrt(self.b_hi), n)
        f1 = bump(u1 ** 2 / self.a_hi)
        f2 = bump((u2 ** 2 - self.b_lo) / (self.b_hi - self.b_lo))
        return self.z * float(np.trapezoid(f1, u1)) * 2.0 * float(np.trapezoid(f2, u2))


class CutoffChi:
    """C^inf cutoff chi(r): 0 outside [1/2, 1], 1 on [5/8, 7/8].

    Built from the same bump primitive via smoothstep integration:
    chi(r) = step(2|4r - 3| - 1) with step(y) = int_y^1 g / int_0^1 g.
    Derivatives are analytic; the derivative budget table c_k is certified
    by dense sampling of the analytic expressions and reported, never
    assumed.
    """

    center = 0.75
    halfwidth = 0.25

    def __init__(self, samples: int = 200_001):
        xg, wg = _gauss_legendre(0.0, 1.0)
        self._norm = float(np.sum(wg * bump(xg)))
        rr = np.linspace(0.5, 1.0, samples)
        self.c0 = 1.0
        self.c1 = float(np.max(np.abs(self.deriv(rr))))
        self.c2 = float(np.max(np.abs(self.deriv2(rr))))

    def d(self, k: int) -> float:
        """Partial sums d_k = c_0 + ... + c_k of the budget table."""
        return float(np.sum([self.c0, self.c1, self.c2][: k + 1]))

    def _step(self, y):
        """step(y) = int_y^1 g / int_0^1 g, evaluated by quadrature."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, w = np.polynomial.legendre.leggauss(_GL_NODES)
        # map [-1, 1] -> [y, 1] per element
        nodes = 0.5 * (1.0 - y)[None, :] * x[:, None] + 0.5 * (1.0 + y)[None, :]
        vals = np.sum(w[:, None] * bump(nodes), axis=0) * 0.5 * (1.0 - y)
        # quadrature round-off can overshoot the exact range by an ulp
        return np.clip(vals / self._norm, 0.0, 1.0)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        x = np.abs((r - self.center) / self.halfwidth)
        out = np.zeros_like(x)
        out[x <= 0.5] = 1.0
        edge = (x > 0.5) & (x < 1.0)
        if np.any(edge):
            out[edge] = self._step(2.0 * x[edge] - 1.0)
        return out if out.ndim else float(out)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        x = (r - self.center) / self.halfwidth
        ax = np.abs(x)
        out = np.zeros_like(x)
        edge = (ax > 0.5) & (ax < 1.0)
        out[edge] = -np.sign(x[edge]) * (8.0 / self._norm) * bump(2.0 * ax[edge] - 1.0)
        return out if out.ndim else float(out)

    def deriv2(self, r):
        r = np.asarray(r, dtype=float)
        x = (r - self.center) / self.halfwidth
        ax = np.abs(x)
        out = np.zeros_like(x)
        edge = (ax > 0.5) & (ax < 1.0)
        out[edge] = -(64.0 / self._norm) * bump_deriv(2.0 * ax[edge] - 1.0)
        return out if out.ndim else float(out)


def f0_eval(r, rdot, phidot, params: FocusingParams,
            profile: BumpProfile, chi: CutoffChi):
    """Phase-space density of the focusing initial data.

    Vectorized over (r, rdot, phidot); r must be positive.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("f0 is defined for r > 0 only")
    rdot = np.asarray(rdot, dtype=float)
    phidot = np.asarray(phidot, dtype=float)
    e, k, l, a = params.epsilon, params.k, params.l, params.alpha
    w1 = r - np.abs(rdot) * e ** (2.0 * l - k)
    w2 = phidot - e ** (-l)
    gate = (rdot < 0.0).astype(float)
    val = e ** (a - k + 2.0 * l) * profile.rescaled(w1 ** 2, w2 ** 2, params) \
        * chi(r) * gate
    return val if val.ndim else float(val)


@dataclass
class MarkerEnsemble:
    """Weighted characteristics in reduced phase space (r, rdot, L).

    L = r^2 * phidot.  Weights are charges, strictly positive and never
    written after construction; the integrator mutates r, rdot, L only.
    """

    r: np.ndarray
    rdot: np.ndarray
    L: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        n = self.r.shape[0]
        for arr in (self.rdot, self.L, self.weight):
            if arr.shape != (n,):
                raise ValueError("ensemble arrays must share one shape")
        if n == 0:
            raise SamplingError("empty ensemble")
        if np.any(self.weight <= 0.0):
            raise SamplingError("non-positive marker weight")

    def __len__(self) -> int:
        return self.r.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weight))

    @property
    def phidot(self) -> np.ndarray:
        return self.L / self.r ** 2

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.rdot, self.L / self.r)

    def copy_state(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.r.copy(), self.rdot.copy(), self.L.copy()

    # -- dump/restore -------------------------------------------------
    CSV_HEADER = "r,rdot,L,weight"

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for vals in zip(self.r, self.rdot, self.L, self.weight):
                fh.write(",".join("%.17g" % v for v in vals) + "\n")

    @classmethod
    def from_csv(cls, path: str) -> "MarkerEnsemble":
        data = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=float)
        data = np.atleast_2d(data)
        return cls(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy())

    def to_binary(self, path: str) -> None:
        """Flat little-endian float64 table, column-major blocks r|rdot|L|weight."""
        with open(path, "wb") as fh:
            np.array([len(self)], dtype="<i8").tofile(fh)
            for arr in (self.r, self.rdot, self.L, self.weight):
                arr.astype("<f8").tofile(fh)

    @classmethod
    def from_binary(cls, path: str) -> "MarkerEnsemble":
        with open(path, "rb") as fh:
            n = int(np.fromfile(fh, dtype="<i8", count=1)[0])
            cols = [np.fromfile(fh, dtype="<f8", count=n) for _ in range(4)]
        return cls(*cols)


def _strata(n: int) -> tuple[int, int]:
    """Split a marker budget into (radial, velocity) strata counts.

    The radial direction gets most of the budget (it is deposited on a
    fine grid); velocity strata grow like (n/200)**(1/3), so a 2e5 budget
    yields a 2000 x 10 x 10 lattice and doubling n refines all three
    dimensions together (the M(n) doubling differences then decrease).
    Below 6 velocity strata the midpoint rule misjudges the peaked
    profile mass, so 6 is the floor whenever the budget affords it.
    """
    n_w = max(2, int(round((n / 200.0) ** (1.0 / 3.0))))
    if n_w < 6 and n >= 2 * 6 * 6:
        n_w = 6
    n_r = n // (n_w * n_w)
    if n_r < 2:
        raise ConfigurationError("marker budget below 2 strata per dimension")
    return n_r, n_w


def sample_markers(params: FocusingParams, n: int, seed: int = 0,
                   jitter: bool = False, profile: BumpProfile | None = None,
                   chi: CutoffChi | None = None) -> MarkerEnsemble:
    """Deterministic stratified-lattice sample of f0.

    Midpoint lattice over (r, w1, w2) restricted to the actual support of
    the profile; the seed only enters when jitter=True, in which case the
    lattice points are displaced uniformly inside their strata.
    """
    if n < 8:
        raise ConfigurationError("need n >= 8 markers")
    profile = profile or BumpProfile()
    chi = chi or CutoffChi()
    n_r, n_w = _strata(n)

    e, k, l = params.epsilon, params.k, params.l
    w1m = profile.w1_max(params)
    b_lo, b_hi = profile.w2_band(params)

    dr_s = 0.5 / n_r
    r_pts = 0.5 + (np.arange(n_r) + 0.5) * dr_s
    dw1 = 2.0 * w1m / n_w
    w1_pts = -w1m + (np.arange(n_w) + 0.5) * dw1
    # w2 support is two symmetric bands; lay half the strata on each
    n_half = max(1, n_w // 2)
    dw2 = (b_hi - b_lo) / n_half
    w2_half = b_lo + (np.arange(n_half) + 0.5) * dw2
    w2_pts = np.concatenate([-w2_half[::-1], w2_half])

    R, W1, W2 = np.meshgrid(r_pts, w1_pts, w2_pts, indexing="ij")
    R, W1, W2 = (x.ravel().copy() for x in (R, W1, W2))
    if jitter:
        rng = np.random.default_rng(seed)
        R += (rng.random(R.shape) - 0.5) * dr_s
        W1 += (rng.random(R.shape) - 0.5) * dw1
        W2 += (rng.random(R.shape) - 0.5) * dw2

    speed = e ** (k - 2.0 * l)
    rdot = -(R - W1) * speed
    phidot = e ** (-l) + W2
    f0 = f0_eval(R, rdot, phidot, params, profile, chi)
    # cell measure: (2 pi r dr) x (r drdot dphidot) with drdot = eps**(k-2l) dw1
    weight = f0 * 2.0 * np.pi * R ** 2 * speed * dr_s * dw1 * dw2

    keep = weight > 0.0
    if not np.any(keep):
        raise SamplingError("all lattice weights vanished")
    ens = MarkerEnsemble(R[keep], rdot[keep], (R[keep] ** 2 * phidot[keep]), weight[keep])
    return ens


def initial_density(grid, ens: MarkerEnsemble, params: FocusingParams) -> float:
    """Deposit the t=0 ensemble and cross-check the density profile.

    Returns the measured amplitude c = ||rho(0)||_inf / eps**alpha.  The
    analytic profile is eps**alpha * r * chi(r) (the change of variables
    in the velocity integral leaves a factor r), so c is expected in
    [1/4, 1]; deposited support outside [1/2 - dr, 1 + dr] is fatal.
    """
    from .particles import deposit

    deposit(ens, grid)
    dr = grid.dr
    occupied = grid.r[grid.rho > 0.0]
    if occupied.size and (occupied.min() < 0.5 - 1.5 * dr or occupied.max() > 1.0 + 1.5 * dr):
        raise SamplingError("deposited support escapes the initial annulus")
    c = float(np.max(grid.rho)) / params.epsilon ** params.alpha
    return c


def seeded_transverse_fields(grid, params: FocusingParams) -> tuple[np.ndarray, np.ndarray]:
    """Smooth compactly supported (E_phi, B) seed with a magnetic bump near r=1.5.

    Amplitude is eps**alpha / 4000, which keeps both the pointwise ceiling
    eps**alpha / (200 r) and the C^1 ceiling eps**alpha / 200 with a wide
    margin; both are re-checked numerically by initial_fields.
    """
    amp = params.epsilon ** params.alpha / 4000.0
    e_phi0 = np.zeros_like(grid.r)
    b0 = amp * np.exp(4.0) * bump((grid.r - 1.25) / 0.5)
    return e_phi0, b0


def initial_fields(grid, params: FocusingParams, mode: str = "seeded"):
    """Set E_r from the deposited charge and the transverse field seed.

    mode="zero" leaves (E_phi, B) identically zero; mode="seeded" installs
    the bump from seeded_transverse_fields and verifies its ceilings.
    """
    from .fields import gauss_er, p_from_fields

    grid.e_r = gauss_er(grid.rho, grid.r)
    if mode == "zero":
        e_phi0 = np.zeros_like(grid.r)
        b0 = np.zeros_like(grid.r)
    elif mode == "seeded":
        e_phi0, b0 = seeded_transverse_fields(grid, params)
        scale = params.epsilon ** params.alpha
        mag = np.hypot(e_phi0, b0)
        ceiling = scale / (200.0 * np.maximum(grid.r, grid.dr))
        if np.any(mag[1:] > ceiling[1:]):
            raise ConfigurationError("seeded transverse field violates its pointwise ceiling")
        grad = np.gradient(np.hypot(e_phi0, b0), grid.dr)
        if float(np.max(mag) + np.max(np.abs(grad))) > scale / 200.0:
            raise ConfigurationError("seeded transverse field violates its C^1 ceiling")
    else:
        raise ConfigurationError(f"unknown field mode {mode!r}")
    grid.p_plus, grid.p_minus = p_from_fields(e_phi0, b0, grid.r)
    return grid.e_r, grid.p_plus, grid.p_minus
