"""Radial electromagnetic fields: Gauss law plus characteristic transport.

With azimuthal symmetry the transverse Maxwell block

    d/dt E_phi = -d/dr B - j_phi
    d/dt B     = -(1/r) d/dr (r E_phi)

decouples into two transport equations for P_pm = r E_phi +- r B:

    (d/dt + d/dr) P_plus  = B - r j_phi     (outgoing, unit speed)
    (d/dt - d/dr) P_minus = B - r j_phi     (incoming, unit speed)

where the source is evaluated at the moving point (both B and the factor
r).  Regularity at the axis forces P_pm(t, 0) = 0, and outside the charge
support the vacuum solution is a rigid shift of the initial profiles.

With dt = dr the characteristics land exactly on grid nodes, so one step
of the scheme is an exact shift plus a trapezoid quadrature of the source
along the characteristic segment.  Telescoping those steps reproduces the
retarded line integrals

    P_plus(t, r)  = P_plus(t1, r - t + t1) + int_{t1}^{t} src(tau, r-t+tau) dtau
    P_minus(t, r) = P_minus(0, r + t)      + int_{0}^{t} src(tau, r+t-tau) dtau

with t1 = max(0, t - r), which ``reference_field_eval`` integrates
directly from stored history as the (slow) test oracle.

The radial field never comes from time stepping: Gauss's law

    r E_r(t, r) = int_0^r s rho(t, s) ds

is exact under radial symmetry and self-correcting, so E_r is rebuilt
from the deposited charge every step.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DepositError


class RadialGrid:
    """Uniform node grid r_j = j*dr carrying moments and fields."""

    def __init__(self, dr: float, r_max: float):
        if dr <= 0.0 or r_max <= dr:
            raise ConfigurationError("need 0 < dr < r_max")
        self.dr = float(dr)
        self.n = int(round(r_max / dr)) + 1
        self.r = np.arange(self.n) * self.dr
        zeros = lambda: np.zeros(self.n)
        self.rho = zeros()
        self.j_r = zeros()
        self.j_phi = zeros()
        self.e_r = zeros()
        self.p_plus = zeros()
        self.p_minus = zeros()

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def shell_area(self) -> np.ndarray:
        """Deposition areas: 2*pi*r_j*dr for j >= 1, half-shell disc at the axis."""
        area = 2.0 * np.pi * self.r * self.dr
        area[0] = np.pi * (self.dr / 2.0) ** 2
        return area

    def transverse_fields(self) -> tuple[np.ndarray, np.ndarray]:
        return fields_from_p(self.p_plus, self.p_minus, self.r)

    def snapshot_rows(self) -> np.ndarray:
        e_phi, b = self.transverse_fields()
        return np.column_stack([self.r, self.rho, self.j_r, self.j_phi,
                                self.e_r, e_phi, b])


def gauss_er(rho: np.ndarray, r: np.ndarray) -> np.ndarray:
    """E_r(r_j) = (1/r_j) * trapezoid of s*rho(s) over [0, r_j]; E_r(0) = 0.

    rho >= 0 makes the running integral monotone, which pins
    0 <= E_r(r) <= M / (2 pi r) for total deposited mass M.
    """
    if np.any(rho < 0.0):
        raise DepositError("negative charge density reached the field solver")
    dr = r[1] - r[0]
    f = r * rho
    integral = np.concatenate([[0.0], np.cumsum(0.5 * dr * (f[1:] + f[:-1]))])
    out = np.zeros_like(rho)
    out[1:] = integral[1:] / r[1:]
    return out


def step_p(p_plus: np.ndarray, p_minus: np.ndarray, dr: float,
           src_start: np.ndarray, src_end: np.ndarray | None = None
           ) -> tuple[np.ndarray, np.ndarray]:
    """Advance P_pm by one unit-CFL step (dt = dr).

    src_start samples (B - r j_phi) on the nodes at the step start,
    src_end at the step end; the source integral along each characteristic
    is the trapezoid of the two endpoint values.  Passing src_end=None
    freezes the source at the start value (used by the predictor pass).
    Axis closure P_plus = 0; the outer node of P_minus receives the vacuum
    inflow, which is zero once the initial profile clears the boundary.
    """
    if src_end is None:
        src_end = src_start
    pp = np.empty_like(p_plus)
    pm = np.empty_like(p_minus)
    pp[1:] = p_plus[:-1] + dr * 0.5 * (src_start[:-1] + src_end[1:])
    pp[0] = 0.0
    pm[:-1] = p_minus[1:] + dr * 0.5 * (src_start[1:] + src_end[:-1])
    pm[-1] = 0.0
    return pp, pm


def fields_from_p(p_plus: np.ndarray, p_minus: np.ndarray, r: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray]:
    """(E_phi, B) = ((P+ + P-)/2r, (P+ - P-)/2r); axis values extrapolated."""
    e_phi = np.zeros_like(p_plus)
    b = np.zeros_like(p_plus)
    e_phi[1:] = (p_plus[1:] + p_minus[1:]) / (2.0 * r[1:])
    b[1:] = (p_plus[1:] - p_minus[1:]) / (2.0 * r[1:])
    if len(r) >= 3:
        e_phi[0] = 2.0 * e_phi[1] - e_phi[2]
        b[0] = 2.0 * b[1] - b[2]
    return e_phi, b


def p_from_fields(e_phi: np.ndarray, b: np.ndarray, r: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray]:
    return r * (e_phi + b), r * (e_phi - b)


class SourceHistory:
    """Stored initial P_pm profiles and per-step source samples.

    Feeds the reference (retarded-integral) evaluation used as an oracle
    for step_p; O(steps^2) in time, test-only by design.
    """

    def __init__(self, p_plus0: np.ndarray, p_minus0: np.ndarray, dr: float):
        self.p_plus0 = p_plus0.copy()
        self.p_minus0 = p_minus0.copy()
        self.dr = dr
        self.sources: list[np.ndarray] = []

    def append(self, src: np.ndarray) -> None:
        self.sources.append(np.asarray(src, dtype=float).copy())

    @property
    def steps(self) -> int:
        return max(0, len(self.sources) - 1)

    def _trapezoid(self, step_lo: int, step_hi: int, node_at) -> float:
        # sum src[i][node_at(i)] with 1/2 weights at both path ends
        total = 0.0
        for i in range(step_lo, step_hi + 1):
            w = 0.5 if i in (step_lo, step_hi) else 1.0
            total += w * self.sources[i][node_at(i)]
        return total * self.dr

    def reference_field_eval(self, step: int, node: int
                             ) -> tuple[float, float, float, float]:
        """(P+, P-, E_phi, B) at (t, r) = (step*dr, node*dr) from history."""
        if step > self.steps:
            raise ValueError("requested time beyond stored history")
        j, n = node, step
        last = len(self.p_plus0) - 1
        # outgoing family: back along r - t + tau
        if n <= j:
            pp = self.p_plus0[j - n] + (self._trapezoid(0, n, lambda i: j - n + i)
                                        if n > 0 else 0.0)
        else:
            i0 = n - j  # axis entry, P+ = 0 there
            pp = self._trapezoid(i0, n, lambda i: i - i0) if n > i0 else 0.0
        # incoming family: back along r + t - tau
        if j + n <= last:
            pm = self.p_minus0[j + n] + (self._trapezoid(0, n, lambda i: j + n - i)
                                         if n > 0 else 0.0)
        else:
            i0 = n - (last - j)  # outer-boundary entry, vacuum inflow = 0
            pm = self._trapezoid(i0, n, lambda i: j + n - i) if n > i0 else 0.0
        r = j * self.dr
        if j == 0:
            return pp, pm, 0.0, 0.0
        return pp, pm, (pp + pm) / (2.0 * r), (pp - pm) / (2.0 * r)

    def reference_profiles(self, step: int) -> tuple[np.ndarray, np.ndarray]:
        """Whole-grid (P+, P-) at a stored step, via the retarded integrals."""
        n_nodes = len(self.p_plus0)
        pp = np.empty(n_nodes)
        pm = np.empty(n_nodes)
        for j in range(n_nodes):
            pp[j], pm[j], _, _ = self.reference_field_eval(step, j)
        pp[0] = 0.0
        return pp, pm
