"""Marker characteristics and moment deposition.

The reduced trajectory system per marker, with L = r^2 * phidot,

    r''  = L^2 / r^3 + E_r(r) + (L/r) * B(r)
    L'   = r * E_phi(r) - r * r' * B(r)

is integrated by classical RK4 substeps against fields frozen over one
field step (linear-in-r interpolation).  Tracking L instead of phidot
removes the stiff Coriolis coupling; the angle itself is dynamically
irrelevant under radial symmetry and is not stored.

Deposition is cloud-in-cell onto the radial nodes, normalized by shell
area, so the weighted node sums reproduce the total charge exactly and
the Gauss-law field inherits its enclosed-charge ceiling.

Both loops are numba kernels: they run once per substep/step over the
whole ensemble and dominate the run time.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import AxisCrossingError, ConfigurationError, DepositError
from .initdata import MarkerEnsemble

_OK, _AXIS, _OUTSIDE = 0, 1, 2
_MAX_DOUBLINGS = 8


@njit(cache=True)
def _push_kernel(r, v, L, er, ephi, b, inv_dr, h, nsub):
    n_nodes = er.shape[0]
    for i in range(r.shape[0]):
        ri = r[i]
        vi = v[i]
        Li = L[i]
        for _ in range(nsub):
            # -- four force stages, fields frozen ----------------------
            rr = ri
            vv = vi
            LL = Li
            if rr <= 0.0:
                return _AXIS
            x = rr * inv_dr
            idx = int(x)
            if idx + 1 >= n_nodes:
                return _OUTSIDE
            w = x - idx
            er_v = er[idx] + (er[idx + 1] - er[idx]) * w
            ep_v = ephi[idx] + (ephi[idx + 1] - ephi[idx]) * w
            b_v = b[idx] + (b[idx + 1] - b[idx]) * w
            u = LL / rr
            k1r = vv
            k1v = u * u / rr + er_v + u * b_v
            k1L = rr * ep_v - rr * vv * b_v

            rr = ri + 0.5 * h * k1r
            vv = vi + 0.5 * h * k1v
            LL = Li + 0.5 * h * k1L
            if rr <= 0.0:
                return _AXIS
            x = rr * inv_dr
            idx = int(x)
            if idx + 1 >= n_nodes:
                return _OUTSIDE
            w = x - idx
            er_v = er[idx] + (er[idx + 1] - er[idx]) * w
            ep_v = ephi[idx] + (ephi[idx + 1] - ephi[idx]) * w
            b_v = b[idx] + (b[idx + 1] - b[idx]) * w
            u = LL / rr
            k2r = vv
            k2v = u * u / rr + er_v + u * b_v
            k2L = rr * ep_v - rr * vv * b_v

            rr = ri + 0.5 * h * k2r
            vv = vi + 0.5 * h * k2v
            LL = Li + 0.5 * h * k2L
            if rr <= 0.0:
                return _AXIS
            x = rr * inv_dr
            idx = int(x)
            if idx + 1 >= n_nodes:
                return _OUTSIDE
            w = x - idx
            er_v = er[idx] + (er[idx + 1] - er[idx]) * w
            ep_v = ephi[idx] + (ephi[idx + 1] - ephi[idx]) * w
            b_v = b[idx] + (b[idx + 1] - b[idx]) * w
            u = LL / rr
            k3r = vv
            k3v = u * u / rr + er_v + u * b_v
            k3L = rr * ep_v - rr * vv * b_v

            rr = ri + h * k3r
            vv = vi + h * k3v
            LL = Li + h * k3L
            if rr <= 0.0:
                return _AXIS
            x = rr * inv_dr
            idx = int(x)
            if idx + 1 >= n_nodes:
                return _OUTSIDE
            w = x - idx
            er_v = er[idx] + (er[idx + 1] - er[idx]) * w
            ep_v = ephi[idx] + (ephi[idx + 1] - ephi[idx]) * w
            b_v = b[idx] + (b[idx + 1] - b[idx]) * w
            u = LL / rr
            k4r = vv
            k4v = u * u / rr + er_v + u * b_v
            k4L = rr * ep_v - rr * vv * b_v

            ri += h / 6.0 * (k1r + 2.0 * (k2r + k3r) + k4r)
            vi += h / 6.0 * (k1v + 2.0 * (k2v + k3v) + k4v)
            Li += h / 6.0 * (k1L + 2.0 * (k2L + k3L) + k4L)
            if ri <= 0.0:
                return _AXIS
        r[i] = ri
        v[i] = vi
        L[i] = Li
    return _OK


@njit(cache=True)
def _deposit_kernel(r, v, L, weight, inv_dr, n_nodes):
    d_rho = np.zeros(n_nodes)
    d_jr = np.zeros(n_nodes)
    d_jp = np.zeros(n_nodes)
    status = _OK
    for i in range(r.shape[0]):
        ri = r[i]
        if ri <= 0.0:
            status = _AXIS
            break
        x = ri * inv_dr
        idx = int(x)
        if idx + 1 >= n_nodes:
            status = _OUTSIDE
            break
        f = x - idx
        wi = weight[i]
        c0 = wi * (1.0 - f)
        c1 = wi * f
        d_rho[idx] += c0
        d_rho[idx + 1] += c1
        vi = v[i]
        d_jr[idx] += c0 * vi
        d_jr[idx + 1] += c1 * vi
        vp = L[i] / ri
        d_jp[idx] += c0 * vp
        d_jp[idx + 1] += c1 * vp
    return d_rho, d_jr, d_jp, status


def push(ens: MarkerEnsemble, e_r: np.ndarray, e_phi: np.ndarray, b: np.ndarray,
         dr: float, dt: float, substeps: int) -> int:
    """Advance the ensemble by one field step of length dt, in place.

    The fields stay frozen; a substep that reaches r <= 0 rejects the
    whole field step, doubles the substep count and retries (at most
    eight doublings, then the axis crossing is fatal: the run overshot
    the focusing time).  Returns the substep count actually used.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    saved = ens.copy_state()
    nsub = substeps
    for _ in range(_MAX_DOUBLINGS + 1):
        status = _push_kernel(ens.r, ens.rdot, ens.L, e_r, e_phi, b,
                              1.0 / dr, dt / nsub, nsub)
        if status == _OK:
            return nsub
        if status == _OUTSIDE:
            raise ConfigurationError(
                "marker left the field grid; causality margin too small")
        ens.r[:], ens.rdot[:], ens.L[:] = saved
        nsub *= 2
    raise AxisCrossingError(
        f"marker reached the axis after {_MAX_DOUBLINGS} substep doublings")


def deposit(ens: MarkerEnsemble, grid) -> float:
    """Cloud-in-cell deposit of (rho, j_r, j_phi) onto the grid.

    Node sums conserve total charge to round-off; the per-area arrays are
    the node sums divided by shell area.  Returns the deposited total
    charge (before normalization) for the conservation diagnostic.
    """
    d_rho, d_jr, d_jp, status = _deposit_kernel(
        ens.r, ens.rdot, ens.L, ens.weight, 1.0 / grid.dr, grid.n)
    if status != _OK:
        raise DepositError("marker outside the grid during deposition")
    area = grid.shell_area
    grid.rho = d_rho / area
    grid.j_r = d_jr / area
    grid.j_phi = d_jp / area
    return float(np.sum(d_rho))


def support_extent(ens: MarkerEnsemble) -> tuple[float, float]:
    """Exact (min, max) marker radius; the max estimates the support radius."""
    return float(np.min(ens.r)), float(np.max(ens.r))


def suggest_substeps(ens: MarkerEnsemble, dt: float, dr: float,
                     factor: float = 4.0) -> int:
    """Substep count capping per-substep displacement at dr/factor."""
    v_max = float(np.max(ens.speed))
    return max(1, math.ceil(factor * v_max * dt / dr))


def free_streaming_radius(r0, rdot0, L0, t):
    """Closed-form radius of force-free motion (straight line in the plane).

    |x0 + v t|^2 = r0^2 + 2 r0 rdot0 t + (rdot0^2 + (L0/r0)^2) t^2.
    """
    r0 = np.asarray(r0, dtype=float)
    rdot0 = np.asarray(rdot0, dtype=float)
    L0 = np.asarray(L0, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sqrt(r0 ** 2 + 2.0 * r0 * rdot0 * t
                   + (rdot0 ** 2 + (L0 / r0) ** 2) * t ** 2)
