"""Scalar parameters of the focusing construction.

Everything downstream is controlled by one exponent/scale tuple
(epsilon, k, l, alpha).  The tuple is admissible when

    k < l/3,    alpha < l - k,    alpha > 4k,    l > 10*alpha + 10*k,

with all of them positive and 0 < epsilon < 1.  Two derived scalars matter:

    m       = 100 * epsilon**(alpha - 4k - l)     (field budget)
    t_focus = eps**(2l-k) - 300*(eps**(alpha-5k+3l) + eps**(k+2l) + eps**(3l-2k))

t_focus is the predicted focusing time; its leading term is eps**(2l-k) but
the subtracted corrections make it negative unless epsilon is extremely
small, so callers must branch on its sign (the run-horizon policies exist
for exactly this reason).

The asymptotic smallness conditions behind the construction are *reported*
per condition by ``smallness_report`` instead of being enforced: at desk
scale most of them fail, and the point of the lab is to measure what
survives anyway.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConfigurationError

HORIZON_POLICIES = ("predicted", "envelope", "min_support")
FIELD_MODES = ("seeded", "zero")


def validate_exponents(k: float, l: float, alpha: float) -> list[str]:
    """Check the four admissibility inequalities (strictly).

    Returns a list of violated constraints, empty when the tuple is
    admissible.  Non-positive inputs are a domain error, not a violation.
    """
    if k <= 0 or l <= 0 or alpha <= 0:
        raise ValueError("exponents k, l, alpha must be positive")
    violated = []
    if not k < l / 3.0:
        violated.append("k < l/3")
    if not alpha < l - k:
        violated.append("alpha < l - k")
    if not alpha > 4.0 * k:
        violated.append("alpha > 4k")
    if not l > 10.0 * alpha + 10.0 * k:
        violated.append("l > 10*alpha + 10k")
    return violated


@dataclass(frozen=True)
class FocusingParams:
    """Admissible exponent/scale tuple plus the run targets eta, big_n.

    eps0 is the radius of the inner window used for the concentrated
    norms; when None it defaults to twice the predicted focus radius
    2*epsilon**(l-k).  r0_ref = 3/4 is the annulus center, where the
    spatial cutoff equals 1.
    """

    epsilon: float
    k: float
    l: float
    alpha: float
    eta: float = 1.0
    big_n: float = 10.0
    eps0: float | None = None
    r0_ref: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        violated = validate_exponents(self.k, self.l, self.alpha)
        if violated:
            raise ValueError("inadmissible exponents: " + ", ".join(violated))
        if not 0.5 <= self.r0_ref <= 1.0:
            raise ValueError("r0_ref must lie in [1/2, 1]")

    # Derived scales, all exact power laws of epsilon.
    @property
    def m(self) -> float:
        return derive_m(self)

    @property
    def t_focus(self) -> float:
        return predicted_focus_time(self)

    @property
    def speed_scale(self) -> float:
        """Radial speed per unit radius at t=0: epsilon**(k-2l)."""
        return self.epsilon ** (self.k - 2.0 * self.l)

    @property
    def phidot_center(self) -> float:
        return self.epsilon ** (-self.l)

    @property
    def focus_radius_scale(self) -> float:
        return self.epsilon ** (self.l - self.k)

    @property
    def focus_time_scale(self) -> float:
        """Leading term of t_focus: epsilon**(2l-k)."""
        return self.epsilon ** (2.0 * self.l - self.k)

    @property
    def velocity_box_halfwidth(self) -> float:
        """Half-width epsilon**(2k) of the initial velocity-support box."""
        return self.epsilon ** (2.0 * self.k)

    @property
    def eps0_value(self) -> float:
        return 2.0 * self.focus_radius_scale if self.eps0 is None else self.eps0


def derive_m(params: FocusingParams) -> float:
    """Field budget m = 100 * epsilon**(alpha - 4k - l), always positive."""
    return 100.0 * params.epsilon ** (params.alpha - 4.0 * params.k - params.l)


def _focus_time_terms(eps: float, e1: float, e2: float, e3: float, e4: float) -> float:
    # four-term expression kept verbatim so the algebraic collapse
    # (all exponents equal -> (1 - 900) * eps**e) is testable directly
    return eps ** e1 - 300.0 * (eps ** e2 + eps ** e3 + eps ** e4)


def predicted_focus_time(params: FocusingParams) -> float:
    """Predicted focusing time; may be <= 0 at desk-scale epsilon."""
    e, k, l, a = params.epsilon, params.k, params.l, params.alpha
    return _focus_time_terms(e, -k + 2 * l, a - 5 * k + 3 * l, k + 2 * l, 3 * l - 2 * k)


def smallness_report(params: FocusingParams, d1: float | None = None) -> dict[str, bool]:
    """Which of the asymptotic smallness conditions hold at this epsilon.

    The construction needs all of them for its constants to be rigorous,
    but never quantifies how small epsilon must be; we report booleans
    instead of guessing a threshold.  ``d1`` is the C^1 budget of the
    spatial cutoff (1 + sup|chi'|) when available.
    """
    e, k, l, a = params.epsilon, params.k, params.l, params.alpha
    eta, r0 = params.eta, params.r0_ref
    m = params.m
    box = params.velocity_box_halfwidth
    rep = {
        "mass_ceiling_below_eta": 2.0 * math.pi * e ** a <= eta / 10.0,
        "seed_amplitude_below_eta": e ** a < eta,
        "radial_box_positive": box < r0 - 0.5,
        "angular_box_positive": box < 0.5 * e ** (-l),
        "er_within_budget": e ** a <= m / 3.0,
        "angular_hypothesis_worst_case": -0.5 * m * r0 + r0 ** 2 * (e ** (-l) - box) > 0.0,
        "coeff_a_window": 100.0 * e ** (-2 * l) <= 0.5 * e ** (2 * k - 4 * l),
        "coeff_b_window": 100.0 * e ** (a - 4 * k - 2 * l) <= 0.5 * e ** (-2 * l),
        "positive_focus_time": params.t_focus > 0.0,
        "focus_time_within_window": 0.0 < params.t_focus <= r0 / 100.0,
        "inward_cone_slope": e ** (-l) >= 12.0,
        "focus_radius_inside_eps0": 200.0 * e ** (l - k) < params.eps0_value,
    }
    if d1 is not None:
        rep["density_c1_below_eta"] = 0.5 * e ** a * d1 <= eta
    return rep


@dataclass(frozen=True)
class RunConfig:
    """Grid/ensemble/horizon knobs of a single run.

    dt is locked to dr so the field transport lands on grid nodes
    (unit-speed characteristics); the particle loop sub-cycles inside a
    field step with per-substep displacement capped at dr/substep_factor.
    """

    dr: float
    r_max: float = 2.0
    markers: int = 200_000
    seed: int = 0
    substep_factor: float = 4.0
    horizon_policy: str = "min_support"
    field_mode: str = "seeded"
    forces: bool = True
    jitter: bool = False
    snapshot_every: int = 0
    trajectory_sample: int = 0

    def __post_init__(self):
        if self.dr <= 0.0:
            raise ConfigurationError("dr must be positive")
        if self.r_max < 1.0 + 2.0 * self.dr:
            raise ConfigurationError("r_max must clear the initial support annulus")
        if self.markers < 8:
            raise ConfigurationError("need at least 8 markers (2 strata per dimension)")
        if self.horizon_policy not in HORIZON_POLICIES:
            raise ConfigurationError(f"unknown horizon policy {self.horizon_policy!r}")
        if self.field_mode not in FIELD_MODES:
            raise ConfigurationError(f"unknown field mode {self.field_mode!r}")
        if self.substep_factor <= 0.0:
            raise ConfigurationError("substep_factor must be positive")

    @property
    def dt(self) -> float:
        return self.dr


_PARAM_KEYS = {"epsilon", "k", "l", "alpha", "eta", "big_n", "eps0", "r0_ref"}
_CONFIG_KEYS = {
    "dr", "r_max", "markers", "seed", "substep_factor", "horizon_policy",
    "field_mode", "forces", "jitter", "snapshot_every", "trajectory_sample",
}


def load_config(path: str) -> tuple[FocusingParams, RunConfig]:
    """Read a flat JSON key/value file into (FocusingParams, RunConfig)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a flat JSON object")
    unknown = set(raw) - _PARAM_KEYS - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    try:
        params = FocusingParams(**{k: raw[k] for k in _PARAM_KEYS if k in raw})
        config = RunConfig(**{k: raw[k] for k in _CONFIG_KEYS if k in raw})
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc
    return params, config
