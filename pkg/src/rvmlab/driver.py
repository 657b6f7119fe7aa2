"""Run orchestration: step loop, diagnostics, growth verdicts, sweeps.

One field step advances the system by dt = dr:

    deposit moments -> Gauss E_r -> transverse fields from P_pm
    -> push markers (sub-cycled RK4, frozen fields)
    -> transport P_pm (predictor/corrector source trapezoid)

The run stops at the configured horizon:

    min_support  - run until the ensemble support radius passes its minimum
    envelope     - 1.25x the envelope minimum time at the ensemble-mean
                   initial condition with the measured field budget
    predicted    - the four-term predicted focusing time (must be > 0)

t_star is the argmin over recorded steps of the support radius r_sup; the
first marker turnaround (rdot sign change) is recorded separately and the
two must agree within a couple of field steps on a focusing run.

The radial field is also accumulated through d/dt E_r = -j_r as a
consistency diagnostic (left-endpoint rule on purpose: its first-order
error gives the refinement test a clean O(dt) signal); the Gauss-law
field remains the one the dynamics uses.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields as dataclass_fields, replace

import numpy as np

from . import bounds as bounds_mod
from .errors import AxisCrossingError, ConfigurationError
from .fields import RadialGrid, fields_from_p, gauss_er, step_p
from .initdata import BumpProfile, CutoffChi, MarkerEnsemble, initial_density, \
    initial_fields, sample_markers
from .params import FocusingParams, RunConfig
from .particles import deposit, push, suggest_substeps, support_extent

CONE_SLOPES = (6.0, 10.0, 100.0)


@dataclass
class DiagnosticsRecord:
    """Per-step scalar diagnostics; one CSV row each."""

    t: float
    mass: float
    deposited: float
    rho_max: float
    rho_max_inner: float
    er_max: float
    er_max_inner: float
    ephi_max: float
    b_max: float
    r_min: float
    r_sup: float
    rdot_max: float
    l_ratio_max: float
    cone6_margin: float
    cone10_margin: float
    cone100_margin: float
    r_er_max: float
    r_tr_max: float
    gauss_worst: float
    max_field_grad: float

    @classmethod
    def header(cls) -> str:
        return ",".join(f.name for f in dataclass_fields(cls))

    def row(self) -> str:
        return ",".join("%.17g" % getattr(self, f.name)
                        for f in dataclass_fields(self))


@dataclass
class RunResult:
    params: FocusingParams
    config: RunConfig
    records: list
    report: dict
    grid: RadialGrid
    ensemble: MarkerEnsemble
    initial_state: tuple  # (r0, rdot0, L0) arrays
    history: dict         # per-step field/moment rows, stacked arrays
    snapshots: list       # (t, snapshot_rows) pairs
    trajectories: list    # (t, r, rdot, L) samples


def _record(t, ens, grid, e_phi, b, mass0, deposited, L0, eps0) -> DiagnosticsRecord:
    r = grid.r
    inner = r <= eps0
    pos = r > 0.0
    r_min, r_sup = support_extent(ens)
    er, rho = grid.e_r, grid.rho
    gauss_worst = float(np.max(np.abs(er[pos]) * 2.0 * np.pi * r[pos])) / mass0
    tr_mag = np.maximum(np.abs(e_phi), np.abs(b))
    grads = [float(np.max(np.abs(np.gradient(f, grid.dr))))
             for f in (er, e_phi, b)]
    return DiagnosticsRecord(
        t=t,
        mass=float(np.sum(ens.weight)),
        deposited=deposited,
        rho_max=float(np.max(rho)),
        rho_max_inner=float(np.max(rho[inner])) if np.any(inner) else 0.0,
        er_max=float(np.max(np.abs(er))),
        er_max_inner=float(np.max(np.abs(er[inner]))) if np.any(inner) else 0.0,
        ephi_max=float(np.max(np.abs(e_phi))),
        b_max=float(np.max(np.abs(b))),
        r_min=r_min,
        r_sup=r_sup,
        rdot_max=float(np.max(ens.rdot)),
        l_ratio_max=float(np.max(np.divide(ens.L, L0, out=np.ones_like(L0),
                                           where=L0 != 0.0))),
        cone6_margin=r_min - 6.0 * t,
        cone10_margin=r_min - 10.0 * t,
        cone100_margin=r_min - 100.0 * t,
        r_er_max=float(np.max(r * np.abs(er))),
        r_tr_max=float(np.max(r * tr_mag)),
        gauss_worst=gauss_worst,
        max_field_grad=max(grads),
    )


def _horizon_steps(params: FocusingParams, config: RunConfig,
                   mean_ic: tuple, m_eff0: float) -> tuple[int, dict]:
    dt = config.dt
    info: dict = {"policy": config.horizon_policy}
    if config.horizon_policy == "predicted":
        t_pred = params.t_focus
        if t_pred <= 0.0:
            raise ConfigurationError(
                "predicted focusing time is non-positive at this epsilon; "
                "use the min_support or envelope horizon policy")
        info["horizon"] = t_pred
        return max(1, math.ceil(t_pred / dt)), info
    if config.horizon_policy == "envelope":
        r0m, v0m, p0m = mean_ic
        env = bounds_mod.envelope_coeffs(min(r0m, 1.0), v0m, p0m, m_eff0)
        horizon = 1.25 * env.s_min
        info["horizon"] = horizon
        info["s_min"] = env.s_min
        return max(1, math.ceil(horizon / dt)), info
    # min_support: generous cap, early stop once the support minimum passed
    cap = math.ceil(1.6 * params.focus_time_scale / dt) + 16
    info["cap"] = cap
    return cap, info


def run(params: FocusingParams, config: RunConfig,
        ensemble: MarkerEnsemble | None = None,
        profile: BumpProfile | None = None,
        chi: CutoffChi | None = None) -> RunResult:
    """Execute one focusing run and assemble its diagnostics and report."""
    profile = profile or BumpProfile()
    chi = chi or CutoffChi()
    ens = ensemble if ensemble is not None else sample_markers(
        params, config.markers, config.seed, config.jitter, profile, chi)
    grid = RadialGrid(config.dr, config.r_max)
    dt = config.dt
    eps0 = params.eps0_value

    amplitude_c = initial_density(grid, ens, params)
    deposited = float(np.sum(grid.rho * grid.shell_area))
    initial_fields(grid, params, config.field_mode)

    r0_arr, rdot0_arr, L0_arr = ens.copy_state()
    mass0 = float(np.sum(ens.weight))
    w = ens.weight
    mean_ic = (float(np.sum(w * r0_arr) / mass0),
               float(np.sum(w * rdot0_arr) / mass0),
               float(np.sum(w * (L0_arr / r0_arr ** 2)) / mass0))
    phidot0_max = float(np.max(np.abs(L0_arr / r0_arr ** 2)))

    e_phi, b = grid.transverse_fields()
    m_eff0 = 3.0 * max(float(np.max(grid.r * np.abs(grid.e_r))),
                       float(np.max(grid.r * np.maximum(np.abs(e_phi), np.abs(b)))))
    steps_cap, horizon_info = _horizon_steps(params, config, mean_ic, m_eff0)

    records = [_record(0.0, ens, grid, e_phi, b, mass0, deposited, L0_arr, eps0)]
    history = {k: [] for k in ("t", "rho", "j_r", "j_phi", "e_r", "e_phi", "b")}

    def _stash(t):
        history["t"].append(t)
        history["rho"].append(grid.rho.copy())
        history["j_r"].append(grid.j_r.copy())
        history["j_phi"].append(grid.j_phi.copy())
        history["e_r"].append(grid.e_r.copy())
        eph, bb = grid.transverse_fields()
        history["e_phi"].append(eph)
        history["b"].append(bb)

    _stash(0.0)
    snapshots = [(0.0, grid.snapshot_rows())]
    trajectories = []
    n_traj = min(config.trajectory_sample, len(ens))
    if n_traj:
        trajectories.append((0.0, ens.r[:n_traj].copy(),
                             ens.rdot[:n_traj].copy(), ens.L[:n_traj].copy()))

    er_ampere = grid.e_r.copy()
    ampere_gap = 0.0
    zeros = np.zeros(grid.n)
    axis_crossed = False
    min_rsup, i_min = records[0].r_sup, 0
    t = 0.0

    for i in range(1, steps_cap + 1):
        # source and Ampere use the step-start moments
        src_start = b - grid.r * grid.j_phi
        er_ampere = er_ampere - dt * grid.j_r
        nsub = suggest_substeps(ens, dt, config.dr, config.substep_factor)
        try:
            if config.forces:
                push(ens, grid.e_r, e_phi, b, config.dr, dt, nsub)
            else:
                push(ens, zeros, zeros, zeros, config.dr, dt, nsub)
        except AxisCrossingError:
            axis_crossed = True
            break
        t = i * dt

        deposited = deposit(ens, grid)
        drift = abs(deposited - mass0) / mass0
        if drift > 1e-9:
            raise ConfigurationError(f"deposition lost charge: drift {drift:.3e}")
        # predictor/corrector trapezoid for the transport source
        pp_star, pm_star = step_p(grid.p_plus, grid.p_minus, config.dr, src_start)
        b_star = fields_from_p(pp_star, pm_star, grid.r)[1]
        src_end = b_star - grid.r * grid.j_phi
        grid.p_plus, grid.p_minus = step_p(grid.p_plus, grid.p_minus,
                                           config.dr, src_start, src_end)
        grid.e_r = gauss_er(grid.rho, grid.r)
        e_phi, b = grid.transverse_fields()

        gap = float(np.max(np.abs(er_ampere - grid.e_r)))
        ampere_gap = max(ampere_gap, gap / max(float(np.max(np.abs(grid.e_r))), 1e-300))

        rec = _record(t, ens, grid, e_phi, b, mass0, deposited, L0_arr, eps0)
        records.append(rec)
        _stash(t)
        if config.snapshot_every and i % config.snapshot_every == 0:
            snapshots.append((t, grid.snapshot_rows()))
        if n_traj:
            trajectories.append((t, ens.r[:n_traj].copy(),
                                 ens.rdot[:n_traj].copy(), ens.L[:n_traj].copy()))
        if rec.r_sup > config.r_max - 2.0 * config.dr:
            raise ConfigurationError("support reached the outer boundary margin")

        if rec.r_sup < min_rsup:
            min_rsup, i_min = rec.r_sup, i
        if config.horizon_policy == "min_support" and i >= i_min + 6:
            break

    if snapshots[-1][0] != records[-1].t:
        snapshots.append((records[-1].t, grid.snapshot_rows()))
    history = {k: np.array(v) for k, v in history.items()}
    report = _final_report(params, config, records, history, mean_ic,
                           phidot0_max, amplitude_c, horizon_info,
                           ampere_gap, axis_crossed)
    return RunResult(params, config, records, report, grid, ens,
                     (r0_arr, rdot0_arr, L0_arr), history, snapshots, trajectories)


def _final_report(params, config, records, history, mean_ic, phidot0_max,
                  amplitude_c, horizon_info, ampere_gap, axis_crossed) -> dict:
    rs = np.array([r.r_sup for r in records])
    ts = np.array([r.t for r in records])
    i_star = int(np.argmin(rs))
    t_star = float(ts[i_star])
    star = records[i_star]
    first = records[0]

    flips = [r.t for r in records if r.rdot_max >= 0.0]
    t_flip = float(flips[0]) if flips else None

    mass = first.mass
    pigeonhole_floor = mass / (np.pi * star.r_sup ** 2)
    m_eff = 3.0 * max(max(r.r_er_max for r in records),
                      max(r.r_tr_max for r in records))

    # enclosed-charge field at the support radius at t_star
    e_r_star = history["e_r"][i_star]
    r_nodes = np.arange(e_r_star.shape[0]) * config.dr
    er_at_rsup = float(np.interp(star.r_sup, r_nodes, e_r_star))
    er_bound_at_rsup = mass / (2.0 * np.pi * star.r_sup)

    envelope_info: dict = {"m_eff": m_eff}
    try:
        env = bounds_mod.envelope_coeffs(min(mean_ic[0], 1.0), mean_ic[1],
                                         mean_ic[2], m_eff)
        if env.hypothesis_ok:
            envelope_info.update(
                predicted_min_radius=math.sqrt(env.min_radius_sq),
                s_min=env.s_min,
                radius_ratio=star.r_sup / math.sqrt(env.min_radius_sq),
                time_ratio=(t_star / env.s_min) if env.s_min > 0 else float("inf"),
            )
        else:
            envelope_info["flags"] = env.flags
    except ValueError as exc:
        envelope_info["error"] = str(exc)

    cones = {}
    for slope, name in zip(CONE_SLOPES, ("cone6", "cone10", "cone100")):
        margins = [getattr(r, f"{name}_margin") for r in records if r.t <= t_star]
        viol = [r.t for r in records
                if r.t <= t_star and getattr(r, f"{name}_margin") < 0.0]
        cones[name] = {
            "violations": len(viol),
            "first_violation_t": viol[0] if viol else None,
            "worst_margin": float(min(margins)),
        }

    lid = 24.0 * params.epsilon ** (params.alpha - 4.0 * params.k - params.l)
    ceiling_worst = max(r.r_tr_max for r in records) / lid
    budget_worst = max(r.r_tr_max for r in records) / (m_eff / 3.0)

    field_bounds = bounds_mod.check_field_bounds(
        times=history["t"], r=r_nodes,
        e_r_rows=history["e_r"], e_phi_rows=history["e_phi"],
        b_rows=history["b"], mass=mass,
        k_density=float(max(rec.rho_max for rec in records)),
        k1_angular=phidot0_max,
        t1=t_star, initial_norm=float(max(records[0].ephi_max, records[0].b_max)),
        params=params, m_eff=m_eff).to_dict()

    mass_drift = max(abs(r.mass - mass) for r in records) / mass
    deposit_drift = max(abs(r.deposited - r.mass) / r.mass for r in records)

    report = {
        "t_star": t_star,
        "i_star": i_star,
        "t_star_flip": t_flip,
        "flip_vs_argmin_steps": (abs(t_flip - t_star) / config.dt
                                 if t_flip is not None else None),
        "steps": len(records) - 1,
        "r_sup_star": star.r_sup,
        "r_min_star": star.r_min,
        "rho_max_star": star.rho_max,
        "rho_max_star_inner": star.rho_max_inner,
        "er_max_star": star.er_max,
        "growth_rho": star.rho_max / first.rho_max,
        "growth_er": star.er_max / first.er_max,
        "pigeonhole_floor": float(pigeonhole_floor),
        "pigeonhole_ok": bool(star.rho_max >= 0.75 * pigeonhole_floor),
        "er_at_rsup": er_at_rsup,
        "er_bound_at_rsup": float(er_bound_at_rsup),
        "er_at_rsup_ok": bool(er_at_rsup >= 0.9 * er_bound_at_rsup),
        "envelope": envelope_info,
        "cones": cones,
        "l_ratio_max": max(r.l_ratio_max for r in records),
        "l_ratio_ok": bool(max(r.l_ratio_max for r in records) <= 4.0 / 3.0),
        "transverse_ceiling_worst": float(ceiling_worst),
        "transverse_budget_worst": float(budget_worst),
        "field_bounds": field_bounds,
        "gauss_worst": max(r.gauss_worst for r in records),
        "mass": mass,
        "mass_drift": float(mass_drift),
        "deposit_drift": float(deposit_drift),
        "amplitude_c": amplitude_c,
        "ampere_gap": float(ampere_gap),
        "max_field_grad": max(r.max_field_grad for r in records),
        "horizon": horizon_info,
        "axis_crossed": axis_crossed,
        "truncated": axis_crossed,
    }
    return report


def growth_report(result: RunResult, chi: CutoffChi | None = None) -> dict:
    """Headline verdicts: initial smallness versus later concentration.

    Every entry is a boolean paired with its measured value; only the
    support-radius window and the enclosed-charge saturation are meant to
    be asserted at desk scale, the eta/N entries report how far the run
    sits from the asymptotic targets.
    """
    params = result.params
    rep = result.report
    chi = chi or CutoffChi()
    dr = result.config.dr
    e, k, l, a = params.epsilon, params.k, params.l, params.alpha

    def c1_norm(row):
        return max(float(np.max(np.abs(row))),
                   float(np.max(np.abs(np.gradient(row, dr)))))

    rho0 = result.history["rho"][0]
    e0 = np.hypot(result.history["e_r"][0], result.history["e_phi"][0])
    b0 = result.history["b"][0]
    rho0_c1 = c1_norm(rho0)
    scale = e ** a
    window_lo = 0.25 * e ** (l - k)
    window_hi = 200.0 * e ** (l - k)

    out = {
        "rho0_inf": float(np.max(rho0)),
        "rho0_inf_below_mass_ceiling": bool(np.max(rho0) <= 2.0 * np.pi * scale),
        "rho0_c1": rho0_c1,
        "rho0_c1_below_eta": bool(rho0_c1 <= params.eta),
        "rho0_c1_budget": 0.5 * scale * chi.d(1),
        "rho0_c1_within_budget": bool(rho0_c1 <= 0.5 * scale * chi.d(1) * 1.1),
        "e0_c1": c1_norm(e0),
        "e0_c1_below_eta": bool(c1_norm(e0) <= params.eta),
        "b0_c1": c1_norm(b0),
        "b0_c1_below_eta": bool(c1_norm(b0) <= params.eta),
        "rho_star_inner": rep["rho_max_star_inner"],
        "rho_star_inner_target": e ** (a - 2.0 * l + 2.0 * k) / 640000.0,
        "rho_star_above_target": bool(
            rep["rho_max_star_inner"] >= e ** (a - 2.0 * l + 2.0 * k) / 640000.0),
        "er_star": rep["er_max_star"],
        "er_star_target": e ** (a - l + k) / 6400.0,
        "er_star_above_target": bool(rep["er_max_star"] >= e ** (a - l + k) / 6400.0),
        "rho_star_above_big_n": bool(rep["rho_max_star_inner"] >= params.big_n),
        "er_star_above_big_n": bool(rep["er_max_star"] >= params.big_n),
        "r_sup_star": rep["r_sup_star"],
        "r_sup_window": [window_lo, window_hi],
        "r_sup_in_window": bool(window_lo <= rep["r_sup_star"] <= window_hi),
        "er_at_rsup_ok": rep["er_at_rsup_ok"],
        "growth_rho": rep["growth_rho"],
        "growth_er": rep["growth_er"],
        "positive_focus_time_regime": bool(params.t_focus > 0.0),
    }
    return out


def sweep(params: FocusingParams, config: RunConfig, eps_list) -> list[dict]:
    """One focusing run per epsilon; failures recorded per row, sweep continues."""
    rows = []
    for eps in eps_list:
        row = {"eps": float(eps)}
        try:
            p = replace(params, epsilon=float(eps))
            res = run(p, config)
            rep = res.report
            row.update(
                status="ok",
                t_star=rep["t_star"],
                t_star_norm=rep["t_star"] / p.focus_time_scale,
                r_sup=rep["r_sup_star"],
                r_sup_norm=rep["r_sup_star"] / p.focus_radius_scale,
                growth_rho=rep["growth_rho"],
                growth_er=rep["growth_er"],
                cone6_violations=rep["cones"]["cone6"]["violations"],
                gauss_worst=rep["gauss_worst"],
                mass_drift=rep["mass_drift"],
            )
        except (ConfigurationError, AxisCrossingError, ValueError) as exc:
            row.update(status=f"error: {exc}")
        rows.append(row)
    return rows


SWEEP_COLUMNS = ("eps", "status", "t_star", "t_star_norm", "r_sup", "r_sup_norm",
                 "growth_rho", "growth_er", "cone6_violations", "gauss_worst",
                 "mass_drift")

SNAPSHOT_HEADER = "r,rho,j_r,j_phi,e_r,e_phi,b"


def write_diag_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(DiagnosticsRecord.header() + "\n")
        for rec in records:
            fh.write(rec.row() + "\n")


def write_snapshot_csv(rows: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def write_sweep_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in SWEEP_COLUMNS:
                v = row.get(col, "")
                cells.append("%.17g" % v if isinstance(v, float) else str(v))
            fh.write(",".join(cells) + "\n")


def write_trajectories_csv(trajectories, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,marker,r,rdot,L\n")
        for t, r, rdot, L in trajectories:
            for i in range(r.shape[0]):
                fh.write("%.17g,%d,%.17g,%.17g,%.17g\n" % (t, i, r[i], rdot[i], L[i]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report_json(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run_outputs(result: RunResult, out_dir: str) -> dict:
    """Write diag.csv, snapshots/, marker dumps and report.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"diag": os.path.join(out_dir, "diag.csv"),
             "report": os.path.join(out_dir, "report.json")}
    write_diag_csv(result.records, paths["diag"])
    snap_dir = os.path.join(out_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    for t, rows in result.snapshots:
        write_snapshot_csv(rows, os.path.join(snap_dir, f"snapshot_t{t:.6f}.csv"))
    result.ensemble.to_csv(os.path.join(out_dir, "markers_final.csv"))
    if result.trajectories:
        write_trajectories_csv(result.trajectories,
                               os.path.join(out_dir, "trajectories.csv"))
    write_report_json(result.report, paths["report"])
    return paths
