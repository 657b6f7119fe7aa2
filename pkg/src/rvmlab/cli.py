"""Command-line front end.

Subcommands:
    run <config> --out DIR          focusing run; writes diag.csv,
                                    snapshots/, markers_final.csv, report.json
    verify-envelope <config>        adversarial envelope suite -> JSON
    verify-fields <config>          transport oracle + vacuum checks -> JSON
    sweep <config> --eps E1,E2,...  one run per epsilon -> sweep.csv
    report <diag.csv>               re-derive the focusing summary from a diag file

Exit code 0 iff every asserted check in the subcommand passed.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from . import driver
from .errors import ConfigurationError
from .fields import RadialGrid, SourceHistory, step_p
from .params import load_config


def _cmd_run(args) -> int:
    params, config = load_config(args.config)
    result = driver.run(params, config)
    rep = dict(result.report)
    rep["growth"] = driver.growth_report(result)
    paths = driver.write_run_outputs(result, args.out)
    driver.write_report_json(rep, paths["report"])
    print(f"t_star={rep['t_star']:.6g}  r_sup={rep['r_sup_star']:.6g}  "
          f"growth_rho={rep['growth_rho']:.3g}  -> {args.out}")
    ok = (rep["pigeonhole_ok"] and rep["er_at_rsup_ok"] and rep["l_ratio_ok"]
          and rep["gauss_worst"] <= 1.0 + 1e-10 and not rep["axis_crossed"])
    return 0 if ok else 1


def _cmd_verify_envelope(args) -> int:
    seed = args.seed
    if seed is None:
        seed = load_config(args.config)[1].seed if args.config else 0
    report = bounds_mod.adversarial_envelope_suite(
        args.tuples, args.trials, seed, n_steps=args.steps)
    print(json.dumps(report, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return 0 if report["violations"] == 0 else 1


def _verify_transport(dr: float = 1.0 / 64.0, steps: int = 64) -> dict:
    """Transport scheme vs retarded-integral oracle on manufactured sources."""
    grid = RadialGrid(dr, 2.0)
    r = grid.r

    def bump_profile(center):
        x = (r - center) / 0.3
        out = np.zeros_like(r)
        m = np.abs(x) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
        return out

    sources = [
        lambda t, rr: np.ones_like(rr),
        lambda t, rr: np.sin(3.0 * rr) * np.cos(2.0 * t),
        lambda t, rr: np.exp(-((rr - 0.8 - 0.5 * t) / 0.2) ** 2),
        lambda t, rr: t * rr * (2.0 - rr),
        lambda t, rr: np.cos(5.0 * rr + t) * rr,
    ]
    worst = 0.0
    for src_fn in sources:
        pp = r * bump_profile(0.9)
        pm = r * bump_profile(1.3)
        pp[0] = pm[0] = 0.0
        hist = SourceHistory(pp, pm, dr)
        hist.append(src_fn(0.0, r))
        for i in range(1, steps + 1):
            s0 = src_fn((i - 1) * dr, r)
            s1 = src_fn(i * dr, r)
            pp, pm = step_p(pp, pm, dr, s0, s1)
            hist.append(s1)
        rp, rm = hist.reference_profiles(steps)
        scale = max(np.max(np.abs(rp)), np.max(np.abs(rm)), 1e-30)
        worst = max(worst,
                    float(np.max(np.abs(pp - rp))) / scale,
                    float(np.max(np.abs(pm - rm))) / scale)

    # vacuum advection: node-exact shifts, conserved extrema
    pp = np.zeros_like(r)
    pm = r * bump_profile(1.5)
    pm[0] = 0.0
    pm0 = pm.copy()
    zeros = np.zeros_like(r)
    n_shift = 20
    for _ in range(n_shift):
        pp, pm = step_p(pp, pm, dr, zeros)
    shift_err = float(np.max(np.abs(pm[:-n_shift] - pm0[n_shift:])))
    return {"oracle_rel_error": float(worst), "vacuum_shift_error": shift_err,
            "oracle_ok": bool(worst <= 1e-10), "vacuum_ok": bool(shift_err <= 1e-12)}


def _cmd_verify_fields(args) -> int:
    report = _verify_transport()
    print(json.dumps(report, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return 0 if report["oracle_ok"] and report["vacuum_ok"] else 1


def _cmd_sweep(args) -> int:
    params, config = load_config(args.config)
    eps_list = [float(tok) for tok in args.eps.split(",") if tok]
    rows = driver.sweep(params, config, eps_list)
    driver.write_sweep_csv(rows, args.out)
    print(f"{len(rows)} rows -> {args.out}")
    return 0 if all(row.get("status") == "ok" for row in rows) or not rows else 1


def _cmd_report(args) -> int:
    with open(args.diag, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    col = {name: data[:, i] for i, name in enumerate(header)}
    i_star = int(np.argmin(col["r_sup"]))
    summary = {
        "rows": int(data.shape[0]),
        "t_star": float(col["t"][i_star]),
        "r_sup_star": float(col["r_sup"][i_star]),
        "growth_rho": float(col["rho_max"][i_star] / col["rho_max"][0]),
        "growth_er": float(col["er_max"][i_star] / col["er_max"][0]),
        "mass_drift": float(np.max(np.abs(col["mass"] - col["mass"][0]))
                            / col["mass"][0]),
        "gauss_worst": float(np.max(col["gauss_worst"])),
    }
    print(json.dumps(summary, indent=2))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rvmlab",
        description="Radially symmetric Vlasov-Maxwell focusing lab")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="execute a focusing run")
    p.add_argument("config")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("verify-envelope", help="adversarial envelope suite")
    p.add_argument("config", nargs="?")
    p.add_argument("--tuples", type=int, default=100)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to the config seed, or 0")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_verify_envelope)

    p = sub.add_parser("verify-fields", help="transport oracle and vacuum checks")
    p.add_argument("config", nargs="?")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_verify_fields)

    p = sub.add_parser("sweep", help="epsilon sweep")
    p.add_argument("config")
    p.add_argument("--eps", required=True)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("report", help="summarize a diag.csv")
    p.add_argument("diag")
    p.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
