"""Command-line front-end: bounds | simulate | oracle-check.

Exit codes are a stable contract: 0 success, 1 check failure or numerical
breakdown, 2 usage/input error, 3 mathematical-domain error.

All randomized output is fully determined by --seed; simulation summaries
are byte-identical for any --threads value.  Summary JSON carries the
deterministic run description (config echo, algorithm identifiers,
version); volatile facts (command line, wall time) go to a .manifest.json
file written next to --out.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, fock, rng, states
from .bounds import (
    ThetaPoint,
    WeightMatrix,
    c_r_closed_2param,
    c_r_closed_3param,
    c_r_general,
    load_weight,
    optimal_gaussian_tradeoff,
    rld_inverse_2param,
    rld_inverse_3param,
)
from .errors import DomainError, NumericalError, PreconditionError
from .estimator import (
    ExperimentConfig,
    ProtocolKind,
    compare_to_bounds,
    monte_carlo_mse,
)

_ALGORITHMS = {
    "rng": rng.MIXER_NAME,
    "gaussian": rng.GAUSSIAN_NAME,
    "geometric": "inverse-cdf-log",
}

CSV_COLUMNS = (
    "trial",
    "zeta_hat_re",
    "zeta_hat_im",
    "n_hat",
    "err_sq_theta1",
    "err_sq_theta2",
    "err_sq_n",
)


def _theta_from_args(args) -> ThetaPoint:
    by_theta = args.theta1 is not None or args.theta2 is not None
    by_zeta = args.zeta_re is not None or args.zeta_im is not None
    if by_theta and by_zeta:
        raise ValueError("give either --theta1/--theta2 or --zeta-re/--zeta-im, not both")
    if by_theta:
        return ThetaPoint(args.theta1 or 0.0, args.theta2 or 0.0, args.n_mean)
    return ThetaPoint.from_zeta(complex(args.zeta_re or 0.0, args.zeta_im or 0.0), args.n_mean)


def _theta_echo(theta: ThetaPoint) -> dict:
    return {
        "theta1": theta.theta1,
        "theta2": theta.theta2,
        "zeta_re": theta.zeta.real,
        "zeta_im": theta.zeta.imag,
        "n_mean": theta.n_mean,
    }


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(out_path: str, argv: list[str], threads: int, wall: float, outputs: list[str]):
    manifest = {
        "command": "dtslab " + " ".join(argv),
        "threads": threads,
        "wall_time_s": wall,
        "outputs": outputs,
        "version": __version__,
        "algorithms": _ALGORITHMS,
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(_dump_json(manifest))


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def cmd_bounds(args, argv) -> int:
    weight = load_weight(args.weight or ("identity2" if args.known_n else "identity3"))
    if args.known_n and weight.dim != 2:
        raise ValueError("--known-n requires a 2x2 weight matrix")
    theta = _theta_from_args(args)  # the bound depends only on n_mean; echoed for the record
    n_mean = theta.n_mean
    j_inv = rld_inverse_2param(n_mean) if weight.dim == 2 else rld_inverse_3param(n_mean)
    general = c_r_general(weight, j_inv).value

    closed = None
    if weight.dim == 2:
        g1, g2, g3 = weight.two_param_gs()
        closed = c_r_closed_2param(g1, g2, g3, n_mean).value
    elif weight.is_block_form():
        g0, g1, g2, g3 = weight.three_param_gs()
        closed = c_r_closed_3param(g0, g1, g2, g3, n_mean).value

    tradeoff = None
    if weight.dim == 2:
        g1, g2, g3 = weight.two_param_gs()
    elif weight.is_block_form():
        _, g1, g2, g3 = weight.three_param_gs()
    else:
        g1 = g2 = g3 = 0.0
    if g1 > 0:
        tradeoff = optimal_gaussian_tradeoff(g1, g2, g3, n_mean)

    payload = {
        "theta": _theta_echo(theta),
        "n_mean": n_mean,
        "weight": weight.entries.tolist(),
        "c_r_general": general,
        "c_r_closed": closed,
        "difference": None if closed is None else general - closed,
        "squeeze": None
        if tradeoff is None
        else {
            "r": tradeoff.squeeze_r,
            "angle": tradeoff.squeeze_angle,
            "achieved": tradeoff.achieved,
        },
        "version": __version__,
    }
    if args.json:
        sys.stdout.write(_dump_json(payload))
        return 0
    print(f"C_R (general matrix formula) = {general:.12g}")
    if closed is None:
        print("C_R (closed form)            = n/a (weight is not block form)")
    else:
        print(f"C_R (closed form)            = {closed:.12g}")
        print(f"difference                   = {general - closed:.3e}")
    if tradeoff is not None:
        print(
            f"optimal squeezed heterodyne: r = {tradeoff.squeeze_r:.6g}, "
            f"angle = {tradeoff.squeeze_angle:.6g}, achieved = {tradeoff.achieved:.12g}"
        )
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _merge_config_file(args) -> None:
    if not args.config:
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {args.config!r} must contain a JSON object")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"config file {args.config!r} has unknown key {key!r}")
        if getattr(args, attr) in (None, False):
            setattr(args, attr, value)


def _simulate_once(config: ExperimentConfig, threads: int, csv_path: str | None):
    csv_file = None
    writer = None
    sink = None
    if csv_path:
        csv_file = open(csv_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(csv_file)
        writer.writerow(CSV_COLUMNS)

        def sink(start, zeta_hat, n_hat, errors):
            d = errors.shape[1]
            for row in range(zeta_hat.shape[0]):
                writer.writerow(
                    (
                        start + row,
                        repr(float(zeta_hat[row].real)),
                        repr(float(zeta_hat[row].imag)),
                        "" if n_hat is None else repr(float(n_hat[row])),
                        repr(float(errors[row, 0] ** 2)),
                        repr(float(errors[row, 1] ** 2)),
                        repr(float(errors[row, 2] ** 2)) if d == 3 else "",
                    )
                )

    try:
        mse = monte_carlo_mse(config, threads=threads, trial_sink=sink)
    finally:
        if csv_file is not None:
            csv_file.close()
    return mse


def _summary_payload(config: ExperimentConfig, mse, comparison) -> dict:
    return {
        "protocol": config.protocol.value,
        "theta": _theta_echo(config.theta),
        "n_copies": config.n_copies,
        "trials": config.trials,
        "seed": config.seed,
        "clip_nonneg": config.clip_nonneg,
        "weight": config.weight.entries.tolist(),
        "mse_entries": mse.entries.tolist(),
        "n_trace_gv": mse.n_trace_gv,
        "se": mse.se_trace,
        "c_r": comparison.c_r,
        "ratio": comparison.ratio,
        "ratio_se": comparison.ratio_se,
        "expected_ratio_large_n": comparison.expected_ratio_large_n,
        "algorithms": _ALGORITHMS,
        "version": __version__,
    }


def cmd_simulate(args, argv) -> int:
    _merge_config_file(args)
    if args.ratio_table:
        return _cmd_ratio_table(args, argv)
    if args.protocol is None:
        raise ValueError("--protocol is required (collective | separable | known-n)")
    if args.n_mean is None:
        raise ValueError("--n-mean is required")
    protocol = ProtocolKind(args.protocol)
    n_copies = args.n_copies if args.n_copies is not None else 100
    trials = args.trials if args.trials is not None else 100000
    if n_copies < 2:
        raise ValueError(f"--n-copies must be at least 2, got {n_copies}")
    if trials < 100:
        raise ValueError(f"--trials must be at least 100, got {trials}")
    theta = _theta_from_args(args)
    weight = load_weight(
        args.weight or ("identity2" if protocol is ProtocolKind.KNOWN_N_HETERODYNE else "identity3")
    )
    config = ExperimentConfig(
        protocol=protocol,
        theta=theta,
        n_copies=n_copies,
        trials=trials,
        seed=args.seed if args.seed is not None else 0,
        weight=weight,
        clip_nonneg=bool(args.clip_nonneg),
    )
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)

    start_time = time.perf_counter()
    mse = _simulate_once(config, threads, args.trial_csv)
    wall = time.perf_counter() - start_time
    comparison = compare_to_bounds(mse, config)
    text = _dump_json(_summary_payload(config, mse, comparison))
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    outputs = [path for path in (args.out, args.trial_csv) if path]
    if outputs:
        _write_manifest(outputs[0], argv, threads, wall, outputs)
    return 0


def _cmd_ratio_table(args, argv) -> int:
    """Artifact convenience grid: collective vs separable ratio over (N, n)."""
    trials = args.trials if args.trials is not None else 20000
    if trials < 100:
        raise ValueError(f"--trials must be at least 100, got {trials}")
    seed = args.seed if args.seed is not None else 0
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    weight = WeightMatrix.identity(3)
    start_time = time.perf_counter()
    rows = []
    cell = 0
    for n_mean in (0.5, 1.0, 2.0):
        for n_copies in (10, 100, 1000):
            theta = ThetaPoint.from_zeta(0.5 + 0j, n_mean)
            cell_rows = {}
            for protocol in (
                ProtocolKind.COLLECTIVE_CONCENTRATION,
                ProtocolKind.SEPARABLE_HETERODYNE,
            ):
                config = ExperimentConfig(
                    protocol=protocol,
                    theta=theta,
                    n_copies=n_copies,
                    trials=trials,
                    seed=seed + 1000003 * cell,
                    weight=weight,
                )
                cell += 1
                mse = monte_carlo_mse(config, threads=threads)
                cell_rows[protocol.value] = compare_to_bounds(mse, config)
            rows.append(
                {
                    "n_mean": n_mean,
                    "n_copies": n_copies,
                    "collective_ratio": cell_rows["collective"].ratio,
                    "collective_se": cell_rows["collective"].ratio_se,
                    "separable_ratio": cell_rows["separable"].ratio,
                    "separable_se": cell_rows["separable"].ratio_se,
                    "c_r": cell_rows["collective"].c_r,
                }
            )
    wall = time.perf_counter() - start_time
    payload = {
        "table": rows,
        "trials": trials,
        "seed": seed,
        "weight": weight.entries.tolist(),
        "note": "artifact output: empirical n*Tr(V)/C_R grid, identity weight",
        "algorithms": _ALGORITHMS,
        "version": __version__,
    }
    if args.json:
        sys.stdout.write(_dump_json(payload))
    else:
        print("artifact ratio grid (n*TrV / C_R, identity weight)")
        print(f"{'N':>5} {'n':>6} {'collective':>12} {'separable':>12} {'C_R':>8}")
        for row in rows:
            print(
                f"{row['n_mean']:>5.2f} {row['n_copies']:>6d} "
                f"{row['collective_ratio']:>12.4f} {row['separable_ratio']:>12.4f} "
                f"{row['c_r']:>8.3f}"
            )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(_dump_json(payload))
        _write_manifest(args.out, argv, threads, wall, [args.out])
    return 0


# ---------------------------------------------------------------------------
# oracle-check
# ---------------------------------------------------------------------------

def _run_oracle_checks(args) -> tuple[list[dict], bool]:
    n_mean = args.n_mean if args.n_mean is not None else 1.0
    zeta = complex(args.zeta_re if args.zeta_re is not None else 0.5, args.zeta_im or 0.0)
    theta = ThetaPoint.from_zeta(zeta, n_mean)
    checks = []

    def record(name, dev, tol):
        checks.append({"name": name, "max_dev": dev, "tol": tol, "pass": bool(dev < tol)})

    # heterodyne outcome law against the explicit matrix construction
    grid_amp = 3.0 + abs(zeta)
    cutoff = args.cutoff or fock.cutoff_for(n_mean, grid_amp)
    if fock.thermal_tail(n_mean, cutoff) >= fock.DEFAULT_TAIL_TOL or fock.poisson_tail_bound(
        grid_amp**2, cutoff
    ) >= fock.DEFAULT_TAIL_TOL:
        raise PreconditionError(
            f"cutoff {cutoff} violates the tail rule for the heterodyne grid; "
            f"use cutoff >= {fock.cutoff_for(n_mean, grid_amp)}"
        )
    rho = fock.displaced_thermal_density(zeta, n_mean, cutoff)
    params = states.DisplacedThermalParams(zeta, n_mean)
    radius = 3.0 / math.sqrt(2.0)
    axis = np.linspace(-radius, radius, 5)
    dev = max(
        abs(
            states.heterodyne_pdf(params, complex(re, im))
            - fock.heterodyne_probability_density(rho, complex(re, im))
        )
        for re in axis
        for im in axis
    )
    record("heterodyne-pdf", dev, 1e-6)

    # photon-count law against the thermal diagonal
    thermal = fock.thermal_density(n_mean, cutoff)
    dev = max(
        abs(states.photon_pmf(n_mean, k) - fock.photon_probability(thermal, k))
        for k in range(cutoff)
    )
    record("photon-pmf", dev, 1e-12)

    # concentration identity at n = 2 (and the n = 3 cascade with --deep)
    report = fock.verify_concentration_n2(zeta, n_mean, cutoff=args.cutoff)
    record("concentration-n2", max(report.dist_first, report.dist_second), 1e-6)
    if args.deep:
        cascade = fock.verify_concentration_cascade(zeta, n_mean, n_copies=3, cutoff=args.cutoff)
        dev = max(max(r.dist_first, r.dist_second) for r in cascade)
        record("concentration-n3", dev, 1e-6)

    # finite-difference RLD Fisher matrix against the closed-form inverses
    rld_cutoff = args.cutoff or fock.cutoff_for(n_mean, abs(zeta))
    for n_params, closed in ((2, rld_inverse_2param(n_mean)), (3, rld_inverse_3param(n_mean))):
        fisher = fock.numeric_rld_fisher(n_params, theta, rld_cutoff, step=1e-4)
        dev = float(np.max(np.abs(np.linalg.inv(fisher) - closed)))
        record(f"rld-{n_params}param", dev, 1e-3)

    return checks, all(c["pass"] for c in checks)


def cmd_oracle_check(args, argv) -> int:
    checks, ok = _run_oracle_checks(args)
    if args.json:
        sys.stdout.write(_dump_json({"checks": checks, "pass": ok, "version": __version__}))
    else:
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"check {c['name']:<18} max dev {c['max_dev']:.3e}  tol {c['tol']:.1e}  {status}")
        if not ok:
            failing = ", ".join(c["name"] for c in checks if not c["pass"])
            print(f"FAILED: {failing}", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtslab",
        description="Estimation bounds and Monte Carlo experiments for displaced thermal states.",
    )
    parser.add_argument("--version", action="version", version=f"dtslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="print Cramér-Rao type bound values")
    p_bounds.add_argument("--n-mean", type=float, required=True, help="mean thermal photon number")
    p_bounds.add_argument("--weight", help="weight matrix: identity2, identity3, or a file path")
    p_bounds.add_argument("--known-n", action="store_true", help="two-parameter case (N known)")
    p_bounds.add_argument("--theta1", type=float)
    p_bounds.add_argument("--theta2", type=float)
    p_bounds.add_argument("--zeta-re", type=float)
    p_bounds.add_argument("--zeta-im", type=float)
    p_bounds.add_argument("--json", action="store_true")
    p_bounds.set_defaults(func=cmd_bounds)

    p_sim = sub.add_parser("simulate", help="Monte Carlo MSE against the bound")
    p_sim.add_argument("--protocol", choices=[p.value for p in ProtocolKind])
    p_sim.add_argument("--n-mean", type=float)
    p_sim.add_argument("--theta1", type=float)
    p_sim.add_argument("--theta2", type=float)
    p_sim.add_argument("--zeta-re", type=float)
    p_sim.add_argument("--zeta-im", type=float)
    p_sim.add_argument("--n-copies", type=int)
    p_sim.add_argument("--trials", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--weight")
    p_sim.add_argument(
        "--clip-nonneg",
        action="store_true",
        help="clip photon-number estimates at 0 (default: record them raw)",
    )
    p_sim.add_argument("--threads", type=int)
    p_sim.add_argument("--out", help="write the summary JSON here (plus a .manifest.json)")
    p_sim.add_argument("--trial-csv", help="write per-trial records to this CSV file")
    p_sim.add_argument("--config", help="JSON file mirroring the flags; flags override it")
    p_sim.add_argument("--json", action="store_true")
    p_sim.add_argument(
        "--ratio-table",
        action="store_true",
        help="emit the collective-vs-separable ratio grid over N x n instead of one run",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_oracle = sub.add_parser("oracle-check", help="certify analytic laws against the Fock oracle")
    p_oracle.add_argument("--n-mean", type=float)
    p_oracle.add_argument("--zeta-re", type=float)
    p_oracle.add_argument("--zeta-im", type=float)
    p_oracle.add_argument("--cutoff", type=int, help="Fock cutoff (default: tail rule)")
    p_oracle.add_argument("--deep", action="store_true", help="also verify the n=3 cascade")
    p_oracle.add_argument("--json", action="store_true")
    p_oracle.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, list(argv))
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
