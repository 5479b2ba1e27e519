"""Command-line interface: estimate, simulate, crb, weights, selftest.

Structured inputs and outputs are JSON; curve data is CSV so golden files
diff cleanly.  Exit codes: 0 success, 1 validation error (bad flags or
config, with a diagnostic naming the offending field), 2 runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import subprocess
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import crb as crb_matrix
from .analysis import reconstruction_bound
from .basis import binomial_to_monomial_matrix, compute_new_coordinate
from .degrees import DegreeSet, build_total_order, validate_degree_set
from .estimator import AveragingKind, EstimatorConfig, estimate
from .harness import ExperimentConfig, run_sweep
from .signal import read_signal
from .weights import weight_multi

_AVERAGING_NAMES = {kind.value: kind for kind in AveragingKind}


class CliValidationError(Exception):
    """Bad flags or config; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliValidationError(f"{message}\n{self.format_usage()}")


def _json_flag(name: str, raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliValidationError(f"flag {name}: invalid JSON ({exc})") from exc


def _degree_set(raw: str, name: str = "--degrees") -> DegreeSet:
    data = _json_flag(name, raw)
    try:
        return build_total_order(tuple(tuple(m) for m in data))
    except (TypeError, ValueError) as exc:
        raise CliValidationError(f"flag {name}: {exc}") from exc


def _window(raw: str, name: str = "--window") -> tuple[int, ...]:
    data = _json_flag(name, raw)
    try:
        window = tuple(int(v) for v in data)
    except (TypeError, ValueError) as exc:
        raise CliValidationError(f"flag {name}: expected an integer array") from exc
    if not window or any(v < 1 for v in window):
        raise CliValidationError(f"flag {name}: entries must be positive")
    return window


def _snr_range(raw: str) -> tuple[float, ...]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise CliValidationError("flag --snr-db-range: expected start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise CliValidationError("flag --snr-db-range: non-numeric bound") from exc
    if step <= 0:
        raise CliValidationError("flag --snr-db-range: step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise CliValidationError("flag --snr-db-range: empty range")
    return tuple(start + i * step for i in range(count))


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _effective_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("PPSG_SEED")
    return int(env) if env is not None else 0


def _version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"ppsg {__version__} ({out.stdout.strip()})"
    except OSError:
        pass
    return f"ppsg {__version__}"


# -- Subcommands -----------------------------------------------------------------


def _cmd_estimate(args: argparse.Namespace) -> int:
    degree_set = _degree_set(args.degrees)
    if args.averaging not in _AVERAGING_NAMES:
        raise CliValidationError(f"flag --averaging: unknown kind {args.averaging!r}")
    lags = ()
    if args.lags is not None:
        raw = _json_flag("--lags", args.lags)
        try:
            lags = tuple(tuple(int(v) for v in tau) for tau in raw)
        except (TypeError, ValueError) as exc:
            raise CliValidationError("flag --lags: expected an array of lag arrays") from exc
    try:
        with open(args.input, "rb") as fh:
            sig = read_signal(fh)
    except FileNotFoundError as exc:
        raise CliValidationError(f"flag --input: {exc}") from exc
    try:
        cfg = EstimatorConfig(
            degree_set=degree_set,
            averaging=_AVERAGING_NAMES[args.averaging],
            lags=lags,
            general_degree_handling=True,
        )
        est = estimate(sig, cfg)
    except ValueError as exc:
        raise CliValidationError(str(exc)) from exc
    monomial = est.monomial
    if args.basis in ("monomial", "both") and monomial is None:
        if not degree_set.is_downward_closed():
            raise CliValidationError(
                "flag --basis: monomial output needs a downward-closed degree set"
            )
        T = binomial_to_monomial_matrix(degree_set)
        monomial = compute_new_coordinate(est.binomial, T)
    payload = {
        "binomial": est.binomial.to_json() if args.basis in ("binomial", "both") else None,
        "monomial": monomial.to_json() if args.basis in ("monomial", "both") else None,
        "diagnostics": [
            {"degree": list(m), "lag": list(tau), "increment": v}
            for (m, tau), v in est.diagnostics.items()
        ],
    }
    with _open_out(args.out) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def _require_field(config: dict, name: str):
    if name not in config:
        raise CliValidationError(f"config field {name!r} is missing")
    return config[name]


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except FileNotFoundError as exc:
        raise CliValidationError(f"flag --config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliValidationError(f"flag --config: invalid JSON ({exc})") from exc

    degree_set = _degree_set(json.dumps(_require_field(config, "degrees")), "degrees")
    window = _window(json.dumps(_require_field(config, "window")), "window")
    averaging_name = config.get("averaging", "circular")
    if averaging_name not in _AVERAGING_NAMES:
        raise CliValidationError(f"config field 'averaging': unknown kind {averaging_name!r}")
    lags = tuple(tuple(int(v) for v in tau) for tau in config.get("lags", []))
    try:
        est_cfg = EstimatorConfig(
            degree_set=degree_set,
            averaging=_AVERAGING_NAMES[averaging_name],
            lags=lags,
            general_degree_handling=bool(config.get("general_degree_handling", False)),
        )
        exp_cfg = ExperimentConfig(
            degree_set=degree_set,
            window=window,
            snr_db_grid=tuple(_require_field(config, "snr_db_grid")),
            trials=int(_require_field(config, "trials")),
            parameter_mode=str(_require_field(config, "parameter_mode")),
            estimator_config=est_cfg,
            master_seed=int(config.get("master_seed", _effective_seed(args))),
            fixed_coefficients=(
                tuple(config["fixed_coefficients"])
                if "fixed_coefficients" in config
                else None
            ),
        )
    except ValueError as exc:
        raise CliValidationError(f"config: {exc}") from exc

    result = run_sweep(exp_cfg, workers=max(1, args.threads))
    with _open_out(args.out) as fh:
        result.write_csv(fh)
    if args.out is not None:
        sidecar = {
            "version": _version_string(),
            "config": {
                "degrees": degree_set.to_json(),
                "window": list(window),
                "snr_db_grid": list(exp_cfg.snr_db_grid),
                "trials": exp_cfg.trials,
                "parameter_mode": exp_cfg.parameter_mode,
                "fixed_coefficients": (
                    list(exp_cfg.fixed_coefficients)
                    if exp_cfg.fixed_coefficients
                    else None
                ),
                "averaging": averaging_name,
                "lags": [list(t) for t in est_cfg.lags],
                "general_degree_handling": est_cfg.general_degree_handling,
                "master_seed": exp_cfg.master_seed,
            },
        }
        with open(args.out + ".meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_crb(args: argparse.Namespace) -> int:
    degree_set = _degree_set(args.degrees)
    window = _window(args.window)
    grid = _snr_range(args.snr_db_range)
    report = validate_degree_set(degree_set, window)
    if not report.window_ok:
        raise CliValidationError(
            f"flag --window: {window} too small for degrees {degree_set.degrees}"
        )
    labels = ["crb_" + "_".join(str(v) for v in m) for m in degree_set.degrees]
    with _open_out(args.out) as fh:
        fh.write(",".join(["snr_db"] + labels + ["reconstruction_bound"]) + "\n")
        for snr_db in grid:
            snr = 10.0 ** (snr_db / 10.0)
            diag = np.diag(crb_matrix(degree_set, window, snr))
            bound = reconstruction_bound(degree_set, snr)
            row = [repr(float(snr_db))] + [repr(float(v)) for v in diag] + [repr(bound)]
            fh.write(",".join(row) + "\n")
    return 0


def _cmd_weights(args: argparse.Namespace) -> int:
    degree = tuple(int(v) for v in _json_flag("--degree", args.degree))
    window = _window(args.window)
    lag = (
        tuple(int(v) for v in _json_flag("--lag", args.lag))
        if args.lag is not None
        else (1,) * len(window)
    )
    try:
        field = weight_multi(degree, lag, window)
    except ValueError as exc:
        raise CliValidationError(str(exc)) from exc
    with _open_out(args.out) as fh:
        fh.write(",".join([f"n_{d}" for d in range(len(window))] + ["weight"]) + "\n")
        for idx in np.ndindex(*field.window):
            fh.write(",".join([str(v) for v in idx] + [repr(float(field.data[idx]))]) + "\n")
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=_effective_seed(args))
    failed = False
    for name, ok in results:
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        failed = failed or not ok
    return 2 if failed else 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ppsg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate coefficients from a signal file")
    p_est.add_argument("--input", required=True, help="signal file (PPSG binary)")
    p_est.add_argument("--degrees", required=True, help="JSON array of degree arrays")
    p_est.add_argument(
        "--averaging", default="circular", help="one of linear|kay|lw|circular"
    )
    p_est.add_argument("--lags", default=None, help="JSON array of lag arrays")
    p_est.add_argument(
        "--basis", default="binomial", choices=("binomial", "monomial", "both")
    )
    p_est.add_argument("--out", default=None)
    p_est.add_argument("--seed", type=int, default=None)
    p_est.set_defaults(handler=_cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo sweep from a JSON config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(handler=_cmd_simulate)

    p_crb = sub.add_parser("crb", help="CRB diagonal and reconstruction bound vs SNR")
    p_crb.add_argument("--degrees", required=True)
    p_crb.add_argument("--window", required=True)
    p_crb.add_argument("--snr-db-range", required=True, help="start:stop:step, inclusive")
    p_crb.add_argument("--out", default=None)
    p_crb.add_argument("--seed", type=int, default=None)
    p_crb.set_defaults(handler=_cmd_crb)

    p_w = sub.add_parser("weights", help="dump an averaging weight field as CSV")
    p_w.add_argument("--degree", required=True, help="JSON multi-index, e.g. [1]")
    p_w.add_argument("--lag", default=None, help="JSON multi-index lag")
    p_w.add_argument("--window", required=True)
    p_w.add_argument("--out", default=None)
    p_w.add_argument("--seed", type=int, default=None)
    p_w.set_defaults(handler=_cmd_weights)

    p_self = sub.add_parser("selftest", help="run the exact-identity suite")
    p_self.add_argument("--seed", type=int, default=None)
    p_self.set_defaults(handler=_cmd_selftest)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except CliValidationError as exc:
        print(f"ppsg: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"ppsg: internal error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main(sys.argv[1:]))
