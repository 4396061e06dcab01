"""Command-line interface: a thin client over the HTTP service.

One verb per artifact::

    emqsim run          time series        -> CSV (stdout or --out)
    emqsim sweep        multi-series CSV   -> CSV (stdout or --out)
    emqsim compile      circuit listing    -> text
    emqsim export-qasm  OpenQASM 2.0       -> .qasm text
    emqsim calibrate    device calibration -> J and t_sqiswap summary

All compute happens behind the service API (mounted in-process by
default), so the CLI only merges config sources, sends one request and
writes the artifact.  Flags beat config-file values; the file is YAML
with nested tables (see ``ExperimentConfig``).

Plotting stays out of process; a CSV plots in one line, e.g.::

    python3 -c "import pandas as pd, matplotlib.pyplot as p; d = pd.read_csv('out.csv'); [p.plot(g['t'], g['value'], label=k) for k, g in d.groupby(['n', 't2'])]; p.legend(); p.savefig('out.png')"

Exit codes: 0 success, 2 configuration error, 3 numerical-integrity abort.
"""

from __future__ import annotations

import argparse
import asyncio
import math
import sys
from typing import Optional, Sequence

import httpx

from .config import build_config, config_to_dict, load_config_file, merge_overrides
from .errors import ConfigError
from .experiments import DEFAULT_T2_SWEEP

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3

_VERBS = ("run", "sweep", "compile", "export-qasm", "calibrate")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emqsim",
        description="Trotterized spin-model simulation on gate and pulse-level backends.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, blurb in (
        ("run", "run one experiment and write its CSV time series"),
        ("sweep", "run a sweep over Trotter steps or T2 and write one CSV"),
        ("compile", "print the Trotter circuit for the configured model"),
        ("export-qasm", "export the circuit as OpenQASM 2.0"),
        ("calibrate", "calibrate the device and print J and t_sqiswap"),
    ):
        p = sub.add_parser(verb, help=blurb)
        p.add_argument("--config", help="YAML config file; flags override its values")
        p.add_argument("--model", choices=("spin1", "tim"))
        p.add_argument("--backend", choices=("exact", "gate", "device"))
        p.add_argument(
            "--steps",
            help="Trotter steps; on `sweep` a comma list selects the sweep axis",
        )
        p.add_argument("--tmax", type=float, help="end of the dimensionless time grid")
        p.add_argument("--points", type=int, help="number of grid points")
        p.add_argument(
            "--t2",
            help="coherence time in seconds ('inf' allowed); on `sweep` a comma "
            "list selects the sweep axis",
        )
        p.add_argument("--shots", type=int, help="0 = exact expectation values")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="artifact path (default: stdout)")
    return parser


def _parse_scalar(text: str, flag: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{flag} expects a number, got {text!r}") from None
    return value


def _split_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _overrides_from_flags(args: argparse.Namespace, sweep_verb: bool) -> tuple[dict, Optional[dict]]:
    """(config overrides, sweep axis spec or None) from the parsed flags."""
    overrides: dict = {}
    grid: dict = {}
    axis_spec: Optional[dict] = None
    if args.model is not None:
        overrides["model"] = args.model
    if args.backend is not None:
        overrides["backend"] = args.backend
    if args.tmax is not None:
        grid["t_max"] = args.tmax
    if args.points is not None:
        grid["points"] = args.points
    if grid:
        overrides["grid"] = grid
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out

    steps_list = _split_list(args.steps) if args.steps is not None else []
    t2_list = _split_list(args.t2) if args.t2 is not None else []
    if sweep_verb and len(steps_list) > 1 and len(t2_list) > 1:
        raise ConfigError("sweep takes a value list on --steps or --t2, not both")

    if args.steps is not None:
        if len(steps_list) > 1:
            if not sweep_verb:
                raise ConfigError("--steps expects a single value here; lists are for `sweep`")
            axis_spec = {"axis": "steps", "values": [_parse_scalar(s, "--steps") for s in steps_list]}
        else:
            value = _parse_scalar(steps_list[0], "--steps")
            if value != int(value):
                raise ConfigError(f"--steps expects an integer, got {args.steps!r}")
            overrides["steps"] = int(value)
    if args.t2 is not None:
        if len(t2_list) > 1:
            if not sweep_verb:
                raise ConfigError("--t2 expects a single value here; lists are for `sweep`")
            axis_spec = {"axis": "t2", "values": [_parse_scalar(s, "--t2") for s in t2_list]}
        else:
            overrides["t2"] = _parse_scalar(t2_list[0], "--t2")
    return overrides, axis_spec


def _request(path: str, payload: dict) -> dict:
    """POST one request to the in-process service and unwrap its errors."""
    from .service import app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://emqsim.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    response = asyncio.run(go())
    if response.status_code == 200:
        return response.json()
    try:
        error = response.json()["error"]
    except Exception:  # noqa: BLE001 - non-JSON bodies become generic failures
        raise RuntimeError(f"service error {response.status_code}: {response.text}") from None
    message = error.get("message", "unknown error")
    if error.get("type") == "config":
        raise ConfigError(message)
    if error.get("type") == "integrity":
        raise _IntegrityExit(message)
    raise RuntimeError(f"service error {response.status_code}: {message}")


class _IntegrityExit(Exception):
    """Server-reported numerical-integrity abort (exit code 3)."""


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _emit_diagnostics(series: Sequence[dict]) -> None:
    for payload in series:
        diag = payload.get("diagnostics") or {}
        if diag:
            labels = ", ".join(f"{k}={v:.3g}" for k, v in sorted(diag.items()))
            print(
                f"[diagnostics] backend={payload['backend']} n={payload['n']} "
                f"t2={payload['t2']}: {labels}",
                file=sys.stderr,
            )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_data = load_config_file(args.config) if args.config else {}
        overrides, axis_spec = _overrides_from_flags(args, sweep_verb=args.verb == "sweep")
        merged = merge_overrides(file_data, overrides)
        cfg = build_config(merged, source_path=args.config)
        payload = config_to_dict(cfg)
        out = cfg.out

        if args.verb == "run":
            body = _request("/run", payload)
            _emit_diagnostics([body["series"]])
            _emit(body["csv"], out)
        elif args.verb == "sweep":
            if axis_spec is None and cfg.sweep is not None:
                axis_spec = {"axis": cfg.sweep.axis, "values": list(cfg.sweep.values)}
            if axis_spec is None:
                axis_spec = {"axis": "t2", "values": list(DEFAULT_T2_SWEEP)}
            values = [("inf" if v == float("inf") else v) for v in axis_spec["values"]]
            body = _request(
                "/sweep",
                {"config": payload, "axis": axis_spec["axis"], "values": values},
            )
            _emit_diagnostics(body["series"])
            _emit(body["csv"], out)
        elif args.verb == "compile":
            body = _request("/compile", payload)
            _emit(body["listing"], out)
        elif args.verb == "export-qasm":
            body = _request("/export-qasm", payload)
            _emit(body["qasm"], out)
        elif args.verb == "calibrate":
            body = _request("/calibrate", payload)
            two_pi = 2.0 * math.pi
            lines = [
                f"J/2pi = {body['j_hz']:.3f} Hz (analytic estimate {body['j_analytic_hz']:.3f} Hz)",
                f"t_sqiswap = {body['t_sqiswap']:.6e} s",
                f"zeta/2pi = ({body['zeta1'] / two_pi:.3f}, {body['zeta2'] / two_pi:.3f}, "
                f"{body['zeta12'] / two_pi:.3f}) Hz",
                f"stark/2pi = ({body['stark_hz'][0]:.3f}, {body['stark_hz'][1]:.3f}) Hz",
                f"residual = {body['residual']:.3e}",
            ]
            _emit("\n".join(lines) + "\n", out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IntegrityExit as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
