"""Command-line entry point.

Exit codes: 0 ok, 1 parse error, 2 validation or cap error, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cop_analysis as cop
from . import discord as dsc
from . import fileio
from . import mixture_spectrum as mix
from . import reproduce as repro
from .operator_core import CapExceededError, CopchanError, DimensionError

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_ACCEPTANCE = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    seed: int = 0
    tol: float | None = None
    out: str | None = None
    cap_d: int | None = None
    samples: int = 200

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.cap_d is not None and self.cap_d < 1:
            raise ValueError("cap must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _emit(payload, cfg: RunConfig, text: str | None = None) -> None:
    body = text if text is not None else json.dumps(payload, indent=2) + "\n"
    if cfg.out:
        directory = os.path.dirname(os.path.abspath(cfg.out))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".copchan-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(body)
            os.replace(tmp, cfg.out)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    else:
        sys.stdout.write(body)


def _load_channel(path: str):
    try:
        return fileio.load_channel(path)
    except fileio.InputValidationError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}") from exc
    except (fileio.ParseError, OSError) as exc:
        raise _Fail(EXIT_PARSE, f"{path}: {exc}") from exc


def cmd_analyze(cfg: RunConfig) -> int:
    ch = _load_channel(cfg.inputs[0])
    tp_err = ch.trace_preservation_error()
    if tp_err > 1e-10:
        raise _Fail(EXIT_INVALID, f"channel is not trace preserving (max error {tp_err:.3e})")
    tol = cfg.tol if cfg.tol is not None else cop.COP_TOL
    report = cop.analyze(ch, samples=cfg.samples, seed=cfg.seed, tol=tol).to_dict()
    report.update({
        "d": ch.d,
        "kind": ch.name,
        "tp": True,
        "tp_error": tp_err,
        "cp": ch.is_completely_positive(),
        "min_choi_eigenvalue": ch.min_choi_eigenvalue(),
        "samples": cfg.samples,
        "seed": cfg.seed,
    })
    _emit(report, cfg)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, d: int, channel: str | None, p: float) -> int:
    try:
        k = mix.build_k(d, cap_d=cfg.cap_d)
    except (CapExceededError, DimensionError) as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from exc
    report = mix.spectrum(k)
    report["expected_set"] = mix.spectrum_targets(d)
    if d >= 3:
        report["k_squared_residual"] = mix.verify_k_squared_decomposition(k)
    if channel is not None:
        ch = _load_channel(channel)
        if ch.d != d:
            raise _Fail(EXIT_INVALID, f"channel dimension {ch.d} differs from d={d}")
        try:
            res = mix.identity_mixture_check(ch, p)
        except (mix.HypothesisError, DimensionError, ValueError) as exc:
            raise _Fail(EXIT_INVALID, str(exc)) from exc
        report["identity_mixture"] = asdict(res) | {"p": p}
    _emit(report, cfg)
    return EXIT_OK if report["within_expected_set"] else EXIT_INVALID


def cmd_discord(cfg: RunConfig) -> int:
    path = cfg.inputs[0]
    try:
        st = fileio.load_state(path)
    except dsc.InvalidStateError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}") from exc
    except (fileio.ParseError, OSError) as exc:
        raise _Fail(EXIT_PARSE, f"{path}: {exc}") from exc
    zero, residual = dsc.zero_a_discord(st)
    report = {"dA": st.d_a, "dB": st.d_b, "zero_discord": zero, "zero_discord_residual": residual,
              "eigenvalues": np.linalg.eigvalsh(st.rho).tolist()}
    if st.d_a == 2:
        det = dsc.discord_details(st)
        report.update({
            "discord": det.value,
            "grid_min": det.grid_min,
            "refined_min": det.refined_min,
            "theta": det.theta,
            "phi": det.phi,
            "gradient_norm": det.grad_norm,
            "geometric_discord": dsc.geometric_discord(st),
        })
    else:
        report["discord"] = None
        report["note"] = "projective discord optimization is implemented for dA = 2"
    _emit(report, cfg)
    return EXIT_OK


def cmd_probe(cfg: RunConfig) -> int:
    ch = _load_channel(cfg.inputs[0])
    worst, rho, sigma = cop.commuting_pair_probe(ch, samples=cfg.samples, seed=cfg.seed, return_pair=True)
    z_in, z_out, r_in, r_out = cop.discord_creation_check(ch, rho, sigma)
    tol = cfg.tol if cfg.tol is not None else 1e-9
    report = {
        "probe_max": worst,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "tolerance": tol,
        "commutativity_preserved": worst <= tol,
        "worst_pair": {"rho": fileio.encode_matrix(rho), "sigma": fileio.encode_matrix(sigma)},
        "worst_pair_discord": {"input_zero": z_in, "output_zero": z_out,
                               "input_residual": r_in, "output_residual": r_out},
    }
    _emit(report, cfg)
    return EXIT_OK


def cmd_reproduce(cfg: RunConfig, as_json: bool) -> int:
    rcfg = repro.ReproConfig(seed=cfg.seed, tol=cfg.tol, cap_d=cfg.cap_d, samples=cfg.samples)
    checks = repro.run_all(rcfg)
    failed = [c for c in checks if c.status == repro.FAIL]
    summary = {s: sum(c.status == s for c in checks) for s in (repro.PASS, repro.FAIL, repro.SKIP, repro.KNOWN)}
    if as_json or cfg.out:
        _emit({"checks": [c.to_dict() for c in checks], "summary": summary}, cfg)
    if not as_json:
        sys.stdout.write(repro.format_table(checks) + "\n")
        sys.stdout.write(" ".join(f"{k}={v}" for k, v in summary.items()) + "\n")
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="override tolerances")
    common.add_argument("--cap-d", type=int, default=None,
                        help="largest d for materialized operators (env COPCHAN_CAP_D)")
    common.add_argument("--out", default=None, help="write the JSON report here")
    common.add_argument("--samples", type=int, default=200, help="commuting pairs to probe")

    parser = argparse.ArgumentParser(prog="copchan",
                                     description="Commutativity-preserving quantum channel analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common], help="CoP degree and witness report for a channel file")
    p.add_argument("channel")
    p = sub.add_parser("spectrum", parents=[common], help="spectrum of the K operator")
    p.add_argument("d", type=int)
    p.add_argument("--channel", default=None, help="channel file for the mixture classification")
    p.add_argument("--p", type=float, default=0.5, help="identity weight in the mixture")
    p = sub.add_parser("discord", parents=[common], help="discord report for a state file")
    p.add_argument("state")
    p = sub.add_parser("probe", parents=[common], help="random commuting-pair probe for a channel file")
    p.add_argument("channel")
    p = sub.add_parser("reproduce", parents=[common], help="run every reproduction check")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inputs = [getattr(args, k) for k in ("channel", "state") if getattr(args, k, None) is not None]
    try:
        cfg = RunConfig(args.command, inputs, args.seed, args.tol, args.out, args.cap_d, args.samples)
    except ValueError as exc:
        print(f"copchan: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.d, args.channel, args.p)
        if args.command == "discord":
            return cmd_discord(cfg)
        if args.command == "probe":
            return cmd_probe(cfg)
        return cmd_reproduce(cfg, args.json)
    except _Fail as exc:
        print(f"copchan: {exc}", file=sys.stderr)
        return exc.code
    except CopchanError as exc:
        print(f"copchan: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
