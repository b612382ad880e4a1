"""Command-line front end.

Subcommands: ``phantom``, ``mask``, ``forward``, ``recon``, ``tsvd``,
``metrics``, ``check``. Every file-producing run writes exactly one
manifest (``<out>.manifest.json``) recording the resolved parameters,
paths, seed, tool version, and wall time; outputs are deterministic given
the manifest in sequential mode (``--threads 0``).

Exit codes: 0 success, 2 usage or configuration error, 3 data error
(missing or malformed files, mismatched inputs), 4 numeric failure
(divergence, non-unitary matrices, failed invariant checks).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, admm, checks, fileio, mri, tsvd
from .errors import (
    DataFormatError,
    DimensionError,
    NumericError,
    ParameterError,
    TtmriError,
    UnitarityError,
)
from .transforms import KINDS, make_transform

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

HISTORY_COLUMNS = ("iter", "objective", "fidelity", "ttnn", "primal_residual", "elapsed_ms")


def _format_value(v: float) -> str:
    return f"{v:.17g}"


def _format_snr(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.12g}"


def _write_manifest(out_path, command, parameters, inputs, outputs, seed, threads, wall):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "threads": threads,
        "parameters": parameters,
        "inputs": inputs,
        "outputs": [str(p) for p in outputs],
        "wall_time_s": wall,
    }
    path = f"{out_path}.manifest.json"
    fileio.atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_history_csv(path, history):
    lines = [",".join(HISTORY_COLUMNS)]
    for s in history:
        lines.append(
            ",".join(
                [
                    str(s.iteration),
                    _format_value(s.objective),
                    _format_value(s.fidelity),
                    _format_value(s.ttnn),
                    _format_value(s.primal_residual),
                    _format_value(s.elapsed_ms),
                ]
            )
        )
    fileio.atomic_write_text(path, "\n".join(lines) + "\n")


def _require_file(path, role):
    p = Path(path)
    if not p.is_file():
        raise DataFormatError(f"{role} file not found: {path}")
    return p


def _load_spec(mask_path) -> mri.SamplingSpec:
    mask = fileio.load_mask(_require_file(mask_path, "mask"))
    return mri.SamplingSpec(mask, descriptor={"pattern": "file", "path": str(mask_path)})


class ConfigError(ParameterError):
    """A reconstruction config violates the schema; names the key."""


def _cfg_get(cfg, key, kind, required=False, default=None, positive=False, nonneg=False):
    if key not in cfg:
        if required:
            raise ConfigError(f"config key '{key}' is required")
        return default
    value = cfg[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"config key '{key}' must be a number")
        value = float(value)
    elif kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"config key '{key}' must be an integer")
    if positive and not value > 0:
        raise ConfigError(f"config key '{key}' must be positive")
    if nonneg and value < 0:
        raise ConfigError(f"config key '{key}' must be nonnegative")
    return value


def _transform_from_config(entry, nt, key):
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"config key '{key}' must be an object with a 'kind'")
    kind = entry["kind"]
    if kind not in KINDS:
        raise ConfigError(f"config key '{key}.kind' must be one of {KINDS}")
    if kind == "matrix":
        if "matrix_path" not in entry:
            raise ConfigError(f"config key '{key}.matrix_path' is required for kind 'matrix'")
        matrix = fileio.load_transform_matrix(
            _require_file(entry["matrix_path"], "transform matrix")
        )
        return make_transform("matrix", nt, matrix)
    return make_transform(kind, nt)


def _threshold_from_entry(entry, nt, key):
    has_tau = "tau" in entry
    has_a = "a" in entry
    if has_tau == has_a:
        raise ConfigError(f"config key '{key}' needs exactly one of 'tau' and 'a'")
    name = "tau" if has_tau else "a"
    raw = entry[name]
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return name, float(raw)
    if isinstance(raw, list) and len(raw) == nt and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        return name, np.asarray(raw, dtype=float)
    raise ConfigError(f"config key '{key}.{name}' must be a number or a list of {nt} numbers")


def _parse_recon_config(path, nt):
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    mode = cfg.get("mode", "classic")
    if mode not in ("classic", "generalized"):
        raise ConfigError("config key 'mode' must be 'classic' or 'generalized'")
    transform = _transform_from_config(
        _cfg_get(cfg, "transform", dict, required=True), nt, "transform"
    )
    lam = _cfg_get(cfg, "lambda", float, required=(mode == "classic"), default=0.0, nonneg=True)
    rel_tol = _cfg_get(cfg, "rel_tol", float, default=1e-6, nonneg=True)
    seed = _cfg_get(cfg, "seed", int, default=0)
    if mode == "classic":
        parsed = {
            "mode": mode,
            "transform": transform,
            "config": admm.AdmmConfig(
                lam=lam,
                mu=_cfg_get(cfg, "mu", float, required=True, positive=True),
                eta=_cfg_get(cfg, "eta", float, default=1.0, positive=True),
                max_iters=_cfg_get(cfg, "max_iters", int, default=300, positive=True),
                rel_tol=rel_tol,
                transform=transform,
            ),
            "seed": seed,
        }
        return parsed
    raw_schedule = cfg.get("schedule")
    if not isinstance(raw_schedule, list) or not raw_schedule:
        raise ConfigError("config key 'schedule' must be a nonempty list in generalized mode")
    schedule = []
    for idx, entry in enumerate(raw_schedule):
        key = f"schedule[{idx}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"config key '{key}' must be an object")
        name, value = _threshold_from_entry(entry, nt, key)
        entry_transform = (
            _transform_from_config(entry["transform"], nt, f"{key}.transform")
            if "transform" in entry
            else None
        )
        params = admm.IterationParams(
            gamma=_cfg_get(entry, "gamma", float, required=True, nonneg=True),
            eta=_cfg_get(entry, "eta", float, required=True, nonneg=True),
            tau=value if name == "tau" else None,
            a=value if name == "a" else None,
            transform=entry_transform,
        )
        schedule.append(params)
    return {
        "mode": mode,
        "transform": transform,
        "schedule": schedule,
        "rel_tol": rel_tol,
        "report_lambda": lam,
        "seed": seed,
    }


def _cmd_phantom(args):
    start = time.perf_counter()
    transform = None
    if args.phantom_transform != "fft":
        transform = make_transform(args.phantom_transform, args.nt)
    x = mri.make_phantom(
        args.nx, args.ny, args.nt, args.kind, args.seed,
        rank=args.rank, transform=transform,
    )
    fileio.save_tensor(args.out, x)
    outputs = [args.out]
    if args.frames_out:
        outputs.extend(fileio.dump_frames_pgm(args.frames_out, x))
    params = {
        "kind": args.kind, "nx": args.nx, "ny": args.ny, "nt": args.nt,
        "rank": args.rank, "phantom_transform": args.phantom_transform,
    }
    _write_manifest(args.out, "phantom", params, {}, outputs, args.seed,
                    args.threads, time.perf_counter() - start)
    return EXIT_OK


def _cmd_mask(args):
    start = time.perf_counter()
    if args.pattern == "radial":
        spec = mri.gen_pseudo_radial_mask(
            args.nx, args.ny, args.nt, args.lines, args.seed,
            freeze_angles=args.freeze_angles, theta0=args.theta0,
        )
    else:
        spec = mri.gen_vds_mask(args.nx, args.ny, args.nt, args.accel, args.seed)
    fileio.save_mask(args.out, spec)
    params = dict(spec.descriptor)
    params.update({"nx": args.nx, "ny": args.ny, "nt": args.nt, "m": spec.m})
    _write_manifest(args.out, "mask", params, {}, [args.out], args.seed,
                    args.threads, time.perf_counter() - start)
    return EXIT_OK


def _cmd_forward(args):
    start = time.perf_counter()
    image = fileio.load_tensor(_require_file(args.image, "image"))
    spec = _load_spec(args.mask)
    b = mri.forward(image, spec)
    b = mri.add_noise(b, args.sigma, args.seed)
    fileio.save_kspace(args.out, b, mask_path=args.mask)
    params = {"sigma": args.sigma, "m": b.m}
    inputs = {"image": str(args.image), "mask": str(args.mask)}
    outputs = [args.out, f"{args.out}.mask"]
    _write_manifest(args.out, "forward", params, inputs, outputs, args.seed,
                    args.threads, time.perf_counter() - start)
    return EXIT_OK


def _cmd_recon(args):
    start = time.perf_counter()
    spec = _load_spec(args.mask)
    values, _ = fileio.load_kspace(_require_file(args.kspace, "k-space"))
    b = mri.KSpaceVector(values, spec)
    parsed = _parse_recon_config(_require_file(args.config, "config"), spec.dims[2])
    if parsed["mode"] == "classic":
        report = admm.solve(b, spec, parsed["config"], threads=args.threads)
    else:
        report = admm.solve_generalized(
            b, spec, parsed["schedule"], parsed["transform"],
            rel_tol=parsed["rel_tol"], report_lambda=parsed["report_lambda"],
            threads=args.threads,
        )
    fileio.save_tensor(args.out, report.reconstruction)
    history_path = f"{args.out}.history.csv"
    _write_history_csv(history_path, report.history)
    outputs = [args.out, history_path]
    if args.frames_out:
        outputs.extend(fileio.dump_frames_pgm(args.frames_out, report.reconstruction))
    if args.ref:
        ref = fileio.load_tensor(_require_file(args.ref, "reference"))
        print(f"SNR_dB: {_format_snr(mri.snr(report.reconstruction, ref))}")
    params = {"mode": parsed["mode"], "config": str(args.config),
              "iterations_run": report.iterations_run}
    inputs = {"kspace": str(args.kspace), "mask": str(args.mask)}
    if args.ref:
        inputs["ref"] = str(args.ref)
    _write_manifest(args.out, "recon", params, inputs, outputs,
                    parsed["seed"], args.threads, time.perf_counter() - start)
    return EXIT_OK


def _cmd_tsvd(args):
    start = time.perf_counter()
    x = fileio.load_tensor(_require_file(args.tensor, "tensor"))
    nt = x.dims[2]
    if args.transform == "matrix":
        if not args.matrix_path:
            raise ParameterError("--matrix-path is required for --transform matrix")
        matrix = fileio.load_transform_matrix(_require_file(args.matrix_path, "matrix"))
        transform = make_transform("matrix", nt, matrix)
    else:
        transform = make_transform(args.transform, nt)
    factors = tsvd.tt_svd(x, transform, threads=args.threads)
    prefix = str(args.out)
    paths = {
        "U": f"{prefix}_U.t2t", "S": f"{prefix}_S.t2t", "V": f"{prefix}_V.t2t",
    }
    fileio.save_tensor(paths["U"], factors.U)
    fileio.save_tensor(paths["S"], factors.S)
    fileio.save_tensor(paths["V"], factors.V)
    sv_path = f"{prefix}_sv.txt"
    sv_lines = [
        " ".join(_format_value(v) for v in row) for row in factors.singular_values
    ]
    fileio.atomic_write_text(sv_path, "\n".join(sv_lines) + "\n")
    rank = tsvd.transformed_multirank(x, transform)
    print(f"TTNN: {_format_value(float(factors.singular_values.sum()))}")
    print("multirank: " + " ".join(str(r) for r in rank.ranks))
    print(f"sum_rank: {rank.total}")
    params = {"transform": args.transform, "matrix_path": args.matrix_path}
    outputs = [paths["U"], paths["S"], paths["V"], sv_path]
    _write_manifest(prefix, "tsvd", params, {"tensor": str(args.tensor)}, outputs,
                    args.seed, args.threads, time.perf_counter() - start)
    return EXIT_OK


def _cmd_metrics(args):
    rec = fileio.load_tensor(_require_file(args.rec, "reconstruction"))
    ref = fileio.load_tensor(_require_file(args.ref, "reference"))
    line = f"SNR_dB: {_format_snr(mri.snr(rec, ref))}"
    print(line)
    if args.out:
        fileio.atomic_write_text(args.out, line + "\n")
    return EXIT_OK


def _cmd_check(args):
    results = checks.run_checks(level=args.level)
    failures = 0
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += 0 if r.passed else 1
        lines.append(f"{status} {r.name}: {r.detail}")
    lines.append(f"{len(results) - failures}/{len(results)} checks passed")
    text = "\n".join(lines)
    print(text)
    if args.out:
        fileio.atomic_write_text(args.out, text + "\n")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    common.add_argument(
        "--threads", type=int, default=0,
        help="slice-level worker threads; 0 = sequential reference mode",
    )
    common.add_argument("--out", help="primary output path (prefix for tsvd)")

    parser = argparse.ArgumentParser(
        prog="ttmri",
        description="Transformed tensor low-rank reconstruction toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[common], help="generate a synthetic image series")
    p.add_argument("--kind", required=True, choices=mri.PHANTOM_KINDS)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--rank", type=int, default=2, help="tubal rank for low_tubal_rank")
    p.add_argument(
        "--phantom-transform", default="fft", choices=("identity", "fft", "dct"),
        help="transform defining the low_tubal_rank construction",
    )
    p.add_argument("--frames-out", help="directory for per-frame PGM dumps")
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("mask", parents=[common], help="generate a sampling mask")
    p.add_argument("--pattern", required=True, choices=("radial", "vds"))
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--lines", type=int, default=16, help="spokes per frame (radial)")
    p.add_argument("--freeze-angles", action="store_true",
                   help="use the same spoke angles in every frame")
    p.add_argument("--theta0", type=float, default=None,
                   help="explicit base angle instead of a seeded draw (radial)")
    p.add_argument("--accel", type=float, default=8.0, help="acceleration factor (vds)")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("forward", parents=[common], help="simulate undersampled k-space")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--sigma", type=float, default=0.0, help="complex noise std per component")
    p.set_defaults(func=_cmd_forward)

    p = sub.add_parser("recon", parents=[common], help="reconstruct from k-space")
    p.add_argument("--kspace", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--config", required=True, help="JSON solver configuration")
    p.add_argument("--ref", help="reference tensor; prints the final SNR")
    p.add_argument("--frames-out", help="directory for per-frame PGM dumps")
    p.set_defaults(func=_cmd_recon)

    p = sub.add_parser("tsvd", parents=[common], help="factorise a tensor and report norms")
    p.add_argument("--tensor", required=True)
    p.add_argument("--transform", default="fft", choices=KINDS)
    p.add_argument("--matrix-path", help="T2T1 matrix for --transform matrix")
    p.set_defaults(func=_cmd_tsvd)

    p = sub.add_parser("metrics", parents=[common], help="SNR between two tensors")
    p.add_argument("--rec", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("check", parents=[common], help="run the invariant suite")
    p.add_argument("--level", default="quick", choices=checks.LEVELS)
    p.set_defaults(func=_cmd_check)

    return parser


_NEEDS_OUT = {"phantom", "mask", "forward", "recon", "tsvd"}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command in _NEEDS_OUT and not args.out:
        parser.error(f"--out is required for '{args.command}'")
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UnitarityError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TtmriError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
