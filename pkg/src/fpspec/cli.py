"""Command-line front end: ``fpspec <command> --model PATH ...``.

Exit codes: 0 success, 1 invalid model or failed check, 2 malformed input,
3 decay-bound violation, 4 Green's function refused a degenerate time.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DegenerateTimeError, FPSpecError, InputError, InvalidModelError
from .evolution import DEFAULT_QUAD_ORDER, greens_evaluate, initial_state, propagate, solve_lyapunov
from .functionals import decay_experiment, entropy_e2, fisher_I2, format_float, sharpness_witness, vanishing_order
from .generator import build_block, verify_spectrum
from .hermite import CoeffVector, enumerate_indices, load_coeffs, reconstruct
from .model import ModelSpec, model_from_dict, read_model_document, spectral_summary

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BOUND, EXIT_DEGENERATE = 0, 1, 2, 3, 4
GREENS_TOL = 1e-6
GRID_POINTS = 10
GRID_HALFWIDTH = 3.0

COMMANDS = ("validate", "spectrum", "evolve", "decay", "sharpness", "greens-check")


@dataclass
class RunConfig:
    command: str
    model_path: str
    f0_path: str | None = None
    t_max: float = 1.0
    samples: int = 11
    truncation: int | None = None
    m: int | None = None
    quad_order: int = DEFAULT_QUAD_ORDER
    output_path: str | None = None
    format: str = "csv"
    t_star: float = 1.0
    timestamp: bool = True

    def check(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command}")
        if not self.t_max > 0:
            raise InputError("--tmax must be positive")
        if self.samples < 2:
            raise InputError("--samples must be at least 2")
        if self.m is not None and self.m < 1:
            raise InputError("--m must be at least 1")
        if self.truncation is not None and self.m is not None and self.truncation < self.m:
            raise InputError("--truncation must be at least --m")
        if self.quad_order < 4:
            raise InputError("--quad-order must be at least 4")
        if self.format not in ("csv", "json"):
            raise InputError("--format must be csv or json")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FPSPEC_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def write_atomic(path: str | None, text: str) -> None:
    """Write text to path via a temporary file and rename; stdout when path is None."""
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _json_text(doc: dict, cfg: RunConfig) -> str:
    if cfg.timestamp:
        doc = {**doc, "generated_at": datetime.now(timezone.utc).isoformat()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _complex_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _load_model(cfg: RunConfig) -> ModelSpec:
    return model_from_dict(read_model_document(cfg.model_path))


def _load_f0(cfg: RunConfig, model: ModelSpec) -> CoeffVector:
    if cfg.f0_path is None:
        raise InputError(f"{cfg.command} needs --f0")
    return load_coeffs(cfg.f0_path, model.d)


def _summary_doc(model: ModelSpec) -> dict:
    s = spectral_summary(model)
    return {
        "d": model.d,
        "rank_D": model.rank,
        "eigenvalues": [_complex_json(z) for z in s.eigenvalues],
        "mu": s.mu,
        "n": s.defect,
        "model_hash": model.digest(),
    }


def cmd_validate(cfg: RunConfig) -> int:
    doc = read_model_document(cfg.model_path)
    try:
        model = model_from_dict(doc)
    except InvalidModelError as exc:
        violations = [v.to_dict() for v in exc.violations]
        print(json.dumps(violations, indent=2))
        if cfg.output_path:
            write_atomic(cfg.output_path, json.dumps(violations, indent=2) + "\n")
        return EXIT_FAIL
    summary = _summary_doc(model)
    if cfg.format == "json" or cfg.output_path:
        text = _json_text({"valid": True, **summary}, cfg)
        write_atomic(cfg.output_path, text)
    if cfg.output_path or cfg.format != "json":
        eig = ", ".join(f"{z[0]:.12g}{z[1]:+.12g}j" if abs(z[1]) > 1e-14 else f"{z[0]:.12g}" for z in summary["eigenvalues"])
        print(f"valid model: d = {summary['d']}, rank D = {summary['rank_D']}")
        print(f"eigenvalues of C: {eig}")
        print(f"mu = {summary['mu']:.12g}, n = {summary['n']}")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    summary = spectral_summary(model)
    M = cfg.truncation or cfg.m or 4
    blocks = []
    for m in range(1, M + 1):
        block = build_block(model, m)
        mismatch = verify_spectrum(block, summary)
        blocks.append({**block.to_dict(), "spectral_mismatch": mismatch})
    if cfg.format == "json":
        text = _json_text({**_summary_doc(model), "blocks": blocks}, cfg)
    else:
        text = _csv_text(["m", "size", "spectral_mismatch"], [(b["m"], len(b["basis"]), b["spectral_mismatch"]) for b in blocks])
    write_atomic(cfg.output_path, text)
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    f0 = _load_f0(cfg, model)
    deviation = abs(float(f0.mass)) <= 1e-12
    if not deviation and abs(float(f0.mass) - 1.0) > 1e-12:
        raise InputError(f"f0 must have unit mass or zero mass, got d_0 = {float(f0.mass)}")
    state = initial_state(model, f0, cfg.truncation)
    alphas = [a for m in range(state.truncation + 1) for a in enumerate_indices(model.d, m)]
    states = _map_ordered(lambda t: propagate(state, t), cfg.times())
    rows = []
    for s in states:
        e2 = entropy_e2(s.coeffs, deviation=deviation)
        rows.append([s.t, e2, fisher_I2(s.coeffs)] + [float(s.coeffs[a]) for a in alphas])
    names = ["d_" + "_".join(map(str, a)) for a in alphas]
    if cfg.format == "json":
        doc = {"model_hash": model.digest(), "truncation": state.truncation,
               "series": [{"t": r[0], "e2": r[1], "fisher": r[2], "coeffs": s.coeffs.to_json()} for r, s in zip(rows, states)]}
        text = _json_text(doc, cfg)
    else:
        text = _csv_text(["t", "e2", "fisher"] + names, rows)
    write_atomic(cfg.output_path, text)
    return EXIT_OK


def cmd_decay(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    f0 = _load_f0(cfg, model)
    m = cfg.m or max(1, vanishing_order(f0))
    report = decay_experiment(model, f0, cfg.times(), m=m, truncation=cfg.truncation, check=False)
    if cfg.format == "json":
        text = _json_text(report.to_json(), cfg)
    else:
        text = report.to_csv()
    write_atomic(cfg.output_path, text)
    bad = report.first_violation()
    if bad is not None:
        print(f"bound violated at sample {bad}: t = {report.times[bad]:.17g}, "
              f"fisher = {report.fisher[bad]:.17g} > bound = {report.bound[bad]:.17g}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_sharpness(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    m = cfg.m or 1
    w = sharpness_witness(model, m, cfg.t_star)
    if not w.unique:
        print("warning: top singular value is not simple; witness is one of several maximizers", file=sys.stderr)
    if cfg.format == "json":
        doc = {"m": m, "t_star": cfg.t_star, "direction": w.direction.tolist(), "unique": w.unique,
               "coefficients": w.f0.to_json()}
        text = _json_text(doc, cfg)
    else:
        # plain coefficient list, directly usable as --f0
        text = json.dumps(w.f0.to_json(), indent=2) + "\n"
    write_atomic(cfg.output_path, text)
    return EXIT_OK


def evaluation_grid(d: int, n: int = GRID_POINTS, half: float = GRID_HALFWIDTH) -> np.ndarray:
    axis = np.linspace(-half, half, n)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def cmd_greens_check(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    f0 = _load_f0(cfg, model)
    state = initial_state(model, f0, cfg.truncation)
    times = cfg.times()[1:]  # G(., 0) is a delta; t = 0 is not evaluated
    grid = evaluation_grid(model.d)

    def one(t):
        W = solve_lyapunov(model, t).W
        g = greens_evaluate(model, f0, grid, t, cfg.quad_order, W=W)
        s = reconstruct(propagate(state, t).coeffs, grid)
        return float(np.max(np.abs(g - s)))

    try:
        errs = _map_ordered(one, times)
    except DegenerateTimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"smallest safe t: {exc.safe_t:.6g}", file=sys.stderr)
        return EXIT_DEGENERATE
    if cfg.format == "json":
        text = _json_text({"model_hash": model.digest(), "quad_order": cfg.quad_order, "tolerance": GREENS_TOL,
                           "t": times.tolist(), "max_abs_discrepancy": errs}, cfg)
    else:
        text = _csv_text(["t", "max_abs_discrepancy"], zip(times, errs))
    write_atomic(cfg.output_path, text)
    return EXIT_OK if max(errs) <= GREENS_TOL else EXIT_FAIL


HANDLERS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "decay": cmd_decay,
    "sharpness": cmd_sharpness,
    "greens-check": cmd_greens_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpspec", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--model", required=True, help="model JSON {d, C, D}")
    parser.add_argument("--f0", help="initial data as a coefficient JSON list")
    parser.add_argument("--tmax", type=float, default=1.0)
    parser.add_argument("--samples", type=int, default=11)
    parser.add_argument("--truncation", type=int)
    parser.add_argument("--m", type=int, help="declared vanishing order of f0")
    parser.add_argument("--quad-order", type=int, default=DEFAULT_QUAD_ORDER)
    parser.add_argument("--t-star", type=float, default=1.0, help="time at which the sharpness witness is extremal")
    parser.add_argument("--out", help="output file (stdout if omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--no-timestamp", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command, model_path=args.model, f0_path=args.f0, t_max=args.tmax,
        samples=args.samples, truncation=args.truncation, m=args.m, quad_order=args.quad_order,
        output_path=args.out, format=args.format, t_star=args.t_star, timestamp=not args.no_timestamp,
    )
    try:
        cfg.check()
        return HANDLERS[cfg.command](cfg)
    except InvalidModelError as exc:
        print(json.dumps([v.to_dict() for v in exc.violations], indent=2), file=sys.stderr)
        return EXIT_FAIL
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FPSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
