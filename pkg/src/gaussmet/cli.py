"""Command-line front end.

Exit status: 0 on success, 2 on invalid input, 1 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import homodyne, interferometer, resources
from .core import from_basis
from .estimation import cramer_rao_bound, fisher_information, model_detection_basis
from .models import ModelError, dumps, load_json, model_from_dict

EXIT_OK, EXIT_NUMERIC, EXIT_INVALID = 0, 1, 2
DEFAULT_PHI0_GRID = 16


class CliError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _load(args) -> tuple[dict, object]:
    if args.model is None:
        raise CliError("--model is required for this command")
    path = Path(args.model)
    if not path.exists():
        raise CliError(f"model file not found: {path}")
    doc = load_json(path)
    if args.photons is not None:
        doc = dict(doc, N=args.photons)
    return doc, model_from_dict(doc)


def _emit(obj: dict, out: str | None) -> None:
    text = dumps(obj)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def cmd_crb(args) -> int:
    _, model = _load(args)
    fb = fisher_information(model)
    db = model_detection_basis(model)
    _emit(
        {
            "mean_term": fb.mean_term,
            "cov_term": fb.cov_term,
            "classical_cov_term": fb.classical_cov_term,
            "total": fb.total,
            "p_c": db.p_c,
            "delta_p": cramer_rao_bound(fb.total),
            "delta_p_mean_term_only": cramer_rao_bound(fb.mean_term),
        },
        args.out,
    )
    return EXIT_OK


def cmd_optimize(args) -> int:
    doc, model = _load(args)
    if not args.sigma:
        raise CliError("--sigma is required for optimize")
    budget = resources.SqueezingBudget(tuple(args.sigma))
    db = model_detection_basis(model)
    cov_det = resources.optimal_covariance(budget, model.dim)
    cov = from_basis(cov_det, db.modes())
    cov = 0.5 * (cov + cov.T)
    out_doc = dict(doc, cov={"family": "constant", "cov": cov.tolist()})
    result = {
        "sigma_min": budget.sigma_min,
        "p_c": db.p_c,
        "delta_p_opt": resources.optimal_crb(budget, model.N, db.p_c),
        "cov_detection_basis": cov_det.tolist(),
        "cov_working_basis": cov.tolist(),
    }
    print(dumps(result))
    if args.out:
        Path(args.out).write_text(dumps(out_doc) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    _, model = _load(args)
    config = homodyne.HomodyneConfig(lo_photons=args.lo_photons, n_samples=args.samples, seed=args.seed)
    records, p_hat, report = homodyne.simulate(model, config, args.p_true)
    summary = report.to_dict()
    print(dumps(summary))
    if args.out:
        out = Path(args.out)
        out.with_suffix(".json").write_text(dumps(summary) + "\n")
        _write_csv(
            out.with_suffix(".csv"),
            ["sample_index", "I_minus", "p_hat"],
            ((i, float(a), float(b)) for i, (a, b) in enumerate(zip(records, p_hat))),
        )
    return EXIT_OK


def cmd_interferometer(args) -> int:
    profile = interferometer.make_profile(args.profile)
    sigmas = args.sigma or [1.0]
    N = args.photons if args.photons is not None else 1e4
    if args.phi0 is not None:
        phi0s = [args.phi0]
    else:
        phi0s = np.linspace(-0.5, 0.5, DEFAULT_PHI0_GRID)
    rows = interferometer.sensitivity_table(profile, sigmas, N, phi0s)
    header = ["phi0", "sigma", "N", "Fprime", "delta_phi"]
    if args.out:
        _write_csv(Path(args.out), header, ([r[k] for k in header] for r in rows))
    _write_csv_stdout(header, rows)
    return EXIT_OK


def _write_csv_stdout(header, rows) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in header])


def cmd_sweep(args) -> int:
    _, model = _load(args)
    if not args.sigma:
        raise CliError("--sigma is required for sweep")
    budget = resources.SqueezingBudget(tuple(args.sigma))
    db = model_detection_basis(model)
    rows = resources.allocation_sweep(budget, model, db.modes())
    header = ["placement", "entanglement", "crb", "ratio_to_optimal"]
    if args.out:
        _write_csv(Path(args.out), header, ([r[k] for k in header] for r in rows))
    _write_csv_stdout(header, rows)
    return EXIT_OK


COMMANDS = {
    "crb": cmd_crb,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "interferometer": cmd_interferometer,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussmet",
        description="Cramer-Rao bounds, squeezing allocation and homodyne simulation for Gaussian light.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model JSON file")
    common.add_argument("--out", help="output path")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--p-true", type=float, default=0.0, dest="p_true")
    common.add_argument("--sigma", type=_float_list, help="comma-separated squeezing r.m.s. values")
    common.add_argument("--photons", type=float, help="override the mean photon number N")
    common.add_argument("--phi0", type=float, help="interferometer bias phase")
    common.add_argument("--profile", default="linear", help="interferometer response: linear, scaled:K, cavity:K")
    common.add_argument("--lo-photons", type=float, default=1e6, dest="lo_photons")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.samples < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except np.linalg.LinAlgError as exc:
        print(f"numerical error: {exc} (model covariance at p0)", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ModelError, CliError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
