"""Command-line front end.

Usage::

    lincalderon COMMAND --out DIR [--config FILE] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance, io
from .config import ConfigError, ExperimentConfig, load_config
from .eikonal import (boundary_normal_data, conormal_point_value, eikonal_residual, metric_from_spec,
                      psi_bounds_check, residual_ratio, solve_phase_jet)
from .fbi import analyticity_indicator, write_indicator_csv
from .forward import combine_profiles, dn_map, greens_identity_check, linearized_dn
from .laplace import fit_growth_constant
from .recon import BasisSpec, ReconParams, build_linear_map, injectivity_report, reconstruct_q
from .symbols import build_symbol_table, extract_coefficients, validate_clas

log = logging.getLogger("lincalderon")

COMMANDS = ("forward", "symbol", "laplace-fit", "borel-reconstruct", "injectivity", "eikonal", "fbi", "verify")

# matrices above this size are summarized instead of written in full
_MAX_MATRIX_MODES = 128


class _Run:
    """Output directory plus sidecar bookkeeping for one command."""

    def __init__(self, cfg: ExperimentConfig, out: Path, command: str):
        self.cfg = cfg
        self.out = out
        self.command = command
        self.digest = io.config_hash(cfg.model_dump(mode="json"))
        self.files: list[Path] = []

    def _done(self, path: Path) -> Path:
        io.write_sidecar(path, self.digest, self.command)
        self.files.append(path)
        return path

    def json(self, name, data):
        return self._done(io.write_json(self.out / name, data))

    def rows(self, name, header, rows):
        return self._done(io.write_rows(self.out / name, header, rows))

    def custom(self, path: Path):
        return self._done(path)


def _lambda_dot(cfg: ExperimentConfig):
    g = cfg.grid.build()
    return g, linearized_dn(cfg.potential_profile(), cfg.perturbation_profile(), g)


def cmd_forward(run: _Run):
    cfg = run.cfg
    g = cfg.grid.build()
    V, q = cfg.potential_profile(), cfg.perturbation_profile()
    lam = dn_map(V, g).matrix
    ld = linearized_dn(V, q, g).matrix
    t = cfg.forward.t
    dq = (dn_map(combine_profiles(V, q, t), g).matrix - lam) / t
    nrm = float(np.linalg.norm(ld, 2))
    summary = {"grid": g.to_dict(), "green_identity_residual": greens_identity_check(V, g),
               "difference_quotient_t": t,
               "difference_quotient_error": float(np.linalg.norm(dq - ld, 2)),
               "lambda_dot_norm": nrm}
    run.json("forward.json", summary)
    modes = g.modes
    run.rows("dn_diagonal.csv", ["mode", "re_lambda", "im_lambda", "re_lambda_dot", "im_lambda_dot"],
             ((m, lam[i, i].real, lam[i, i].imag, ld[i, i].real, ld[i, i].imag) for i, m in enumerate(modes)))
    if g.n_boundary_modes <= _MAX_MATRIX_MODES:
        run.json("matrices.json", {"modes": modes, "lambda": io.complex_matrix_dict(lam),
                                   "lambda_dot": io.complex_matrix_dict(ld)})


def cmd_symbol(run: _Run):
    g, ld = _lambda_dot(run.cfg)
    pb = run.cfg.probe
    table = build_symbol_table(ld, pb.boundary_points, pb.frequencies, pb.params)
    run.custom(io.write_symbol_table(run.out / "symbol_table.csv", table))


def cmd_laplace_fit(run: _Run):
    cfg = run.cfg
    g, ld = _lambda_dot(cfg)
    pb = cfg.probe
    table = build_symbol_table(ld, pb.boundary_points, pb.frequencies, pb.params)
    series = extract_coefficients(table, cfg.laplace_fit.n_terms, method=cfg.laplace_fit.method)
    out = []
    for i, s in enumerate(series):
        c_tilde, C = fit_growth_constant(s)
        rep = validate_clas(s, cfg.laplace_fit.clas_constant, table, point_index=i)
        out.append({"y_prime": float(table.boundary_points[i]),
                    "coefficients": [{"k": k + 1, "re": c.real, "im": c.imag} for k, c in enumerate(s.coefficients)],
                    "error_estimates": s.errors, "growth_constant": c_tilde, "truncation_constant": C,
                    "clas": {"min_constant": rep.min_constant, "passes": rep.passes,
                             "growth_slope": rep.growth_slope, "gevrey1": rep.gevrey1,
                             "remainder_slope": rep.remainder_slope}})
    run.json("coefficients.json", {"method": cfg.laplace_fit.method, "points": out})


def cmd_reconstruct(run: _Run):
    cfg = run.cfg
    g, ld = _lambda_dot(cfg)
    pb, rb = cfg.probe, cfg.reconstruct
    params = ReconParams(pb.tau_min, pb.tau_max, pb.n_frequencies, rb.n_terms, rb.radius,
                         probe=pb.params, clas_constant=rb.clas_constant)
    rec = reconstruct_q(ld, pb.boundary_points, params, V=cfg.potential_profile())
    depths = np.linspace(0.0, rb.radius, rb.n_output_depths)
    path = run.out / "profile.csv"
    rec.write_csv(path, depths)
    run.custom(path)
    run.json("reconstruct.json", {"flags": list(rec.flags), "radius": rec.radius,
                                  "boundary_points": rec.boundary_points,
                                  "growth_constants": [b.growth_constant for b in rec.sums],
                                  "taylor": [list(b.coefficients) for b in rec.sums]})


def cmd_injectivity(run: _Run):
    ib = run.cfg.injectivity
    basis = BasisSpec(tuple(ib.tangential_modes), tuple(ib.depth_monomials), ib.envelope_rate)
    M = build_linear_map(run.cfg.potential_profile(), basis, ib.grid.build(), ib.boundary_points,
                         ib.frequencies, run.cfg.probe.params)
    run.json("injectivity.json", injectivity_report(M).to_dict())


def cmd_eikonal(run: _Run):
    eb = run.cfg.eikonal
    model = metric_from_spec(eb.metric)
    pj = solve_phase_jet(model, eb.xi, eb.order)
    depths = [eb.y_n / 2 ** i for i in range(4)]
    bounds = psi_bounds_check(pj) if eb.order >= 2 else None
    run.json("eikonal.json", {
        "metric": eb.metric, "jet": pj.to_dict(),
        "residuals": [{"y_n": d, "residual": float(eikonal_residual(model, pj, d))} for d in depths],
        "residual_ratio": residual_ratio(model, pj, eb.y_n),
        "psi_bounds": None if bounds is None else vars(bounds),
        "conormal_point_value": conormal_point_value(pj),
        "boundary_normal_data": boundary_normal_data(model, 0.0, 1.0),
    })


def _fbi_sample(kind: str, half_width: float, h_min: float):
    n = int(np.ceil(2 * half_width / (np.sqrt(h_min) / 8))) + 1
    y = np.linspace(-half_width, half_width, n)
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    u = {"gaussian": np.exp(-(Y1 ** 2 + Y2 ** 2) / 2),
         "cut": np.where(Y2 >= 0, 1.0, 0.0),
         "cut_exp": np.where(Y2 >= 0, np.exp(-np.abs(Y2)), 0.0),
         "zero": np.zeros_like(Y1)}[kind]
    return u, [y, y]


def cmd_fbi(run: _Run):
    fb = run.cfg.fbi
    u, axes = _fbi_sample(fb.sample, fb.half_width, min(fb.h_ladder))
    zs = [[p[0] + 1j * p[1], p[2] + 1j * p[3]] for p in fb.points]
    res = analyticity_indicator(u, axes, zs, sorted(fb.h_ladder, reverse=True))
    path = run.out / "indicator.csv"
    write_indicator_csv(path, res)
    run.custom(path)


def cmd_verify(run: _Run) -> int:
    results = acceptance.run_all()
    for r in results:
        print(r.line())
    run.json("acceptance.json", [{"criterion": r.number, "title": r.title, "passed": r.passed,
                                  "details": r.details} for r in results])
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return 0 if n_fail == 0 else 3


HANDLERS = {"forward": cmd_forward, "symbol": cmd_symbol, "laplace-fit": cmd_laplace_fit,
            "borel-reconstruct": cmd_reconstruct, "injectivity": cmd_injectivity,
            "eikonal": cmd_eikonal, "fbi": cmd_fbi, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lincalderon", description="Linearized Calderon problem lab")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, default=None, help="JSON experiment config (default: shipped)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="accepted for reproducibility; unused")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, args.out, args.command)
    try:
        code = HANDLERS[args.command](run)
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"numerical error ({module}.{type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    for f in run.files:
        log.info("wrote %s", f)
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
