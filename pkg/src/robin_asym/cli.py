"""Batch front-end: subcommands for each stage plus a full verification run.

Outputs are CSV files (header row, '.' decimal, 17 significant digits) and a
JSON summary; the verify pipeline prints one PASS/FAIL/INCONCLUSIVE line per
checked inequality.  Subcommands: geometry, spectrum1d, transverse, disc,
fem, trial, verify, run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import asymptotics, comparison_1d, disc_oracle, geometry, robin_fem, transverse
from .errors import ParameterError, RobinAsymError, UsageError


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Validated inputs of a full verification run."""

    curve: dict
    beta_list: list
    n_modes: int = 4
    order: int = 2
    target_h: float | None = None
    layers_ratio: float | None = None
    verify_sandwich: bool = True
    verify_two_term: bool = True
    verify_trial: bool = True
    verify_transverse: bool = False
    verify_disc: bool = False
    output_dir: str = "."
    jobs: int = 1
    curve_samples: int = 1024

    def validate(self) -> None:
        if not self.beta_list:
            raise UsageError("beta_list must not be empty")
        betas = [float(b) for b in self.beta_list]
        if any(b <= 0 for b in betas) or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise UsageError("beta_list must be positive and strictly ascending")
        if not 1 <= int(self.n_modes) <= 12:
            raise UsageError("n_modes must lie in 1..12")
        if self.order not in (1, 2):
            raise UsageError("order must be 1 or 2")
        if "kind" not in self.curve:
            raise UsageError("curve spec needs a 'kind'")

    @staticmethod
    def from_json(path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f for f in RunConfig.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        cfg = RunConfig(**data)
        cfg.validate()
        return cfg


def parse_curve_spec(spec: str) -> dict:
    """circle:R | ellipse:a,b | perturbed:delta,m | fourier:@coeffs.json"""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "circle":
            return {"kind": "circle", "radius": float(rest)}
        if kind == "ellipse":
            a, b = (float(x) for x in rest.split(","))
            return {"kind": "ellipse", "a": a, "b": b}
        if kind == "perturbed":
            delta, mode = rest.split(",")
            return {"kind": "perturbed", "delta": float(delta), "mode": int(mode)}
        if kind == "fourier":
            if not rest.startswith("@"):
                raise UsageError("fourier curves are given as fourier:@coeffs.json")
            with open(rest[1:], encoding="utf-8") as fh:
                coeffs = json.load(fh)
            return {"kind": "fourier", **coeffs}
    except (ValueError, OSError) as exc:
        raise UsageError(f"bad curve spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown curve kind {kind!r}")


def build_curve(curve: dict) -> geometry.ParametricCurve:
    kind = curve["kind"]
    if kind == "circle":
        return geometry.circle(curve["radius"])
    if kind == "ellipse":
        return geometry.ellipse(curve["a"], curve["b"])
    if kind == "perturbed":
        return geometry.perturbed_circle(curve["delta"], curve["mode"])
    if kind == "fourier":
        return geometry.fourier_curve(
            curve.get("x_cos", [0.0]), curve.get("x_sin", [0.0]),
            curve.get("y_cos", [0.0]), curve.get("y_sin", [0.0]),
        )
    raise UsageError(f"unknown curve kind {kind!r}")


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else _fmt(float(c)) for c in row) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_geometry(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    alc = geometry.reparametrize_arclength(curve, args.samples)
    cp = geometry.signed_curvature(alc)
    a1 = geometry.tubular_halfwidth(alc, cp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "curvature.csv", ["s", "gamma"], zip(cp.s_grid, cp.gamma))
    print(f"L = {alc.length_L:.12g}")
    print(f"gamma_star = {cp.gamma_star:.12g}, gamma_lowstar = {cp.gamma_lowstar:.12g}")
    print(f"gamma_plus = {cp.gamma_plus:.12g}, a1 = {a1:.12g}")
    print(f"wrote {out / 'curvature.csv'}")
    return 0


def _cmd_spectrum1d(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    alc = geometry.reparametrize_arclength(curve, args.samples)
    cp = geometry.signed_curvature(alc)
    op = comparison_1d.build_comparison_operator(cp)
    spec = comparison_1d.solve_periodic_spectrum(op, args.modes, args.grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    comparison_1d.spectrum_to_csv(spec, out / "spectrum1d.csv")
    for j, mu in enumerate(spec.eigenvalues, start=1):
        print(f"mu_{j} = {mu:.12g}")
    print(f"wrote {out / 'spectrum1d.csv'}")
    return 0


def _cmd_transverse(args) -> int:
    betas = [float(b) for b in args.betas.split(",") if b]
    if not betas:
        raise UsageError("empty beta list")
    rows = []
    checks = []
    for beta in betas:
        p = transverse.TransverseParams(args.a, beta, args.gamma_b, args.gamma_plus)
        rd = transverse.solve_dirichlet_mode(p)
        lo_d, hi_d = transverse.dirichlet_bounds(p)
        rn = transverse.solve_neumann_mode(p)
        lo_n, hi_n = transverse.neumann_bounds(p)
        rows.append((args.a, beta, rd.zeta, lo_d, hi_d, rn.zeta, lo_n, hi_n))
        checks.append((beta, lo_d <= rd.zeta <= hi_d, lo_n <= rn.zeta <= hi_n))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    transverse.sweep_to_csv(rows, out / "transverse.csv")
    for beta, ok_d, ok_n in checks:
        print(f"[{'PASS' if ok_d else 'FAIL'}] hard-wall enclosure at beta={beta:g}")
        print(f"[{'PASS' if ok_n else 'FAIL'}] far-Robin enclosure at beta={beta:g}")
    print(f"wrote {out / 'transverse.csv'}")
    return 0


def _cmd_disc(args) -> int:
    req = disc_oracle.DiscSpectrumRequest(args.R, args.beta, args.levels)
    rows = disc_oracle.spectrum_rows(req, m_max=args.levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    disc_oracle.rows_to_csv(rows, out / "disc.csv")
    print("m,X,lambda,two_term,defect")
    for m, x_root, lam, approx, defect in rows:
        print(f"{m},{x_root:.10g},{lam:.10g},{approx:.10g},{defect:.3e}")
    print(f"wrote {out / 'disc.csv'}")
    return 0


def _cmd_fem(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    alc = geometry.reparametrize_arclength(curve, args.samples)
    res = robin_fem.compute_spectrum(alc, args.beta, args.n, order=args.order,
                                     target_h=args.target_h, refine=not args.no_refine)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    robin_fem.spectrum_to_csv([res], out / "fem_spectrum.csv")
    if args.dump_mesh:
        mesh = robin_fem.mesh_domain(alc, args.beta,
                                     args.target_h or alc.length_L / 256.0)
        robin_fem.mesh_to_csv(mesh, out / "mesh_nodes.csv", out / "mesh_triangles.csv")
    for i, lam in enumerate(res.eigenvalues, start=1):
        est = res.discretization_error_estimate
        tail = f" +- {est[i-1]:.2e}" if est is not None else ""
        print(f"lambda_{i} = {lam:.12g}{tail}")
    print(f"wrote {out / 'fem_spectrum.csv'}")
    return 0


def _cmd_trial(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    alc = geometry.reparametrize_arclength(curve, args.samples)
    cp = geometry.signed_curvature(alc)
    quotients = asymptotics.trial_orthogonal_family(cp, alc, args.beta, args.jmax)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "trial.csv",
               ["j", "quotient", "alpha", "a", "epsilon"],
               [(str(j), q.value, q.alpha, q.a, q.epsilon)
                for j, q in enumerate(quotients, start=1)])
    for j, q in enumerate(quotients, start=1):
        margin = q.value + q.alpha**2
        print(f"j={j}: quotient = {q.value:.10g} "
              f"(excess over -(beta+gamma*/2)^2: {margin:.6g})")
    print(f"wrote {out / 'trial.csv'}")
    return 0


def run(config: RunConfig) -> int:
    """Full pipeline: geometry -> 1D -> transverse/disc -> FEM -> report."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    betas = [float(b) for b in config.beta_list]
    lines: list[str] = []

    curve = build_curve(config.curve)
    alc = geometry.reparametrize_arclength(curve, config.curve_samples)
    cp = geometry.signed_curvature(alc)
    _write_csv(out / "curvature.csv", ["s", "gamma"], zip(cp.s_grid, cp.gamma))

    op = comparison_1d.build_comparison_operator(cp)
    spec = comparison_1d.solve_periodic_spectrum(op, max(8, config.n_modes), 1024)
    comparison_1d.spectrum_to_csv(spec, out / "spectrum1d.csv")

    if config.verify_transverse:
        rows = []
        for beta in betas:
            # cap the strip so the far-end coefficient stays subordinate
            a = min(asymptotics.default_strip_width(cp, alc, beta),
                    0.5 / cp.gamma_plus)
            try:
                p = transverse.TransverseParams(a, beta, cp.gamma_lowstar, cp.gamma_plus)
                rd = transverse.solve_dirichlet_mode(p)
                lo_d, hi_d = transverse.dirichlet_bounds(p)
                pn = transverse.TransverseParams(a, beta, cp.gamma_star, cp.gamma_plus)
                rn = transverse.solve_neumann_mode(pn)
                lo_n, hi_n = transverse.neumann_bounds(pn)
            except ParameterError as exc:
                lines.append(f"[INCONCLUSIVE] transverse preconditions fail "
                             f"at beta={beta:g}: {exc}")
                continue
            rows.append((a, beta, rd.zeta, lo_d, hi_d, rn.zeta, lo_n, hi_n))
            lines.append(f"[{'PASS' if lo_d <= rd.zeta <= hi_d else 'FAIL'}] "
                         f"hard-wall transverse enclosure at beta={beta:g}")
            lines.append(f"[{'PASS' if lo_n <= rn.zeta <= hi_n else 'FAIL'}] "
                         f"far-Robin transverse enclosure at beta={beta:g}")
        transverse.sweep_to_csv(rows, out / "transverse.csv")

    if config.verify_disc:
        for beta in betas:
            rows = disc_oracle.spectrum_rows(
                disc_oracle.DiscSpectrumRequest(1.0, beta, config.n_modes))
            disc_oracle.rows_to_csv(rows, out / f"disc_beta{beta:g}.csv")

    def fem_solve(beta):
        return robin_fem.compute_spectrum(
            alc, beta, max(config.n_modes, 5), order=config.order,
            target_h=config.target_h, ratio=config.layers_ratio, refine=True)

    jobs = max(1, int(config.jobs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fem_solve, betas))
    else:
        results = [fem_solve(beta) for beta in betas]
    robin_fem.spectrum_to_csv(results, out / "fem_spectrum.csv")

    report = None
    if config.verify_sandwich:
        report = asymptotics.verify_sandwich(results, cp, spec, n_max=config.n_modes)
        if config.verify_two_term and len(betas) >= 3:
            report.c_estimate = asymptotics.two_term_fit(results).c_estimate
        lines.extend(report.summary_lines())
        report.to_csv(out / "report.csv")
        report.to_json(out / "report.json")
        for n in range(1, config.n_modes + 1):
            rows_n = [r for r in report.rows if r.n == n]
            _write_csv(out / f"plot_lambda_n{n}.csv", ["beta", "lambda"],
                       [(r.beta, r.lambda_value) for r in rows_n])
            _write_csv(out / f"plot_residuals_n{n}.csv", ["beta", "residual_lower"],
                       [(r.beta, r.residual_lower) for r in rows_n])

    if config.verify_trial:
        for beta, res in zip(betas, results):
            q = asymptotics.trial_rayleigh_quotient(cp, alc, beta)
            est = res.discretization_error_estimate
            slack = float(est[0]) if est is not None else 0.0
            ok = q.value >= float(res.eigenvalues[0]) - slack
            lines.append(f"[{'PASS' if ok else 'FAIL'}] trial quotient bounds "
                         f"lambda_1 from above at beta={beta:g} "
                         f"({q.value:.6f} >= {float(res.eigenvalues[0]):.6f})")

    summary = out / "summary.txt"
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    print(f"wrote {summary}")
    return 0


def _cmd_verify(args) -> int:
    betas = [float(b) for b in args.betas.split(",") if b]
    config = RunConfig(
        curve=parse_curve_spec(args.curve),
        beta_list=betas,
        n_modes=args.n,
        order=args.order,
        target_h=args.target_h,
        output_dir=args.out,
        jobs=args.jobs,
        verify_transverse=args.transverse,
        verify_disc=args.disc,
        curve_samples=args.samples,
    )
    return run(config)


def _cmd_run(args) -> int:
    config = RunConfig.from_json(args.config)
    if args.jobs is not None:
        config.jobs = args.jobs
    return run(config)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _default_jobs() -> int:
    env = os.environ.get("ROBIN_ASYM_JOBS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robin-asym",
        description="Negative Robin-Laplacian eigenvalues at large coupling: "
                    "solvers, oracles, and estimate verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_curve(p):
        p.add_argument("--curve", required=True,
                       help="circle:R | ellipse:a,b | perturbed:delta,m | fourier:@file.json")
        p.add_argument("--samples", type=int, default=1024)

    p = sub.add_parser("geometry", help="arc-length form, curvature, tube width")
    add_curve(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("spectrum1d", help="comparison-operator spectrum")
    add_curve(p)
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_spectrum1d)

    p = sub.add_parser("transverse", help="transverse-mode sweep with enclosures")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--betas", required=True, help="comma-separated list")
    p.add_argument("--gamma-b", type=float, dest="gamma_b", default=0.0)
    p.add_argument("--gamma-plus", type=float, dest="gamma_plus", default=0.0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_transverse)

    p = sub.add_parser("disc", help="Bessel oracle spectrum on a disc")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_disc)

    p = sub.add_parser("fem", help="finite-element negative spectrum")
    add_curve(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--target-h", type=float, dest="target_h", default=None)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--dump-mesh", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_fem)

    p = sub.add_parser("trial", help="trial-function upper bounds")
    add_curve(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--jmax", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_trial)

    p = sub.add_parser("verify", help="full estimate verification pipeline")
    add_curve(p)
    p.add_argument("--betas", required=True, help="comma-separated ascending list")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--target-h", type=float, dest="target_h", default=None)
    p.add_argument("--transverse", action="store_true")
    p.add_argument("--disc", action="store_true")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("run", help="run a JSON config through the full pipeline")
    p.add_argument("config", help="path to a RunConfig JSON file")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RobinAsymError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
