"""Command-line harness: config-driven runs with deterministic outputs.

Exit codes: 0 success, 1 input/usage error, 2 a mathematical assertion
demanded by the config failed (the run itself completed).
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import distance as dist
from . import hardy, operators
from .config import ConfigError, RunConfig, parse_config
from .grids import Torus, build_grid, dump_field
from .norms import NormEngine

SUBCOMMANDS = (
    "norm-check",
    "polar",
    "distance",
    "superharmonic",
    "hardy-estimate",
    "lambda1",
    "deficit",
    "optimality-sweep",
    "jbeta-scaling",
    "torus-oracle",
    "repro-all",
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="finslerlab",
        description="anisotropic norm calculus, distance transforms, Hardy functionals",
        epilog=_config_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name != "repro-all":
            p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory (default: config)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        if args.command == "repro-all":
            return _run_repro_all(args)
        cfg = _load(args.config, args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _dispatch(args.command, cfg)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _load(path, args) -> RunConfig:
    cfg = parse_config(Path(path).read_text())
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _dispatch(command, cfg) -> int:
    handler = {
        "norm-check": _run_norm_check,
        "polar": _run_polar,
        "distance": _run_distance,
        "superharmonic": _run_superharmonic,
        "hardy-estimate": _run_hardy_estimate,
        "lambda1": _run_lambda1,
        "deficit": _run_deficit,
        "optimality-sweep": _run_optimality,
        "jbeta-scaling": _run_jbeta,
        "torus-oracle": _run_torus_oracle,
    }[command]
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    return handler(cfg)


def _header(cfg):
    return [f"config_sha256={cfg.sha256} seed={cfg.seed}"]


def _write_csv(cfg, name, columns, rows):
    path = Path(cfg.out_dir) / f"{cfg.prefix}_{name}.csv"
    with open(path, "w") as f:
        for line in _header(cfg):
            f.write(f"# {line}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _solve_distance(cfg):
    grid = build_grid(cfg.domain, cfg.resolution)
    if cfg.distance_source == "bruteforce":
        return grid, dist.distance_bruteforce(grid, cfg.engine)
    if cfg.distance_source == "oracle":
        if not isinstance(cfg.domain, Torus):
            raise ConfigError("distance_source=oracle requires a torus domain")
        field = dist.torus_distance_oracle(cfg.domain, grid, cfg.engine)
        masked = field.copy()
        masked.values[~grid.inside] = np.nan
        return grid, dist._finalize(grid, cfg.engine, masked, "oracle")
    return grid, dist.distance_sweep(grid, cfg.engine, cfg.sweep_tol_factor, cfg.max_rounds)


# ---------------------------------------------------------------------------
# subcommand bodies


def _run_norm_check(cfg) -> int:
    rng = np.random.default_rng(cfg.seed)
    eng = cfg.engine
    x = rng.normal(size=(1000, eng.dim))
    x = x[np.linalg.norm(x, axis=1) > 1e-3]
    tol_unit = 1e-8 if eng.polar_mode == "closed-form" else 1e-5
    grad_polar = eng.polar_gradient(x)
    unit_err = float(np.abs(eng.value(grad_polar) - 1.0).max())
    recon = eng.polar_value(x)[:, None] * eng.gradient(grad_polar)
    recon_err = float(
        (np.linalg.norm(recon - x, axis=1) / np.linalg.norm(x, axis=1)).max()
    )
    t = rng.normal(size=len(x))
    hom_err = float(
        np.abs(eng.value(t[:, None] * x) - np.abs(t) * eng.value(x)).max()
    )
    rows = [
        ("unit_dual_gradient", unit_err, tol_unit),
        ("polar_reconstruction", recon_err, 1e-6 if eng.polar_mode == "closed-form" else 1e-5),
        ("homogeneity", hom_err, 1e-10 * float(1 + eng.value(x).max())),
    ]
    ok = all(err <= tol for _, err, tol in rows)
    _write_csv(cfg, "norm_check", ("identity", "max_error", "tolerance", "status"),
               [(n, e, t, "pass" if e <= t else "FAIL") for n, e, t in rows])
    print(f"norm-check max errors: " + " ".join(f"{n}={e:.3g}" for n, e, _ in rows))
    return 0 if ok else 2


def _run_polar(cfg) -> int:
    rng = np.random.default_rng(cfg.seed)
    eng = cfg.engine
    a1, a2 = eng.growth_bounds()
    x = rng.normal(size=(200, eng.dim))
    x = x[np.linalg.norm(x, axis=1) > 1e-3]
    closed = NormEngine(eng.descriptor, polar_mode="closed-form").polar_value(x)
    numeric = NormEngine(eng.descriptor, polar_mode="numeric").polar_value(x)
    rel = float((np.abs(numeric - closed) / closed).max())
    _write_csv(cfg, "polar", ("alpha1", "alpha2", "closed_vs_numeric_rel", "points"),
               [(a1, a2, rel, len(x))])
    print(f"alpha1={a1:.12g} alpha2={a2:.12g} closed_vs_numeric_rel={rel:.3g}")
    return 0 if rel <= 1e-5 else 2


def _run_distance(cfg) -> int:
    grid, res = _solve_distance(cfg)
    path = Path(cfg.out_dir) / f"{cfg.prefix}_distance.txt"
    with open(path, "w") as f:
        dump_field(res.d, f, extra_header=_header(cfg) + [f"method={res.method}"])
    print(res.summary())
    (Path(cfg.out_dir) / f"{cfg.prefix}_distance_summary.txt").write_text(
        "# " + _header(cfg)[0] + "\n" + res.summary() + "\n"
    )
    return 0


def _run_superharmonic(cfg) -> int:
    grid, res = _solve_distance(cfg)
    verdict = operators.superharmonic_check(
        res.d, cfg.engine, mode=cfg.superharmonic_mode, tol=cfg.superharmonic_tol
    )
    print(verdict.summary())
    (Path(cfg.out_dir) / f"{cfg.prefix}_superharmonic.txt").write_text(
        "# " + _header(cfg)[0] + "\n" + verdict.summary() + "\n"
    )
    if cfg.expect is not None and verdict.verdict != cfg.expect:
        return 2
    return 0


def _run_hardy_estimate(cfg) -> int:
    grid, res = _solve_distance(cfg)
    est = hardy.hardy_estimate(grid, res.d, cfg.engine,
                               cfg.descent_max_iters, cfg.descent_tol)
    _write_csv(cfg, "hardy_estimate", ("iteration", "quotient"),
               list(enumerate(est.history)))
    print(f"quotient={est.quotient:.12g} iterations={est.iterations} "
          f"converged={est.converged} h={est.h:.12g} cells={est.cells}")
    return 0


def _run_lambda1(cfg) -> int:
    grid, res = _solve_distance(cfg)
    est = hardy.lambda1_estimate(grid, cfg.engine, res.d,
                                 cfg.descent_max_iters, cfg.descent_tol)
    _write_csv(cfg, "lambda1", ("iteration", "quotient"), list(enumerate(est.history)))
    bound = 1.0 / (4.0 * res.r_F**2)
    print(f"lambda1={est.quotient:.12g} lower_bound={bound:.12g} "
          f"converged={est.converged}")
    return 0 if est.quotient >= 0.9 * bound else 2


def _run_deficit(cfg) -> int:
    grid, res = _solve_distance(cfg)
    rng = np.random.default_rng(cfg.seed)
    fields = hardy.random_sine_fields(grid, 20, rng, envelope=res.d)
    D = np.e * res.r_F
    rows = []
    worst = np.inf
    for i, u in enumerate(fields):
        mass = hardy.hardy_mass(u, res.d)
        dlog = hardy.deficit_logremainder(u, res.d, cfg.engine, D)
        dl2 = hardy.deficit_l2(u, res.d, cfg.engine, res.r_F)
        rows.append((i, dlog, dl2, mass))
        worst = min(worst, dlog / mass)
    _write_csv(cfg, "deficit", ("index", "deficit_log", "deficit_l2", "hardy_mass"), rows)
    print(f"worst scaled log-deficit: {worst:.6g}")
    return 0 if worst >= -1e-3 else 2


def _row_of(sweep_row):
    jcols = sorted(sweep_row.J_values)
    return [sweep_row.epsilon, sweep_row.theta, sweep_row.quotient_Ueps,
            sweep_row.energy, sweep_row.hardy_mass, sweep_row.deficit_Q,
            sweep_row.D] + [sweep_row.J_values[b] for b in jcols]


def _run_optimality(cfg) -> int:
    grid, res = _solve_distance(cfg)
    rows = hardy.optimality_sweep(grid, res.d, cfg.engine, cfg.theta,
                                  cfg.epsilons, cfg.cutoff)
    jcols = sorted(rows[0].J_values)
    cols = ["epsilon", "theta", "quotient_Ueps", "energy", "hardy_mass",
            "deficit_Q", "D"] + [f"J_{b:g}" for b in jcols]
    _write_csv(cfg, "optimality", cols, [_row_of(r) for r in rows])
    a_last = rows[-1].energy / rows[-1].J_values[2 * cfg.theta]
    print(f"A_est at sharpest: {a_last:.6g}")
    return 0


def _run_jbeta(cfg) -> int:
    grid, res = _solve_distance(cfg)
    table = hardy.jbeta_scaling_sweep(grid, res.d, None, cfg.betas, cfg.epsilons)
    rows = []
    for beta in cfg.betas:
        entry = table[beta]
        for eps, j in zip(entry["epsilons"], entry["J"]):
            rows.append((beta, eps, j))
    _write_csv(cfg, "jbeta", ("beta", "epsilon", "J"), rows)
    summary = []
    for beta in cfg.betas:
        entry = table[beta]
        if "slope" in entry:
            summary.append(f"beta={beta:g} slope={entry['slope']:.4f}")
        else:
            summary.append(f"beta={beta:g} ratio={entry['ratio']:.4f}")
    print("; ".join(summary))
    return 0


def _run_torus_oracle(cfg) -> int:
    if not isinstance(cfg.domain, Torus):
        raise ConfigError("torus-oracle requires a torus domain")
    grid = build_grid(cfg.domain, cfg.resolution)
    dfield = dist.torus_distance_oracle(cfg.domain, grid, cfg.engine)
    lap = operators.torus_laplacian_oracle(cfg.domain, grid, cfg.engine)
    for name, fld in (("torus_distance", dfield), ("torus_laplacian", lap)):
        with open(Path(cfg.out_dir) / f"{cfg.prefix}_{name}.txt", "w") as f:
            dump_field(fld, f, extra_header=_header(cfg))
    theta = np.linspace(0.0, 2 * np.pi, 13)
    closed = operators.torus_mean_curvature(cfg.domain, theta)
    numeric = operators.torus_mean_curvature_numeric(cfg.domain, theta)
    _write_csv(cfg, "torus_curvature", ("theta", "H_closed", "H_numeric"),
               list(zip(theta, closed, numeric)))
    rel = np.abs(closed - numeric) / np.maximum(np.abs(closed), 1e-12)
    print(f"curvature closed-vs-numeric max rel: {rel.max():.3g}")
    return 0


# ---------------------------------------------------------------------------
# reproduction suite


def _run_repro_all(args) -> int:
    out_root = Path(args.out or "repro")
    out_root.mkdir(parents=True, exist_ok=True)
    worst = 0
    manifest = []
    for res in sorted(resources.files("finslerlab.configs").iterdir(),
                      key=lambda p: p.name):
        if not res.name.endswith(".cfg"):
            continue
        text = res.read_text()
        first = text.splitlines()[0]
        commands = first.lstrip("# ").split("commands=")[-1].split(",")
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.out_dir = str(out_root / res.name[:-4])
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        for command in commands:
            code = _dispatch(command.strip(), cfg)
            worst = max(worst, code)
        for path in sorted(Path(cfg.out_dir).iterdir()):
            manifest.append(f"{_sha256(path)}  {res.name[:-4]}/{path.name}")
    (out_root / "MANIFEST.txt").write_text("\n".join(manifest) + "\n")
    print(f"repro-all: {len(manifest)} artifacts, exit {worst}")
    return worst


def _sha256(path):
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _config_help() -> str:
    return """\
configuration grammar (key = value, sections in brackets):

  [domain]  kind = box | slab | wulff | torus | polytope
            box: lo, hi (comma lists)       slab: normal, width [, extent]
            wulff: radius [, center]        torus: R, r, a  (R > r > 0, a > 0)
            polytope: halfspaces = a1,..,an,b ; a1,..,an,b ; ...
            resolution = cells per unit length (required)
  [norm]    kind = euclidean | diag | quadratic | pnorm
            euclidean/pnorm: dim            diag: weights = w1,w2,...
            quadratic: matrix = row-major comma list     pnorm: p  (1 < p)
            polar = closed-form | numeric
  [solver]  sweep_tol_factor (1e-6), max_rounds (500), ridge_tau (0.2),
            descent_max_iters (2000), descent_tol (1e-6),
            superharmonic_mode = distributional | pointwise,
            superharmonic_tol, expect = true | false,
            distance_source = sweep | bruteforce | oracle
  [sweep]   theta (0.75), epsilons (0.2,0.1,0.05,0.025),
            betas (0,0.5,1,-1.5), cutoff = global | local,
            cutoff_x0, cutoff_delta
  [output]  dir (.), prefix (run), seed (0)
"""


if __name__ == "__main__":
    sys.exit(main())
