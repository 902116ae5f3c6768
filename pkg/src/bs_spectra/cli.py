"""Command-line front end: ``bs-spectra <command> [--config FILE] [flags]``.

Commands: ``spectrum``, ``hs-check``, ``resolvent-check``, ``counterexample``, ``verify``.
The config is a JSON file.  Its potential may sit under a ``potential`` key or at
the top level; other keys are ``grid`` (``xi``, ``panels``, ``order``,
``smallest_panel``, ``max_panel``, ``tail_order``), ``kmin``, ``kmax``, ``tol``,
``seed``, ``kappas`` (hs-check ladder) and ``resolvent`` (``z1``, ``z2``,
``trials``, ``k``).  Flags override the config.

Exit codes: 0 success, 1 a verify check failed, 2 bad config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bs_core, finite_dim, potential, resolvent, spectral_solver, verify
from .errors import BadParameter, BisectionStall, EigenFailure, NearPole, NonIntegrable
from .fourier import FrequencyGrid, default_grid, make_grid

log = logging.getLogger("bs_spectra")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
POTENTIAL_KEYS = {"point_masses", "gaussian", "sech2", "derivative_gaussian", "real", "label"}
RUN_KEYS = {"potential", "grid", "kmin", "kmax", "tol", "seed", "kappas", "resolvent", "out"}


@dataclass(frozen=True)
class RunConfig:
    potential: dict = field(default_factory=dict)
    xi: float = 200.0
    panels: int = 256
    order: int = 16
    smallest_panel: float | None = None
    max_panel: float | None = None
    tail_order: int = 32
    kmin: float = 0.01
    kmax: float = 20.0
    tol: float = 1e-10
    seed: int = 0
    kappas: tuple = (0.5, 1.0, 2.0, 4.0)
    z1: complex = -4.0
    z2: complex = -9.0
    trials: int = 10
    svals: int = 10
    out: Path = Path(".")

    def validate(self) -> "RunConfig":
        if not (self.xi > 0 and self.panels >= 1 and self.order >= 1):
            raise BadParameter("grid parameters must be positive")
        if not self.tol > 0:
            raise BadParameter("tol must be positive")
        if not 0 < self.kmin < self.kmax:
            raise BadParameter("need 0 < kmin < kmax")
        if not 0 <= self.seed < 2**64:
            raise BadParameter("seed must be an unsigned 64-bit integer")
        if not self.kappas or any(not k > 0 for k in self.kappas):
            raise BadParameter("kappas must be positive")
        if self.trials < 1 or self.svals < 1:
            raise BadParameter("trials and k must be at least 1")
        return self

    def grid(self) -> FrequencyGrid:
        if self.smallest_panel is None and self.max_panel is None:
            return default_grid(self.xi, self.panels, self.order, tail_order=self.tail_order)
        return make_grid(self.xi, self.panels, self.order, tail_order=self.tail_order,
                         smallest_panel=self.smallest_panel, max_panel=self.max_panel)

    def build_potential(self) -> potential.DistributionalPotential:
        return potential.from_config(self.potential)

    def grid_label(self) -> str:
        g = self.grid()
        return f"xi={self.xi:g} panels={self.panels} order={self.order} nodes={g.size}"


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise BadParameter(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadParameter(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise BadParameter("config must be a JSON object")
    unknown = set(raw) - RUN_KEYS - POTENTIAL_KEYS
    if unknown:
        raise BadParameter(f"unknown config keys: {sorted(unknown)}")
    if "potential" in raw:
        pot = raw["potential"]
        if set(raw) & POTENTIAL_KEYS:
            raise BadParameter("give the potential either under 'potential' or at top level")
    else:
        pot = {k: v for k, v in raw.items() if k in POTENTIAL_KEYS}
    kw: dict = {"potential": pot}
    try:
        g = raw.get("grid", {})
        for src, dst, conv in (("xi", "xi", float), ("panels", "panels", int), ("order", "order", int),
                               ("smallest_panel", "smallest_panel", float),
                               ("max_panel", "max_panel", float), ("tail_order", "tail_order", int)):
            if src in g:
                kw[dst] = conv(g[src])
        for key in ("kmin", "kmax", "tol"):
            if key in raw:
                kw[key] = float(raw[key])
        if "seed" in raw:
            kw["seed"] = int(raw["seed"])
        if "kappas" in raw:
            kw["kappas"] = tuple(float(k) for k in raw["kappas"])
        r = raw.get("resolvent", {})
        if "z1" in r:
            kw["z1"] = complex(potential._num(r["z1"]))
        if "z2" in r:
            kw["z2"] = complex(potential._num(r["z2"]))
        if "trials" in r:
            kw["trials"] = int(r["trials"])
        if "k" in r:
            kw["svals"] = int(r["k"])
        if "out" in raw:
            kw["out"] = Path(raw["out"])
    except (TypeError, ValueError, AttributeError) as exc:
        raise BadParameter(f"malformed config: {exc}") from exc
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: Path, header_lines: list[str], columns: list[str], rows) -> Path:
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def _header(cfg: RunConfig, what: str) -> list[str]:
    return [f"bs-spectra {what}",
            "units: hbar^2/2m = 1; energies and z in units of inverse length squared; x in length units",
            f"grid: {cfg.grid_label()}",
            f"seed: {cfg.seed}"]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig) -> int:
    V = cfg.build_potential()
    grid = cfg.grid()
    op = bs_core.BSOperator(V, grid)
    states = spectral_solver.find_bound_states(V, cfg.kmin, cfg.kmax, grid, cfg.tol, operator=op)
    rows = []
    for i, st in enumerate(states):
        wr = max(spectral_solver.weak_residual(V, st, seed=cfg.seed, index=j, operator=op)
                 for j in range(len(st.functions)))
        rows.append((i, st.energy, st.kappa, st.multiplicity, st.eigen_residual, wr))
    write_csv(cfg.out / "spectrum.csv", _header(cfg, "spectrum") + [f"kappa range: [{cfg.kmin:g}, {cfg.kmax:g}]"],
              ["index", "energy", "kappa", "multiplicity", "eigen_residual", "weak_residual"], rows)

    cols, data = ["x"], []
    x = states[0].x if states else grid.real_space()
    data.append(np.asarray(x, dtype=float))
    for i, st in enumerate(states):
        for j in range(st.f_samples.shape[1]):
            cols += [f"f{i}_{j}_re", f"f{i}_{j}_im"]
            data += [st.f_samples[:, j].real, st.f_samples[:, j].imag]
    write_csv(cfg.out / "eigenfunctions.csv", _header(cfg, "eigenfunctions (L2-normalized)"),
              cols, zip(*data))

    print(f"{len(states)} bound state(s)")
    for i, st in enumerate(states):
        print(f"  {i}: E = {st.energy:.6g}  kappa = {st.kappa:.6g}  multiplicity {st.multiplicity}"
              f"  residual {rows[i][4]:.3g} / {rows[i][5]:.3g}")
    return EXIT_OK


def _hs_row(V, grid, kappa):
    M = bs_core.assemble(V, grid, -kappa * kappa)
    hs_m, hs_f = bs_core.hs_norm(M), bs_core.hs_norm_formula(V, kappa)
    tr_m, tr_f = complex(bs_core.trace(M)), bs_core.trace_formula(V, kappa)
    hs_dev = abs(hs_m - hs_f) / hs_f if hs_f else abs(hs_m)
    tr_dev = abs(tr_m - tr_f) / abs(tr_f) if tr_f else abs(tr_m)
    return (kappa, hs_m, hs_f, hs_dev, tr_m.real, tr_m.imag, tr_f.real, tr_f.imag, tr_dev)


def cmd_hs_check(cfg: RunConfig) -> int:
    V = cfg.build_potential()
    grid = cfg.grid()
    rows = spectral_solver._parallel_map(lambda k: _hs_row(V, grid, k), cfg.kappas)
    write_csv(cfg.out / "hs_check.csv", _header(cfg, "hs-check"),
              ["kappa", "hs_matrix", "hs_formula", "hs_rel_dev", "trace_matrix_re", "trace_matrix_im",
               "trace_formula_re", "trace_formula_im", "trace_rel_dev"], rows)
    for r in rows:
        print(f"kappa {r[0]:.6g}: HS {r[1]:.6g} vs {r[2]:.6g} (rel {r[3]:.3g}); "
              f"trace {r[4]:.6g} vs {r[6]:.6g} (rel {r[8]:.3g})")
    return EXIT_OK


def cmd_resolvent_check(cfg: RunConfig) -> int:
    V = cfg.build_potential()
    grid = cfg.grid()
    ident = resolvent.resolvent_identity_residual(V, cfg.z1, cfg.z2, cfg.trials, grid, seed=cfg.seed)
    recast = resolvent.recast_deviation(V, cfg.z1, cfg.trials, grid, seed=cfg.seed)
    k = min(cfg.svals, grid.size)
    sv = resolvent.resolvent_difference_svals(V, cfg.z1, k, grid)
    head = _header(cfg, "resolvent-check") + [f"z1 = {cfg.z1}, z2 = {cfg.z2}, trials = {cfg.trials}"]
    write_csv(cfg.out / "resolvent_check.csv", head, ["metric", "value"],
              [("identity_residual", ident), ("recast_deviation", recast)])
    write_csv(cfg.out / "resolvent_svals.csv", head, ["index", "sigma"], enumerate(sv))
    print(f"first resolvent identity residual {ident:.3g}")
    print(f"recast formula deviation {recast:.3g}")
    print("leading singular values of R(z1) - R0(z1): " + " ".join(f"{s:.6g}" for s in sv))
    return EXIT_OK


def _matrix_text(name, M) -> str:
    rows = ["  [" + ", ".join(f"{complex(v).real:.6g}" if abs(complex(v).imag) < 1e-15
                             else f"{complex(v):.6g}" for v in r) + "]" for r in np.atleast_2d(M)]
    return f"{name} =\n" + "\n".join(rows)


def cmd_counterexample(a: float) -> int:
    rep = finite_dim.report(a)
    mg_h, ma_h, mg_a, ma_a = rep["multiplicities"]
    print(f"a = {a:g}")
    for key in ("H0", "V", "H", "H_squared", "A_V(0)"):
        print(_matrix_text(key, rep[key]))
    ev = ", ".join(f"{complex(e):.6g}" for e in rep["eigenvalues_A"])
    print(f"eigenvalues of A_V(0): {ev}")
    print(f"m_g(H;0) = {mg_h}, m_a(H;0) = {ma_h}, m_g(A_V(0);1) = {mg_a}, m_a(A_V(0);1) = {ma_a}")
    print(f"multiplicities: ({mg_h}, {ma_h}, {mg_a}, {ma_a})")
    print(f"kernel correspondence residual: {rep['kernel_correspondence']:.3g}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = verify.run_suite(cfg.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.3g} (limit {r.threshold:.3g})"
              + (f"  [{r.note}]" if r.note else ""))
    summary = {"seed": cfg.seed, "total": len(results), "failed": len(failed),
               "checks": [{"name": r.name, "passed": r.passed, "value": r.value,
                           "threshold": r.threshold, "note": r.note} for r in results]}
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "verify.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------

COMMANDS = {"spectrum": cmd_spectrum, "hs-check": cmd_hs_check,
            "resolvent-check": cmd_resolvent_check, "verify": cmd_verify}


def run(command: str, config: RunConfig, *, a: float = 4.0) -> int:
    """Run one command; returns the process exit code."""
    try:
        if command == "counterexample":
            return cmd_counterexample(a)
        if command not in COMMANDS:
            raise BadParameter(f"unknown command {command!r}")
        config.validate()
        if command != "verify" and command != "counterexample":
            config.grid()  # surface grid errors as config errors before any work
        return COMMANDS[command](config)
    except BadParameter as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NearPole, EigenFailure, BisectionStall, NonIntegrable) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bs-spectra", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted([*COMMANDS, "counterexample"]))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-xi", type=float, help="frequency cutoff")
    p.add_argument("--grid-panels", type=int)
    p.add_argument("--grid-order", type=int, help="Gauss-Legendre nodes per panel")
    p.add_argument("--grid-smallest", type=float, help="width of the innermost panel")
    p.add_argument("--grid-max-panel", type=float, help="cap on panel width")
    p.add_argument("--kmin", type=float)
    p.add_argument("--kmax", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--a", type=float, default=4.0, help="counterexample parameter (a != 0, 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except BadParameter as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {"xi": args.grid_xi, "panels": args.grid_panels, "order": args.grid_order,
                 "smallest_panel": args.grid_smallest, "max_panel": args.grid_max_panel,
                 "kmin": args.kmin, "kmax": args.kmax, "tol": args.tol, "seed": args.seed,
                 "out": Path(args.out) if args.out else None}
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return run(args.command, cfg, a=args.a)


if __name__ == "__main__":
    sys.exit(main())
