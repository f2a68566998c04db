"""Command-line front end.

    susyqm partner   --epsilons=-2.5 --nus=0
    susyqm confluent --b2 1.0
    susyqm coherent  --case k1
    susyqm painleve  --system osc_a4 --permutation 1234
    susyqm painleve verify-tables
    susyqm graphene  --profile constant --levels 5
    susyqm verify-all

Settings resolve as flags > JSON config file (``--config``) > defaults.  The
config may hold top-level keys and per-command sections, e.g.
{"grid": [-5, 5, 1001], "partner": {"epsilons": [-2.5]}}.  Artifacts go to
``--output``, else $SUSYQM_OUTPUT_DIR, else the working directory.

Exit status: 0 when every check passes, 1 when a check fails (named on
stderr), 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import artifacts, coherent, confluent, graphene, painleve, susy, verify
from .errors import InvalidParameterError, SusyError
from .schrodinger import oscillator_eigenfunction, oscillator_general_solution, potential_csv

OUTPUT_ENV = "SUSYQM_OUTPUT_DIR"
COMMANDS = ("partner", "confluent", "coherent", "painleve", "graphene", "verify-all")

DEFAULT_GRIDS = {
    "partner": (-5.0, 5.0, 1001),
    "confluent": (-5.0, 5.0, 1001),
    "painleve_piv": painleve.PIV_GRID,
    "painleve_pv": painleve.PV_GRID,
    "graphene": None,  # the profile's own interval, 401 samples
}

DEFAULT_TOLERANCES = {
    "catalogue": 1e-9,
    "closed_form": 1e-8,
    "residual": 1e-9,
    "intertwining": 1e-6,
    "spacing": 1e-3,
    "uncertainty": 1e-12,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    grid: tuple | None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: Path = Path(".")
    format: str = "csv"
    seed_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid is not None:
            a, b, n = self.grid
            if not (float(a) < float(b)):
                raise ConfigError(f"grid needs x_min < x_max, got {self.grid}")
            if int(n) < 200:
                raise ConfigError(f"grid needs n_points >= 200, got {n}")
            self.grid = (float(a), float(b), int(n))
        for name, tol in self.tolerances.items():
            if not float(tol) > 0:
                raise ConfigError(f"tolerance {name!r} must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    def points(self) -> np.ndarray:
        return np.linspace(*self.grid)


# --- argument parsing ---------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text: str) -> tuple:
    parts = _float_list(text)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid is 'x_min,x_max,n_points'")
    return parts[0], parts[1], int(parts[2])


def _tolerance(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("tolerance is name=value") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--output", type=Path, help=f"output directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--grid", type=_grid, help="x_min,x_max,n_points")
    common.add_argument("--format", choices=("csv", "json"), help="data artifact format")
    common.add_argument("--tol", type=_tolerance, action="append", metavar="NAME=VALUE",
                        help="override a tolerance (repeatable)")

    parser = argparse.ArgumentParser(
        prog="susyqm", description="SUSY QM constructions and checks",
        epilog="Lists starting with a minus sign need the --flag=value form, e.g. --epsilons=-2.5,-3.5 or --zgrid=-2,2,41.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partner", parents=[common], help="k-th order SUSY partner of the oscillator")
    p.add_argument("--epsilons", type=_float_list, help="factorization energies, comma separated")
    p.add_argument("--nus", type=_float_list, help="mixing parameters nu (inf for the odd solution)")
    p.add_argument("--states", type=_float_list, help="eigenfunction seeds psi_n instead (e.g. 3,4)")

    p = sub.add_parser("confluent", parents=[common], help="confluent k=2 partner on psi_1")
    p.add_argument("--b2", type=float, help="family parameter b2 = w2(-inf)")

    p = sub.add_parser("coherent", parents=[common], help="uncertainty surfaces (Re z, Im z, DxDp)")
    p.add_argument("--case", choices=("k1", "k2"), help="partner system")
    p.add_argument("--zgrid", type=_grid, help="z_min,z_max,n for both Re z and Im z")
    p.add_argument("--numeric", action="store_true", default=None,
                   help="also evaluate the matrix-element oracle (slow)")

    p = sub.add_parser("painleve", parents=[common], help="PIV/PV transcendents from extremal states")
    p.add_argument("action", nargs="?", choices=("solve", "verify-tables"), default="solve")
    p.add_argument("--system", choices=("osc_a3", "osc_a4", "susy1_piv", "susy2_reduced_piv", "susy1_pv"))
    p.add_argument("--permutation", help="PV permutation code, e.g. 1234")
    p.add_argument("--third", type=int, help="PIV: index (0-based) of the state playing psi_E3")
    p.add_argument("--eps1", type=float, help="seed energy for the SUSY systems")

    p = sub.add_parser("graphene", parents=[common], help="Dirac-Weyl spectrum for a magnetic profile")
    p.add_argument("--profile", choices=sorted(graphene.PROFILES))
    p.add_argument("--ky", type=float)
    p.add_argument("--levels", type=int)
    p.add_argument("--strength", type=float, help="B0 (constant, sech2) or b1 (linear)")

    sub.add_parser("verify-all", parents=[common], help="run every acceptance check")
    return parser


COMMAND_DEFAULTS = {
    "partner": {"epsilons": [-2.5], "nus": None, "states": None},
    "confluent": {"b2": 1.0},
    "coherent": {"case": "k1", "zgrid": (-2.0, 2.0, 41), "numeric": False},
    "painleve": {"system": "osc_a4", "permutation": None, "third": None, "eps1": -2.5},
    "graphene": {"profile": "constant", "ky": 0.0, "levels": 5, "strength": None},
    "verify-all": {},
}


def resolve(args: argparse.Namespace, environ=os.environ) -> tuple[RunConfig, dict]:
    """Merge flags > config file > defaults into a RunConfig and command options."""
    file_cfg: dict = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    section = file_cfg.get(args.command, {})

    def pick(name, default=None):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in section:
            return section[name]
        if name in file_cfg:
            return file_cfg[name]
        return default

    opts = {k: pick(k, v) for k, v in COMMAND_DEFAULTS[args.command].items()}
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(file_cfg.get("tolerances", {}))
    tolerances.update(section.get("tolerances", {}))
    tolerances.update(dict(args.tol or []))
    out = pick("output") or environ.get(OUTPUT_ENV) or "."
    grid = pick("grid")
    if grid is not None:
        grid = tuple(grid)
        if len(grid) != 3:
            raise ConfigError("grid is [x_min, x_max, n_points]")
    cfg = RunConfig(grid, tolerances, Path(out), pick("format", "csv"), opts)
    return cfg, opts


# --- commands -----------------------------------------------------------------

def _check(name, value, tol) -> dict:
    value = float(value)
    return {"check": name, "value": value, "tolerance": float(tol),
            "pass": bool(np.isfinite(value) and value <= tol)}


def _seeds_from_opts(opts) -> list:
    if opts["states"]:
        return [("psi", int(n)) for n in opts["states"]]
    eps = [float(e) for e in (opts["epsilons"] or [])]
    if not eps:
        raise ConfigError("partner needs --epsilons or --states")
    nus = opts["nus"]
    nus = [0.0] * len(eps) if nus is None else [float(v) for v in nus]
    if len(nus) != len(eps):
        raise ConfigError("--nus must match --epsilons in length")
    return list(zip(eps, nus))


def _same_seeds(a, b) -> bool:
    if len(a) != len(b):
        return False
    for (e1, n1), (e2, n2) in zip(a, b):
        if e1 == "psi" or e2 == "psi":
            if (e1, n1) != (e2, n2):
                return False
        elif not (np.isclose(e1, e2) and (n1 == n2 or np.isclose(n1, n2))):
            return False
    return True


def cmd_partner(cfg: RunConfig, opts) -> list[dict]:
    seeds = _seeds_from_opts(opts)
    cfg.grid = cfg.grid or DEFAULT_GRIDS["partner"]
    x = cfg.points()
    waves = [oscillator_eigenfunction(n) if e == "psi" else oscillator_general_solution(e, n)
             for e, n in seeds]
    t = susy.SusyTransform(tuple(waves))
    checks = []
    report = susy.validate_nonsingular(t)
    checks.append(_check("nonsingular transformation", 0.0 if report.verdict == "nonsingular" else 1.0, 0.0))
    potential = susy.partner_potential(t, check=False)
    v = potential(x)
    artifacts.write_table(cfg.output_path / "partner", ["x", "V"], [x, v], cfg.format)
    recipe = artifacts.susy_recipe(seeds)
    (cfg.output_path / "partner_potential.json").write_text(artifacts.potential_to_json(recipe, x))
    for key, entry in susy.CATALOGUE.items():
        if entry["params"]:
            continue
        if _same_seeds([(e, n) for e, n in entry["seeds"]], seeds):
            printed = susy.closed_form_catalogue(key)(x) + susy.CONSTANT_SHIFT[key]
            checks.append(_check(f"catalogue {key}", np.max(np.abs(v - printed)), cfg.tolerances["catalogue"]))
    params = {"seeds": recipe["seeds"], "verdict": report.verdict, "rule": report.rule_applied,
              "created_levels": list(report.created_levels), "deleted_levels": list(report.deleted_levels)}
    artifacts.write_report(cfg.output_path / "partner_report.json", "partner", checks, params)
    return checks


def cmd_confluent(cfg: RunConfig, opts) -> list[dict]:
    b2 = float(opts["b2"])
    cfg.grid = cfg.grid or DEFAULT_GRIDS["confluent"]
    x = cfg.points()
    report = confluent.validate_confluent_seed(oscillator_eigenfunction(1), b2)
    checks = [_check("nonsingular family member", 0.0 if report.verdict == "nonsingular" else 1.0, 0.0)]
    if report.verdict != "nonsingular":
        artifacts.write_report(cfg.output_path / "confluent_report.json", "confluent", checks,
                               {"b2": b2, "rule": report.rule_applied})
        return checks
    potential = confluent.confluent_partner(confluent.psi1_family(b2))
    v = potential(x)
    printed = confluent.isospectral_closed_form(b2)(x)
    checks.append(_check("closed form 2susy-c32", np.max(np.abs(v - printed)), cfg.tolerances["closed_form"]))
    artifacts.write_table(cfg.output_path / "confluent", ["x", "V"], [x, v], cfg.format)
    recipe = {"kind": "confluent_psi1", "b2": b2}
    (cfg.output_path / "confluent_potential.json").write_text(artifacts.potential_to_json(recipe, x))
    artifacts.write_report(cfg.output_path / "confluent_report.json", "confluent", checks,
                           {"b2": b2, "rule": report.rule_applied, "deleted_levels": list(report.deleted_levels)})
    return checks


def cmd_coherent(cfg: RunConfig, opts) -> list[dict]:
    case = opts["case"]
    lo, hi, n = opts["zgrid"]
    axis = np.linspace(float(lo), float(hi), int(n))
    re, im = np.meshgrid(axis, axis, indexing="ij")
    z = (re + 1j * im).ravel()
    formula = coherent.uncertainty_formula(z, case)
    columns, data = ["re_z", "im_z", "dxdp"], [z.real, z.imag, formula]
    target = 1.5 if case == "k1" else 2.5
    checks = [_check(f"DxDp(z=0) = {target}", abs(coherent.uncertainty_formula(0, case) - target),
                     cfg.tolerances["uncertainty"])]
    if opts["numeric"]:
        seeds = [(-0.5, 0.0)] if case == "k1" else [(-0.5, 0.0), (-1.5, np.inf)]
        t = susy.transform(seeds)
        tables = coherent.MatrixTables(t)
        numeric = np.array([coherent.uncertainty_numeric(v, t, tables=tables) for v in z])
        columns.append("dxdp_numeric")
        data.append(numeric)
        inside = np.abs(z) <= 2
        checks.append(_check("oracle vs formula, |z| <= 2",
                             np.max(np.abs(numeric - formula)[inside]) if inside.any() else 0.0, 1e-3))
    artifacts.write_table(cfg.output_path / f"coherent_{case}", columns, data, cfg.format)
    artifacts.write_report(cfg.output_path / "coherent_report.json", "coherent", checks,
                           {"case": case, "zgrid": [float(lo), float(hi), int(n)]})
    return checks


def _fraction_text(f: Fraction) -> str:
    return str(Fraction(f))


def cmd_painleve(cfg: RunConfig, opts, action: str = "solve") -> list[dict]:
    if action == "verify-tables":
        rows = painleve.verify_tables()
        checks = []
        for r in rows:
            label = f"table {r.table} {r.label}"
            checks.append(_check(f"{label} parameters", 0.0 if r.parameters_match else 1.0, 0.0))
            checks.append(_check(f"{label} printed form", r.max_deviation, 1e-12))
            checks.append(_check(f"{label} residual", r.residual, cfg.tolerances["residual"]))
        artifacts.write_table(cfg.output_path / "painleve_tables",
                              ["table", "entry", "parameters_match", "max_deviation", "residual"],
                              [[r.table for r in rows], [int(r.label.strip("col")) for r in rows],
                               [int(r.parameters_match) for r in rows],
                               [r.max_deviation for r in rows], [r.residual for r in rows]], cfg.format)
        artifacts.write_report(cfg.output_path / "painleve_report.json", "painleve verify-tables", checks)
        return checks
    name = opts["system"]
    kw = {} if name.startswith("osc") else {"eps1": float(opts["eps1"])}
    system = painleve.table_system(name, **kw)
    if len(system.states) == 4:
        code = opts["permutation"] or "1234"
        sol = painleve.pv_from_extremals(system, code)
        cfg.grid = cfg.grid or DEFAULT_GRIDS["painleve_pv"]
        t, val, res = painleve.pv_residual_profile(sol, cfg.points())
        columns = ["z", "w", "residual"]
        params = {"alpha": sol.alpha, "beta": sol.beta, "gamma": sol.gamma, "delta": sol.delta}
        label = code
        table = [row for rows in painleve.PV_TABLES.values() for row in rows
                 if row[0] == name and row[1] == code]
        expected = [(row[3], row[4], row[5], painleve.PV_DELTA) for row in table]
    else:
        third = 0 if opts["third"] is None else int(opts["third"])
        sol = painleve.piv_from_extremals(system, third)
        cfg.grid = cfg.grid or DEFAULT_GRIDS["painleve_piv"]
        t, val, res = painleve.piv_residual_profile(sol, cfg.points())
        columns = ["y", "g", "residual"]
        params = {"alpha": sol.alpha, "beta": sol.beta}
        label = f"third={third}"
        table = [row for rows in painleve.PIV_TABLES.values() for row in rows
                 if row[0] == name and row[1] == third]
        expected = [(row[3], row[4]) for row in table]
    checks = [_check("ODE residual away from poles", np.nanmax(res), cfg.tolerances["residual"])]
    if expected:
        got = tuple(params.values())
        checks.append(_check("parameters equal the printed table row", 0.0 if got == expected[0] else 1.0, 0.0))
    artifacts.write_table(cfg.output_path / f"painleve_{name}_{label.replace('=', '')}", columns,
                          [t, val, res], cfg.format)
    artifacts.write_report(cfg.output_path / "painleve_report.json", "painleve", checks,
                           {"system": name, "entry": label,
                            **{k: _fraction_text(v) for k, v in params.items()}})
    return checks


def cmd_graphene(cfg: RunConfig, opts) -> list[dict]:
    kw = {}
    if opts["strength"] is not None:
        kw["b1" if opts["profile"] == "linear" else "B0"] = float(opts["strength"])
    prof = graphene.profile_by_name(opts["profile"], float(opts["ky"]), **kw)
    levels = int(opts["levels"])
    if levels < 1:
        raise ConfigError("--levels must be positive")
    sols = graphene.dirac_spectrum(prof, levels)
    x = cfg.points() if cfg.grid else np.linspace(*prof.interval, 401)
    checks = [
        _check("intertwining residual", max(graphene.intertwine_residual(prof, s) for s in sols),
               cfg.tolerances["intertwining"]),
        _check("H+- psi+- = calE psi+- residual", max(graphene.dirac_residual(prof, s) for s in sols),
               cfg.tolerances["intertwining"]),
    ]
    if prof.name == "constant":
        cal = np.array([s.calE for s in sols if s.branch >= 0])
        b0 = abs(prof.params["B0"])
        checks.append(_check("calE spacing 2 B0", np.max(np.abs(np.diff(cal) - 2 * b0)) if len(cal) > 1 else 0.0,
                             cfg.tolerances["spacing"]))
    artifacts.write_table(cfg.output_path / "graphene_spectrum", ["n", "branch", "calE", "E"],
                          [[s.n for s in sols], [s.branch for s in sols], [s.calE for s in sols],
                           [s.energy for s in sols]], cfg.format)
    cols, data = ["x"], [x]
    for s in sols:
        if s.branch >= 0:
            cols += [f"psi_plus_{s.n}", f"psi_minus_{s.n}"]
            data += [s.psi_plus(x), s.psi_minus(x)]
    artifacts.write_table(cfg.output_path / "graphene_spinors", cols, data, cfg.format)
    artifacts.write_report(cfg.output_path / "graphene_report.json", "graphene", checks,
                           {"profile": prof.name, "k_y": prof.k_y, **prof.params,
                            "zero_mode": graphene.zero_mode_sector(prof)})
    return checks


def cmd_verify_all(cfg: RunConfig, opts) -> list[dict]:
    results = verify.run_all()
    for r in results:
        print(verify.summary_line(r))
    rows = verify.report(results)
    artifacts.write_report(cfg.output_path / "verify_report.json", "verify-all",
                           [{k: v for k, v in row.items()} for row in rows])
    return rows


HANDLERS = {"partner": cmd_partner, "confluent": cmd_confluent, "coherent": cmd_coherent,
            "graphene": cmd_graphene, "verify-all": cmd_verify_all}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        cfg, opts = resolve(args)
        cfg.output_path.mkdir(parents=True, exist_ok=True)
        if args.command == "painleve":
            checks = cmd_painleve(cfg, opts, args.action)
        else:
            checks = HANDLERS[args.command](cfg, opts)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SusyError as exc:
        print(f"FAILED: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    failed = [c for c in checks if not c["pass"]]
    for c in failed:
        print(f"FAILED check: {c['check']} (value {c['value']}, tolerance {c['tolerance']})", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
