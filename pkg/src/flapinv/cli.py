"""Command-line runner: ``flapinv run <config.json> [--out DIR] [--set k=v]... [--threads N]``.

Exit status 0 on success, 2 when the configuration is invalid, 3 when a
computation fails.  Failures are reported as JSON on stderr and in
``error.json`` in the output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .actions import action_profile, fmt
from .errors import DomainError, FlapinvError, VariableMismatch

OUT_ENV = "FLAPINV_OUT"
DEFAULT_OUT = "flapinv-out"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
INPUT_ERRORS = (DomainError, VariableMismatch)


class ConfigError(Exception):
    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload


def load_schema():
    return json.loads(resources.files("flapinv").joinpath("schema.json").read_text())


def apply_overrides(config: dict, overrides) -> dict:
    """``key=value`` pairs; dotted keys reach into objects, values parse as JSON when possible."""
    config = json.loads(json.dumps(config))
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = config
        parts = key.split(".")
        for p in parts[:-1]:
            target = target.setdefault(p, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {key!r} does not address an object")
        target[parts[-1]] = value
    return config


def validate(config: dict):
    try:
        jsonschema.validate(config, load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message, path=[str(p) for p in exc.absolute_path]) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


class Artifacts:
    def __init__(self, out: Path):
        self.out = out
        self.written: list[str] = []

    def write(self, name: str, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.written.append(name)


# -- experiments ------------------------------------------------------------------------


def _series(text, variables, order):
    from .powerseries import TruncatedSeries

    return TruncatedSeries.parse(text, variables, order)


def run_action_profile(cfg, art, threads):
    kind = cfg["kind"]
    variables = ("x", "y", "lam") if kind in ("vanishing-cycle", "separatrix-lobe") else ("x", "y")
    g = _series(cfg["g"], variables, cfg.get("order", 12))
    grid = cfg.get("lam_grid") if kind == "separatrix-lobe" else cfg.get("h_grid")
    if grid is None:
        raise ConfigError("grid missing", field="lam_grid" if kind == "separatrix-lobe" else "h_grid")
    params = {k: cfg[k] for k in ("eps", "lam") if k in cfg}
    prof = action_profile(kind, g, grid, params, cfg.get("tol", 1e-12))
    art.write("action_profile.csv", prof.to_csv())
    return f"{len(prof.values)} values"


def run_moser_solve(cfg, art, threads):
    """Transport equation {u, H} = g; with ``u`` given, the round trip g1 = g - {u, H}, {u, H} = g1 - g."""
    from .hamiltonians import ModelHamiltonian
    from .moser import parametric_transport, pde_residuals, pullback_residuals, transport_solve
    from .moves import bracket

    model = ModelHamiltonian.parse(cfg["model"])
    V = ("x", "y", "lam")
    order = cfg.get("order", 12)
    g = _series(cfg["g"], V, order)
    points = np.array([p + [0.0] * (3 - len(p)) for p in cfg.get("points", [[0.3, 0.2]])], dtype=float)
    x, y, lam = points.T
    summary = {"model": model.value, "g": g.to_string()}
    g1 = None
    rhs = g
    if "u" in cfg:
        g1 = g - bracket(_series(cfg["u"], V, order), model, order)
        rhs = g1 - g
        summary["g1"] = g1.to_string()
    if cfg.get("parametric"):
        sol = parametric_transport(rhs, cfg.get("N", 2))
        res = np.full(len(x), math.nan)
    else:
        sol = transport_solve(model, rhs, cfg.get("ic", "auto"), cfg.get("eps", 0.5))
        res = pde_residuals(sol, points)
        summary["pde_residual_max"] = float(np.max(res))
    summary["transport"] = sol.describe()
    values = np.asarray(sol(x, y, lam), dtype=float)
    rows = ["x,y,lam,u,pde_residual"]
    rows += [",".join(fmt(v) for v in r) for r in zip(x, y, lam, values, res)]
    art.write("transport.csv", "\n".join(rows) + "\n")
    if cfg.get("pullback"):
        if g1 is None:
            raise ConfigError("pullback check needs the move generator u", field="u")
        summary["pullback_max"] = float(np.max(pullback_residuals(g, g1, sol, points, model)))
    art.write("transport.json", _dump(summary))
    return f"{len(x)} points"


def run_normal_form(cfg, art, threads):
    from .hamiltonians import ModelHamiltonian
    from .moves import Density, cusp_reduce, elliptic_reduce, kill_odd_part

    model = ModelHamiltonian.parse(cfg["model"])
    n = cfg.get("n", 2)
    order = cfg.get("order", max(4 * n + 6, 12))
    d = Density.parse(cfg["g"], ("x", "y"), order)
    if model is ModelHamiltonian.Cusp:
        d, u_odd = kill_odd_part(d, model)
        red, u, tr = cusp_reduce(d, n)
        u = u + u_odd
    elif model in (ModelHamiltonian.Elliptic, ModelHamiltonian.Hyperbolic):
        red, u, tr = elliptic_reduce(d, n, model)
    else:
        raise DomainError("normal-form handles elliptic, hyperbolic and cusp models", model=model.value)
    out = {
        "model": model.value,
        "n": n,
        "input": cfg["g"],
        "reduced": red.g.to_string(),
        "reduced_series": red.g.to_json_obj(),
        "u": u.to_string(),
        "transcript": tr.to_json_obj(),
    }
    art.write("normal_form.json", _dump(out))
    if cfg.get("normal_form_f") and model is ModelHamiltonian.Elliptic:
        from .abel import elliptic_normal_form_f

        f = elliptic_normal_form_f(d.g, cfg.get("h_max", 0.25), cfg.get("samples", 257))
        art.write("normal_form_f.csv", f.to_csv())
    return f"reduced density {red.g.to_string()}"


def run_cusp_invariant(cfg, art, threads):
    from .moves import Density, parabolic_c_recursion

    d = Density.parse(cfg["g"], ("x", "y", "lam"), cfg.get("order", 12))
    inv = parabolic_c_recursion(d)
    art.write("cusp_invariant.json", _dump(inv.to_json_obj()))
    return f"b = {inv.b.to_string()}, c = {inv.c.to_string()}"


def run_abel_roundtrip(cfg, art, threads):
    from .abel import SampledFunction, abel_forward, abel_invert, elliptic_normal_form_f

    n = cfg.get("samples", 129)
    h_max = cfg.get("h_max", 0.25)
    if "g" in cfg:
        g = _series(cfg["g"], ("x", "y"), cfg.get("order", 12))
        f = elliptic_normal_form_f(g, h_max, n)
        art.write("abel_f.csv", f.to_csv())
        return f"normal-form profile on {n} samples"
    t = np.linspace(0.0, h_max, n)
    f0 = 1.0 + t + t * t
    ip = np.array([f0[0] / 2] + [abel_forward(lambda s: 1.0 + s + s * s, h) for h in t[1:]])
    back = abel_invert(SampledFunction(t, ip))
    err = float(np.max(np.abs(back.values - f0)))
    art.write("abel_roundtrip.csv", SampledFunction(t, back.values).to_csv())
    art.write("abel_roundtrip.json", _dump({"samples": n, "h_max": h_max, "max_error": err}))
    return f"round-trip error {err:.3e}"


def run_pendulum_diagram(cfg, art, threads):
    from . import pendulum as P

    grid = np.linspace(cfg.get("j_min", -0.6), cfg.get("j_max", 0.6), cfg.get("j_count", 121))
    d = P.critical_values(grid, threads)
    art.write("branches.csv", P.diagram_csv(d))
    art.write("cusps.csv", P.cusps_csv(d))
    obj = d.to_json_obj()
    obj["reduction_check"] = P.reduction_check(200, cfg.get("seed", 0))
    cycles = []
    for c in cfg.get("cycles", []):
        cycles.append({**c, "action": P.reduced_action(c["j"], c["h"], c["cycle"])})
    obj["cycles"] = cycles
    art.write("diagram.json", _dump(obj))
    art.write("diagram.svg", P.diagram_svg(d, f"flapinv {__version__}"))
    return f"{len(d.cusps)} cusps, {len(d.flap_vertices)} flap vertex"


def run_flap_affine(cfg, art, threads):
    from . import pendulum as P

    jc = P.cusp_point()[0]
    d = P.critical_values(np.linspace(-1.5 * jc, 1.5 * jc, 61), threads)
    geom = P.flap_geometry(d, cfg.get("resolution", 33), threads=threads)
    t = cfg.get("transform", {"sign": 1, "k": 0, "const": 0.0})
    other = geom.transformed(t["sign"], t["k"], t["const"])
    decision = P.affine_equivalent(geom, other, cfg.get("tol", 1e-9))
    art.write("flap.csv", P.flap_csv(geom))
    art.write("flap.json", _dump(geom.to_json_obj()))
    art.write("affine.json", _dump(decision.to_json_obj()))
    art.write("flap.svg", P.flap_svg(geom, f"flapinv {__version__}"))
    return "equivalent" if decision.equivalent else "not equivalent"


def run_model_period(cfg, art, threads):
    from .hamiltonians import GermJ, model_period, model_return_time, random_germ

    start = cfg.get("start", [0.01, -0.08, 0.02])  # near the elliptic point y = -sqrt(lam/3)
    if "germ" in cfg:
        germs = [GermJ.parse(cfg["germ"])]
    else:
        rng = np.random.default_rng(cfg.get("seed", 0))
        germs = [random_germ(rng) for _ in range(cfg.get("count", 5))]
    rows = ["index,return_time,period,defect"]
    worst = 0.0
    for i, J in enumerate(germs):
        T = model_return_time(J, start)
        P = model_period(J, start)
        worst = max(worst, abs(T - 2 * math.pi))
        rows.append(f"{i},{fmt(T)},{fmt(P)},{fmt(T - 2 * math.pi)}")
    art.write("model_period.csv", "\n".join(rows) + "\n")
    return f"max |T - 2pi| = {worst:.3e}"


EXPERIMENTS = {
    "action-profile": run_action_profile,
    "moser-solve": run_moser_solve,
    "normal-form": run_normal_form,
    "cusp-invariant": run_cusp_invariant,
    "abel-roundtrip": run_abel_roundtrip,
    "pendulum-diagram": run_pendulum_diagram,
    "flap-affine": run_flap_affine,
    "model-period": run_model_period,
}


def run_config(config: dict, out: Path, threads: int = 1) -> tuple[int, str]:
    """Validate and run one configuration; returns (exit status, summary line)."""
    art = Artifacts(Path(out))
    try:
        validate(config)
        name = config["experiment"]
        summary = EXPERIMENTS[name](config, art, threads)
        return EXIT_OK, f"{name}: {summary} -> {', '.join(art.written)}"
    except ConfigError as exc:
        report = {"error": "invalid-config", "message": str(exc), **exc.payload}
        status = EXIT_INVALID
    except INPUT_ERRORS as exc:
        report = exc.to_dict()
        status = EXIT_INVALID
    except FlapinvError as exc:
        report = exc.to_dict()
        status = EXIT_NUMERIC
    except (ArithmeticError, ValueError) as exc:
        report = {"error": "numerical-failure", "message": str(exc)}
        status = EXIT_NUMERIC
    art.write("error.json", _dump(report))
    return status, json.dumps(report, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="flapinv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment described by a JSON config")
    run.add_argument("config", help="path to the JSON configuration")
    run.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or {DEFAULT_OUT})")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    out = Path(args.out or os.environ.get(OUT_ENV, DEFAULT_OUT))
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
        config = apply_overrides(config, args.overrides)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        report = {"error": "invalid-config", "message": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        Artifacts(out).write("error.json", _dump(report))
        return EXIT_INVALID
    status, line = run_config(config, out, max(1, args.threads))
    print(line, file=sys.stdout if status == EXIT_OK else sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
