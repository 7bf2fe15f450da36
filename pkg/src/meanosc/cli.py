"""Config-driven experiment driver.

Subcommands: oscillation, poisson, carleson, extend, schwarzian, transport,
verify, plot-data.  Every run reads a JSON config (schema-validated, unknown
fields rejected), writes a canonical report.json into --out, and exits with
0 success / 1 verification failure / 2 config error / 3 numerical
divergence / 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import carleson as C
from . import descriptors as D
from . import extension as E
from . import oscillation as O
from . import poisson as P
from . import report as R
from . import schwarzian as S
from . import verify as V
from .descriptors import IntervalLadder
from .profiles import ProfileConfig
from .quadrature import DivergenceError

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


def _load_schema() -> dict:
    with resources.files("meanosc.schemas").joinpath("config.schema.json").open() as fh:
        return json.load(fh)


def _validate(subcommand: str, config: dict) -> None:
    import jsonschema

    schema = _load_schema()
    sub = schema["subcommands"].get(subcommand)
    if sub is None:
        raise ConfigError(f"no config schema for subcommand {subcommand!r}")
    full = dict(sub)
    full["definitions"] = schema["definitions"]
    try:
        jsonschema.validate(config, full)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config rejected: {e.message}") from e


# Grid CSV format: versioned header, then x,y,w triples in row-major order.
GRID_HEADER = "# meanosc-grid v1"


def write_grid_csv(path: Path, xs, ys, vals, domain: str = "H") -> None:
    lines = [f"{GRID_HEADER} nx={len(xs)} ny={len(ys)} domain={domain}", "x,y,w"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            lines.append(f"{x!r},{y!r},{vals[iy, ix]!r}")
    path.write_text("\n".join(lines) + "\n")


def read_grid_csv(path: Path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith(GRID_HEADER):
            raise ConfigError(f"{path}: not a meanosc grid file")
        meta = dict(kv.split("=") for kv in header[len(GRID_HEADER):].split())
        nx, ny = int(meta["nx"]), int(meta["ny"])
        domain = meta.get("domain", "H")
        if fh.readline().strip() != "x,y,w":
            raise ConfigError(f"{path}: missing column header")
        data = np.loadtxt(fh, delimiter=",")
    if data.shape != (nx * ny, 3):
        raise ConfigError(f"{path}: expected {nx * ny} rows, got {data.shape[0]}")
    xs = data[:nx, 0]
    ys = data[::nx, 1]
    vals = data[:, 2].reshape(ny, nx)
    return xs, ys, vals, domain


def density_from_config(cfg: dict, base_dir: Path) -> C.MeasureDensity:
    kind = cfg["kind"]
    domain = cfg.get("domain", "H")
    if kind == "zero":
        return C.zero_density(domain)
    if kind == "uniform":
        sup = C.Support("disk", r0=1.0, bound=1.0) if domain == "D" else C.Support("all")
        return C.MeasureDensity(domain, fn=lambda x, y: np.ones(np.broadcast(x, y).shape),
                                support=sup, name="uniform")
    if kind == "strip_linear":
        from .corpus import strip_density

        return strip_density()
    if kind == "grid":
        if "csv" in cfg:
            xs, ys, vals, dom = read_grid_csv(base_dir / cfg["csv"])
        else:
            xs = np.asarray(cfg["xs"], dtype=float)
            ys = np.asarray(cfg["ys"], dtype=float)
            vals = np.asarray(cfg["vals"], dtype=float)
            dom = domain
        return C.grid_density(xs, ys, vals, domain=dom, name="grid")
    if kind == "fefferman_stein":
        f = D.FunctionDescriptor.from_json(cfg["function"])
        return C.fefferman_stein_density(f)
    if kind == "schwarzian_density":
        return S.schwarzian_carleson_density(S.AnalyticMap.from_json(cfg["map"]))
    if kind == "logderiv_density":
        return S.logderiv_cmoa_density(S.AnalyticMap.from_json(cfg["map"]))
    if kind == "disk_bump":
        cx, cy = cfg.get("center", (0.0, 0.0))
        r = cfg.get("radius", 0.5)
        h = cfg.get("height", 1.0)

        def fn(x, y):
            d2 = (np.asarray(x) - cx) ** 2 + (np.asarray(y) - cy) ** 2
            return h * np.maximum(1.0 - d2 / (r * r), 0.0) ** 2

        import math

        rr = min(math.hypot(cx, cy) + r, 1.0)
        return C.MeasureDensity("D", fn=fn,
                                support=C.Support("disk", r0=rr, bound=h),
                                name="disk_bump")
    raise ConfigError(f"unknown density kind {kind!r}")


def _ladder(cfg: dict | None, octaves: int | None) -> IntervalLadder | None:
    if cfg is None and octaves is None:
        return None
    d = dict(cfg or {})
    if octaves is not None:
        d.setdefault("k_min", -octaves)
        d.setdefault("k_max", octaves)
    return IntervalLadder.from_json(d)


def _profile_config(tolerance_scale: float) -> ProfileConfig:
    return ProfileConfig(vanish_factor=1e-2 * tolerance_scale)


def _labelled(profiles, label: str):
    out = []
    for p in profiles:
        d = R.profile_dict(p)
        d["label"] = label
        out.append(d)
    return out


def run_oscillation(config, args):
    f = D.FunctionDescriptor.from_json(config["function"])
    ladder = _ladder(config.get("ladder"), args.ladder_octaves) \
        or IntervalLadder.for_function(f)
    cls = O.classify(f, ladder, r=config.get("r", 1.0),
                     config=_profile_config(args.tolerance_scale),
                     workers=args.workers)
    profs = cls.profiles
    results = {"verdict": cls.verdict, "norm": cls.norm,
               "threshold": profs.threshold}
    return results, _labelled(profs.as_tuple(), "oscillation")


def run_poisson(config, args):
    f = D.FunctionDescriptor.from_json(config["function"])
    profs = P.boundary_profile(f, r=config.get("r", 1.0),
                               j_max=config.get("j_max", 8),
                               config=_profile_config(args.tolerance_scale))
    results = {"norm": profs.norm, "threshold": profs.threshold,
               "verdicts": {"small": profs.small.verdict,
                            "large": profs.large.verdict,
                            "translation": profs.translation.verdict}}
    return results, _labelled((profs.small, profs.large, profs.translation), "poisson")


def run_carleson(config, args):
    lam = density_from_config(config["density"], Path(args.config).parent)
    ladder = _ladder(config.get("ladder"), args.ladder_octaves) or IntervalLadder()
    rep = C.carleson_profile(lam, ladder,
                             config=_profile_config(args.tolerance_scale))
    results = {"verdict": rep.verdict, "norm": rep.norm, "threshold": rep.threshold}
    profiles = _labelled((rep.small, rep.large, rep.translation), "carleson")
    if config.get("mobius_test") and lam.domain == "D":
        prof = C.mobius_kernel_test_d(lam)
        results["mobius_test_verdict"] = prof.verdict
        profiles += _labelled((prof,), "mobius-kernel")
    return results, profiles


def run_extend(config, args):
    a = D.FunctionDescriptor.from_json(config["logderiv"])
    grid_cfg = config.get("grid") or {}
    if "anchor_cols" not in grid_cfg:
        anchors = tuple(p for p in (*a.breakpoints, *a.singularities) if abs(p) < 8.0)
        grid_cfg["anchor_cols"] = list(anchors)[:8]
    grid = E.GridSpec(**{k: tuple(v) if k == "anchor_cols" else v
                         for k, v in grid_cfg.items()})
    h = E.Homeomorphism(a, config.get("base", 0.0))
    n = config.get("factor_n")
    results = {}
    if n:
        factors = E.factorize(h, int(n))
        xs = np.linspace(-4.0, 4.0, 17)
        y = xs.copy()
        for k in factors:
            y = k.eval(y)
        results["factor_n"] = int(n)
        results["telescoping_error"] = float(np.abs(y - h.eval(xs)).max())
    fld = E.alpha_beta_fields(h, E.MollifierPair(), grid,
                              field=E.ExtensionField(grid.xs(), grid.ys(), None))
    bf = E.beltrami(fld)
    ladder = _ladder(config.get("ladder"), args.ladder_octaves) or V._HEADLINE_LADDER
    rep = C.carleson_profile(bf.density, ladder,
                             config=_profile_config(args.tolerance_scale))
    results.update({"sup_mu": bf.sup_mu, "verdict": rep.verdict, "norm": rep.norm})
    if config.get("write_density_csv"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        xs, ys, vals = bf.density.grid
        write_grid_csv(out / "beltrami_density.csv", xs, ys, vals, "H")
    return results, _labelled((rep.small, rep.large, rep.translation), "beltrami")


def run_schwarzian(config, args):
    g = S.AnalyticMap.from_json(config["map"])
    ladder = _ladder(config.get("ladder"), args.ladder_octaves) \
        or IntervalLadder(k_min=-8, k_max=6, center_radius=4.0, translation_j_max=8)
    pc = _profile_config(args.tolerance_scale)
    r3 = C.carleson_profile(S.schwarzian_carleson_density(g), ladder, rel=1e-4,
                            config=pc)
    r4 = C.carleson_profile(S.logderiv_cmoa_density(g), ladder, rel=1e-4, config=pc)
    results = {"schwarzian_density_verdict": r3.verdict,
               "logderiv_density_verdict": r4.verdict,
               "agree": r3.is_cms() == r4.is_cms()}
    js = {}
    for pair in config.get("zetas", [[0.0, 1.0]]):
        zeta = complex(pair[0], pair[1])
        js[f"{pair[0]}+{pair[1]}j"] = S.j_diagnostic(g, zeta)
    results["j_diagnostic"] = js
    return results, _labelled((r3.small, r3.large, r3.translation), "schwarzian-density")


def run_transport(config, args):
    lam = density_from_config(config["density"], Path(args.config).parent)
    if lam.domain != "D":
        raise ConfigError("transport check expects a disk density")
    tol = config.get("tolerance", 1e-6)
    pairs = {}
    worst = 0.0
    for pair in config.get("points", [[0.0, 1.0], [0.0, 4.0], [2.0, 1.0]]):
        z0 = complex(pair[0], pair[1])
        lhs, rhs = C.transport_consistency(lam, z0)
        diff = abs(lhs - rhs)
        worst = max(worst, diff)
        pairs[f"{pair[0]}+{pair[1]}j"] = {"halfplane": lhs, "disk": rhs, "diff": diff}
    results = {"pairs": pairs, "max_diff": worst, "tolerance": tol,
               "within_tolerance": worst <= tol}
    return results, []


def run_verify_cmd(config, args):
    res = V.run_verify(config["theorem"], workers=args.workers)
    return res.to_results_dict(), []


_RUNNERS = {
    "oscillation": run_oscillation,
    "poisson": run_poisson,
    "carleson": run_carleson,
    "extend": run_extend,
    "schwarzian": run_schwarzian,
    "transport": run_transport,
    "verify": run_verify_cmd,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="meanosc",
                                 description="mean-oscillation / Carleson toolkit")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in (*_RUNNERS, "plot-data"):
        p = sub.add_parser(name)
        if name == "plot-data":
            p.add_argument("--report", required=True, help="path to report.json")
            p.add_argument("--out", required=True, help="output directory")
            continue
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--tolerance-scale", type=float, default=1.0,
                       dest="tolerance_scale")
        p.add_argument("--ladder-octaves", type=int, default=None,
                       dest="ladder_octaves")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "plot-data":
        try:
            report = json.loads(Path(args.report).read_text())
            R.emit_plot_data(report, args.out)
        except OSError as e:
            print(f"I/O error: {e}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK

    try:
        config = json.loads(Path(args.config).read_text())
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        _validate(args.subcommand, config)
        results, profiles = _RUNNERS[args.subcommand](config, args)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"numerical divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE

    report = R.make_report(args.subcommand, config, results, profiles)
    try:
        path = R.write_report(report, args.out)
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"report written to {path}")

    if args.subcommand == "verify" and not results.get("passed", False):
        return EXIT_VERIFY_FAIL
    if args.subcommand == "transport" and not results.get("within_tolerance", True):
        return EXIT_VERIFY_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
