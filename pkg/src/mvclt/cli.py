"""Command-line front end: ``mvclt {check-identities,bound,sweep,compare-runs}``.

Runs are driven by a YAML config file; see ``demos/configs`` for examples.
Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 a bound
hypothesis failed and ``--strict`` was given.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import itertools
import logging
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np
import yaml

from . import core, identities, quadforms, runs, verify
from .bounds import NotPositiveDefiniteError, SmoothnessConstants, _target, slepian_bound, stein_bound
from .montecarlo import McConfig, mc_estimates

log = logging.getLogger("mvclt")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Config schema
# --------------------------------------------------------------------------

_NUM = {"type": "number"}
_NUMS = {"type": "array", "items": _NUM}
_MATRIX = {"type": "array", "items": _NUMS}
_INT = {"type": "integer", "minimum": 1}


def _obj(props: dict, required: Sequence[str] = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_DIST = _obj(
    {
        "dist": {"enum": ["rademacher", "bernoulli", "two-point", "atoms", "normal"]},
        "p": _NUM,
        "values": _NUMS,
        "probs": _NUMS,
    },
    ["dist"],
)

_MODEL = _obj(
    {
        "dist": _DIST["properties"]["dist"],
        "p": _NUM,
        "values": _NUMS,
        "probs": _NUMS,
        "n": _INT,
        "components": {"type": "array", "items": _DIST},
    }
)

_MATRIX_SOURCE = {"oneOf": [_MATRIX, {"type": "string"}]}

_STATISTIC = _obj(
    {
        "kind": {"enum": ["sum", "product", "runs", "quadform", "rademacher-polynomial"]},
        "indices": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        # runs
        "m": {"type": "array", "items": _INT},
        "a": _MATRIX_SOURCE,
        "bernoulli": _obj({"n": _INT, "d": _INT, "p": _NUM}, ["n", "d", "p"]),
        # quadform
        "matrices": {"type": "array", "items": _MATRIX_SOURCE},
        # polynomial: per output a list of [coef, [indices]]
        "terms": {"type": "array", "items": {"type": "array", "items": {"type": "array"}}},
        "n": _INT,
    },
    ["kind"],
)

_TARGET = {"oneOf": [{"enum": ["exact-covariance", "identity"]}, _MATRIX, _NUM]}

_INSTANCE = _obj(
    {"id": {"type": "string"}, "model": _MODEL, "statistic": _STATISTIC, "target": _TARGET},
    ["statistic"],
)

_TEST_FUNCTION = _obj({"t": _NUMS, "phase": _NUM}, ["t"])

SCHEMA = _obj(
    {
        "instances": {"type": "array", "items": _INSTANCE},
        "alphas": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "forms": {"type": "array", "items": {"enum": ["compact", "split"]}},
        "test_functions": {"type": "array", "items": _TEST_FUNCTION},
        "constants": _obj({k: {"type": "number", "minimum": 0} for k in ("lip", "m2", "g2_inf", "g3_inf")}),
        "mode": {"enum": ["exact", "mc"]},
        "seed": {"type": "integer", "minimum": 0},
        "mc": _obj(
            {"outer_samples": _INT, "inner_resamples": _INT, "chunk_size": _INT, "workers": _INT}
        ),
        "sweep": _obj(
            {
                "family": {"enum": ["runs-bernoulli", "qf-tridiagonal", "qf-star"]},
                "n_grid": {"type": "array", "items": _INT, "minItems": 1},
                "d": _INT,
                "p": _NUM,
                "target": _TARGET,
            },
            ["family", "n_grid"],
        ),
        "compare_runs": _obj({"n": {"type": "array", "items": _INT}, "d": {"type": "array", "items": _INT}, "p": _NUMS}),
        "output": _obj({"csv": {"type": "string"}, "svg": {"type": "string"}}),
    }
)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: invalid YAML{where}: {exc}") from exc
    cfg = {} if cfg is None else cfg
    validate_config(cfg, str(p))
    cfg["_base"] = str(p.parent)
    return cfg


def validate_config(cfg: dict, source: str = "<config>") -> None:
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        lines = [f"{source}: {'/'.join(str(x) for x in e.path) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("\n".join(lines))


# --------------------------------------------------------------------------
# Building objects from config
# --------------------------------------------------------------------------


def _read_matrix(src, base: str, field: str) -> np.ndarray:
    if isinstance(src, str):
        path = Path(base) / src
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{field}: cannot load CSV {path}: {exc}") from exc
    arr = np.asarray(src, dtype=float)
    if arr.ndim != 2:
        raise ConfigError(f"{field}: expected a matrix")
    return arr


def _dist(spec: dict, field: str) -> core.ComponentDistribution:
    kind = spec["dist"]
    try:
        if kind == "rademacher":
            return core.rademacher()
        if kind == "normal":
            return core.standard_normal()
        if kind in ("bernoulli", "two-point"):
            if "p" not in spec:
                raise ConfigError(f"{field}: '{kind}' needs 'p'")
            return core.bernoulli(spec["p"]) if kind == "bernoulli" else core.standardized_two_point(spec["p"])
        if "values" not in spec:
            raise ConfigError(f"{field}: 'atoms' needs 'values'")
        return core.atoms(spec["values"], spec.get("probs"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{field}: {exc}") from exc


def _components(spec: dict | None, n: int | None, field: str) -> tuple[core.ComponentDistribution, ...]:
    spec = spec or {"dist": "rademacher"}
    if "components" in spec:
        comps = tuple(_dist(c, f"{field}/components/{i}") for i, c in enumerate(spec["components"]))
        if n is not None and len(comps) != n:
            raise ConfigError(f"{field}: statistic needs {n} components, got {len(comps)}")
        return comps
    if "dist" not in spec:
        raise ConfigError(f"{field}: give 'dist' or 'components'")
    size = spec.get("n", n)
    if size is None:
        raise ConfigError(f"{field}: number of coordinates 'n' is required")
    if n is not None and size != n:
        raise ConfigError(f"{field}: statistic needs n={n}, model gives n={size}")
    return (_dist(spec, field),) * size


def build_instance(spec: dict, index: int, base: str = ".") -> verify.Instance:
    field = f"instances/{index}"
    st = spec["statistic"]
    kind = st["kind"]
    iid = spec.get("id", f"instance-{index}")
    target = spec.get("target", "exact-covariance")
    mspec = spec.get("model")
    try:
        if kind == "runs":
            if "bernoulli" in st:
                b = st["bernoulli"]
                rspec = runs.bernoulli_runs_spec(b["n"], b["d"], b["p"])
            else:
                if "m" not in st or "a" not in st:
                    raise ConfigError(f"{field}/statistic: runs need 'm' and 'a' (or 'bernoulli')")
                a = _read_matrix(st["a"], base, f"{field}/statistic/a")
                comps = _components(mspec, a.shape[1] + max(st["m"]) - 1, f"{field}/model")
                rspec = runs.RunsSpec(tuple(st["m"]), tuple(a), comps)
            return verify.runs_instance(rspec, iid) if target == "exact-covariance" else verify.Instance(
                iid, rspec.model, runs.build_runs_statistic(rspec), _target_value(target, rspec.d, field), runs=rspec
            )
        if kind == "quadform":
            if "matrices" not in st:
                raise ConfigError(f"{field}/statistic: quadform needs 'matrices'")
            mats = tuple(_read_matrix(m, base, f"{field}/statistic/matrices/{i}") for i, m in enumerate(st["matrices"]))
            comps = _components(mspec, mats[0].shape[0], f"{field}/model")
            qspec = quadforms.QuadFormSpec(mats, comps)
            return verify.quadform_instance(qspec, iid, _target_value(target, qspec.d, field))
        if kind == "rademacher-polynomial":
            if "terms" not in st or "n" not in st:
                raise ConfigError(f"{field}/statistic: rademacher-polynomial needs 'terms' and 'n'")
            terms = [[(float(c), tuple(idx)) for c, idx in out] for out in st["terms"]]
            model = core.ProductModel.iid(core.rademacher(), st["n"])
            F = verify.centered(model, core.polynomial_statistic(terms, st["n"], name=iid))
            return verify.Instance(iid, model, F, _target_value(target, len(terms), field))
        comps = _components(mspec, st.get("n"), f"{field}/model")
        model = core.ProductModel(comps)
        n = model.n
        idx = st.get("indices", list(range(n)))
        if any(i >= n for i in idx):
            raise ConfigError(f"{field}/statistic/indices: index out of range for n={n}")
        mu = [comps[i].mean() for i in idx]
        if kind == "sum":
            w = np.zeros((1, n))
            w[0, idx] = 1.0 / math.sqrt(len(idx))
            F = core.linear_statistic(w, offset=sum(mu) / math.sqrt(len(idx)), name="sum")
        else:
            F = core.polynomial_statistic([[(1.0, tuple(idx)), (-math.prod(mu), ())]], n, name="product")
        return verify.Instance(iid, model, F, _target_value(target, 1, field))
    except ConfigError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"{field}: {exc}") from exc


def _target_value(target, d: int, field: str):
    if isinstance(target, str):
        return "exact-covariance" if target == "exact-covariance" else np.eye(d)
    C = np.atleast_2d(np.asarray(target, dtype=float))
    if C.shape != (d, d):
        raise ConfigError(f"{field}/target: expected a {d}x{d} matrix, got shape {C.shape}")
    return C


def build_instances(cfg: dict) -> list[verify.Instance]:
    if "instances" not in cfg:
        return verify.default_corpus()
    return [build_instance(s, i, cfg.get("_base", ".")) for i, s in enumerate(cfg["instances"])]


def _test_functions(cfg: dict, d: int) -> tuple[verify.SmoothTestFunction, ...]:
    if "test_functions" not in cfg:
        return verify.default_test_functions(d)
    out = []
    for tf in cfg["test_functions"]:
        if len(tf["t"]) == d:
            out.append(verify.make_cosine_family(tf["t"], tf.get("phase", 0.0)))
    return tuple(out)


def _mc_config(cfg: dict, seed: int | None) -> McConfig:
    params = dict(cfg.get("mc", {}))
    params["seed"] = seed if seed is not None else cfg.get("seed", 0)
    try:
        return McConfig(**params)
    except ValueError as exc:
        raise ConfigError(f"mc: {exc}") from exc


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else format(float(x), ".17g")
    return str(x)


def write_csv(path: str | None, header: Sequence[str], rows: Sequence[Sequence], reproducible: bool) -> str:
    buf = io.StringIO()
    if not reproducible:
        buf.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


IDENTITY_HEADER = ["check_name", "instance_id", "max_violation", "tolerance", "pass"]


def cmd_check_identities(cfg: dict, args) -> int:
    instances = build_instances(cfg)
    if not instances:
        warnings.warn("empty corpus: no identity checks were run", stacklevel=1)
        log.warning("empty corpus: no identity checks were run")
    alphas = tuple(cfg.get("alphas", identities.ALPHAS))
    rows, ok = [], True
    for inst in instances:
        table = core.build_joint_table(inst.model, inst.F)
        funcs = _test_functions(cfg, table.d)
        for res in identities.identity_checks(table, alphas, funcs):
            rows.append([res.name, inst.id, res.max_violation, res.tolerance, res.passed])
            ok &= res.passed
    write_csv(args.out, IDENTITY_HEADER, rows, args.reproducible)
    return EXIT_OK if ok else EXIT_FAIL


BOUND_HEADER = [
    "instance_id",
    "test_function",
    "mode",
    "status",
    "method",
    "form",
    "alpha",
    "term_name",
    "term_value",
    "constant_name",
    "constant_value",
    "total",
    "total_se",
    "lhs",
    "slack",
    "pass",
]


def _report_rows(prefix, method, form, alpha, rep, status, lhs, lhs_err):
    if rep is None:
        return [prefix + [status, method, form, alpha, None, None, None, None, None, None, lhs, None, None]]
    passed = None if lhs is None else bool(lhs <= rep.total + (lhs_err or 0.0) + verify.PASS_TOL)
    slack = None if lhs is None else rep.total - lhs
    out = []
    for term, const in itertools.zip_longest(rep.terms.items(), rep.constants.items()):
        tn, tv = term if term else (None, None)
        cn, cv = const if const else (None, None)
        out.append(prefix + [rep.status, method, form, alpha, tn, tv, cn, cv, rep.total, rep.total_se, lhs, slack, passed])
    return out


def _generic_mc_reports(inst, mcfg, alphas, forms, gc, target):
    """Generic bounds from Monte Carlo summaries (no enumeration of the product space)."""
    out = []
    for alpha in alphas:
        stats = mc_estimates(inst.model, inst.F, alpha, mcfg)
        for form in forms:
            sform = "L1" if form == "compact" else form
            out.append(("slepian", sform, alpha, slepian_bound(stats, target, gc, sform), "ok"))
            tform = "L2" if form == "compact" else form
            if not target.is_pd:
                out.append(("stein", tform, alpha, None, NotPositiveDefiniteError.status))
            elif gc.lip is not None and gc.m2 is not None:
                out.append(("stein", tform, alpha, stein_bound(stats, target, gc, tform), "ok"))
    return out


def _instance_reports(inst, cfg, args, mode, mcfg, alphas, forms):
    """``(label, lhs, lhs_error, reports)`` per test function for one instance."""
    table = None
    if mode == "exact":
        try:
            table = core.build_joint_table(inst.model, inst.F)
        except core.CapExceededError as exc:
            log.warning("instance %s: %s; reporting closed-form bounds only", inst.id, exc)
    target = inst.resolve_target(table)
    if target is None:
        raise ConfigError(f"instance {inst.id}: target 'exact-covariance' needs exact enumeration or an explicit matrix")
    summaries = {a: core.exact_summary(table, a) for a in alphas} if table is not None else None
    if "constants" in cfg:
        funcs = [(None, SmoothnessConstants(**cfg["constants"]))]
    else:
        funcs = [(g, g.constants) for g in _test_functions(cfg, inst.F.d)]
    out = []
    for g, gc in funcs:
        lhs = lhs_err = None
        if g is not None and (table is not None or mode == "mc"):
            disc = verify.discrepancy(inst.model, inst.F, g, target, mode, cfg=mcfg, table=table)
            lhs, lhs_err = disc.lhs, disc.lhs_error
        if table is not None:
            holder = g or verify.SmoothTestFunction(lambda X: np.zeros(X.shape[0]), inst.F.d, gc)
            reps = verify.instance_reports(inst, table, target, holder, alphas, forms, summaries)
        elif mode == "mc":
            reps = _generic_mc_reports(inst, mcfg, alphas, forms, gc, target) + verify.structured_reports(inst, target, gc)
        else:
            reps = [("slepian", None, None, None, "cap-exceeded")] + verify.structured_reports(inst, target, gc)
        out.append(("constants" if g is None else g.name, lhs, lhs_err, reps))
    return out


def cmd_bound(cfg: dict, args) -> int:
    mode = args.mode or cfg.get("mode", "exact")
    alphas = tuple(cfg.get("alphas", (0.5,)))
    forms = tuple(cfg.get("forms", ("compact", "split")))
    mcfg = _mc_config(cfg, args.seed)
    rows, failed, violated = [], False, False
    for inst in build_instances(cfg):
        for label, lhs, lhs_err, reps in _instance_reports(inst, cfg, args, mode, mcfg, alphas, forms):
            for method, form, alpha, rep, status in reps:
                rws = _report_rows([inst.id, label, mode], method, form, alpha, rep, status, lhs, lhs_err)
                rows.extend(rws)
                failed |= any(r[-1] is False for r in rws)
                violated |= status != "ok"
    write_csv(args.out, BOUND_HEADER, rows, args.reproducible)
    if failed:
        return EXIT_FAIL
    if violated and args.strict:
        return EXIT_HYPOTHESIS
    return EXIT_OK


def _sweep_rows(sw: dict, g: SmoothnessConstants):
    family, grid = sw["family"], sw["n_grid"]
    d = sw.get("d", 1)
    rows, errors = [], []
    if family == "runs-bernoulli":
        p = sw.get("p", 0.5)
        for n in grid:
            try:
                rep = runs.runs_bound(runs.bernoulli_runs_spec(n, d, p), g)
            except ValueError as exc:
                errors.append((n, str(exc)))
                continue
            rows.append((n, rep.terms, rep.total))
        return rows, errors
    matrix = quadforms.tridiagonal_matrix if family == "qf-tridiagonal" else quadforms.star_matrix
    fam = quadforms.rademacher_family(matrix, d)
    target = sw.get("target", "identity")
    C = np.full((d, d), 1.0) if target == "exact-covariance" else _target_value(target, d, "sweep")
    for n in grid:
        try:
            res = quadforms.qf_clt_sweep(fam, C, g, [n])
        except ValueError as exc:
            errors.append((n, str(exc)))
            continue
        rows.append((n, res.rows[0].terms, res.rows[0].total))
    return rows, errors


def write_svg(path: str, ns, totals, slope) -> None:
    """Minimal log-log line plot of ``total`` against ``n``."""
    W, H, pad = 480, 320, 50
    x = np.log10(np.asarray(ns, dtype=float))
    y = np.log10(np.asarray(totals, dtype=float))
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (W - 2 * pad)

    def py(v):
        return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
    label = "slope: n/a" if slope is None else f"slope: {slope:.4f}"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">log10 n</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {H / 2})">log10 total</text>',
        f'<text x="{pad}" y="{H - pad + 16}" font-size="10">{x0:.2f}</text>',
        f'<text x="{W - pad}" y="{H - pad + 16}" text-anchor="end" font-size="10">{x1:.2f}</text>',
        f'<text x="{pad - 4}" y="{H - pad}" text-anchor="end" font-size="10">{y0:.2f}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{y1:.2f}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>',
        f'<text x="{W - pad}" y="{pad}" text-anchor="end" font-size="12">{label}</text>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(parts) + "\n")


def cmd_sweep(cfg: dict, args) -> int:
    if "sweep" not in cfg:
        raise ConfigError("sweep: section is required for the sweep command")
    g = SmoothnessConstants(**cfg.get("constants", {"g2_inf": 1.0, "g3_inf": 1.0}))
    try:
        g.require("g2_inf", "g3_inf")
    except ValueError as exc:
        raise ConfigError(f"constants: {exc}") from exc
    rows, errors = _sweep_rows(cfg["sweep"], g)
    for n, msg in errors:
        log.warning("sweep: n=%d skipped: %s", n, msg)
    names = list(rows[0][1]) if rows else []
    out = []
    for i, (n, terms, total) in enumerate(rows):
        slope = quadforms.loglog_slope([r[0] for r in rows[: i + 1]], [r[2] for r in rows[: i + 1]])
        out.append([n] + [terms[k] for k in names] + [total, None, slope])
    write_csv(args.out, ["n"] + names + ["total", "lhs", "slope_running"], out, args.reproducible)
    svg = args.svg or cfg.get("output", {}).get("svg")
    if svg and rows:
        write_svg(svg, [r[0] for r in rows], [r[2] for r in rows], out[-1][-1])
    return EXIT_OK


COMPARE_HEADER = [
    "n",
    "d",
    "p",
    "sigma_method",
    "sigma_gap",
    "runs_bound",
    "relaxed_bound",
    "reinert_rollin_bound",
    "runs_within_relaxed",
    "relaxed_within_reinert_rollin",
]


def cmd_compare_runs(cfg: dict, args) -> int:
    spec = cfg.get("compare_runs", {})
    g = SmoothnessConstants(**cfg.get("constants", {"g2_inf": 1.0, "g3_inf": 1.0}))
    rows, ok = [], True
    for n, d, p in itertools.product(spec.get("n", [10, 100, 1000]), spec.get("d", [1, 2, 3]), spec.get("p", [0.3, 0.5, 0.7])):
        try:
            res = runs.bernoulli_runs_suite(n, d, p, g)
        except AssertionError as exc:
            log.error("compare-runs n=%d d=%d p=%g: %s", n, d, p, exc)
            ok = False
            continue
        except ValueError as exc:
            raise ConfigError(f"compare_runs: {exc}") from exc
        rows.append(
            [n, d, p, res.sigma_method, res.sigma_gap, res.specialized_bound.total, res.relaxed_bound,
             res.reinert_rollin_bound, res.runs_within_relaxed, res.relaxed_within_reinert_rollin]
        )
    write_csv(args.out, COMPARE_HEADER, rows, args.reproducible)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "check-identities": cmd_check_identities,
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "compare-runs": cmd_compare_runs,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvclt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int, help="Monte Carlo seed (overrides the config)")
        p.add_argument("--mode", choices=["exact", "mc"], help="exact enumeration or Monte Carlo")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--svg", help="SVG plot path (sweep only)")
        p.add_argument("--reproducible", action="store_true", help="omit the timestamp header line")
        p.add_argument("--strict", action="store_true", help="exit 3 when a bound hypothesis fails")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = make_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
