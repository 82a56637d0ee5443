"""Command line front end.

Subcommands: bound, compare, moments, sample, zerobias, validate.
Exit codes: 0 ok, 1 validation failure, 2 input or domain error,
3 resource cap exceeded. Output is assembled in full before anything is
written, so a failing run leaves no partial file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bounds, oracle, permstat, zerobias
from .bounds import BoundKind
from .errors import ConsistencyError, DomainError, ResourceError

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

KIND_ALIASES = {
    "eq2": BoundKind.ONE_SIDED,
    "eq3": BoundKind.TWO_SIDED,
    "eq4": BoundKind.TLOGT_TIGHT,
    "eq4-tight": BoundKind.TLOGT_TIGHT,
    "eq4-loose": BoundKind.TLOGT_LOOSE,
    "eq7": BoundKind.BERNSTEIN,
    "eq8": BoundKind.BENNETT,
    "eq13": BoundKind.CHATTERJEE,
    "eq14": BoundKind.HOEFFDING_ZB,
}

SCALAR_KINDS = bounds.KIND_ORDER
COMPARE_KINDS = (BoundKind.ONE_SIDED, BoundKind.TWO_SIDED,
                 BoundKind.TLOGT_TIGHT, BoundKind.TLOGT_LOOSE)
MATRIX_ONLY_KINDS = (BoundKind.CHATTERJEE, BoundKind.HOEFFDING_ZB)

# execution and presentation settings left out of the echoed config
NOT_ECHOED = ("format", "out", "workers", "func")


# -- argument parsing helpers ------------------------------------------------

def parse_kinds(values: Sequence[str] | None) -> list[BoundKind] | None:
    if not values:
        return None
    kinds = []
    for value in values:
        for name in value.split(","):
            name = name.strip().lower()
            if not name:
                continue
            try:
                kind = KIND_ALIASES.get(name) or BoundKind(name)
            except ValueError:
                raise DomainError(f"unknown bound kind {name!r}") from None
            if kind not in kinds:
                kinds.append(kind)
    return kinds


def parse_t_grid(spec: str, log: bool = False) -> list[float]:
    """``min:max:count`` into a linear (or, with ``log``, geometric) grid."""
    try:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise DomainError(f"t-grid must look like min:max:count, got {spec!r}") from None
    if count < 1:
        raise DomainError("t-grid count must be >= 1")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo or lo < 0:
        raise DomainError("t-grid needs 0 <= min <= max")
    if count == 1:
        return [lo]
    if log:
        if lo <= 0:
            raise DomainError("log-spaced t-grid needs min > 0")
        return np.geomspace(lo, hi, count).tolist()
    return np.linspace(lo, hi, count).tolist()


def resolve_ts(args) -> list[float]:
    if args.t is not None and args.t_grid is not None:
        raise DomainError("give either --t or --t-grid, not both")
    if args.t is not None:
        return [float(t) for t in args.t]
    if args.t_grid is not None:
        return parse_t_grid(args.t_grid, args.log)
    raise DomainError("one of --t or --t-grid is required")


def load_matrix(path: str) -> permstat.SquareMatrix:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise DomainError(f"cannot read matrix file {path!r}: {exc.strerror}") from None
    if p.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            return permstat.SquareMatrix.from_json(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"bad matrix JSON in {path!r}: {exc}") from None
    return permstat.SquareMatrix.from_csv(text)


def load_dist(arg: str) -> zerobias.DiscreteDist:
    text = arg
    if not arg.lstrip().startswith("{"):
        try:
            text = Path(arg).read_text()
        except OSError as exc:
            raise DomainError(f"cannot read distribution file {arg!r}: {exc.strerror}") from None
    try:
        return zerobias.DiscreteDist.from_json(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"bad distribution JSON: {exc}") from None


def resolve_seed(args, required: bool = False) -> int:
    if args.seed is None:
        if required:
            raise DomainError("--seed is required for this subcommand")
        args.seed = secrets.randbits(63)
    if not 0 <= args.seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    return args.seed


def echo_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}


# -- output ------------------------------------------------------------------

def render(command: str, args, payload: dict, columns: Sequence[str], rows: list[dict]) -> str:
    config = echo_config(args)
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config,
               **payload, "rows": rows}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    buf.write(f"# command={command}\n")
    buf.write(f"# config={json.dumps(config, sort_keys=True)}\n")
    for key, value in payload.items():
        buf.write(f"# {key}={json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([oracle.format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def record_kinds(args, kinds: Sequence[BoundKind]) -> None:
    args.kind = [k.value for k in kinds]


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- subcommands -------------------------------------------------------------

BOUND_COLUMNS = ("t", "kind", "raw", "clamped", "applicable")


def _bound_row(t: float, value: bounds.BoundValue) -> dict:
    return {"t": t, **value.to_dict()}


def _scalar_rows(sigma2, c, ts, kinds, a) -> list[dict]:
    rows = []
    for t in ts:
        for kind in kinds:
            rows.append(_bound_row(t, bounds.evaluate(kind, sigma2, c, t, a)))
    return rows


def _matrix_context(args):
    A = load_matrix(args.matrix)
    law = permstat.parse_law(args.law, A.n)
    return A, law


def cmd_bound(args) -> int:
    ts = resolve_ts(args)
    kinds = parse_kinds(args.kind)
    payload: dict = {}
    if args.matrix is not None:
        if args.sigma2 is not None or args.c is not None:
            raise DomainError("give either --matrix/--law or --sigma2/--c")
        A, law = _matrix_context(args)
        uniform = isinstance(law, permstat.UniformSn)
        if kinds is None:
            kinds = list(bounds.COUPLING_KINDS) + (list(MATRIX_ONLY_KINDS) if uniform else [])
        params = permstat.bound_params(A, law)
        mu = permstat.law_mean(A, law)
        payload["mu"] = mu
        payload["classes"] = [{"weight": p.weight, "sigma2": p.sigma2, "c": p.c,
                               "regime_threshold": bounds.regime_threshold(p.sigma2, p.c)}
                              for p in params]
        unit_entries = bool(np.all((A.entries >= 0) & (A.entries <= 1)))
        if uniform:
            payload["chatterjee_crossover"] = bounds.chatterjee_crossover(mu, params[0].sigma2)
            payload["entries_in_unit_interval"] = unit_entries
        rows = []
        for t in ts:
            for kind in kinds:
                if kind is BoundKind.BENNETT:
                    raise DomainError("Bennett's bound needs independent summands, not a permutation statistic")
                if kind in MATRIX_ONLY_KINDS:
                    if not (uniform and unit_entries and mu > 0):
                        rows.append(_bound_row(t, bounds.BoundValue.not_applicable(kind)))
                    elif kind is BoundKind.CHATTERJEE:
                        rows.append(_bound_row(t, bounds.chatterjee(mu, t)))
                    else:
                        rows.append(_bound_row(t, bounds.zb_hoeffding_two_sided(params[0].sigma2, t)))
                    continue
                rows.append(_bound_row(t, permstat.tail_bound(A, law, t, kind, args.a)))
    else:
        if args.sigma2 is None or args.c is None:
            raise DomainError("--sigma2 and --c are required without --matrix")
        if args.law is not None:
            raise DomainError("--law needs --matrix")
        kinds = kinds or list(SCALAR_KINDS)
        bad = [k.value for k in kinds if k in MATRIX_ONLY_KINDS]
        if bad:
            raise DomainError(f"{', '.join(bad)} need --matrix with the uniform law")
        bounds.BoundInput(args.sigma2, args.c, 0.0)
        if args.c > 0:
            payload["regime_threshold"] = bounds.regime_threshold(args.sigma2, args.c)
        rows = _scalar_rows(args.sigma2, args.c, ts, kinds, args.a)
    record_kinds(args, kinds)
    emit(render("bound", args, payload, BOUND_COLUMNS, rows), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    ts = resolve_ts(args)
    kinds = parse_kinds(args.kind) or list(COMPARE_KINDS)
    bad = [k.value for k in kinds if k not in SCALAR_KINDS]
    if bad:
        raise DomainError(f"cannot compare {', '.join(bad)} from (sigma2, c) alone")
    rows = []
    for t in ts:
        inp = bounds.BoundInput(args.sigma2, args.c, t)
        winner, best = bounds.best_bound(inp, kinds, args.a)
        row = {"t": t, "winner": winner.value if winner else None,
               "best": best.clamped if best else None}
        for kind in kinds:
            try:
                value = bounds.evaluate(kind, args.sigma2, args.c, t, args.a)
            except DomainError:
                value = bounds.BoundValue.not_applicable(kind)
            row[kind.value] = value.raw
        rows.append(row)
    payload = {}
    if args.c > 0:
        payload["regime_threshold"] = bounds.regime_threshold(args.sigma2, args.c)
    columns = ("t", "winner", "best") + tuple(k.value for k in kinds)
    record_kinds(args, kinds)
    emit(render("compare", args, payload, columns, rows), args.out)
    return EXIT_OK


def cmd_moments(args) -> int:
    A, law = _matrix_context(args)
    mu, sigma2 = permstat.law_moments(A, law)
    payload = {"mu": mu, "sigma2": sigma2}
    if isinstance(law, permstat.UniformSn):
        payload["sup_norm_centered"] = permstat.sup_norm_centered(A)
    elif A.n >= 3:
        payload["a_o"] = permstat.a_o(A)
    try:
        payload["coupling"] = [{"weight": p.weight, "sigma2": p.sigma2, "c": p.c}
                               for p in permstat.bound_params(A, law)]
    except DomainError as exc:
        payload["coupling"] = None
        payload["coupling_unavailable"] = str(exc)
    if args.exact:
        exact_mu, exact_var = oracle.exact_moments(A, law)
        payload["exact_mu"] = exact_mu
        payload["exact_sigma2"] = exact_var
    emit(render("moments", args, payload, (), []), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    resolve_seed(args)
    law = permstat.parse_law(args.law, args.n)
    if args.count < 0:
        raise DomainError("--count must be >= 0")
    rng = np.random.default_rng(args.seed)
    perms = permstat.sample_many(law, rng, args.count)
    rows = [{"index": i, "permutation": json.dumps(permstat.permutation_to_json(p)),
             "cycle_type": json.dumps(list(permstat.cycle_type_of(p).f))}
            for i, p in enumerate(perms)]
    payload = {"law": permstat.describe_law(law)}
    emit(render("sample", args, payload, ("index", "permutation", "cycle_type"), rows), args.out)
    return EXIT_OK


def cmd_zerobias(args) -> int:
    dist = load_dist(args.dist)
    density = zerobias.zero_bias_transform(dist)
    mean, var, third = zerobias.moments(dist)
    payload = {"dist": dist.to_json(), "variance": var}
    rows: list[dict] = []
    columns: tuple[str, ...] = ()
    if args.emit == "density":
        payload["density"] = density.to_json()
        columns = ("left", "right", "density")
        b = density.breakpoints.tolist()
        rows = [{"left": b[j], "right": b[j + 1], "density": float(d)}
                for j, d in enumerate(density.densities)]
    elif args.emit == "samples":
        resolve_seed(args)
        if args.n < 0:
            raise DomainError("--n must be >= 0")
        rng = np.random.default_rng(args.seed)
        draws = zerobias.sample_zero_bias(density, rng, args.n)
        columns = ("index", "value")
        rows = [{"index": i, "value": float(x)} for i, x in enumerate(draws)]
    elif args.emit == "cdf":
        ts = resolve_ts(args)
        columns = ("x", "cdf")
        rows = [{"x": x, "cdf": float(zerobias.cdf(density, x))} for x in ts]
    emit(render("zerobias", args, payload, columns, rows), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    resolve_seed(args, required=True)
    A, law = _matrix_context(args)
    ts = resolve_ts(args)
    kinds = parse_kinds(args.kind) or list(bounds.COUPLING_KINDS)
    bad = [k.value for k in kinds if k not in bounds.COUPLING_KINDS]
    if bad:
        raise DomainError(f"{', '.join(bad)} cannot be validated for a permutation statistic")
    if args.workers < 1:
        raise DomainError("--workers must be >= 1")
    method = args.method
    if method == "auto":
        try:
            permstat.enumerate_law(law)
            method = "exact"
        except ResourceError:
            method = "monte_carlo"
    elif method == "mc":
        method = "monte_carlo"
    report = oracle.validate_domination(A, law, ts, kinds, method=method, trials=args.trials,
                                        seed=args.seed, level=args.level, workers=args.workers,
                                        bound_scale=args.bound_scale)
    record_kinds(args, kinds)
    payload = {**report.meta, "passed": report.passed, "violations": len(report.violations)}
    emit(render("validate", args, payload, oracle.DominationRow.COLUMNS, report.row_dicts()), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- parser ------------------------------------------------------------------

def _add_output(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write here instead of stdout")


def _add_t(p):
    p.add_argument("--t", type=float, action="append", help="deviation (repeatable)")
    p.add_argument("--t-grid", help="min:max:count")
    p.add_argument("--log", action="store_true", help="geometric t-grid spacing")


def _add_kinds(p):
    p.add_argument("--kind", action="append",
                   help="bound kinds, comma separated or repeated (e.g. eq2,tlogt-tight)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zbconc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate tail bounds over a t-grid")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--matrix", help="matrix CSV or JSON")
    p.add_argument("--law", help="uniform | fpf-involution | cycle-type:F | mixture:F@w;...")
    p.add_argument("--a", type=float, default=bounds.ZERO_BIAS_BERNSTEIN_A,
                   help="Bernstein constant (default 4)")
    _add_t(p)
    _add_kinds(p)
    _add_output(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="per-t winner among bounds")
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--a", type=float, default=bounds.ZERO_BIAS_BERNSTEIN_A)
    _add_t(p)
    _add_kinds(p)
    _add_output(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("moments", help="mean, variance and coupling constants of Y")
    p.add_argument("--matrix", required=True)
    p.add_argument("--law", required=True)
    p.add_argument("--exact", action="store_true", help="also enumerate the law")
    _add_output(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("sample", help="draw permutations from a law")
    p.add_argument("--law", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("zerobias", help="zero-bias density, CDF or samples of a discrete law")
    p.add_argument("--dist", required=True, help='JSON {"atoms": [[v, p], ...]} or a file holding it')
    p.add_argument("--emit", choices=("density", "samples", "cdf"), default="density")
    p.add_argument("--n", type=int, default=1000, help="number of samples")
    p.add_argument("--seed", type=int)
    _add_t(p)
    _add_output(p)
    p.set_defaults(func=cmd_zerobias)

    p = sub.add_parser("validate", help="check exact or Monte Carlo tails against bounds")
    p.add_argument("--matrix", required=True)
    p.add_argument("--law", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--level", type=float, default=oracle.DEFAULT_LEVEL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bound-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    _add_t(p)
    _add_kinds(p)
    _add_output(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"zbconc: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, ConsistencyError) as exc:
        print(f"zbconc: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
