"""Command-line entry point: ``modgrowth {ball,conj,verify,fit,constants,calibrate,replay}``.

Exit status: 0 ok, 1 usage error, 2 verification failure, 3 arithmetic overflow.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import geometry as geo
from .conjugacy import ConjugacyQuery, OffAxisError, PseudoAnosov, gamma_profile, p_set_arrays
from .geometry import I, Units, dist_to_axis
from .group import ArithmeticOverflow, NotHyperbolicError, cached_norm_ball
from .growth import (
    GrowthSeries,
    InsufficientData,
    calibrate_A,
    choose_L,
    fit_exponent,
    paper_constants,
    running_exponent,
    skipped_points,
    validate_A,
)
from .io import (
    CENSUS_FIELDS,
    CSV_FIELDS,
    Config,
    RunManifest,
    UsageError,
    emit,
    format_point,
    manifest_path,
    matrix_str,
    parse_matrix,
    parse_point,
    parse_radii,
    read_csv,
    render_csv,
)
from .orbits import _norm_bound, census, max_stabilizer_order, omega_array, orbit_point_counts
from .verify import SUITES, default_A, run_suite

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_OVERFLOW = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for verification failures here
    def error(self, message: str):
        raise UsageError(message)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _units(args, cfg: Config) -> Units:
    return Units.parse(args.units) if args.units else cfg.units


def _finish(manifest: RunManifest, args, text: str, out: str | None) -> None:
    digest = emit(text, out)
    if out and out != "-":
        manifest.outputs[out] = digest
        manifest.finish()
        manifest.write(args.manifest or manifest_path(out))
    elif args.manifest:
        manifest.finish()
        manifest.write(args.manifest)


# ---------------------------------------------------------------------------
# commands


def cmd_ball(args, cfg: Config, argv: list[str]) -> int:
    X = parse_point(args.center)
    Y = parse_point(args.Y) if args.Y else X
    units = _units(args, cfg)
    radii = parse_radii(args.radius)
    hyp = [geo.convert(r, units, Units.HYPERBOLIC) for r in radii]
    workers = args.workers or cfg.workers
    eps = args.eps if args.eps is not None else cfg.tolerance
    man = RunManifest("ball", argv, X=format_point(X), Y=format_point(Y), units=units.value,
                      radii=radii, workers=workers)
    man.start()
    cache_dir = args.cache_dir or cfg.cache_dir
    ball = None
    if cache_dir:
        ball = cached_norm_ball(_norm_bound(max(hyp) + 2.0 * geo.distance(I, X) + 1e-9), cache_dir, workers)
    res = omega_array(X, max(hyp), workers=workers, ball=ball)
    orbit = orbit_point_counts(X, Y, hyp, eps=eps, workers=workers)
    rows = []
    if args.census:
        if Y != X:
            raise UsageError("--census reports orbit counts of the center itself; drop --Y")
        for r, rec in zip(radii, census(X, hyp, eps=eps, workers=workers)):
            fr = {"frac_hyp": rec.frac_hyp, "frac_par": rec.frac_par, "frac_ell": rec.frac_ell}
            rows.append({"R": r, "units": units.value, "count": rec.omega_count, "variant": "omega", **fr})
            rows.append({"R": r, "units": units.value, "count": rec.orbit_count, "variant": "orbit", **fr})
        fields = CENSUS_FIELDS
    else:
        for r, rh, oc in zip(radii, hyp, orbit):
            rows.append({"R": r, "units": units.value, "count": int(res.within(rh).sum()), "variant": "omega"})
            rows.append({"R": r, "units": units.value, "count": oc, "variant": "orbit"})
        fields = CSV_FIELDS
    man.extra["boundary_hits_at_max_radius"] = res.boundary
    _finish(man, args, render_csv(rows, fields), args.out)
    return EXIT_OK


def cmd_conj(args, cfg: Config, argv: list[str]) -> int:
    phi = parse_matrix(args.phi)
    try:
        pa = PseudoAnosov.of(phi)
    except NotHyperbolicError as exc:
        raise UsageError(str(exc)) from exc
    X = parse_point(args.X)
    Y = parse_point(args.Y) if args.Y else X
    units = _units(args, cfg)
    radii = parse_radii(args.radii)
    A = args.A if args.A is not None else geo.convert(default_A(), Units.HYPERBOLIC, units)
    eps = args.eps if args.eps is not None else cfg.tolerance
    man = RunManifest("conj", argv, phi=matrix_str(phi), X=format_point(X), Y=format_point(Y),
                      units=units.value, radii=radii, A=A)
    man.start()
    q = ConjugacyQuery(pa, X, Y, max(radii), units=units, A=A, eps=eps)
    counts, hits = gamma_profile(q, radii)
    rows = [{"R": r, "units": units.value, "count": c, "variant": "gamma"} for r, c in zip(radii, counts)]
    on_axis = dist_to_axis(X, phi) <= 1e-9 and X == Y
    if on_axis:
        A_hyp = geo.convert(A, units, Units.HYPERBOLIC)
        for r in radii:
            plus, minus = p_set_arrays(phi, X, geo.convert(r, units, Units.HYPERBOLIC), A_hyp)
            rows.append({"R": r, "units": units.value, "count": int(minus.shape[0]), "variant": "p_minus"})
            rows.append({"R": r, "units": units.value, "count": int(plus.shape[0]), "variant": "p_plus"})
    rows.sort(key=lambda row: (row["R"], row["variant"]))
    man.extra["boundary_hits"] = dict(zip(map(str, radii), hits))
    man.extra["lambda_hyp"] = pa.lambda_hyp
    _finish(man, args, render_csv(rows), args.out)
    return EXIT_OK


def cmd_verify(args, cfg: Config, argv: list[str]) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    units = _units(args, cfg)
    A = None if args.A is None else geo.convert(args.A, units, Units.HYPERBOLIC)
    R = None if args.R is None else geo.convert(args.R, units, Units.HYPERBOLIC)
    report = run_suite(args.suite, A=A, R=R)
    man = RunManifest("verify", argv, units=units.value, A=report.params.get("A"))
    man.start()
    _finish(man, args, _json(report.as_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_fit(args, cfg: Config, argv: list[str]) -> int:
    try:
        rows = read_csv(args.csv)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    variants = sorted({r["variant"] for r in rows})
    variant = args.variant or (variants[0] if variants else None)
    picked = [r for r in rows if r["variant"] == variant]
    if not picked:
        raise UsageError(f"no rows with variant {variant!r}; available: {variants}")
    unit_tags = {r["units"] for r in picked}
    if len(unit_tags) != 1:
        raise UsageError("mixed units in one variant")
    series = GrowthSeries(tuple(float(r["R"]) for r in picked), tuple(int(r["count"]) for r in picked),
                          Units.parse(unit_tags.pop()), variant)
    window = None
    if args.window:
        lo, hi = (float(t) for t in args.window.split(","))
        window = (lo, hi)
    try:
        fit = fit_exponent(series, window)
    except InsufficientData as exc:
        raise UsageError(str(exc)) from exc
    out = {"variant": variant, "fit": fit.as_dict(),
           "running_exponent": running_exponent(series), "skipped": skipped_points(series)}
    if series.units is Units.HYPERBOLIC:
        out["slope_teich"] = fit.slope * geo.TEICH_FACTOR
    man = RunManifest("fit", argv, units=series.units.value, radii=list(series.radii))
    man.start()
    _finish(man, args, _json(out), args.out)
    return EXIT_OK


def cmd_constants(args, cfg: Config, argv: list[str]) -> int:
    units = Units.parse(args.units or "teich")
    to_t = lambda v: geo.convert(v, units, Units.TEICHMULLER)
    if args.lam is not None:
        lam_t = to_t(args.lam)
    else:
        lam_t = geo.translation_length(parse_matrix(args.phi), Units.TEICHMULLER)
    A_t = to_t(args.A) if args.A is not None else geo.convert(default_A(), Units.HYPERBOLIC, Units.TEICHMULLER)
    N = args.N if args.N is not None else max_stabilizer_order()
    h = args.h
    L_t = to_t(args.L) if args.L is not None else choose_L(lam_t, A_t, N, h)
    c = paper_constants(lam_t, A_t, L_t, N, h, args.delta)
    out = {"teich": c.as_dict(),
           "hyp": {"lam": geo.convert(lam_t, "teich", "hyp"), "A": geo.convert(A_t, "teich", "hyp"),
                   "L": geo.convert(L_t, "teich", "hyp"), "h": h / geo.TEICH_FACTOR},
           "L_chosen": args.L is None}
    man = RunManifest("constants", argv, units=units.value, A=A_t, L=L_t, N=N, h=h)
    man.start()
    _finish(man, args, _json(out), args.out)
    return EXIT_OK


def cmd_calibrate(args, cfg: Config, argv: list[str]) -> int:
    try:
        res = calibrate_A(args.samples, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    check_seed = args.seed + 1 if args.validate_seed is None else args.validate_seed
    out = {"calibration": res.as_dict(), "validation": validate_A(res.A_hyp, args.samples, check_seed)}
    man = RunManifest("calibrate", argv, A=res.A_hyp, seed=args.seed)
    man.start()
    _finish(man, args, _json(out), args.out)
    return EXIT_OK if out["validation"]["passed"] else EXIT_VERIFY


def cmd_replay(args, cfg: Config, argv: list[str]) -> int:
    """Re-run a recorded command and compare output digests with the manifest."""
    try:
        man = RunManifest.from_json(open(args.manifest_file).read())
    except (OSError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from exc
    recorded = dict(man.outputs)
    code = main(man.argv)
    current = RunManifest.from_json(open(args.manifest_file).read()).outputs
    same = {p: current.get(p) == d for p, d in recorded.items()}
    sys.stdout.write(_json({"exit": code, "outputs": same}))
    return EXIT_OK if code == EXIT_OK and all(same.values()) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modgrowth", description="Orbit and conjugacy growth in the modular group model.")
    p.add_argument("--config", help="key = value config file (default: $MODGROWTH_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--units", choices=[u.value for u in Units], default=None)
        if out:
            sp.add_argument("--out", default=None, help="output file (default stdout)")
            sp.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")

    b = sub.add_parser("ball", help="|Omega_r(X)| and orbit-point counts")
    b.add_argument("--center", required=True)
    b.add_argument("--radius", required=True, help="radius, comma list, or start:stop:step")
    b.add_argument("--Y", default=None, help="orbit point (default: the center)")
    b.add_argument("--eps", type=float, default=None, help="dedup tolerance for irrational points")
    b.add_argument("--census", action="store_true", help="add element-class fractions")
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--cache-dir", default=None)
    common(b)
    b.set_defaults(func=cmd_ball)

    c = sub.add_parser("conj", help="Gamma_R(X, Y, phi) counts")
    c.add_argument("--phi", required=True, help="matrix entries a,b,c,d")
    c.add_argument("--X", default="i")
    c.add_argument("--Y", default=None)
    c.add_argument("--radii", required=True)
    c.add_argument("--A", type=float, default=None, help="contraction constant (default: calibrated)")
    c.add_argument("--eps", type=float, default=None)
    common(c)
    c.set_defaults(func=cmd_conj)

    v = sub.add_parser("verify", help="run an invariant suite; exit 2 on failure")
    v.add_argument("--suite", required=True, help=", ".join(SUITES))
    v.add_argument("--A", type=float, default=None)
    v.add_argument("--R", type=float, default=None)
    common(v)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fit", help="fit a growth exponent to a CSV series")
    f.add_argument("--csv", required=True)
    f.add_argument("--variant", default=None)
    f.add_argument("--window", default=None, help="lo,hi")
    f.add_argument("--units", default=None)
    f.add_argument("--out", default=None)
    f.add_argument("--manifest", default=None)
    f.set_defaults(func=cmd_fit)

    k = sub.add_parser("constants", help="evaluate L, G_L, G_U (Teichmueller units by default)")
    k.add_argument("--phi", default="2,1,1,1")
    k.add_argument("--lam", type=float, default=None)
    k.add_argument("--A", type=float, default=None)
    k.add_argument("--L", type=float, default=None)
    k.add_argument("--N", type=int, default=None)
    k.add_argument("--h", type=float, default=geo.H_TEICH)
    k.add_argument("--delta", type=float, default=1.5)
    common(k)
    k.set_defaults(func=cmd_constants)

    a = sub.add_parser("calibrate", help="calibrate the contraction constant A")
    a.add_argument("--samples", type=int, default=10_000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--validate-seed", type=int, default=None)
    a.add_argument("--out", default=None)
    a.add_argument("--manifest", default=None)
    a.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("replay", help="re-run a manifest and compare digests")
    r.add_argument("manifest_file")
    r.add_argument("--manifest", default=None, help=argparse.SUPPRESS)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        cfg = Config.load(args.config)
        return args.func(args, cfg, argv)
    except (ArithmeticOverflow, OverflowError) as exc:
        print(f"modgrowth: arithmetic overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (UsageError, NotHyperbolicError, OffAxisError, ValueError) as exc:
        print(f"modgrowth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
