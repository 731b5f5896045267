"""Command line interface: validate, torsion, generate, sweep, selftest.

Exit codes: 0 ok, 1 math or policy failure, 2 parse error, 3 spectral cut
collision, 4 infeasible generator parameters.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import config as cfgmod
from . import deform, models
from .bicomplex import laplacian, validate
from .errors import (
    CMTorsionError,
    CutCollisionError,
    FeasibilityError,
    FluxDegreeError,
    MetricError,
    ParityError,
    ValidationError,
)
from .io import DocumentError, cpair, read_complex, report_text, write_complex
from .torsion import default_bases, torsion_truncated

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CUT, EXIT_GEN = 0, 1, 2, 3, 4


def _emit(text, out=None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args):
    return cfgmod.load(
        getattr(args, "config", None),
        rank_tol=getattr(args, "rank_tol", None),
        cluster_tol=getattr(args, "cluster_tol", None),
        validation_tol=getattr(args, "validation_tol", None),
        seed=getattr(args, "seed", None),
        lambdas=getattr(args, "lam", None),
        eps=getattr(args, "fd_eps", None),
        theta=getattr(args, "theta", None),
        output=getattr(args, "format", None),
        threads=getattr(args, "threads", None),
    )


def cmd_validate(args) -> int:
    cfg = _config(args)
    c, _ = read_complex(args.path)
    rep = validate(c, cfg.validation_tol)
    payload = {
        "passed": rep.passed,
        "residuals": rep.residuals,
        "scale": rep.scale,
        "tol": rep.tol,
        "dims": [c.n0, c.n1],
    }
    if cfg.output == "json":
        _emit(report_text("validate", payload, cfg.to_dict()), args.out)
    else:
        lines = [f"dims {c.n0},{c.n1}  tol {rep.tol:g}  scale {rep.scale:.6g}"]
        for k, r in rep.residuals.items():
            flag = "ok" if r <= rep.tol * rep.scale else "FAIL"
            lines.append(f"  {k:<12} {r:.3e}  {flag}")
        lines.append("PASS" if rep.passed else "FAIL")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _nearest(c, lam, count=3):
    ev = np.concatenate([np.linalg.eigvals(x) for x in laplacian(c) if x.size] or [np.zeros(0)])
    order = np.argsort(np.abs(np.abs(ev) - lam))
    return [complex(ev[i]) for i in order[:count]]


def cmd_torsion(args) -> int:
    cfg = _config(args)
    c, registry = read_complex(args.path)
    rep = validate(c, cfg.validation_tol)
    if not rep.passed:
        raise ValidationError(f"complex fails square-zero checks: {rep.failures()}")
    if args.basis:
        if args.basis not in registry:
            raise DocumentError(f"basis {args.basis!r} not in document (have {sorted(registry)})")
        bases = registry[args.basis]
    else:
        bases = default_bases(c)
    lams = cfg.lambdas or [0.0]
    rows = []
    for lam in lams:
        try:
            tv = torsion_truncated(c, lam, bases, cfg.theta, cfg.cluster_tol, cfg.rank_tol)
        except CutCollisionError as exc:
            near = ", ".join(f"{z:.6g}" for z in _nearest(c, lam))
            raise CutCollisionError(f"{exc}; nearest eigenvalues of Delta: {near}", exc.eigenvalue) from exc
        rows.append(
            {
                "lambda": tv.lambda_used,
                "coord": cpair(tv.coord),
                "log_abs": tv.log_abs,
                "phase": tv.phase,
                "tail_factor": cpair(tv.tail_factor),
                "low_coord": cpair(tv.low_coord),
                "coh_basis_id": tv.coh_basis_id,
                "hom_basis_id": tv.hom_basis_id,
            }
        )
    if cfg.output == "json":
        _emit(report_text("torsion", {"values": rows, "theta": cfg.theta}, cfg.to_dict()), args.out)
    else:
        lines = [f"bases: cohomology={rows[0]['coh_basis_id']} homology={rows[0]['hom_basis_id']}  theta={cfg.theta:.6g}"]
        lines.append(f"{'lambda':>12} {'tau':>36} {'(lambda,inf) factor':>36} {'tau [0,lambda]':>36}")
        for r in rows:
            lines.append(
                f"{r['lambda']:>12.6g} {_cstr(r['coord']):>36} {_cstr(r['tail_factor']):>36} {_cstr(r['low_coord']):>36}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cstr(p):
    return f"{p[0]:.12g}{p[1]:+.6g}i"


def cmd_generate(args) -> int:
    if args.model == "torus":
        if args.m is None:
            raise DocumentError("torus needs --m")
        g = models.parse_metric(args.metric or "I", args.m)
        c = models.torus_model(args.m, g, args.flux or {}, args.orientation)
        c = c.with_labels(metric=args.metric or "I")
    elif args.model == "random":
        dims = _ints(args.dims, "dims")
        betti = _ints(args.betti or "0,0", "betti")
        c = models.random_bicomplex(dims, betti, args.profile, args.seed or 0)
    else:
        if not args.source:
            raise DocumentError("dolbeault-wrap needs --from PATH")
        src, _ = read_complex(args.source)
        c = models.dolbeault_wrap(args.p, (src.d_eo, src.d_oe), (src.ds_eo, src.ds_oe))
    text = write_complex(None, c)
    _emit(text, args.out)
    return EXIT_OK


def _ints(text, name):
    try:
        vals = tuple(int(x) for x in str(text).split(","))
    except ValueError as exc:
        raise DocumentError(f"--{name} expects comma separated integers, got {text!r}") from exc
    if len(vals) != 2:
        raise DocumentError(f"--{name} expects two integers")
    return vals


def _grid(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise DocumentError(f"--param expects a:b:n, got {text!r}") from exc
    if n < 0:
        raise DocumentError("--param needs n >= 0")
    return list(np.linspace(a, b, n)) if n != 1 else [a]


def _random_even(rng, n0, n1, scale=0.3):
    n = n0 + n1
    a = np.zeros((n, n), complex)
    for lo, hi in ((0, n0), (n0, n)):
        k = hi - lo
        a[lo:hi, lo:hi] = scale * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / max(math.sqrt(k), 1.0)
    return a


def _family(args, cfg):
    if args.source == "torus":
        m = args.m or 3
        g0 = models.parse_metric(args.metric or "I", m)
        gdot = models.parse_symmetric(args.metric_dir, m) if args.metric_dir else np.diag([1.0] + [0.0] * (m - 1))
        flux = args.flux or "123:1.0"
        if args.family == "metric":
            return deform.torus_metric_family(m, flux, g0, gdot, args.orientation)
        base = models.torus_model(m, g0, flux, args.orientation)
        beta = models.wedge_matrix(m, models.parse_form(args.bform or "12:0.5", m))
        if any(len(k) % 2 for k in models.parse_form(args.bform or "12:0.5", m)):
            raise ParityError("--bform must be an even form")
        return deform.flux_family(base, beta, "both" if args.family == "flux" else "d")
    c, _ = read_complex(args.source)
    rng = np.random.default_rng(cfg.seed)
    gen = _random_even(rng, c.n0, c.n1)
    if args.family == "metric":
        return deform.metric_family(c, gen)
    return deform.flux_family(c, gen, "both" if args.family == "flux" else "d")


def cmd_sweep(args) -> int:
    cfg = _config(args)
    fam = _family(args, cfg)
    grid = _grid(args.param)
    lam = cfg.lambdas[0] if cfg.lambdas else None
    eps = cfg.eps[0]
    rows = deform.variation_report(fam, grid, lam, eps, cfg.theta, cfg.threads)
    torus = isinstance(fam, deform.TorusMetricFamily)
    rate_key = "predicted" if args.rate == "lemma" else "exact_rate"
    breaches = []
    taus = []
    for r in rows:
        if r["error"]:
            breaches.append(f"t={r['t']:.6g}: {r['error']}")
            continue
        bound = 10 * eps ** 2 * max(1.0, abs(r[rate_key]))
        r["bound"] = bound
        if abs(r["fd"] - r[rate_key]) > bound:
            breaches.append(f"t={r['t']:.6g}: |fd - {args.rate}| = {abs(r['fd'] - r[rate_key]):.3e} > {bound:.1e}")
        if torus and abs(r["full_rate"]) > args.full_tol:
            breaches.append(f"t={r['t']:.6g}: full-torsion rate {abs(r['full_rate']):.3e} > {args.full_tol:g}")
    if torus and grid:
        for t in grid:
            try:
                ct = fam.at(t)
                cut = lam if lam is not None else deform.top_cut(ct)
                taus.append(torsion_truncated(ct, cut, fam.reference_bases(t)).coord)
            except CMTorsionError as exc:
                breaches.append(f"t={t:.6g}: {type(exc).__name__}: {exc}")
        if taus:
            dev = max(abs(z - taus[0]) / abs(taus[0]) for z in taus)
            if dev > args.full_tol:
                breaches.append(f"full torsion varies along the path by {dev:.3e} (relative)")
    payload = {
        "family": fam.kind,
        "transport": fam.transport_name,
        "rate_policy": args.rate,
        "eps": eps,
        "lambda": lam,
        "rows": [{k: (cpair(v) if isinstance(v, complex) else v) for k, v in r.items()} for r in rows],
        "tau_along_path": [cpair(z) for z in taus],
        "breaches": breaches,
    }
    if cfg.output == "json":
        _emit(report_text("sweep", payload, cfg.to_dict()), args.out)
    else:
        lines = [f"family {fam.kind}; transport: {fam.transport_name}; eps {eps:g}; policy: {args.rate}"]
        lines.append(f"{'t':>10} {'predicted':>24} {'exact':>24} {'fd':>24} {'|fd-pred|':>10} {'full rate':>24} {'local resid':>24}")
        for r in rows:
            if r["error"]:
                lines.append(f"{r['t']:>10.4g}  error: {r['error']}")
                continue
            lines.append(
                f"{r['t']:>10.4g} {_c(r['predicted']):>24} {_c(r['exact_rate']):>24} {_c(r['fd']):>24} "
                f"{r['abs_mismatch']:>10.2e} {_c(r['full_rate']):>24} {_c(r['local_residual']):>24}"
            )
        if taus:
            lines.append(f"full torsion along path: {_c(taus[0])} ... {_c(taus[-1])}")
        lines.extend(f"BREACH {b}" for b in breaches)
        lines.append("PASS" if not breaches else "FAIL")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if not breaches else EXIT_FAIL


def _c(z):
    return f"{z.real:.4e}{z.imag:+.2e}i"


def cmd_selftest(args) -> int:
    from . import selftest

    try:
        outcomes = selftest.run(args.suite, args.tol, args.seed or 0, args.seeds)
    except KeyError as exc:
        raise DocumentError(str(exc.args[0])) from exc
    suites = {}
    for o in outcomes:
        suites.setdefault(o.suite, []).append(o)
    failed = [o for o in outcomes if not o.passed]
    for name, outs in suites.items():
        ok = sum(o.passed for o in outs)
        print(f"{name:<10} {ok}/{len(outs)} passed")
    for o in failed[:10]:
        tol = f" --tol {args.tol:g}" if args.tol is not None else ""
        print(f"FAIL {o.suite}.{o.check} residual {o.residual:.3e} > {o.bound:.1e}; "
              f"reproduce: cmtorsion selftest --suite {o.suite} --seed {o.seed} --seeds 1{tol}")
    if len(failed) > 10:
        print(f"... {len(failed) - 10} more failures")
    return EXIT_OK if not failed else EXIT_FAIL


def _common(p):
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--format", choices=("table", "json"), help="output format")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--rank-tol", dest="rank_tol", type=float)
    p.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    p.add_argument("--validation-tol", dest="validation_tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmtorsion", description="Cappell-Miller torsion of bi-graded complexes")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", help="check the square-zero identities of a document")
    p.add_argument("path")
    _common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("torsion", help="torsion coordinate of a document")
    p.add_argument("path")
    p.add_argument("--lambda", dest="lam", type=float, action="append", help="spectral cut (repeatable)")
    p.add_argument("--basis", help="named basis from the document registry")
    p.add_argument("--theta", type=float, help="Agmon angle in (0, 2pi)")
    _common(p)
    p.set_defaults(func=cmd_torsion)

    p = sub.add_parser("generate", help="write a model complex as a document")
    p.add_argument("model", choices=("torus", "random", "dolbeault-wrap"))
    p.add_argument("--m", type=int)
    p.add_argument("--flux", help='odd form, e.g. "123:2.0,145:1.0"')
    p.add_argument("--metric", help='"I", diagonal "1,2,1" or rows "a,b;c,d"')
    p.add_argument("--orientation", type=int, default=1, choices=(1, -1))
    p.add_argument("--dims", help="n0,n1")
    p.add_argument("--betti", help="b0,b1")
    p.add_argument("--profile", default="generic", choices=models.PROFILES)
    p.add_argument("--seed", type=int)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--from", dest="source")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="finite-difference check of a deformation family")
    p.add_argument("source", help='document path, or "torus"')
    p.add_argument("--family", choices=("metric", "flux", "flux-d"), default="metric")
    p.add_argument("--param", default="0:0.5:6", help="grid a:b:n")
    p.add_argument("--fd-eps", dest="fd_eps", type=float, action="append")
    p.add_argument("--lambda", dest="lam", type=float, action="append")
    p.add_argument("--theta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--rate", choices=("lemma", "exact"), default="lemma",
                   help="compare fd against the lemma coefficient or the exact conjugation-law rate")
    p.add_argument("--full-tol", dest="full_tol", type=float, default=1e-6)
    p.add_argument("--m", type=int)
    p.add_argument("--flux")
    p.add_argument("--metric")
    p.add_argument("--metric-dir", dest="metric_dir", help="direction of the metric path g(u) = g0 + u*dir")
    p.add_argument("--bform", help="even form B for torus flux families")
    p.add_argument("--orientation", type=int, default=1, choices=(1, -1))
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run the invariant suites")
    p.add_argument("--suite", action="append")
    p.add_argument("--tol", type=float, help="override every tolerance")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=int, default=8)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CutCollisionError as exc:
        print(f"spectral cut error: {exc}", file=sys.stderr)
        return EXIT_CUT
    except (FeasibilityError, FluxDegreeError, MetricError, ParityError) as exc:
        print(f"infeasible generator parameters: {exc}", file=sys.stderr)
        return EXIT_GEN
    except (CMTorsionError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
