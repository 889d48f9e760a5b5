"""Command-line interface.

Subcommands: solve, resonances, certify, identity-check, blowup, field.
Flags may come from a flat `key = value` config file (--config); explicit
flags override the file. Outputs are deterministic for a fixed config and
seed: CSV with 17-significant-digit floats, JSON reports, or binary PGM
(P5) images, each carrying a provenance header (version, config echo,
seed — no timestamps).

Exit codes: 0 success, 2 usage/validation, 3 numerical accuracy,
4 theorem falsification / invariant violation.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import __version__, certify as ct, disc_solver as ds, morawetz as mw
from . import resonances as rsn
from .errors import (AccuracyLossError, FalsificationError, HelmdiscError,
                     InvariantViolationError, ValidationError)

FMT = "{:.17g}"


def _f(x):
    return FMT.format(float(x))


def _provenance_pairs(args):
    # output paths are not scientific configuration: outputs must be
    # bit-identical for the same config and seed regardless of destination
    skip = {"func", "config", "out", "modes_out"}
    pairs = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        val = getattr(args, key)
        if val is None:
            continue
        pairs.append((key, val))
    return pairs


def _prov_lines(args):
    cfg = " ".join(f"{k}={v}" for k, v in _provenance_pairs(args))
    return [f"helmdisc {__version__}", f"command: {args.command}", f"config: {cfg}",
            f"seed: {getattr(args, 'seed', 0)}"]


def _write_csv(path, args, header, rows):
    lines = [f"# {ln}" for ln in _prov_lines(args)]
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, bool):
                cells.append("1" if v else "0")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(_f(v))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_default(o):
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON-serialisable: {type(o)}")


def _write_json(path, args, payload):
    doc = {"provenance": dict(_provenance_pairs(args))}
    doc["provenance"]["tool"] = f"helmdisc {__version__}"
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_pgm(path, args, image):
    """8-bit binary PGM, linear scaling to the grid maximum."""
    mx = float(np.max(image))
    scale = 255.0 / mx if mx > 0 else 0.0
    data = np.clip(np.rint(image * scale), 0, 255).astype(np.uint8)
    header = "P5\n"
    for ln in _prov_lines(args):
        header += f"# {ln}\n"
    header += f"{data.shape[1]} {data.shape[0]}\n255\n"
    payload = header.encode("ascii") + data.tobytes()
    if path is None:
        sys.stdout.buffer.write(payload)
    else:
        with open(path, "wb") as fh:
            fh.write(payload)


def _params_from(args) -> ds.Params:
    return ds.Params(n_i=args.ni, n_o=args.no, a_i=args.ai, a_o=args.ao,
                     A_D=args.AD, A_N=args.AN, k=args.k, R=args.R)


def _modal_source(args) -> ds.ModalSource:
    if args.source == "modal-j":
        beta = args.beta if args.beta is not None else float(args.k)
        return ds.ModalSource(nu=args.mode, interior_volume=(args.amp, beta))
    if args.source == "boundary":
        return ds.ModalSource(nu=args.mode, g_D_coeff=args.gd, g_N_coeff=args.gn)
    raise ValidationError(f"source {args.source!r} is not a modal source")


def cmd_solve(args):
    p = _params_from(args)
    if args.source == "plane":
        numax = args.numax or ds.recommended_nu_max(p, p.R)
        sols = ds.solve_plane_wave(p, args.amp, args.angle, numax)
    elif args.source == "none":
        sols = [ds.solve_modal(p, ds.ModalSource(nu=args.mode))]
    else:
        sols = [ds.solve_modal(p, _modal_source(args))]
    rep = ds.norms(p, sols, nodes_per_panel=args.nodes)
    payload = {"norms": {
        "l2_int": rep.l2_int, "h1semi_int": rep.h1semi_int,
        "l2_ext": rep.l2_ext, "h1semi_ext": rep.h1semi_ext,
        "weighted_energy": rep.weighted_energy,
        "quadrature_nodes": rep.quadrature_nodes,
        "doubling_delta": rep.doubling_delta,
    }}
    _write_json(args.out, args, payload)
    if args.modes_out:
        rows = []
        for s in sols:
            cp, beta = (s.particular if s.particular else (0.0, 0.0))
            rows.append((s.nu, s.A_int.real, s.A_int.imag, s.B_ext.real, s.B_ext.imag,
                         complex(cp).real, complex(cp).imag, beta, s.cond_2x2))
        _write_csv(args.modes_out, args,
                   ["nu", "re_A", "im_A", "re_B", "im_B", "re_cp", "im_cp", "beta", "cond"],
                   rows)
    return 0


def cmd_resonances(args):
    p = _params_from(args)
    scan = rsn.scan_strip(p, range(args.numin, args.numax + 1), range(1, args.mmax + 1))
    rows = [(r.nu, r.m, r.k.real, r.k.imag, r.residual, r.verified, r.newton_iters)
            for r in scan.resonances]
    _write_csv(args.out, args,
               ["nu", "m", "re_k", "im_k", "residual", "verified", "newton_iters"], rows)
    if scan.errors:
        for nu, m, msg in scan.errors:
            print(f"warning: nu={nu}: {msg}", file=sys.stderr)
    return 0


def cmd_certify(args):
    p = _params_from(args)
    src = _modal_source(args) if args.source != "none" else ds.ModalSource(nu=args.mode)
    if args.sweep:
        ks = _parse_sweep(args.sweep)
        rows = []
        for k in ks:
            pk = ds.Params(n_i=p.n_i, n_o=p.n_o, a_i=p.a_i, a_o=p.a_o, A_D=p.A_D,
                           A_N=p.A_N, k=k, R=p.R)
            src_k = src
            if args.source == "modal-j" and args.beta is None:
                # default radial wavenumber tracks the sweep point
                src_k = ds.ModalSource(nu=args.mode, interior_volume=(args.amp, k))
            rep = ct.certify(pk, src_k, args.which, nodes_per_panel=args.nodes)
            rows.append((k, rep.lhs_value, rep.rhs_value, rep.margin))
        _write_csv(args.out, args, ["k", "lhs", "rhs", "margin"], rows)
        return 0
    rep = ct.certify(p, src, args.which, nodes_per_panel=args.nodes)
    payload = {"bound": {
        "which": rep.which, "lhs": rep.lhs_value, "rhs": rep.rhs_value,
        "margin": rep.margin, "certifying": rep.certifying,
        "conditions": {
            "cond_3_2": rep.verdict.cond_3_2, "cond_3_5": rep.verdict.cond_3_5,
            "cond_5_1": rep.verdict.cond_5_1, "G": rep.verdict.G,
            "slack_3_2": list(rep.verdict.slack_3_2),
        },
        "constants_breakdown": rep.constants_breakdown,
    }}
    _write_json(args.out, args, payload)
    return 0


def _parse_sweep(spec):
    if ":" in spec:
        lo, hi, n = spec.split(":")
        return list(np.linspace(float(lo), float(hi), int(n)))
    return [float(t) for t in spec.split(",") if t]


def cmd_identity_check(args):
    rng = np.random.default_rng(args.seed)
    n_pw = args.trials
    n_int = max(1, args.trials // 10)
    out = {}
    viol = []

    def run_pointwise(name, fn):
        worst = 0.0
        vals = []
        for _ in range(n_pw):
            d = 2 if rng.random() < 0.7 else 3
            v = mw.TestField.random(rng, d=d)
            pts = rng.uniform(-2.0, 2.0, size=(8, d))
            pts = pts[np.linalg.norm(pts, axis=1) > 1e-2]
            r = fn(v, pts, rng)
            vals.append(r.rel_residual)
            worst = max(worst, r.rel_residual)
        out[name] = {"max_rel_residual": worst,
                     "mean_rel_residual": float(np.mean(vals)), "trials": n_pw}
        if worst > 1e-11:
            viol.append(name)

    run_pointwise("morawetz_4_2", lambda v, pts, rg: mw.check_morawetz_pointwise(
        v, rg.uniform(0.3, 3), rg.uniform(0.3, 3), rg.uniform(0.3, 3),
        rg.normal(), rg.normal(), pts))
    run_pointwise("morawetz_ludwig_4_6", lambda v, pts, rg: mw.check_morawetz_ludwig(
        v, rg.uniform(0.3, 3), rg.normal(), pts))

    worst = 0.0
    for _ in range(n_int):
        v = mw.TestField.random(rng, d=2)
        dom = ("disc", rng.uniform(0.5, 1.5)) if rng.random() < 0.5 else \
            ("annulus", rng.uniform(0.5, 1.0), rng.uniform(1.5, 2.5))
        r = mw.check_morawetz_integrated(v, dom, rng.uniform(0.3, 3), rng.uniform(0.3, 3),
                                         rng.uniform(0.3, 3), rng.normal(), rng.normal())
        worst = max(worst, r.rel_residual)
    out["morawetz_integrated_4_4"] = {"max_rel_residual": worst, "trials": n_int}
    if worst > 1e-9:
        viol.append("morawetz_integrated_4_4")

    worst_val = -math.inf
    for _ in range(n_int):
        nm = int(rng.integers(1, 11))
        coeffs = {int(nu): complex(rng.normal(), rng.normal())
                  for nu in rng.integers(-10, 11, nm)}
        val = mw.check_radiating_inequality(coeffs, rng.uniform(0.3, 4.0),
                                            rng.uniform(1.0, 4.0), R0=0.5)
        worst_val = max(worst_val, val)
    out["radiating_4_7"] = {"max_value": worst_val, "trials": n_int}

    worst_margin = math.inf
    for _ in range(n_int):
        v = mw.TestField.random(rng, d=2)
        eps = float(rng.choice([0.1, 1.0, 10.0]))
        worst_margin = min(worst_margin, mw.check_trace_inequality(v, eps))
    out["trace_5_4"] = {"min_margin": worst_margin, "trials": n_int}

    _write_json(args.out, args, {"identity_suite": out, "violations": viol})
    if viol:
        raise InvariantViolationError(f"identity suite violations: {viol}")
    return 0


def cmd_blowup(args):
    rows, errors = ct.blowup_sweep(args.ni, args.AN, range(args.numin, args.numax + 1),
                                   R=args.R, nodes_per_panel=args.nodes)
    for nu, msg in errors:
        print(f"warning: nu={nu}: {msg}", file=sys.stderr)
    _write_csv(args.out, args,
               ["nu", "k", "l2_int_weighted", "h1_int", "l2_ext_weighted",
                "h1_ext", "combined"],
               [(r.nu, r.k, r.l2_int_weighted, r.h1_int, r.l2_ext_weighted,
                 r.h1_ext, r.combined) for r in rows])
    return 0


def cmd_field(args):
    p = _params_from(args)
    numax = args.numax or ds.recommended_nu_max(p, _max_radius(args.extent))
    sols = ds.solve_plane_wave(p, args.amp, args.angle, numax,
                               r_eval=_max_radius(args.extent))
    ext = _parse_extent(args.extent)
    x, y, u = ds.field_grid(p, sols, extent=ext, nx=args.res, ny=args.res)
    if args.format == "pgm":
        _write_pgm(args.out, args, np.abs(u))
        return 0
    rows = []
    for iy in range(y.size):
        for ix in range(x.size):
            val = u[iy, ix]
            rows.append((x[ix], y[iy], val.real, val.imag, abs(val)))
    _write_csv(args.out, args, ["x", "y", "re_u", "im_u", "abs_u"], rows)
    return 0


def _parse_extent(spec):
    parts = [float(t) for t in spec.split(":")]
    if len(parts) != 4 or parts[0] >= parts[1] or parts[2] >= parts[3]:
        raise ValidationError("extent must be xmin:xmax:ymin:ymax")
    return tuple(parts)


def _max_radius(spec):
    xmin, xmax, ymin, ymax = _parse_extent(spec)
    return max(math.hypot(x, y) for x in (xmin, xmax) for y in (ymin, ymax))


def _load_config(path):
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"malformed config line: {raw.strip()!r}")
            key, val = (t.strip() for t in line.split("=", 1))
            values[key] = val
    return values


def _add_common(sp):
    sp.add_argument("--config", default=None, help="flat key = value config file")
    sp.add_argument("--ni", type=float, default=None)
    sp.add_argument("--no", type=float, default=None)
    sp.add_argument("--ai", type=float, default=None)
    sp.add_argument("--ao", type=float, default=None)
    sp.add_argument("--AD", type=float, default=None)
    sp.add_argument("--AN", type=float, default=None)
    sp.add_argument("--k", type=float, default=None)
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--mode", type=int, default=None, help="angular mode nu")
    sp.add_argument("--mmax", type=int, default=None)
    sp.add_argument("--numax", type=int, default=None)
    sp.add_argument("--numin", type=int, default=None)
    sp.add_argument("--source", choices=["modal-j", "boundary", "plane", "none"],
                    default=None)
    sp.add_argument("--angle", type=float, default=None, help="plane-wave direction")
    sp.add_argument("--amp", type=complex, default=None, help="source amplitude")
    sp.add_argument("--beta", type=float, default=None, help="radial wavenumber of f_i")
    sp.add_argument("--gd", type=complex, default=None, help="g_D modal coefficient")
    sp.add_argument("--gn", type=complex, default=None, help="g_N modal coefficient")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--nodes", type=int, default=None, help="quadrature nodes per panel")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=["csv", "json", "pgm"], default=None)


_DEFAULTS = dict(ni=1.0, no=1.0, ai=1.0, ao=1.0, AD=1.0, AN=1.0, k=1.0, R=2.0,
                 mode=0, mmax=1, numax=0, numin=0, source="none", angle=0.0,
                 amp=1.0 + 0.0j, gd=0.0j, gn=0.0j, seed=0, nodes=64, format="csv",
                 out=None, beta=None, trials=1000, which="3.1", sweep=None,
                 res=200, extent="-2:2:-2:2", modes_out=None)

_CASTS = dict(ni=float, no=float, ai=float, ao=float, AD=float, AN=float, k=float,
              R=float, mode=int, mmax=int, numax=int, numin=int, angle=float,
              amp=complex, gd=complex, gn=complex, seed=int, nodes=int, beta=float,
              trials=int, res=int)


def _fill(args):
    cfg = {}
    if args.config:
        cfg = _load_config(args.config)
    for key, default in _DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            if key in cfg:
                cast = _CASTS.get(key, str)
                setattr(args, key, cast(cfg[key]))
            else:
                setattr(args, key, default)
    unknown = set(cfg) - set(_DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return args


def build_parser():
    ap = argparse.ArgumentParser(prog="helmdisc",
                                 description="Penetrable-disc Helmholtz transmission toolkit")
    ap.add_argument("--version", action="version", version=f"helmdisc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve one modal/plane-wave problem, report norms")
    _add_common(sp)
    sp.add_argument("--modes-out", default=None, help="per-mode coefficient CSV path")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("resonances", help="scan resonances k_{nu,m}")
    _add_common(sp)
    sp.set_defaults(func=cmd_resonances)

    sp = sub.add_parser("certify", help="certify a wavenumber-explicit bound")
    _add_common(sp)
    sp.add_argument("--which", choices=["3.1", "3.2", "5.1"], default=None)
    sp.add_argument("--sweep", default=None, help="k list 'a,b,c' or 'lo:hi:n'")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("identity-check", help="randomized multiplier-identity suite")
    _add_common(sp)
    sp.add_argument("--trials", type=int, default=None)
    sp.set_defaults(func=cmd_identity_check)

    sp = sub.add_parser("blowup", help="norm growth along k = Re k_{nu,1}")
    _add_common(sp)
    sp.set_defaults(func=cmd_blowup)

    sp = sub.add_parser("field", help="plane-wave scattered field on a grid")
    _add_common(sp)
    sp.add_argument("--res", type=int, default=None, help="grid resolution per axis")
    sp.add_argument("--extent", default=None, help="xmin:xmax:ymin:ymax")
    sp.set_defaults(func=cmd_field)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _fill(args)
        return args.func(args)
    except (FalsificationError, InvariantViolationError) as exc:
        print(f"falsification: {exc}", file=sys.stderr)
        return 4
    except AccuracyLossError as exc:
        print(f"accuracy: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HelmdiscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
