"""Command-line front end.

Results go to stdout as JSON (or CSV for ``count --table``), diagnostics to
stderr.  Exit codes: 0 success, 2 domain or usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import combinatorics as comb
from . import portraits as por
from .dynamics import CubicMap
from .errors import DomainError, NumericFailure
from .exact_angles import (Angle, co_period, coperiodic_angles, cycle_of, grand_orbit_id,
                           period_under_tripling, periodic_angles, triad_of, twin)

DEFAULTS: dict[str, Any] = {
    "q": None,
    "p": None,
    "region": None,
    "phi": None,
    "theta": None,
    "a": None,
    "v": None,
    "gmin": 1e-5,
    "gmax": 3.0,
    "tol": None,
    "res": 512,
    "window": None,
    "out": None,
    "threads": os.cpu_count() or 1,
}

_INT_KEYS = {"q", "p", "res", "threads"}
_FLOAT_KEYS = {"gmin", "gmax", "tol"}


# --- formatting -------------------------------------------------------------

def _clean(x: Any) -> Any:
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, Angle):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "to_json"):
        return _clean(x.to_json())
    if hasattr(x, "item"):  # numpy scalars
        return _clean(x.item())
    return str(x)


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False)


def _emit(obj: Any, opts: argparse.Namespace) -> None:
    text = dumps(obj) + "\n"
    if opts.out and not _is_image(opts.out):
        Path(opts.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _is_image(path: str) -> bool:
    return Path(path).suffix.lower() in (".png", ".ppm", ".svg")


# --- option handling --------------------------------------------------------

def read_config(path: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment; quotes around values are dropped."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise DomainError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val.strip("\"'")
    return out


def _coerce(key: str, val: Any) -> Any:
    if val is None or not isinstance(val, str):
        return val
    try:
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
    except ValueError:
        raise DomainError(f"--{key}: cannot parse {val!r}") from None
    return val


def resolve(opts: argparse.Namespace) -> argparse.Namespace:
    """Flags override the config file, which overrides the defaults."""
    conf = read_config(opts.config) if opts.config else {}
    for key, default in DEFAULTS.items():
        val = getattr(opts, key, None)
        if val is None:
            val = conf.get(key, default)
        setattr(opts, key, _coerce(key, val))
    if opts.threads is not None and opts.threads < 1:
        raise DomainError("--threads must be at least 1")
    if opts.res is not None and opts.res < 1:
        raise DomainError("--res must be at least 1")
    for key in ("gmin", "gmax"):
        if not getattr(opts, key) > 0:
            raise DomainError(f"--{key} must be positive")
    return opts


def parse_angle(text: str) -> Angle:
    if "/" not in text:
        raise DomainError(f"angles are written num/den, got {text!r}")
    try:
        return Angle.parse(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"bad angle {text!r}") from None


def _angles(text: Optional[str]) -> list[Angle]:
    return [parse_angle(s) for s in text.split(",") if s.strip()] if text else []


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise DomainError(f"bad complex number {text!r}") from None


def parse_window(text: str) -> tuple[complex, float]:
    """'cx,cy,width' as plane coordinates."""
    try:
        cx, cy, w = (float(s) for s in text.split(","))
    except ValueError:
        raise DomainError(f"window is cx,cy,width, got {text!r}") from None
    if not w > 0:
        raise DomainError("window width must be positive")
    return complex(cx, cy), w


def _need(opts: argparse.Namespace, *keys: str) -> None:
    missing = [k for k in keys if getattr(opts, k) is None]
    if missing:
        raise DomainError(f"{opts.command} needs " + ", ".join("--" + k for k in missing))


def _map(opts: argparse.Namespace) -> CubicMap:
    _need(opts, "a", "v")
    return CubicMap(parse_complex(opts.a), parse_complex(opts.v))


def _region(opts: argparse.Namespace):
    from .parameter import region_named

    _need(opts, "region", "phi")
    return region_named(opts.region), parse_angle(opts.phi)


# --- commands ---------------------------------------------------------------

def cmd_angle(opts: argparse.Namespace) -> None:
    op, args = opts.op, opts.args
    if op == "list":
        _need(opts, "q")
        kind = args[0] if args else "coperiodic"
        if kind not in ("periodic", "coperiodic"):
            raise DomainError("angle list takes periodic or coperiodic")
        angles = periodic_angles(opts.q) if kind == "periodic" else coperiodic_angles(opts.q)
        _emit({"q": opts.q, "kind": kind, "count": len(angles), "angles": angles}, opts)
        return
    if len(args) != 1:
        raise DomainError(f"angle {op} takes exactly one angle")
    theta = parse_angle(args[0])
    if op == "coperiod":
        c = co_period(theta)
        sys.stdout.write(("none" if c is None else str(c)) + "\n")
    elif op == "period":
        c = period_under_tripling(theta)
        sys.stdout.write(("none" if c is None else str(c)) + "\n")
    elif op == "triad":
        t = triad_of(theta)
        _emit({"theta": t.theta, "theta_q": t.theta_q, "twin": t.theta_hat}, opts)
    elif op == "twin":
        sys.stdout.write(str(twin(theta)) + "\n")
    elif op in ("cycle", "orbit"):
        q = opts.q or co_period(theta)
        if q is None:
            raise DomainError(f"{theta} is not co-periodic; pass --q")
        if op == "cycle":
            _emit({"theta": theta, "q": q, "cycle": cycle_of(theta, q)}, opts)
        else:
            _emit({"theta": theta, "q": q, "grand_orbit": grand_orbit_id(theta, q).label}, opts)
    else:
        raise DomainError(f"unknown angle operation {op!r}")


def _portrait_text(text: str, q: int) -> por.OrbitPortrait:
    """'1~3,2~6' style relations (numerators over 3^q - 1)."""
    classes = []
    for cls in text.replace("≃", "~").split(","):
        cls = cls.strip()
        if cls:
            try:
                classes.append(tuple(int(n) for n in cls.split("~")))
            except ValueError:
                raise DomainError(f"bad portrait class {cls!r}") from None
    return por.OrbitPortrait(q, tuple(classes))


def _model_json(m: por.LocalModel) -> dict:
    return {
        "q": m.q,
        "angles": list(m.angles),
        "shift": list(m.shift),
        "faces": [{"portrait": str(f), "classes": f.to_json()["classes"]} for f in m.faces],
        # face i fills the sector from ray i to ray i+1, so ray i parts faces i-1 and i
        "edges": [
            {"angle": m.angles[i],
             "kind": por.classify_edge(m.faces[i - 1], m.faces[i % len(m.faces)]).value}
            for i in range(len(m.angles))
        ],
    }


def cmd_portrait(opts: argparse.Namespace) -> None:
    op, args = opts.op, opts.args
    models = {"two-ray": (2, por.two_ray_faces), "three-ray": (3, por.three_ray_faces),
              "four-ray": (4, por.four_ray_faces)}
    if op in models:
        n, fn = models[op]
        if len(args) != n:
            raise DomainError(f"portrait {op} takes {n} angles")
        angles = [parse_angle(s) for s in args]
        q = opts.q or co_period(angles[0])
        if q is None:
            raise DomainError(f"{angles[0]} is not co-periodic")
        _emit(_model_json(fn(*angles, q)), opts)
        return
    _need(opts, "q")
    ps = [_portrait_text(s, opts.q) for s in args]
    if op == "formal":
        _emit({"portraits": [str(P) for P in ps], "formal": [por.is_formal(P) for P in ps]}, opts)
    elif op == "amalgamate":
        P = por.amalgamate(*ps)
        _emit({"portrait": str(P), "classes": P.to_json()["classes"],
               "formal": por.is_formal(P)}, opts)
    elif op == "edge":
        if len(ps) != 2:
            raise DomainError("portrait edge takes the two side portraits")
        _emit({"kind": por.classify_edge(*ps).value}, opts)
    else:
        raise DomainError(f"unknown portrait operation {op!r}")


def cmd_count(opts: argparse.Namespace) -> None:
    if opts.table:
        sys.stdout.write(comb.tables_csv())
        return
    if opts.p is None and opts.q is not None:
        per, coper = comb.angle_counts(opts.q)
        _emit({"q": opts.q, "periodic": per, "coperiodic": coper}, opts)
        return
    _need(opts, "p")
    if opts.q is None:
        s = comb.curve_stats(opts.p)
        _emit({"p": s.p, "d_p": s.d_p, "N_p": s.N_p, "chi": s.chi, "genus": s.genus}, opts)
        return
    row = comb.tess_stats(opts.q, opts.p).to_json()
    row["euler_holds"] = comb.tess_stats(opts.q, opts.p).euler_holds()
    _emit(row, opts)


def cmd_centers(opts: argparse.Namespace) -> None:
    from .parameter import CenterSpec, expected_center_count, find_centers

    _need(opts, "p")
    spec = CenterSpec.parse(opts.kind)
    centers = find_centers(opts.p, spec)
    _emit({"p": opts.p, "kind": opts.kind, "count": len(centers),
           "expected": expected_center_count(opts.p, spec), "centers": centers}, opts)


def _image_out(opts: argparse.Namespace, arr, job) -> None:
    from .render import overlays_svg, save_image

    if not opts.out:
        raise DomainError(f"{opts.command} needs --out FILE (.png, .ppm or .svg)")
    if Path(opts.out).suffix.lower() == ".svg":
        Path(opts.out).write_text(overlays_svg(job), encoding="utf-8")
    else:
        save_image(arr, opts.out)
    print(f"wrote {opts.out}", file=sys.stderr)


def cmd_julia(opts: argparse.Namespace) -> None:
    from .render import ImageJob, Julia, julia_image, marked_points, ray_overlay

    F = _map(opts)
    center, width = parse_window(opts.window) if opts.window else (0j, 4.0)
    palette = [(220, 30, 30), (20, 60, 200), (20, 140, 40), (150, 40, 160)]
    overlays = [ray_overlay(F, th, palette[i % len(palette)], G_min=opts.gmin)
                for i, th in enumerate(_angles(opts.theta))]
    job = ImageJob(Julia(F), center, width, (opts.res, opts.res),
                   overlays=tuple(overlays) + tuple(marked_points(F)), angular=opts.angular)
    _image_out(opts, julia_image(job), job)


def cmd_param(opts: argparse.Namespace) -> None:
    from .parameter import trace_parameter_ray
    from .render import ImageJob, Parameter, parameter_image, parameter_ray_overlay

    _need(opts, "p")
    if opts.p not in (1, 2):
        raise DomainError("parameter pictures exist for p = 1 and p = 2")
    center, width = (parse_window(opts.window) if opts.window
                     else (0j, 3.0 if opts.p == 1 else 2.5))
    overlays = []
    if opts.phi:
        if opts.p == 1:
            regions = ["s1"]
        else:
            regions = [opts.region] if opts.region else ["outer", "inner"]
        for name in regions:
            for phi in _angles(opts.phi):
                ray = trace_parameter_ray(name, phi, opts.gmax, opts.gmin)
                overlays.append(parameter_ray_overlay([t for _, t in ray.samples]))
    job = ImageJob(Parameter(opts.p), center, width, (opts.res, opts.res),
                   overlays=tuple(overlays))
    _image_out(opts, parameter_image(job), job)


def cmd_ray(opts: argparse.Namespace) -> None:
    from .rays import trace_dynamic_ray

    F = _map(opts)
    _need(opts, "theta")
    out = []
    for th in _angles(opts.theta):
        ray = trace_dynamic_ray(F, th, G_min=opts.gmin)
        d = ray.to_json()
        if not opts.samples:
            d.pop("samples")
        d["endpoint"] = ray.endpoint
        out.append(d)
    _emit({"map": F, "rays": out}, opts)


def cmd_pray(opts: argparse.Namespace) -> None:
    from .parameter import classify_landing, trace_parameter_ray

    region, phi = _region(opts)
    ray = trace_parameter_ray(region, phi, opts.gmax, opts.gmin)
    kw = {} if opts.tol is None else {"land_tol": opts.tol}
    try:
        ray.landing = classify_landing(ray, **kw)
    except NumericFailure as exc:
        raise type(exc)(f"{exc} (landing needs a ray traced to small potential; "
                        f"try a smaller --gmin than {opts.gmin:g})") from exc
    d = ray.to_json()
    if not opts.samples:
        d["samples"] = d["samples"][-1:]
    _emit(d, opts)


def cmd_tess(opts: argparse.Namespace) -> None:
    from .tessellation import build_full, to_svg

    _need(opts, "q", "p")
    if opts.p not in (1, 2):
        raise DomainError("tessellations are built on the charts of S_1 and S_2")
    T = build_full(opts.q, opts.p, G_min=opts.gmin, threads=opts.threads)
    for note in T.notes:
        print(note, file=sys.stderr)
    if opts.out and Path(opts.out).suffix.lower() == ".svg":
        Path(opts.out).write_text(to_svg(T), encoding="utf-8")
        print(f"wrote {opts.out}", file=sys.stderr)
        _emit_to_stdout(T.to_json()["counts"] | {"edge_kinds": T.edge_kind_counts()})
    else:
        _emit(T, opts)


def _emit_to_stdout(obj: Any) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def cmd_knead(opts: argparse.Namespace) -> None:
    from .rays import kneading_by_flood_fill, kneading_by_wall

    if opts.a is None and opts.region is not None:
        from .parameter import chart, trace_parameter_ray

        region, phi = _region(opts)
        ray = trace_parameter_ray(region, phi, opts.gmax, max(opts.gmin, 0.05))
        F = chart(region.p)(ray.endpoint)
    else:
        F = _map(opts)
    p = opts.p or 2
    wall = kneading_by_wall(F, p)
    flood = kneading_by_flood_fill(F, p, res=opts.res)
    _emit({"map": F, "p": p, "wall": str(wall), "flood_fill": str(flood),
           "agree": wall == flood}, opts)


def cmd_probe(opts: argparse.Namespace) -> None:
    from .parameter import landing_family
    from .rays import counterexample_family, parabolic_stability_probe

    n = opts.steps
    if opts.family == "counterexample":
        theta = parse_angle(opts.theta or "0/1")
        s = [0.2 * i / n for i in range(n + 1)]
        rep = parabolic_stability_probe(counterexample_family, theta, s)
        extra = {"family": "z^3 + z^2 + (1+s)z + s"}
    elif opts.family == "landing":
        region = opts.region or "inner"
        phi = opts.phi or "5/6"
        theta = parse_angle(opts.theta or "1/2")
        fam, landing = landing_family(region, phi)
        sig = [0.2 * i / n for i in range(n + 1)]
        rep = parabolic_stability_probe(fam, theta, sig)
        extra = {"family": f"landing of the {region} {phi} parameter ray", "landing": landing}
    else:
        raise DomainError("probe family is counterexample or landing")
    _emit({**extra, "theta": theta, **rep.to_json()}, opts)


def cmd_similar(opts: argparse.Namespace) -> None:
    from .parameter import LandingKind, chart, classify_landing, trace_parameter_ray
    from .render import save_image, side_by_side, similarity_pair

    if opts.a is not None:
        _need(opts, "p")
        F0, p = _map(opts), opts.p
    else:
        region, phi = _region(opts)
        L = classify_landing(trace_parameter_ray(region, phi, opts.gmax, opts.gmin))
        if L.kind is not LandingKind.MISIUREWICZ:
            raise DomainError(f"the {phi} ray lands at a {L.kind.value} map, not Misiurewicz")
        p = region.p
        F0 = chart(p)(L.t)
    width = parse_window(opts.window)[1] if opts.window else 0.5
    pair = similarity_pair(F0, p, zoom=opts.zoom, width=width, resolution=(opts.res, opts.res),
                           render=bool(opts.out))
    if opts.out:
        save_image(side_by_side(*pair.images), opts.out)
        print(f"wrote {opts.out}", file=sys.stderr)
    _emit_to_stdout({"map": F0, "p": p, "tail": list(pair.tail), "ds_dt": pair.derivative,
                     "zoom": opts.zoom, "dynamic_center": pair.dynamic.center,
                     "dynamic_width": pair.dynamic.width,
                     "parameter_center": pair.parameter.center,
                     "parameter_width": pair.parameter.width,
                     "parameter_frame": pair.parameter.frame})


# --- parser -----------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("shared options")
    g.add_argument("--config", help="file of key = value lines (flags override it)")
    g.add_argument("--q", type=int, help="ray period / co-period")
    g.add_argument("--p", type=int, help="period of the marked critical point")
    g.add_argument("--region", help="escape region: s1, outer or inner")
    g.add_argument("--phi", help="parameter angle(s) num/den, comma separated")
    g.add_argument("--theta", help="dynamic angle(s) num/den, comma separated")
    g.add_argument("--a", help="marked critical point, e.g. 0.5+0.1j")
    g.add_argument("--v", help="marked critical value")
    g.add_argument("--gmin", type=float, help="lowest potential traced (default 1e-5)")
    g.add_argument("--gmax", type=float, help="starting potential of parameter rays (default 3)")
    g.add_argument("--tol", type=float, help="landing tolerance for parameter rays")
    g.add_argument("--res", type=int, help="image side or grid resolution (default 512)")
    g.add_argument("--window", help="cx,cy,width of the image window")
    g.add_argument("--out", help="output file (.png/.ppm/.svg images, otherwise JSON)")
    g.add_argument("--threads", type=int, help="worker processes (default: logical cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubictess",
        description="Cubic maps with a periodic critical point: angles, portraits, "
                    "rays, tessellations and pictures.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_, description=help_)
        _global_flags(sp)
        sp.set_defaults(func=fn)
        return sp

    sp = add("angle", cmd_angle, "angle arithmetic under tripling")
    sp.add_argument("op", choices=["coperiod", "period", "triad", "twin", "cycle", "orbit", "list"])
    sp.add_argument("args", nargs="*")
    sp = add("portrait", cmd_portrait, "orbit portraits and local face models")
    sp.add_argument("op", choices=["two-ray", "three-ray", "four-ray", "formal", "amalgamate",
                                   "edge"])
    sp.add_argument("args", nargs="*",
                    help="angles num/den, or portraits like 1~3,2~6 (numerators over 3^q-1)")
    sp = add("count", cmd_count, "counting formulas and tables")
    sp.add_argument("--table", action="store_true", help="all tables as CSV")
    sp = add("centers", cmd_centers, "centers of hyperbolic components")
    sp.add_argument("kind", help="A, B:m,n or D:q")
    sp = add("julia", cmd_julia, "Julia set picture with ray overlays")
    sp.add_argument("--angular", action="store_true", help="shade by log3 of the potential mod 1")
    add("param", cmd_param, "parameter picture of S_1 or S_2")
    sp = add("ray", cmd_ray, "trace dynamic rays")
    sp.add_argument("--samples", action="store_true", help="include all ray samples")
    sp = add("pray", cmd_pray, "trace a parameter ray and classify its landing")
    sp.add_argument("--samples", action="store_true", help="include all ray samples")
    add("tess", cmd_tess, "build a tessellation")
    add("knead", cmd_knead, "kneading invariant of an escaping map")
    sp = add("probe", cmd_probe, "continuity of a ray landing along a family")
    sp.add_argument("family", choices=["counterexample", "landing"])
    sp.add_argument("--steps", type=int, default=10)
    sp = add("similar", cmd_similar, "dynamic and parameter pictures at a Misiurewicz map")
    sp.add_argument("--zoom", type=float, default=1.0)
    return parser


_NEGATIVE_VALUE = re.compile(r"-[\d.]")


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    # "--v -0.3+0.2j" would read the value as an option; "--v=-0.3+0.2j" does not
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] \
                and out[-1][2:].replace("-", "_") in DEFAULTS and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        opts, extra = parser.parse_known_args(argv)
        # positionals after a flag ("portrait edge --q 2 2~6 1~3") land in extra
        if extra and hasattr(opts, "args") and not any(x.startswith("--") for x in extra):
            opts.args = list(opts.args) + extra
        elif extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        resolve(opts)
        opts.func(opts)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
