"""Command-line front end.

Exit codes: 0 ok, 1 usage error, 2 golden mismatch or failed certificate,
3 census not saturated.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_UNSATURATED = 0, 1, 2, 3

log = logging.getLogger("quatpack")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    command: str = ""
    cover: str = ""
    bend_bound: int = 30
    depth_bound: int | None = None
    generator_norm_bound: int | None = None
    explore_bound: int | None = None
    kind: str = "apollonian"
    out: str | None = None
    svg: str | None = None
    cells: int = 3
    stroke: float = 0.5
    palette: str = "bend"
    lam: int = 1
    threads: int | None = None
    dim: int | None = None
    disc_bound: int | None = None
    family: str | None = None
    n: int | None = None
    saturation_check: bool = True
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.bend_bound < 0:
            raise UsageError("bend bound must be non-negative")
        for name in ("depth_bound", "generator_norm_bound", "explore_bound", "disc_bound"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise UsageError(f"{name.replace('_', '-')} must be positive")
        if self.cells <= 0:
            raise UsageError("cells must be positive")
        if self.kind not in ("apollonian", "super"):
            raise UsageError("kind must be 'apollonian' or 'super'")


def resolve_cover(spec: str):
    """Cover selector.

    ``m=5`` or ``dim3:5``   ring of integers of Q(sqrt(-5))
    ``disc=20``             the same, by field discriminant
    ``dim4:-1,-6``          Table-1 order of ((-1,-6)) with u = j
    ``dim5:-1,-7``          Table-2 order of ((-1,-7))
    ``T2:(-1,-7)``          Table-2 reference
    """
    from .forbidden import discriminant_to_field
    from .orders import quadratic_cover, table1_cover, table2_cover
    s = spec.strip().replace(" ", "")
    try:
        if s.startswith("m="):
            return quadratic_cover(int(s[2:]))
        if s.startswith("dim3:"):
            return quadratic_cover(int(s[5:]))
        if s.startswith("disc="):
            return quadratic_cover(discriminant_to_field(abs(int(s[5:]))))
        if s.startswith("dim4:"):
            a, b = (int(v) for v in s[5:].split(","))
            hit = table1_cover(a, b)
            if hit is None:
                raise UsageError(f"no tabulated dim-4 covering order for ({a},{b})")
            return hit[2]
        if s.startswith("dim5:"):
            a, b = (int(v) for v in s[5:].split(","))
            return table2_cover(f"T2:({a},{b})")
        if s.startswith("T2:"):
            return table2_cover(s)
    except (ValueError, KeyError) as e:
        raise UsageError(f"cannot resolve cover {spec!r}: {e}") from None
    raise UsageError(f"unknown cover selector {spec!r}")


def _set_threads(n):
    n = n or os.environ.get("QUATPACK_THREADS")
    if not n:
        return
    from . import kernels
    if kernels.HAVE_NUMBA:
        import numba
        numba.set_num_threads(int(n))


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, default=str)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")
        log.info("wrote %s", path)


# ---------------------------------------------------------------- classify

def _golden_dim5():
    from .orders import TABLE2
    return {name: (drd, tuple(nrms)) for name, a, b, basis, drd, nrms in TABLE2}


def cmd_classify(cfg: RunConfig) -> int:
    from . import orders
    if cfg.dim not in (3, 4, 5):
        raise UsageError("--dim must be 3, 4 or 5")
    t0 = time.time()
    mismatches = []
    if cfg.dim == 5:
        lg = orders.Dim5SearchLog()
        out, unmatched, lg = orders.dim5_catalog(log_data=lg)
        log.info("Minkowski gate: 12*pi^2 = %.6f < %d; %d candidate tuples, %d pruned by the gate",
                 lg.bound, lg.gate, lg.tuples_total, lg.pruned_by_gate)
        golden = _golden_dim5()
        for e in out:
            drd, nrms = golden[e.table_ref]
            if (e.order.discrd, e.nrm_set) != (drd, nrms):
                mismatches.append({"ref": e.table_ref, "got": [e.order.discrd, list(e.nrm_set)],
                                   "want": [drd, list(nrms)]})
        for fp, nrms in unmatched:
            mismatches.append({"ref": None, "got": [fp[0], nrms], "want": None})
        missing = set(golden) - {e.table_ref for e in out}
        for ref in sorted(missing):
            mismatches.append({"ref": ref, "got": None, "want": list(golden[ref])})
        meta = {"minkowski_bound": lg.bound, "gate": lg.gate, "tuples_total": lg.tuples_total,
                "pruned_by_gate": lg.pruned_by_gate, "algebras": sorted(map(list, lg.algebras)),
                "maximal_orders_examined": lg.maximal_orders_examined}
    elif cfg.dim == 4 and cfg.n is not None:
        a = _family_a(cfg.family)
        out = []
        for name, O, cov in orders.table1_at(a, cfg.n):
            out.append(orders.CatalogEntry(O, cov, name, (cov.nrm_u,), {"n": cfg.n}))
        if not out:
            mismatches.append({"family": cfg.family, "n": cfg.n, "got": None,
                               "want": "a tabulated covering order"})
        for e in out:
            want = dict((r[0], r[4]) for r in orders.TABLE1)[e.table_ref](cfg.n)
            if e.order.discrd != want:
                mismatches.append({"ref": e.table_ref, "got": e.order.discrd, "want": want})
        meta = {}
    else:
        fam = None
        if cfg.family:
            fam = [f"({_family_a(cfg.family)},n)"]
        out = (orders.dim4_catalog(cfg.disc_bound or 60, families=fam) if cfg.dim == 4
               else orders.dim3_catalog(cfg.disc_bound or 50))
        meta = {}
    doc = {"dim": cfg.dim, "elapsed_s": round(time.time() - t0, 3), "meta": meta,
           "orders": [dict(e.to_json(), nrm_set=list(e.nrm_set)) for e in out],
           "mismatches": mismatches}
    _write_json(doc, cfg.out)
    if mismatches:
        log.error("golden mismatch: %s", json.dumps(mismatches, default=str))
        return EXIT_MISMATCH
    return EXIT_OK


def _family_a(family):
    if not family:
        raise UsageError("--family is required with --n, e.g. --family '(-1,n)'")
    s = family.strip().strip("()").split(",")[0]
    try:
        return int(s)
    except ValueError:
        raise UsageError(f"bad family {family!r}") from None


# ---------------------------------------------------------------- enumerate

def build_census(cfg: RunConfig, cover):
    from .packing import enumerate_apollonian, enumerate_superpacking, saturation
    enum = enumerate_apollonian if cfg.kind == "apollonian" else enumerate_superpacking
    kw = {"explore_bound": cfg.explore_bound, "max_depth": cfg.depth_bound}
    if cfg.kind == "super":
        kw["generator_norm_bound"] = cfg.generator_norm_bound
    census = enum(cover, cfg.bend_bound, **kw)
    if cfg.bend_bound == 0:
        census.saturated = True
    elif cfg.depth_bound is not None and census.depth >= cfg.depth_bound:
        # the search was cut off by depth, so larger bends may hide unseen spheres
        census.saturated = False
        census.diagnostics["saturation"] = f"depth bound {cfg.depth_bound} reached"
    elif cfg.saturation_check:
        cap = census.explore_bound

        def rerun(c, B, explore_bound):
            return enum(c, B, **dict(kw, explore_bound=explore_bound))
        stable, sizes = saturation(rerun, cover, cfg.bend_bound, [cap, 2 * cap])
        census.saturated = stable
        census.diagnostics["saturation_sizes"] = sizes
    return census


def cmd_enumerate(cfg: RunConfig) -> int:
    cover = resolve_cover(cfg.cover)
    census = build_census(cfg, cover)
    lines = [json.dumps(census.header(), default=str)]
    lines += [json.dumps(r, default=str) for r in census.records()]
    if cfg.out in (None, "-"):
        print("\n".join(lines))
    else:
        Path(cfg.out).write_text("\n".join(lines) + "\n")
        log.info("wrote %d records to %s", len(lines) - 1, cfg.out)
    if cfg.svg:
        Path(cfg.svg).write_text(render_svg(census, cfg.cells, cfg.stroke, cfg.palette))
        log.info("wrote %s", cfg.svg)
    if census.saturated is False:
        log.warning("census not saturated: %s", census.diagnostics.get("saturation_sizes") or census.diagnostics.get("saturation"))
        return EXIT_UNSATURATED
    return EXIT_OK


# ---------------------------------------------------------------- SVG

def _colour(bend, bmax, palette):
    if palette == "mono":
        return "#222"
    t = math.log1p(abs(bend)) / math.log1p(max(bmax, 1))
    return f"hsl({int(240 - 240 * t)},70%,45%)"


def _strip_axes(f):
    """Orthonormal x along the first S_u vector and y across the strip."""
    e = f.euclid([1] + [0] * (f.r - 1))
    tau = f.euclid([0] * f.r_s + [1])
    x = e / np.linalg.norm(e)
    u = f.euclid(f.u_vec)
    y = u / np.linalg.norm(u)
    if tau @ y < 0:
        y = -y
    return x, y, float(np.linalg.norm(e)), float(tau @ y)


def render_svg(census, cells: int = 3, stroke: float = 0.5, palette: str = "bend") -> str:
    """Circles of a dim-3 census (or a 2-plane slice for dims 4-5), tiled over ``cells`` cells."""
    f = census.frame
    scale = 200.0
    x_ax, y_ax, period, height = _strip_axes(f)
    width = cells * period
    spheres = census.non_planes()
    bmax = max((abs(s[0]) for s in spheres), default=1)
    shifts = [np.zeros(f.r)]
    if f.r_s:
        rng = range(-1, cells + 1)
        grids = [rng] + [range(-2, 3)] * (f.r_s - 1)
        shifts = [f.euclid(list(c) + [0]) for c in np.array(np.meshgrid(*grids)).T.reshape(-1, f.r_s)]
    items = []
    for s in spheres:
        c, r = f.center_radius(s)
        for w in shifts:
            p = c + w
            px, py = float(p @ x_ax), float(p @ y_ax)
            off = p - px * x_ax - py * y_ax
            d2 = float(off @ off)
            if d2 >= r * r:
                continue
            rr = math.sqrt(r * r - d2)
            if px + rr < 0 or px - rr > width:
                continue
            items.append((px, py, rr, s[0]))
    W, H = width * scale, height * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W:.2f} {H:.2f}" '
           f'width="{W:.0f}" height="{H:.0f}">',
           f'<clipPath id="cell"><rect x="0" y="0" width="{W:.2f}" height="{H:.2f}"/></clipPath>',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<g clip-path="url(#cell)" fill="none" stroke-width="{stroke}">']
    for px, py, rr, b in sorted(items, key=lambda t: t[2], reverse=True):
        out.append(f'<circle cx="{px * scale:.3f}" cy="{H - py * scale:.3f}" r="{rr * scale:.3f}" '
                   f'stroke="{_colour(b, bmax, palette)}"/>')
    out.append(f'<line x1="0" y1="{H:.2f}" x2="{W:.2f}" y2="{H:.2f}" stroke="black"/>')
    out.append(f'<line x1="0" y1="0" x2="{W:.2f}" y2="0" stroke="black"/>')
    out.append("</g></svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- verify / density

def cmd_verify(cfg: RunConfig) -> int:
    from .forbidden import CertificateFailure, NotCovered, forbidden_ball, verify_forbidden
    from .packing import enumerate_superpacking
    cover = resolve_cover(cfg.cover)
    try:
        ball = forbidden_ball(cover)
    except NotCovered as e:
        _write_json({"cover": cover.to_json(), "status": "not_covered", "reason": str(e)}, cfg.out)
        log.info("not covered: %s", e)
        return EXIT_OK
    census = enumerate_superpacking(cover, cfg.bend_bound)
    try:
        rep = verify_forbidden(ball, census)
    except CertificateFailure as e:
        _write_json({"cover": cover.to_json(), "status": "certificate_failure", "reason": str(e)}, cfg.out)
        log.error("%s", e)
        return EXIT_MISMATCH
    rep["status"] = "ok" if rep["symbolic_pass"] and rep["empirical_pass"] else "certificate_failure"
    rep["census"] = {"bend_bound": cfg.bend_bound, "spheres": len(census)}
    _write_json(rep, cfg.out)
    return EXIT_OK if rep["status"] == "ok" else EXIT_MISMATCH


def cmd_density(cfg: RunConfig) -> int:
    from .density import report
    from .forbidden import NotCovered, density_upper_bound, forbidden_ball
    from .packing import enumerate_superpacking
    cover = resolve_cover(cfg.cover)
    cfg.kind = "apollonian"
    census = build_census(cfg, cover)
    upper = None
    try:
        upper = density_upper_bound(forbidden_ball(cover))["upper_bound"]
    except NotCovered:
        pass
    sup = enumerate_superpacking(cover, cfg.bend_bound) if cfg.extra.get("with_super") else None
    rep = report(census, sup, upper, cfg.lam)
    _write_json(rep.to_json(), cfg.out)
    if census.saturated is False:
        log.warning("census not saturated")
        return EXIT_UNSATURATED
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quatpack", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="covering orders; golden-checked against the stored tables")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--disc-bound", type=int)
    c.add_argument("--family", help="dim-4 family, e.g. '(-1,n)'")
    c.add_argument("--n", type=int, help="dim-4 second invariant")
    c.add_argument("--out", "-o")

    def common(sp):
        sp.add_argument("--cover", required=True, help="m=5, disc=20, dim4:-1,-6, dim5:-1,-7")
        sp.add_argument("--bend", dest="bend_bound", type=int, default=None)
        sp.add_argument("--out", "-o")
        sp.add_argument("--threads", type=int)

    e = sub.add_parser("enumerate", help="census of a packing (JSON lines, optional SVG)")
    common(e)
    e.add_argument("--kind", choices=("apollonian", "super"))
    e.add_argument("--depth", dest="depth_bound", type=int)
    e.add_argument("--explore", dest="explore_bound", type=int)
    e.add_argument("--gen-norm", dest="generator_norm_bound", type=int)
    e.add_argument("--svg")
    e.add_argument("--cells", type=int)
    e.add_argument("--stroke", type=float)
    e.add_argument("--palette", choices=("bend", "mono"))
    e.add_argument("--no-saturation-check", dest="saturation_check", action="store_false", default=None)

    v = sub.add_parser("verify", help="forbidden-ball certificate for a cover")
    common(v)

    d = sub.add_parser("density", help="density report for a cover")
    common(d)
    d.add_argument("--lambda", dest="lam", type=int)
    d.add_argument("--with-super", action="store_true")
    d.add_argument("--no-saturation-check", dest="saturation_check", action="store_false", default=None)
    return p


def parse_config(argv) -> tuple[RunConfig, int]:
    args = _parser().parse_args(argv)
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config: {e}") from None
        for k, val in data.items():
            if not hasattr(cfg, k):
                raise UsageError(f"unknown config key {k!r}")
            setattr(cfg, k, val)
    for k, val in vars(args).items():
        if k in ("config", "verbose") or val is None:
            continue
        if k == "with_super":
            cfg.extra["with_super"] = val
        elif hasattr(cfg, k):
            setattr(cfg, k, val)
    cfg.command = args.command
    cfg.validate()
    return cfg, args.verbose


COMMANDS = {"classify": cmd_classify, "enumerate": cmd_enumerate, "verify": cmd_verify,
            "density": cmd_density}


def main(argv=None) -> int:
    try:
        cfg, verbose = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(f"quatpack: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if cfg.command == "classify":
        logging.getLogger("quatpack").setLevel(min(logging.INFO, logging.WARNING - 10 * verbose))
    _set_threads(cfg.threads)
    log.debug("config %s", asdict(cfg))
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as e:
        print(f"quatpack: error: {e}", file=sys.stderr)
        return EXIT_USAGE
