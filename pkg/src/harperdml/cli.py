"""Command-line front end: density tables, butterfly sweeps, gap maps, FK
determinants, exact moments and the algebraic verification."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .algebraic import AlgebraicError, bound_params, verify_lemma_qmzero
from .exhaustion import corner_boxes_zd, regularity_report
from .graph import GammaGraph, GraphError, build_cayley_zd, build_from_templates
from .invariants import (
    DivergentEstimate,
    InvariantError,
    fk_determinant,
    fk_positivity_probe,
    kernel_dimension_check,
    spectral_gap_scan,
)
from .magnetic import MagneticError, WeightFunction, landau_weight, template_weight
from .operators import exact_moment, operator_bounds
from .spectral import SpectralError, density_sequence

log = logging.getLogger("harperdml")

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXACT_MAX_VERTICES = 64


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    graph: str = "zd:2"
    flux: str = "0"
    phases: Optional[dict] = None
    bc: str = "neumann"
    boxes: list = field(default_factory=list)
    grid: Optional[list] = None  # [lo, hi, step]
    tol: float = 1e-10
    exact: bool = False
    out: Optional[str] = None
    threads: int = 1
    k: int = 4
    lam: str = "0"
    mu: str = "0"
    q_max: int = 3
    eta_gap: float = 1e-3

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def canonical(self) -> dict:
        """The fields that determine results; output location and threading do not."""
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        return d

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()[:16]


# --- parsing -------------------------------------------------------------------


def parse_fraction(text: str, what: str = "flux") -> Fraction:
    """Reduced fraction syntax 'p/q' or an integer; decimals are refused."""
    t = text.strip()
    if any(c in t for c in ".eE"):
        raise ConfigError(f"{what} must be a fraction like 1/3, not {text!r}")
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad {what} {text!r}") from exc


def parse_number(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad {what} {text!r}") from exc


def parse_boxes(text: str) -> list:
    """'a..b[..s]' (inclusive range) or a comma list of side lengths."""
    try:
        if ".." in text:
            parts = [int(p) for p in text.split("..")]
            if len(parts) == 2:
                a, b, s = parts[0], parts[1], 1
            elif len(parts) == 3:
                a, b, s = parts
            else:
                raise ValueError
            if s <= 0:
                raise ValueError
            out = list(range(a, b + 1, s))
        else:
            out = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad box list {text!r}") from exc
    if not out or out[0] < 1 or any(y <= x for x, y in zip(out, out[1:])):
        raise ConfigError(f"box list {text!r} must be nonempty, positive and increasing")
    return out


def parse_grid(text: str) -> list:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise ConfigError(f"bad grid {text!r}")
    return [lo, hi, step]


def grid_points(grid: list) -> np.ndarray:
    lo, hi, step = grid
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 12)


def build_graph(spec: str) -> GammaGraph:
    if spec.startswith("zd:"):
        try:
            d = int(spec[3:])
        except ValueError as exc:
            raise ConfigError(f"bad graph spec {spec!r}") from exc
        if d < 1:
            raise ConfigError("dimension must be >= 1")
        return build_cayley_zd(d)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"graph spec {spec!r} is neither zd:d nor a JSON file")
    data = json.loads(path.read_text())
    try:
        return build_from_templates(data["a"], data["d"], [tuple(t) for t in data["templates"]])
    except (KeyError, GraphError) as exc:
        raise ConfigError(f"invalid graph file: {exc}") from exc


def build_weight(g: GammaGraph, cfg: RunConfig) -> WeightFunction:
    theta = parse_fraction(cfg.flux)
    if cfg.phases is not None:
        return template_weight(g, {int(k): parse_fraction(str(v), "phase") for k, v in cfg.phases.items()})
    if g.kind == "zd" and g.d == 2:
        return landau_weight(g, theta)
    if theta % 1 != 0:
        raise ConfigError("--flux applies to zd:2 only; use --phases for other graphs")
    return template_weight(g, {})


# --- output ----------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _header(cfg: RunConfig) -> list:
    body = json.dumps(cfg.canonical(), sort_keys=True, separators=(",", ":"))
    return [f"# harperdml {__version__} config={cfg.digest}", f"# {body}"]


def write_csv(cfg: RunConfig, name: str, columns: list, rows) -> str:
    buf = io.StringIO()
    for line in _header(cfg):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return _emit(cfg, name, buf.getvalue())


def write_json(cfg: RunConfig, name: str, payload: dict) -> str:
    doc = {"tool": f"harperdml {__version__}", "config_hash": cfg.digest, "config": cfg.canonical(), **payload}
    return _emit(cfg, name, json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    return str(o)


def _emit(cfg: RunConfig, name: str, text: str) -> str:
    if cfg.out is None:
        sys.stdout.write(text)
        return "-"
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return str(path)


# --- commands ----------------------------------------------------------------------


def _need_boxes(cfg: RunConfig):
    if not cfg.boxes:
        raise ConfigError("--boxes is required and must be nonempty")


def _table(cfg: RunConfig):
    _need_boxes(cfg)
    g = build_graph(cfg.graph)
    sigma = build_weight(g, cfg)
    K2 = operator_bounds(g).K2
    grid = grid_points(cfg.grid if cfg.grid else [0.0, K2, K2 / 400])
    seq = corner_boxes_zd(g.d, cfg.boxes)
    return g, sigma, density_sequence(g, sigma, seq, cfg.bc, grid, cfg.tol, cfg.threads)


def cmd_density(cfg: RunConfig) -> int:
    g, sigma, tab = _table(cfg)
    cols = ["lambda"] + [f"F_{lab}" for lab in tab.labels] + ["Fbar", "Funder"]
    fbar, funder = tab.Fbar, tab.Funder
    rows = [[lam, *tab.columns[:, i], fbar[i], funder[i]] for i, lam in enumerate(tab.grid)]
    write_csv(cfg, "density.csv", cols, rows)
    if cfg.out is not None:
        write_json(cfg, "density_summary.json", {
            "labels": tab.labels,
            "N": tab.N,
            "boundary_ratio": tab.ratios,
            "a": tab.a,
            "K2": tab.K2,
            "rational": tab.rational,
            "F_last_at_K2": float(tab.F(-1, tab.K2)),
        })
    return 0


def farey(q_max: int) -> list:
    return sorted({Fraction(p, q) for q in range(1, q_max + 1) for p in range(q)})


def cmd_butterfly(cfg: RunConfig) -> int:
    _need_boxes(cfg)
    g = build_graph(cfg.graph)
    if not (g.kind == "zd" and g.d == 2):
        raise ConfigError("butterfly needs --graph zd:2")
    if cfg.q_max < 1:
        raise ConfigError("--q-max must be >= 1")
    K2 = operator_bounds(g).K2
    grid = grid_points(cfg.grid if cfg.grid else [0.0, K2, K2 / 400])
    seq = corner_boxes_zd(2, cfg.boxes[-1:])
    rows = []
    for theta in farey(cfg.q_max):
        tab = density_sequence(g, landau_weight(g, theta), seq, cfg.bc, grid, cfg.tol)
        rows += [[str(theta), lam, f] for lam, f in zip(tab.grid, tab.columns[-1])]
    write_csv(cfg, "butterfly.csv", ["theta", "lambda", "F"], rows)
    return 0


def cmd_gaps(cfg: RunConfig) -> int:
    g, sigma, tab = _table(cfg)
    rep = spectral_gap_scan(tab, cfg.eta_gap)
    write_csv(cfg, "gaps.csv", ["lambda1", "lambda2", "mass_last", "trend", "verdict"], rep.csv_rows())
    return 0


def cmd_fkdet(cfg: RunConfig) -> int:
    _need_boxes(cfg)
    g = build_graph(cfg.graph)
    sigma = build_weight(g, cfg)
    mu_exact = parse_number(cfg.mu, "mu")
    mu = float(mu_exact)
    seq = corner_boxes_zd(g.d, cfg.boxes)
    tab = density_sequence(g, sigma, seq, cfg.bc, [0.0], cfg.tol, cfg.threads)
    lower = None
    if sigma.rational:
        p = bound_params(g, sigma, mu_exact, tab.N[-1])
        lower = -p.h * p.a * p.log_Q
    est = fk_determinant(tab, mu, lower_bound=lower)
    extra = {}
    if cfg.exact:
        small = [L for L in cfg.boxes if g.a * L**g.d <= EXACT_MAX_VERTICES]
        if not small:
            raise ConfigError(f"--exact needs a box with at most {EXACT_MAX_VERTICES} vertices")
        verdict = fk_positivity_probe(g, sigma, corner_boxes_zd(g.d, small), mu_exact, cfg.bc,
                                      estimate=est.logdet_moddet)
        extra["positivity"] = {**asdict(verdict), "boxes": small}
    write_json(cfg, "fkdet.json", {
        "mu": mu,
        "logdet_stieltjes": est.logdet_stieltjes,
        "logdet_moddet": est.logdet_moddet,
        "det": est.det,
        "divergent": est.divergent,
        "per_m": est.per_m,
        "cutoffs": est.cutoffs,
        "lower_bound": est.lower_bound,
        **extra,
    })
    return 0


def cmd_moments(cfg: RunConfig) -> int:
    g = build_graph(cfg.graph)
    sigma = build_weight(g, cfg)
    if cfg.k < 0:
        raise ConfigError("--k must be >= 0")
    rows = []
    for op in ("dml", "harper"):
        m = exact_moment(g, sigma, cfg.k, op)
        rows.append([op, cfg.k, m.exact_str(), m.value])
    write_csv(cfg, "moments.csv", ["operator", "k", "exact", "value"], rows)
    return 0


def cmd_verify_algebraic(cfg: RunConfig) -> int:
    _need_boxes(cfg)
    g = build_graph(cfg.graph)
    sigma = build_weight(g, cfg)
    lam = parse_number(cfg.lam, "lambda")
    rep = verify_lemma_qmzero(g, sigma, corner_boxes_zd(g.d, cfg.boxes), cfg.bc, lam, workers=cfg.threads)
    write_json(cfg, "verify_algebraic.json", rep.to_json())
    return 0 if rep.all_ok else 1


def cmd_report(cfg: RunConfig) -> int:
    _need_boxes(cfg)
    g = build_graph(cfg.graph)
    sigma = build_weight(g, cfg)
    seq = corner_boxes_zd(g.d, cfg.boxes)
    reg = regularity_report(g, seq, [1, 2])
    ker = kernel_dimension_check(g, sigma, seq, cfg.bc, cfg.tol)
    b = operator_bounds(g)
    write_json(cfg, "report.json", {
        "graph": {"a": g.a, "d": g.d, "templates": [list(t) for t in g.templates], "connected": g.connected},
        "bounds": {"C": b.C, "b": b.b, "K2": b.K2},
        "regularity": {
            "rows": [{"label": lab, "ratios": r} for lab, r in reg.rows()],
            "monotone": {str(k): v for k, v in reg.monotone.items()},
            "regular": reg.regular,
        },
        "kernel": [asdict(r) for r in ker],
    })
    return 0


COMMANDS = {
    "density": cmd_density,
    "butterfly": cmd_butterfly,
    "gaps": cmd_gaps,
    "fkdet": cmd_fkdet,
    "moments": cmd_moments,
    "verify-algebraic": cmd_verify_algebraic,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", default="zd:2", help="zd:d or a JSON template file")
    common.add_argument("--flux", default="0", help="flux per plaquette as a fraction p/q")
    common.add_argument("--phases", default=None, help="JSON map template id -> phase fraction")
    common.add_argument("--bc", default="neumann", choices=["dirichlet", "neumann"])
    common.add_argument("--boxes", default="", help="side lengths a..b[..s] or a,b,c")
    common.add_argument("--grid", default=None, help="lo:hi:step")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--exact", action="store_true", help="fkdet: exact positivity test on small boxes")
    common.add_argument("--out", default=None, help="output directory (default: stdout)")
    common.add_argument("--threads", type=int, default=1)
    p = argparse.ArgumentParser(prog="harperdml", description=__doc__)
    p.add_argument("--version", action="version", version=f"harperdml {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "moments":
            sp.add_argument("--k", type=int, default=4)
        if name == "verify-algebraic":
            sp.add_argument("--lambda", dest="lam", default="0")
        if name == "fkdet":
            sp.add_argument("--mu", default="0")
        if name == "butterfly":
            sp.add_argument("--q-max", dest="q_max", type=int, default=3)
        if name == "gaps":
            sp.add_argument("--eta-gap", dest="eta_gap", type=float, default=1e-3)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    parse_fraction(ns.flux)
    cfg = RunConfig(
        command=ns.command,
        graph=ns.graph,
        flux=ns.flux,
        phases=json.loads(ns.phases) if ns.phases else None,
        bc=ns.bc,
        boxes=parse_boxes(ns.boxes) if ns.boxes else [],
        grid=parse_grid(ns.grid) if ns.grid else None,
        tol=ns.tol,
        exact=ns.exact,
        out=ns.out,
        threads=max(1, ns.threads),
    )
    for name in ("k", "lam", "mu", "q_max", "eta_gap"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, json.JSONDecodeError, MagneticError, GraphError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (SpectralError, InvariantError, AlgebraicError, DivergentEstimate, ArithmeticError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
