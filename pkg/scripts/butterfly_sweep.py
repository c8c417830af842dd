"""Integrated density of states of the square-lattice magnetic Laplacian for
every flux p/q with q <= q_max, at one box size, plus the plateaus found in it.

    python3 scripts/butterfly_sweep.py --q-max 12 --side 36 --out results/butterfly.csv
"""

from __future__ import annotations

import csv
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from harperdml.cli import farey
from harperdml.exhaustion import corner_boxes_zd, induce_subgraph
from harperdml.graph import build_cayley_zd
from harperdml.magnetic import landau_weight
from harperdml.operators import restrict_dml
from harperdml.spectral import density_function, hermitian_eigenvalues


@dataclass
class SweepConfig:
    q_max: int = 8
    side: int = 30
    bc: str = "dirichlet"
    step: float = 0.02
    plateau: float = 0.3  # report flat stretches of F at least this wide
    out: str = "results/butterfly.csv"


def plateaus(grid: np.ndarray, F: np.ndarray, min_width: float) -> list:
    """Maximal stretches where F does not change, at least ``min_width`` wide."""
    out, i = [], 0
    flat = np.diff(F) == 0
    while i < len(flat):
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(flat) and flat[j + 1]:
            j += 1
        lo, hi = grid[i], grid[j + 1]
        if hi - lo >= min_width and 0 < F[i] < F[-1]:
            out.append((float(lo), float(hi), float(F[i])))
        i = j + 1
    return out


def main(argv=None) -> int:
    cfg = parse_config(SweepConfig, argv, __doc__)
    g = build_cayley_zd(2)
    X = induce_subgraph(g, corner_boxes_zd(2, [cfg.side])[0])
    grid = np.round(np.arange(0, 8 + cfg.step / 2, cfg.step), 12)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "lambda", "F"])
        for theta in farey(cfg.q_max):
            spec = hermitian_eigenvalues(restrict_dml(g, landau_weight(g, theta), X, cfg.bc), N=X.N)
            F = density_function(spec, grid)
            w.writerows([str(theta), f"{lam:.12g}", f"{f:.12g}"] for lam, f in zip(grid, F))
            flats = plateaus(grid, F, cfg.plateau)
            desc = " ".join(f"[{a:.2f},{b:.2f}]@{v:.3f}" for a, b, v in flats)
            print(f"theta={str(theta):>5}  plateaus: {desc or '-'}")
    print(f"wrote {out} in {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
