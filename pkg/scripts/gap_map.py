"""Gap scan across rational fluxes: the intervals where the finite-volume
density stops growing as the boxes grow, one row per (flux, interval).

    python3 scripts/gap_map.py --q-max 5 --sides 30 36 42 --out results/gaps.csv
"""

from __future__ import annotations

import csv
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from harperdml.cli import farey
from harperdml.exhaustion import corner_boxes_zd
from harperdml.graph import build_cayley_zd
from harperdml.invariants import spectral_gap_scan
from harperdml.magnetic import landau_weight
from harperdml.spectral import density_sequence


@dataclass
class GapMapConfig:
    q_max: int = 4
    sides: list = field(default_factory=lambda: [36, 42, 48])
    bc: str = "dirichlet"
    step: float = 0.02
    eta_gap: float = 1e-3
    threads: int = 3
    out: str = "results/gaps.csv"


def main(argv=None) -> int:
    cfg = parse_config(GapMapConfig, argv, __doc__)
    g = build_cayley_zd(2)
    grid = np.round(np.arange(0, 8 + cfg.step / 2, cfg.step), 12)
    seq = corner_boxes_zd(2, cfg.sides)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "lambda1", "lambda2", "mass_last", "verdict"])
        for theta in farey(cfg.q_max):
            tab = density_sequence(g, landau_weight(g, theta), seq, cfg.bc, grid, workers=cfg.threads)
            rep = spectral_gap_scan(tab, cfg.eta_gap)
            for iv in rep.intervals:
                w.writerow([str(theta), f"{iv.lam1:.12g}", f"{iv.lam2:.12g}", f"{iv.mass_last:.12g}", iv.verdict])
            inner = rep.gaps(interior_only=True)
            desc = " ".join(f"({iv.lam1:.2f},{iv.lam2:.2f})" for iv in inner)
            print(f"theta={str(theta):>5}  interior gaps: {len(inner)}  {desc}")
    print(f"wrote {out} in {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
