"""Ten agents bunched in one corner of a hexagon.

The optimal law uses monotone step control (the step is halved whenever
the objective would drop); the same run on a fixed step is shown for
contrast.  Takes a few minutes.

    python3 demos/case_study_2.py
"""

import dataclasses
import time
from pathlib import Path

import numpy as np

from gvcover.cli import emit, load_config, write_comparison
from gvcover.sim import simulate

SCENARIO = Path(__file__).resolve().parents[1] / "src/gvcover/scenarios/case_study_2.yaml"
OUT = Path("out/case_study_2")


def main():
    cfg = load_config(SCENARIO)
    runs = {"optimal": cfg,
            "optimal_fixed": dataclasses.replace(cfg, step_control="fixed"),
            "suboptimal": dataclasses.replace(cfg, law="suboptimal", step_control="fixed")}
    states = {}
    for name, c in runs.items():
        t0 = time.perf_counter()
        st = simulate(c)
        states[name] = st
        emit(st, OUT / name, snapshots=list(c.snapshots) + [st.steps])
        dh = np.diff(st.h_series())
        print(f"{name:>14}: {st.steps} steps in {time.perf_counter() - t0:.0f}s, "
              f"final fraction {st.report.fraction:.6f}, smallest step change {dh.min():.2e}")
    write_comparison(states, OUT / "compare.csv")


if __name__ == "__main__":
    main()
