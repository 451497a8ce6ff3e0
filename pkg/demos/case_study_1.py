"""Three agents released close together in a large square.

Runs both control laws from the same start, prints how the coverage
fraction grows and writes snapshots plus CSV logs to ``out/case_study_1``.

    python3 demos/case_study_1.py
"""

import dataclasses
from pathlib import Path

import numpy as np

from gvcover.cli import emit, load_config, write_comparison
from gvcover.sim import simulate

SCENARIO = Path(__file__).resolve().parents[1] / "src/gvcover/scenarios/case_study_1.yaml"
OUT = Path("out/case_study_1")


def main():
    base = dataclasses.replace(load_config(SCENARIO), step_control="fixed")
    states = {}
    for law in ("optimal", "suboptimal"):
        st = simulate(base.with_law(law))
        states[law] = st
        emit(st, OUT / law, snapshots=[0, 20, st.steps])
        f = st.fraction_series()
        marks = ", ".join(f"{k}: {f[k]:.3f}" for k in (0, 10, 20, 40) if k < len(f))
        k99 = int(np.argmax(st.h_series() >= 0.99 * st.h_series()[-1]))
        print(f"{law:>10}: {st.steps} steps, final fraction {f[-1]:.6f}, "
              f"99% of final H at step {k99} ({marks})")
    write_comparison(states, OUT / "compare.csv")
    print(f"snapshots and logs in {OUT}/")


if __name__ == "__main__":
    main()
