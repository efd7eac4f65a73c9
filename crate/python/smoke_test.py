#!/usr/bin/env python3
"""Smoke test for the growthcap_py extension module.

Build the module first:

    cargo build -p growthcap-py --release --features extension-module

then run this script from the repository root:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def import_module():
    candidates = [
        REPO_ROOT / "target" / "release" / "libgrowthcap_py.so",
        REPO_ROOT / "target" / "debug" / "libgrowthcap_py.so",
        REPO_ROOT / "target" / "release" / "libgrowthcap_py.dylib",
        REPO_ROOT / "target" / "debug" / "libgrowthcap_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "no built extension found; run "
            "`cargo build -p growthcap-py --release --features extension-module` first"
        )
    staging = Path(tempfile.mkdtemp(prefix="growthcap_py_"))
    shutil.copy2(built, staging / "growthcap_py.so")
    sys.path.insert(0, str(staging))
    import growthcap_py

    return growthcap_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    gc = import_module()
    ln2 = math.log(2.0)

    # Kelly solve: proportional betting on a horse race
    market = gc.Market.horse_race([0.6, 0.4], [2.0, 2.0])
    report = gc.solve_log_optimal(market)
    approx(report["weights"][0], 0.6, 1e-8)
    approx(report["weights"][1], 0.4, 1e-8)
    approx(report["growth_rate"], 0.6 * math.log(1.2) + 0.4 * math.log(0.8), 1e-12)
    assert report["converged"]
    residuals = gc.kkt_residuals(market, report["weights"])
    for r in residuals:
        approx(r, 1.0, 1e-8)

    # water-filling: gains (4, 1) at rho = 1 -> (7/8, 1/8), level 9/8
    fractions, level = gc.water_fill([4.0, 1.0], 1.0)
    approx(fractions[0], 7 / 8, 1e-9)
    approx(fractions[1], 1 / 8, 1e-9)
    approx(level, 9 / 8, 1e-9)

    # single-branch Rayleigh ergodic capacity: e * E1(1)
    capacity = gc.ergodic_capacity_exponential([1.0], [1.0], 1.0)
    approx(capacity, 0.5963473623231941, 1e-7)

    # power allocation agrees with water-filling on horse-race gains
    gains = gc.Market.from_rows([[4.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
    alloc = gc.solve_power_allocation(gains, 1.0, tol=1e-11, max_iter=500_000)
    approx(alloc["allocation"][0], 7 / 8, 1e-6)

    # Laplace-transform order on scaled markets
    x = gc.Market.from_rows([[1.0], [2.0]], [0.5, 0.5])
    y = x.scaled(2.0)
    verdict = gc.lt_order(x, y)
    assert verdict["holds"], verdict
    assert not gc.lt_order(y, x)["holds"]

    # FVSI of the perfect-SI fair race is log 2, both bounds tight
    joint = gc.Market.from_rows(
        [[2.0, 0.0], [0.0, 2.0]], [0.5, 0.5], si_states=[1, 2]
    )
    fvsi = gc.fvsi_report(joint)
    approx(fvsi["v_clamped"], ln2, 1e-9)
    approx(fvsi["mi_bound"], ln2, 1e-12)
    approx(gc.mutual_information(joint), ln2, 1e-12)
    approx(gc.best_stock_entropy(joint), ln2, 1e-12)

    # garbling through a symmetric kernel shrinks the value
    garbled = gc.garble_si(joint, [[0.9, 0.1], [0.1, 0.9]])
    v = gc.fvsi_report(garbled)["v_clamped"]
    h01 = -0.1 * math.log(0.1) - 0.9 * math.log(0.9)
    approx(v, ln2 - h01, 1e-8)

    # SI test: perfect SI detected, independent SI accepted
    samples = gc.Samples.horse_race([0.5, 0.5], [2.0, 2.0], 2000, 7).with_winner_si()
    result = gc.run_si_test(samples, target_fa=0.05)
    assert result["decision"] == "si_useful", result
    assert result["t"] > 3.5
    null_samples = gc.Samples.horse_race([0.5, 0.5], [2.0, 2.0], 5000, 8)
    null_samples = null_samples.with_independent_si(2, 9)
    result = gc.run_si_test(null_samples, target_fa=0.05)
    assert result["decision"] == "si_not_useful", result

    # fractional Kelly at lambda = 0.5 on a unit risky asset: objective
    # log 2, full growth 0 once the cash drag is included
    unit = gc.Market.from_rows([[1.0]], [1.0])
    objective, growth = gc.fractional_kelly_growth(unit, 0.5, [1.0])
    approx(objective, ln2, 1e-12)
    approx(growth, 0.0, 1e-12)

    # convexity of the SI-aided growth along the segment to independence
    probe = gc.convexity_probe(joint, gc.independent_coupling(joint), [0.0, 0.5, 1.0])
    assert probe["convex"], probe
    mid = probe["rows"][1]
    h025 = -0.25 * math.log(0.25) - 0.75 * math.log(0.75)
    approx(mid[1], ln2 - h025, 1e-8)

    # raw statistic: perfect SI on the fair race gives T = 4 exactly
    stat = gc.si_test_statistic(samples, [0.5, 0.5], [0, 1])
    approx(stat["t"], 4.0, 1e-12)

    # worked bound values
    approx(gc.false_alarm_bound(5.0, 1.0, 2, 2), 0.040427681994512805, 1e-10)
    approx(gc.theta_bound(1000, [0.5, 0.5], [0.5, 0.5], [0, 1]), 0.006, 0.0)

    # CSV round trip and quantile SI discretization
    text = "a,b\n1.0,2.0\n1.0,0.5\n2.0,1.0\n0.5,1.0\n"
    samples = gc.Samples.from_csv(text)
    assert len(samples) == 4
    labels = gc.discretize_si([1.0, 2.0, 3.0, 4.0], 2)
    assert labels == [1, 1, 2, 2]

    print("SMOKE TEST PASS")


if __name__ == "__main__":
    main()
