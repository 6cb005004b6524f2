#!/usr/bin/env python3
"""Generate the synthetic inter-city mode choice clone used by the test suite.

Same schema as the RP part of the public Apollo mode choice data: 500
individuals with two trips each, alternatives car/bus/air/rail, in-vehicle
time (minutes), cost (pounds), access time (minutes, non-car modes only),
plus female/business/income covariates.

Rail cost is built to fall with rail time (fast services cost more), so a
specification that drops rail time and gives rail its own cost coefficient
picks up a positive cost sign. The exclusion fixtures rely on that.

Usage: make_synthetic_modechoice.py OUT.csv
"""
import sys

import numpy as np

ALTS = ["car", "bus", "air", "rail"]

TRUE = {
    "asc_bus": -0.9,
    "asc_air": -0.4,
    "asc_rail": 0.3,
    "b_time": -0.0099,
    "b_cost": -0.05,
    "b_access": -0.016,
    "b_time_business": -0.004,
}


def main(out):
    rng = np.random.default_rng(20250715)
    n_ind, per = 500, 2
    n = n_ind * per
    ids = np.repeat(np.arange(1, n_ind + 1), per)
    female = np.repeat(rng.integers(0, 2, n_ind), per)
    business = rng.integers(0, 2, n) * (rng.random(n) < 0.7)
    income = np.repeat(np.round(rng.uniform(15000, 75000, n_ind), 0), per)

    time_car = np.round(rng.uniform(120, 420, n), 0)
    cost_car = np.round(rng.uniform(20, 80, n), 2)
    time_bus = np.round(rng.uniform(180, 500, n), 0)
    cost_bus = np.round(rng.uniform(10, 40, n), 2)
    access_bus = np.round(rng.uniform(5, 40, n), 0)
    time_air = np.round(rng.uniform(50, 110, n), 0)
    cost_air = np.round(rng.uniform(40, 120, n), 2)
    access_air = np.round(rng.uniform(20, 60, n), 0)
    time_rail = np.round(rng.uniform(100, 250, n), 0)
    cost_rail = np.round(55 - 0.1 * (time_rail - 100) + rng.normal(0, 2, n), 2)
    access_rail = np.round(rng.uniform(10, 45, n), 0)

    av = np.zeros((n, 4), dtype=int)
    p_av = [0.7, 0.8, 0.6, 0.85]
    for i in range(n):
        while True:
            row = (rng.random(4) < p_av).astype(int)
            if row.sum() >= 2:
                break
        av[i] = row

    t = TRUE
    tb = t["b_time"] + t["b_time_business"] * business
    v = np.column_stack([
        tb * time_car + t["b_cost"] * cost_car,
        t["asc_bus"] + tb * time_bus + t["b_cost"] * cost_bus + t["b_access"] * access_bus,
        t["asc_air"] + tb * time_air + t["b_cost"] * cost_air + t["b_access"] * access_air,
        t["asc_rail"] + tb * time_rail + t["b_cost"] * cost_rail + t["b_access"] * access_rail,
    ])
    u = v + rng.gumbel(size=(n, 4))
    u[av == 0] = -np.inf
    choice = np.argmax(u, axis=1) + 1

    cols = ["ID", "av_car", "av_bus", "av_air", "av_rail",
            "time_car", "cost_car", "time_bus", "cost_bus", "access_bus",
            "time_air", "cost_air", "access_air", "time_rail", "cost_rail",
            "access_rail", "female", "business", "income", "choice"]
    data = [ids, av[:, 0], av[:, 1], av[:, 2], av[:, 3],
            time_car, cost_car, time_bus, cost_bus, access_bus,
            time_air, cost_air, access_air, time_rail, cost_rail,
            access_rail, female, business, income, choice]

    def fmt(x):
        x = float(x)
        return str(int(x)) if x == int(x) else repr(round(x, 2))

    with open(out, "w", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for i in range(n):
            f.write(",".join(fmt(c[i]) for c in data) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
