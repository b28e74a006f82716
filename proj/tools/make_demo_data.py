#!/usr/bin/env python3
"""Writes the synthetic demonstration dataset under data/demo.

The numbers are invented. They are shaped so that the published summary
moments hold: distance mean/sd and the selected-state distances, the
interpolated nominal and deflated real price means, and ten zero mining
observations inside the price window.

Usage: python3 tools/make_demo_data.py [OUT_DIR]
"""

import csv
import pathlib
import sys

import numpy as np
from scipy.optimize import brentq

RNG = np.random.default_rng(20211002)
YEARS = list(range(1998, 2020))
PRICE_YEARS = list(range(2000, 2018))
CDMX_TO_BORDER = 780.0

# (id, name, 2010 population in thousands, south flag)
STATES = [
    (1, "Aguascalientes", 1185, 0), (2, "Baja California", 3155, 0), (3, "Baja California Sur", 637, 0),
    (4, "Campeche", 822, 1), (5, "Coahuila", 2748, 0), (6, "Colima", 650, 0), (7, "Chiapas", 4797, 1),
    (8, "Chihuahua", 3406, 0), (9, "Ciudad de México", 8851, 0), (10, "Durango", 1633, 0),
    (11, "Guanajuato", 5486, 0), (12, "Guerrero", 3388, 1), (13, "Hidalgo", 2665, 0), (14, "Jalisco", 7350, 0),
    (15, "México", 15175, 0), (16, "Michoacán", 4351, 0), (17, "Morelos", 1777, 1), (18, "Nayarit", 1085, 0),
    (19, "Nuevo León", 4653, 0), (20, "Oaxaca", 3801, 1), (21, "Puebla", 5779, 1), (22, "Querétaro", 1827, 0),
    (23, "Quintana Roo", 1325, 1), (24, "San Luis Potosí", 2585, 0), (25, "Sinaloa", 2767, 0),
    (26, "Sonora", 2662, 0), (27, "Tabasco", 2238, 1), (28, "Tamaulipas", 3268, 0), (29, "Tlaxcala", 1169, 1),
    (30, "Veracruz", 7643, 1), (31, "Yucatán", 1955, 1), (32, "Zacatecas", 1491, 0),
]

# Effective border distances: fixed for the selected states, rough guesses
# for the rest (rescaled below).
FIXED_DIST = {26: 184, 28: 209, 10: 488, 1: 610, 15: 788, 20: 1188, 7: 1605, 23: 2032}
GUESS_DIST = {
    2: 132, 3: 900, 5: 250, 6: 900, 8: 300, 9: CDMX_TO_BORDER, 11: 680, 13: 720, 14: 760, 16: 820, 18: 700,
    19: 200, 22: 700, 24: 540, 25: 520, 32: 520,
    4: 1800, 12: 1060, 17: 860, 21: 910, 27: 1500, 29: 890, 30: 1150, 31: 1950,
}
PINNED_MIN = 2  # Baja California keeps 132 km

BORDERS = {
    1: [14, 32], 2: [3, 26], 4: [23, 31, 27], 5: [8, 10, 32, 24, 19], 6: [14, 16], 7: [27, 30, 20],
    8: [26, 25, 10, 5], 9: [15, 17], 10: [8, 5, 32, 18, 25, 14], 11: [14, 32, 24, 22, 16],
    12: [16, 15, 17, 21, 20], 13: [24, 30, 21, 29, 15, 22], 14: [18, 32, 1, 11, 16, 6],
    15: [22, 13, 29, 21, 17, 12, 16, 9], 16: [6, 14, 11, 22, 15, 12], 17: [15, 9, 21, 12],
    18: [25, 10, 32, 14], 19: [5, 28, 24, 32], 20: [12, 21, 30, 7], 21: [30, 13, 29, 15, 17, 12, 20],
    22: [24, 11, 16, 15, 13], 23: [31, 4], 24: [32, 19, 28, 30, 13, 22, 11, 5], 25: [26, 8, 10, 18],
    26: [2, 8, 25], 27: [30, 7, 4], 28: [19, 24, 30], 29: [15, 13, 21], 30: [28, 24, 13, 21, 20, 7, 27],
    31: [4, 23], 32: [10, 5, 19, 24, 11, 1, 14, 18],
}

# States without a surveyed city; their prices come from neighbours.
UNOBSERVED_PRICE = {3, 4, 6, 7, 12, 18, 20, 23, 29, 31, 32, 17}

IMPORT_PRICE = [2.10, 2.30, 4.20, 4.30, 3.30, 5.60, 6.10, 8.25, 6.90, 7.00, 8.20, 4.00,
                4.60, 4.20, 2.90, 3.80, 4.50, 2.70, 2.50, 3.10, 3.20, 2.60]
WARMUP_PRICE = {1995: 1.60, 1996: 2.20, 1997: 2.40}
DEFLATOR = [38.5, 44.1, 48.6, 51.3, 54.8, 59.0, 63.0, 66.0, 69.5, 73.0, 77.5, 80.7,
            84.0, 88.2, 91.6, 93.0, 97.1, 100.0, 105.4, 112.2, 117.7, 122.0]

# Published moments the demo data reproduces.
DIST_MEAN, DIST_SD, SOUTH_MEAN = 819.38, 499.97, 1348.8
NOMINAL_MEAN, REAL_MEAN, NOMINAL_SD = 143.16, 182.39, 46.53
NGI_MEAN, NGI_SD = 606.29, 531.68
PRICE_MEAN, PRICE_SD = 4.33, 1.70


def distances():
    ids = [s[0] for s in STATES]
    south = {s[0] for s in STATES if s[3]}
    d = {i: float(FIXED_DIST.get(i, GUESS_DIST.get(i, 0.0))) for i in ids}
    free_south = [i for i in ids if i in south and i not in FIXED_DIST]
    free_north = [i for i in ids if i not in south and i not in FIXED_DIST and i not in (PINNED_MIN, 9)]
    # southern free states shift to hit the southern mean
    shift = (SOUTH_MEAN * len(south) - sum(d[i] for i in south)) / len(free_south)
    for i in free_south:
        d[i] += shift
    # northern free states: affine map x -> a + b x hits the overall mean and sd
    x0 = np.array([d[i] for i in free_north])
    target_sum = DIST_MEAN * len(ids) - sum(d[i] for i in ids if i not in free_north)

    def sd_gap(b):
        a = (target_sum - b * x0.sum()) / len(x0)
        trial = dict(d)
        for i, v in zip(free_north, a + b * x0):
            trial[i] = v
        # the summary is taken over the state x year panel column
        return np.std([trial[i] for i in ids] * len(YEARS), ddof=1) - DIST_SD

    b = brentq(sd_gap, 0.01, 5.0)
    a = (target_sum - b * x0.sum()) / len(x0)
    for i, v in zip(free_north, a + b * x0):
        d[i] = v
    assert min(d.values()) >= 132 - 1e-9 and max(d.values()) <= 2032 + 1e-9, d
    return d, south


def ar3_predictions(series):
    years = sorted(series)
    x = np.array([series[y] for y in years])
    rows = [[1.0, x[t - 1], x[t - 2], x[t - 3]] for t in range(3, len(x))]
    coef, *_ = np.linalg.lstsq(np.array(rows), x[3:], rcond=None)
    return {years[t]: float(np.dot(coef, [1.0, x[t - 1], x[t - 2], x[t - 3]])) for t in range(3, len(x))}


def affine_to(x, mean, sd):
    x = np.asarray(x, dtype=float)
    return mean + (x - x.mean()) / x.std(ddof=1) * sd


def interpolate(prices, adjacency, ids):
    """Neighbour averaging, fill once per state, repeated until complete."""
    out = dict(prices)
    while True:
        missing = [i for i in ids if out.get(i) is None]
        if not missing:
            return out
        filled = {}
        for i in missing:
            vals = [out[n] for n in adjacency[i] if out.get(n) is not None]
            if vals:
                filled[i] = sum(vals) / len(vals)
        assert filled, "disconnected price graph"
        out.update(filled)


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = [s[0] for s in STATES]
    dist, south = distances()
    direct = {i: (None if i in south else dist[i]) for i in ids}
    to_cdmx = {i: (dist[i] - CDMX_TO_BORDER if i in south else None) for i in ids}

    adjacency = {i: set() for i in ids}
    for a, ns in BORDERS.items():
        for n in ns:
            adjacency[a].add(n)
            adjacency[n].add(a)

    # import price and volume
    price = dict(zip(YEARS, affine_to(IMPORT_PRICE, PRICE_MEAN, PRICE_SD)))
    full_price = {**WARMUP_PRICE, **price}
    ar3 = ar3_predictions(full_price)
    lag1 = {y: full_price[y - 1] for y in YEARS}
    u = RNG.normal(0.0, 1.0, len(YEARS))
    raw_ngi = [40.0 * (y - 2008.5) + 160.0 * (lag1[y] - PRICE_MEAN) + 140.0 * (ar3[y] - PRICE_MEAN)
               + 60.0 * u[k] for k, y in enumerate(YEARS)]
    x = affine_to(raw_ngi, NGI_MEAN, NGI_SD)
    if x.min() < 53.13:  # keep the mean, pin the minimum, shrink the spread
        x = 53.13 + (x - x.min()) * (NGI_MEAN - 53.13) / (x.mean() - x.min())
    ngi = dict(zip(YEARS, x))
    year_shock = dict(zip(YEARS, u))

    pop = {(i, y): p * 1.012 ** (y - 2010) * (1.0 + 0.01 * RNG.normal())
           for i, _, p, _ in STATES for y in YEARS}

    mu = {i: RNG.normal(0.0, 50000.0) for i in ids}
    mu_mining = {i: float(np.exp(RNG.normal(7.4, 1.0))) for i in ids}
    zero_cells = {(3, y) for y in range(2001, 2006)} | {(29, y) for y in range(2010, 2015)}
    emp, mining = {}, {}
    for i in ids:
        for y in YEARS:
            e = (371.97 * pop[i, y] + 276.96 * ngi[y] - 0.1831 * ngi[y] * dist[i] + mu[i]
                 + 20000.0 * RNG.normal() + 15000.0 * year_shock[y])
            emp[i, y] = max(e, 150000.0)
            m = (mu_mining[i] + 0.8 * pop[i, y] + 2.7 * ngi[y] - 0.0035 * ngi[y] * dist[i]
                 + 600.0 * RNG.normal())
            mining[i, y] = 0.0 if (i, y) in zero_cells else max(m, 60.0)

    # nominal state prices: observed for surveyed states, solved so that the
    # interpolated nominal and deflated real means hit their targets
    defl = dict(zip(YEARS, DEFLATOR))
    w = {y: 100.0 / defl[y] for y in PRICE_YEARS}
    level = {y: 80.0 + 6.5 * (y - 2000) + 12.0 * np.sin(0.6 * (y - 2000)) for y in PRICE_YEARS}
    base = {(i, y): level[y] * (1.0 + 0.00012 * dist[i]) * (1.0 + 0.05 * RNG.normal())
            for i in ids if i not in UNOBSERVED_PRICE for y in PRICE_YEARS}

    def complete(scale, alpha, beta):
        table = {}
        for y in PRICE_YEARS:
            obs = {i: (scale * base[i, y] + alpha + beta * w[y]) if (i, y) in base else None for i in ids}
            for i, v in interpolate(obs, adjacency, ids).items():
                table[i, y] = v
        return table

    def solve_means(scale):
        # means are linear in (alpha, beta): solve the 2x2 system
        m0 = complete(scale, 0.0, 0.0)
        n0 = np.mean(list(m0.values()))
        r0 = np.mean([v * w[y] for (i, y), v in m0.items()])
        mw = np.mean([w[y] for (_, y) in m0])
        mw2 = np.mean([w[y] ** 2 for (_, y) in m0])
        a = np.array([[1.0, mw], [mw, mw2]])
        rhs = np.array([NOMINAL_MEAN - n0, REAL_MEAN - r0])
        return np.linalg.solve(a, rhs)

    def sd_gap(scale):
        alpha, beta = solve_means(scale)
        return np.std(list(complete(scale, alpha, beta).values()), ddof=1) - NOMINAL_SD

    scale = brentq(sd_gap, 0.05, 5.0)
    alpha, beta = solve_means(scale)
    observed = {k: scale * v + alpha + beta * w[k[1]] for k, v in base.items()}
    assert min(observed.values()) > 0

    def write(name, header, rows):
        with open(out / name, "w", newline="", encoding="utf-8") as f:
            wr = csv.writer(f, lineterminator="\n")
            wr.writerow(header)
            wr.writerows(rows)

    fmt = lambda v, d=6: "" if v is None else f"{v:.{d}f}"
    write("states.csv", ["state_id", "state_name", "dist_border_km", "dist_cdmx_km", "is_south"],
          [[i, n, fmt(direct[i]), fmt(to_cdmx[i]), s] for i, n, _, s in STATES])
    write("employment.csv", ["state_id", "year", "emp_nonmining_thousands", "emp_mining_thousands"],
          [[i, y, fmt(emp[i, y] / 1000.0), fmt(mining[i, y] / 1000.0)] for i in ids for y in YEARS])
    write("population.csv", ["state_id", "year", "pop_thousands"],
          [[i, y, fmt(pop[i, y], 3)] for i in ids for y in YEARS])
    write("imports.csv", ["year", "ngi_million_mcf", "import_price_usd_mcf"],
          [[y, fmt(ngi[y], 4), fmt(price[y], 4)] for y in YEARS])
    write("prices.csv", ["state_id", "year", "ng_price_nominal_pesos_gj"],
          [[i, y, fmt(observed.get((i, y)), 6)] for i in ids for y in PRICE_YEARS])
    write("deflator.csv", ["year", "gdp_deflator_2015base"], [[y, fmt(defl[y], 1)] for y in YEARS])
    write("adjacency.csv", ["state_id", "neighbor_id"],
          [[a, n] for a in ids for n in sorted(adjacency[a])])
    write("warmup.csv", ["year", "import_price_usd_mcf"], [[y, fmt(v, 4)] for y, v in WARMUP_PRICE.items()])

    done = complete(scale, alpha, beta)
    print(f"dist mean {np.mean(list(dist.values())):.4f} sd {np.std(list(dist.values()) * len(YEARS), ddof=1):.4f} "
          f"south mean {np.mean([dist[i] for i in south]):.4f}")
    print(f"nominal mean {np.mean(list(done.values())):.4f} "
          f"real mean {np.mean([v * w[y] for (i, y), v in done.items()]):.4f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "data" / "demo")
