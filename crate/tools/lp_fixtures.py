"""Writes deficiency LP fixtures solved with SciPy's HiGHS backend.

Usage: python3 tools/lp_fixtures.py > crates/core/tests/fixtures/deficiency_lp.json
"""
import json
import sys

import numpy as np
from scipy.optimize import linprog


def stochastic(rng, rows, cols):
    m = rng.exponential(size=(rows, cols))
    m[rng.random((rows, cols)) < 0.15] = 0.0
    for c in range(cols):
        if m[:, c].sum() == 0.0:
            m[rng.integers(rows), c] = 1.0
    return m / m.sum(axis=0)


def solve(t, u, prior):
    """min over column-stochastic V of sum_th w(th) |U(.|th) - V T(.|th)|_1,
    or the max over th when prior is None."""
    nx, nt = t.shape
    ny = u.shape[0]
    nv = nx * ny
    ne = ny * nt
    minimax = prior is None
    n = nv + ne + (1 if minimax else 0)
    c = np.zeros(n)
    if minimax:
        c[-1] = 1.0
    else:
        for th in range(nt):
            c[nv + th * ny: nv + (th + 1) * ny] = prior[th]
    a_ub, b_ub = [], []
    for th in range(nt):
        for y in range(ny):
            for sign in (1.0, -1.0):
                row = np.zeros(n)
                for x in range(nx):
                    row[x * ny + y] = -sign * t[x, th]
                row[nv + th * ny + y] = -1.0
                a_ub.append(row)
                b_ub.append(-sign * u[y, th])
        if minimax:
            row = np.zeros(n)
            row[nv + th * ny: nv + (th + 1) * ny] = 1.0
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(0.0)
    a_eq = np.zeros((nx, n))
    for x in range(nx):
        a_eq[x, x * ny:(x + 1) * ny] = 1.0
    res = linprog(c, A_ub=np.array(a_ub), b_ub=b_ub, A_eq=a_eq, b_eq=np.ones(nx),
                  bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)


def main():
    rng = np.random.default_rng(20240607)
    cases = []
    for i in range(120):
        nt, nx, ny = (int(v) for v in rng.integers(1, 7, size=3))
        nt = max(nt, 2)
        t = stochastic(rng, nx, nt)
        u = stochastic(rng, ny, nt)
        prior = rng.exponential(size=nt)
        prior[rng.random(nt) < 0.15] = 0.0
        if prior.sum() == 0.0:
            prior[0] = 1.0
        prior /= prior.sum()
        cases.append({
            "t": t.tolist(),
            "u": u.tolist(),
            "prior": prior.tolist(),
            "weighted": solve(t, u, prior),
            "minimax": solve(t, u, None),
        })
    json.dump({"solver": "scipy-highs", "cases": cases}, sys.stdout)


if __name__ == "__main__":
    main()
