#!/usr/bin/env python3
"""Solve a sparse SDPA (.dat-s) file with cvxpy and print the optimal value.

Usage: solve_sdpa.py FILE [--solver CLARABEL]
"""
import argparse
import sys

import cvxpy as cp
import numpy as np


def read_sdpa(path):
    offset = 0.0
    lines = []
    with open(path) as f:
        for raw in f:
            s = raw.strip()
            if not s:
                continue
            if s[0] in '*"':
                parts = s.split()
                if len(parts) >= 4 and parts[1] == "objective" and parts[2] == "offset":
                    offset = float(parts[3])
                continue
            lines.append(s.replace(",", " ").replace("{", " ").replace("}", " "))
    m = int(lines[0].split()[0])
    nblocks = int(lines[1].split()[0])
    sizes = [int(t) for t in lines[2].split()[:nblocks]]
    c = np.array([float(t) for t in lines[3].split()[:m]])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for s in lines[4:]:
        t = s.split()
        k, b, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        mats[k][b][i, j] = v
        mats[k][b][j, i] = v
    return c, sizes, mats, offset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("file")
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args()
    c, sizes, mats, offset = read_sdpa(args.file)
    m = len(c)
    x = cp.Variable(m)
    cons = []
    for b, s in enumerate(sizes):
        expr = -mats[0][b]
        expr = expr + sum(x[k] * mats[k + 1][b] for k in range(m) if np.any(mats[k + 1][b]))
        if s > 0:
            cons.append(0.5 * (expr + expr.T) >> 0)
        else:
            cons.append(cp.diag(expr) >= 0)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=args.solver)
    print(prob.status, prob.value + offset if prob.value is not None else None)
    return 0


if __name__ == "__main__":
    sys.exit(main())
