#!/usr/bin/env python3
"""Regenerate the example problem documents in this directory."""
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent


def factor(var, deriv, where="interior"):
    return {"var": var, "deriv": deriv, "where": where}


def term(f1, f2, const=None, params=None):
    coeff = {}
    if const is not None:
        coeff["const"] = const
    if params:
        coeff["params"] = params
    return {"coeff": coeff, "factors": [f1, f2]}


def dirichlet(*names):
    bcs = []
    for v in names:
        bcs.append({f"{v}:0:-1": 1.0})
        bcs.append({f"{v}:0:+1": 1.0})
    return bcs


def shear(xi):
    terms = []
    for v in ("u", "v"):
        terms.append(term(factor(v, 2), factor(v, 2), const=[16.0 / xi**2]))
        terms.append(term(factor(v, 1), factor(v, 1), const=[8.0]))
        terms.append(term(factor(v, 0), factor(v, 0), const=[xi**2]))
    terms.append(term(factor("v", 0), factor("u", 1), params={"gamma": [2.0 / xi]}))
    terms.append(term(factor("u", 0), factor("v", 1), params={"gamma": [-2.0 / xi]}))
    bcs = []
    for v in ("u", "v"):
        bcs += [{f"{v}:0:-1": 1.0}, {f"{v}:0:+1": 1.0}, {f"{v}:1:-1": 1.0}, {f"{v}:2:+1": 1.0}]
    return {
        "variables": [{"name": "u", "k": 2, "l": 2}, {"name": "v", "k": 2, "l": 2}],
        "parameters": ["gamma"],
        "cost": [-1.0],
        "domain": [-1.0, 1.0],
        "terms": terms,
        "bcs": bcs,
    }


def toy():
    return {
        "variables": [{"name": "u", "k": 1, "l": 1}, {"name": "v", "k": 1, "l": 1}],
        "parameters": ["g1", "g2"],
        "cost": [0.0, 1.0],
        "domain": [-1.0, 1.0],
        "terms": [
            term(factor("u", 1), factor("u", 1), const=[1.0]),
            term(factor("v", 1), factor("v", 1), const=[1.0]),
            term(factor("u", 1), factor("v", 1), params={"g1": [0.0, 0.0, 1.0]}),
            term(factor("u", 0), factor("v", 0), params={"g2": [2.0]}),
        ],
        "bcs": dirichlet("u", "v"),
    }


def pathology():
    return {
        "variables": [{"name": "u", "k": 1, "l": 1}, {"name": "v", "k": 1, "l": 1}],
        "parameters": ["gamma"],
        "cost": [-1.0],
        "domain": [-1.0, 1.0],
        "terms": [
            term(factor("u", 1), factor("u", 1), const=[0.0, 0.0, 1.0]),
            term(factor("v", 1), factor("v", 1), const=[1.0]),
            term(factor("u", 0), factor("v", 0), params={"gamma": [-1.0]}),
        ],
        "bcs": dirichlet("u", "v"),
    }


A = [[1.0, 1.5], [5.0, 0.2]]


def pde(dp):
    """Lyapunov conditions for w_t = gamma w_xx + A w on [0,1], Dirichlet BCs.

    (u1, v1) carry  int w^T (P - I) w >= 0,
    (u2, v2) carry  int w^T P (-gamma w_xx - A w) >= 0.
    P = [[p11, p12], [p12, p22]] with monomial coefficients p{ij}_{d}.
    """
    pnames = {(i, j): [f"p{i + 1}{j + 1}_{d}" for d in range(dp + 1)] for (i, j) in ((0, 0), (0, 1), (1, 1))}

    def P(i, j):
        return pnames[(min(i, j), max(i, j))]

    def mono(d, scale=1.0):
        c = [0.0] * (d + 1)
        c[d] = scale
        return c

    params = ["gamma"] + [n for key in ((0, 0), (0, 1), (1, 1)) for n in pnames[key]]
    w1, w2 = ("u1", "v1"), ("u2", "v2")
    terms = []
    for i in range(2):
        for j in range(2):
            # w_i P_ij w_j - w_i delta_ij w_j
            pr = {n: mono(d) for d, n in enumerate(P(i, j))}
            terms.append(term(factor(w1[i], 0), factor(w1[j], 0), const=[-1.0] if i == j else None, params=pr))
            # -gamma w_i P_ij w_j''
            pr = {f"gamma*{n}": mono(d, -1.0) for d, n in enumerate(P(i, j))}
            terms.append(term(factor(w2[i], 0), factor(w2[j], 2), params=pr))
            # -w_i (PA)_ij w_j
            pr = {}
            for m in range(2):
                for d, n in enumerate(P(i, m)):
                    pr.setdefault(n, [0.0] * (d + 1))
                    pr[n][d] += -A[m][j]
            terms.append(term(factor(w2[i], 0), factor(w2[j], 0), params=pr))
    return {
        "variables": [{"name": n, "k": 0, "l": 0} for n in w1] + [{"name": n, "k": 2, "l": 2} for n in w2],
        "parameters": params,
        "cost": [1.0] + [0.0] * (len(params) - 1),
        "domain": [0.0, 1.0],
        "terms": terms,
        "bcs": dirichlet(*w1, *w2),
    }


def pde_identity():
    """P = I: only the decay condition remains, gamma is minimised directly."""
    w = ("u", "v")
    terms = []
    for i in range(2):
        terms.append(term(factor(w[i], 0), factor(w[i], 2), params={"gamma": [-1.0]}))
        for j in range(2):
            terms.append(term(factor(w[i], 0), factor(w[j], 0), const=[-A[i][j]]))
    return {
        "variables": [{"name": n, "k": 2, "l": 2} for n in w],
        "parameters": ["gamma"],
        "cost": [1.0],
        "domain": [0.0, 1.0],
        "terms": terms,
        "bcs": dirichlet(*w),
    }


def main():
    docs = {
        "shear_xi3.json": shear(3.0),
        "shear_xi9.json": shear(9.0),
        "toy.json": toy(),
        "pathology.json": pathology(),
        "pde_identity.json": pde_identity(),
    }
    for dp in (0, 2, 4, 6):
        docs[f"pde_dp{dp}.json"] = pde(dp)
    for name, doc in docs.items():
        (HERE / name).write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
