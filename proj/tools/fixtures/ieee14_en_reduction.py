#!/usr/bin/env python3
"""Effective-network reduction of the IEEE 14-bus case.

Writes the pre-fault / fault-on / post-fault stage models consumed by safecct.
Pipeline: Newton power flow on the published case data, generator internal EMFs
behind the transient reactance, constant-impedance loads, Kron reduction onto the
internal nodes.  Stage constants use unit inertia: p_i = P_i - |E_i|^2 G_ii,
K_ij = |E_i||E_j||Y_ij|, d_i = D_i.  Transfer conductance phase shifts are dropped
so that K stays symmetric.

usage: ieee14_en_reduction.py [out.json]
"""
import json
import sys

import numpy as np

BASE_MVA = 100.0

# bus, type, Pd, Qd, Gs, Bs, Vm, Va(deg)
BUS = np.array([
    [1, 3, 0, 0, 0, 0, 1.06, 0], [2, 2, 21.7, 12.7, 0, 0, 1.045, -4.98],
    [3, 2, 94.2, 19, 0, 0, 1.01, -12.72], [4, 1, 47.8, -3.9, 0, 0, 1.019, -10.33],
    [5, 1, 7.6, 1.6, 0, 0, 1.02, -8.78], [6, 2, 11.2, 7.5, 0, 0, 1.07, -14.22],
    [7, 1, 0, 0, 0, 0, 1.062, -13.37], [8, 2, 0, 0, 0, 0, 1.09, -13.36],
    [9, 1, 29.5, 16.6, 0, 19, 1.056, -14.94], [10, 1, 9, 5.8, 0, 0, 1.051, -15.1],
    [11, 1, 3.5, 1.8, 0, 0, 1.057, -14.79], [12, 1, 6.1, 1.6, 0, 0, 1.055, -15.07],
    [13, 1, 13.5, 5.8, 0, 0, 1.05, -15.16], [14, 1, 14.9, 5, 0, 0, 1.036, -16.04]])
# bus, Pg, Qg, Vg
GEN = np.array([[1, 232.4, -16.9, 1.06], [2, 40, 42.4, 1.045], [3, 0, 23.4, 1.01],
                [6, 0, 12.2, 1.07], [8, 0, 17.4, 1.09]])
# from, to, r, x, b, tap
BRANCH = np.array([
    [1, 2, 0.01938, 0.05917, 0.0528, 0], [1, 5, 0.05403, 0.22304, 0.0492, 0],
    [2, 3, 0.04699, 0.19797, 0.0438, 0], [2, 4, 0.05811, 0.17632, 0.034, 0],
    [2, 5, 0.05695, 0.17388, 0.0346, 0], [3, 4, 0.06701, 0.17103, 0.0128, 0],
    [4, 5, 0.01335, 0.04211, 0, 0], [4, 7, 0, 0.20912, 0, 0.978], [4, 9, 0, 0.55618, 0, 0.969],
    [5, 6, 0, 0.25202, 0, 0.932], [6, 11, 0.09498, 0.1989, 0, 0], [6, 12, 0.12291, 0.25581, 0, 0],
    [6, 13, 0.06615, 0.13027, 0, 0], [7, 8, 0, 0.17615, 0, 0], [7, 9, 0, 0.11001, 0, 0],
    [9, 10, 0.03181, 0.0845, 0, 0], [9, 14, 0.12711, 0.27038, 0, 0], [10, 11, 0.08205, 0.19207, 0, 0],
    [12, 13, 0.22092, 0.19988, 0, 0], [13, 14, 0.17093, 0.34802, 0, 0]])

# generator dynamic data: transient reactance, inertia, damping
XD = np.array([0.0050, 8.9916, 16.9450, 2.2604, 20.0000])
H = np.array([185.4630, 12.9333, 1.5781, 0.0010, 0.4621])
D = np.array([0.5000, 664.4750, 989.5800, 780.8900, 772.3950])

FAULT_OUT = ((2, 3), (2, 4), (4, 5), (4, 9), (7, 9))
POST_OUT = ((2, 3), (7, 9))
CASE_BOUNDS = {"lower": [-0.3430, 0.1110, -1.0731, -1.1704, -1.3188],
                "upper": [0.3903, 2.2234, 1.1325, 1.1290, 0.7816]}

N = len(BUS)
GEN_BUS = [int(g[0]) - 1 for g in GEN]


def ybus(outaged=()):
    Y = np.zeros((N, N), complex)
    for f, t, r, x, b, tap in BRANCH:
        f, t = int(f), int(t)
        if (f, t) in outaged:
            continue
        f -= 1
        t -= 1
        ys = 1.0 / (r + 1j * x)
        tap = tap if tap != 0 else 1.0
        Y[f, f] += (ys + 1j * b / 2) / tap**2
        Y[t, t] += ys + 1j * b / 2
        Y[f, t] -= ys / tap
        Y[t, f] -= ys / tap
    for k in range(N):
        Y[k, k] += (BUS[k, 4] + 1j * BUS[k, 5]) / BASE_MVA
    return Y


def power_flow(Y):
    V = BUS[:, 6].copy()
    th = np.zeros(N)
    for g in GEN:
        V[int(g[0]) - 1] = g[3]
    Pg = np.zeros(N)
    for g in GEN:
        Pg[int(g[0]) - 1] += g[1] / BASE_MVA
    Psp = Pg - BUS[:, 2] / BASE_MVA
    Qd = BUS[:, 3] / BASE_MVA
    pv = [k for k in range(N) if BUS[k, 1] == 2]
    pq = [k for k in range(N) if BUS[k, 1] == 1]
    nonref = pv + pq

    def mismatch(x):
        t2, V2 = th.copy(), V.copy()
        t2[nonref] = x[:len(nonref)]
        V2[pq] = x[len(nonref):]
        S = V2 * np.exp(1j * t2) * np.conj(Y @ (V2 * np.exp(1j * t2)))
        return np.r_[Psp[nonref] - S.real[nonref], -Qd[pq] - S.imag[pq]]

    x = np.r_[th[nonref], V[pq]]
    for _ in range(30):
        F = mismatch(x)
        if np.max(np.abs(F)) < 1e-12:
            break
        J = np.zeros((len(x), len(x)))
        h = 1e-7
        for k in range(len(x)):
            e = np.zeros(len(x))
            e[k] = h
            J[:, k] = (mismatch(x + e) - mismatch(x - e)) / (2 * h)
        x = x - np.linalg.solve(J, F)
    th[nonref] = x[:len(nonref)]
    V[pq] = x[len(nonref):]
    return V * np.exp(1j * th)


def reduce(Vc, Sg, E, outaged):
    Yn = ybus(outaged)
    for k in range(N):
        Yn[k, k] += (BUS[k, 2] - 1j * BUS[k, 3]) / BASE_MVA / abs(Vc[k])**2
    m = len(GEN_BUS)
    Yf = np.zeros((N + m, N + m), complex)
    Yf[m:, m:] = Yn
    for i, b in enumerate(GEN_BUS):
        y = 1.0 / (1j * XD[i])
        Yf[i, i] += y
        Yf[m + b, m + b] += y
        Yf[i, m + b] -= y
        Yf[m + b, i] -= y
    Yr = Yf[:m, :m] - Yf[:m, m:] @ np.linalg.solve(Yf[m:, m:], Yf[m:, :m])
    p = Sg.real - np.abs(E)**2 * Yr.real.diagonal()
    K = np.outer(np.abs(E), np.abs(E)) * np.abs(Yr)
    np.fill_diagonal(K, 0.0)
    K = 0.5 * (K + K.T)
    return p, K


def build():
    Y = ybus()
    Vc = power_flow(Y)
    S = Vc * np.conj(Y @ Vc)
    Sg = S[GEN_BUS] + (BUS[GEN_BUS, 2] + 1j * BUS[GEN_BUS, 3]) / BASE_MVA
    E = Vc[GEN_BUS] + 1j * XD * np.conj(Sg / Vc[GEN_BUS])
    stages = {}
    for name, out in (("pre", ()), ("fault", FAULT_OUT), ("post", POST_OUT)):
        p, K = reduce(Vc, Sg, E, out)
        stages[name] = {"p": p.tolist(), "d": D.tolist(), "K": K.tolist()}
    doc = dict(stages)
    doc["t_fault"] = 0.0
    doc["bounds"] = CASE_BOUNDS
    doc["metadata"] = {"names": [f"G{i + 1}" for i in range(len(GEN_BUS))],
                       "H": H.tolist(), "D": D.tolist(), "r": XD.tolist()}
    return doc


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "ieee14_en.json"
    with open(out, "w") as fh:
        json.dump(build(), fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
