#!/usr/bin/env python3
# Copyright 2026 The sensched Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent rebuild of the reference tracking scenario in numpy + cvxpy.

Integrates state, transition and covariance jointly (RK4, 100 substeps per
interval), forms the stacked batch system, and solves the rho = 1 precision
program with Clarabel for each (s_max, blocked) case. Writes
tests/data/reference_scenario.txt.
"""

import pathlib
import sys

import cvxpy as cp
import numpy as np
import scipy.linalg as sl

C_VDP = 0.9
N, P, MY = 6, 10, 6
STATIONS = [(3, -3), (-3, -3), (-3, 3), (3, 3)]


def field(x):
    x1, z1, x2, z2, x3, z3 = x
    return np.array([
        z1, -x1,
        z2, (1 - x2**2 / C_VDP**2) * z2 - x2 / C_VDP,
        -z3, (1 - x3**2 / C_VDP**2) * z3 - x3 / C_VDP])


def jac(x):
    a = np.zeros((N, N))
    a[0, 1], a[1, 0] = 1, -1
    for i, sign in ((2, 1), (4, -1)):
        xx, zz = x[i], x[i + 1]
        a[i, i + 1] = sign
        a[i + 1, i] = -2 * xx * zz / C_VDP**2 - 1 / C_VDP
        a[i + 1, i + 1] = 1 - xx**2 / C_VDP**2
    return a


def outputs(x):
    c = np.zeros((MY, N))
    for i, (a, b) in enumerate(STATIONS):
        d = np.array([x[0] - a, x[1] - b])
        c[i, 0:2] = d / np.linalg.norm(d)
    for i, t in ((4, 2), (5, 4)):
        d = np.array([x[t] - x[0], x[t + 1] - x[1]])
        r = np.linalg.norm(d)
        c[i, t:t + 2] = d / r
        c[i, 0:2] = -d / r
    return c


def scenario():
    tp = 2 * np.pi
    dt = 0.1 * tp
    h = dt / 100
    x = np.array([3, 0, 1.7636, 0.5215, -1.7636, 0.5215])
    bc = np.kron(np.eye(3), np.array([[0], [1]]))
    diffusion = bc @ (0.05**2 * np.eye(3)) @ bc.T
    mu0 = 0.05 * x
    s0 = 0.01 * np.diag(np.abs(mu0))

    def rhs(st):
        xs, ph, sg = st[:N], st[N:N + N * N].reshape(N, N), st[N + N * N:].reshape(N, N)
        a = jac(xs)
        return np.concatenate([field(xs), (a @ ph).ravel(), (a @ sg + sg @ a.T + diffusion).ravel()])

    sig = [s0]
    phis, cs = [], []
    s = s0.copy()
    for _ in range(P):
        st = np.concatenate([x, np.eye(N).ravel(), s.ravel()])
        for _ in range(100):
            k1 = rhs(st)
            k2 = rhs(st + h / 2 * k1)
            k3 = rhs(st + h / 2 * k2)
            k4 = rhs(st + h * k3)
            st = st + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x = st[:N]
        phis.append(st[N:N + N * N].reshape(N, N))
        s = st[N + N * N:].reshape(N, N)
        sig.append(s)
        cs.append(outputs(x))
    qk = [sig[k + 1] - phis[k] @ sig[k] @ phis[k].T for k in range(P)]

    abar = np.zeros((N * P, N))
    acc = np.eye(N)
    for k in range(P):
        acc = phis[k] @ acc
        abar[k * N:(k + 1) * N] = acc
    bbar = np.zeros((N * P, N * P))
    for i in range(P):
        for j in range(i + 1):
            t = np.eye(N)
            for l in range(j + 1, i + 1):
                t = phis[l] @ t
            bbar[i * N:(i + 1) * N, j * N:(j + 1) * N] = t
    sb = abar @ s0 @ abar.T + bbar @ sl.block_diag(*qk) @ bbar.T
    sb = (sb + sb.T) / 2
    w, v = np.linalg.eigh(sb)
    root = v @ np.diag(np.sqrt(np.clip(w, 0, None))) @ v.T
    m = np.zeros((N, N * P))
    m[:, -N:] = np.eye(N)
    return sb, root, sl.block_diag(*cs), m


def reachable(sb, cbar, m, ub):
    act = ub > 0
    c = cbar[act]
    k = m @ sb @ c.T @ np.linalg.inv(c @ sb @ c.T + np.diag(1 / ub[act]))
    return np.trace(m @ sb @ m.T - k @ c @ sb @ m.T)


def solve(root, cbar, m, gamma, ub):
    # Congruence-scaled program: W / gamma, G_j / sqrt(gamma ub_j), s_j / ub_j.
    # Unscaled, Clarabel stops at "optimal_inaccurate" on some cases.
    act = np.where(ub > 0)[0]
    na = len(act)
    w = cp.Variable((N, N), symmetric=True)
    g = cp.Variable((N, na))
    s = cp.Variable(na)
    resid = m @ root / np.sqrt(gamma) - g @ np.diag(np.sqrt(ub[act])) @ (cbar @ root)[act]
    lmi = cp.bmat([
        [w, resid, g],
        [resid.T, np.eye(N * P), np.zeros((N * P, na))],
        [g.T, np.zeros((na, N * P)), cp.diag(s)]])
    total = ub[act].sum()
    prob = cp.Problem(
        cp.Minimize(ub[act] @ s / total),
        [(lmi + lmi.T) / 2 >> 0, cp.trace(w) <= 1, s >= 0, s <= 1])
    prob.solve(solver=cp.CLARABEL)
    return prob.status, prob.value * total


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    sb, root, cbar, m = scenario()
    prior = np.trace(m @ sb @ m.T)
    gamma = 0.1 * prior
    lines = [f"prior_trace {float(prior)!r}", f"gamma {float(gamma)!r}"]
    for blocked in (0, 1):
        for smax in (450.0, 750.0, 1200.0):
            ub = np.full(MY * P, smax)
            if blocked:
                ub[9 * MY:9 * MY + 3] = 0
            reach = reachable(sb, cbar, m, ub)
            status, value = solve(root, cbar, m, gamma, ub)
            lines.append(f"case {smax:g} {blocked} {float(reach)!r} {status} {float(value)!r}")
            print(lines[-1], flush=True)
    (out / "reference_scenario.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
