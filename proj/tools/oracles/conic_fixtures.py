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

"""Random SDPs in SDPA sparse format with objectives from Clarabel (via cvxpy).

Writes tests/data/conic_NN.dat-s and tests/data/conic_objectives.txt.
"""

import pathlib
import sys

import cvxpy as cp
import numpy as np


def random_problem(rng, m, dims, n_lp):
    # Strictly feasible at v0; bounded since c = A^T(X0, y0) with X0 > 0, y0 > 0.
    v0 = rng.normal(size=m)
    blocks = []
    c = np.zeros(m)
    for d in dims:
        f = [rng.normal(size=(d, d)) for _ in range(m)]
        f = [a * (rng.random(size=(d, d)) < 0.6) for a in f]
        f = [0.5 * (a + a.T) for a in f]
        s = sum(v * a for v, a in zip(v0, f))
        g = rng.normal(size=(d, d))
        f0 = g @ g.T + 0.1 * np.eye(d) - s
        x0 = rng.normal(size=(d, d))
        x0 = x0 @ x0.T + np.eye(d)
        c += np.array([np.sum(a * x0) for a in f])
        blocks.append((f0, f))
    a_lp = rng.normal(size=(n_lp, m))
    b_lp = a_lp @ v0 - rng.random(n_lp) - 0.1  # a v >= b
    c += a_lp.T @ (rng.random(n_lp) + 0.1)
    return c, blocks, a_lp, b_lp


def solve(c, blocks, a_lp, b_lp):
    v = cp.Variable(len(c))
    cons = []
    for f0, f in blocks:
        expr = f0 + sum(v[i] * f[i] for i in range(len(f)))
        cons.append(0.5 * (expr + expr.T) >> 0)
    if len(b_lp):
        cons.append(a_lp @ v >= b_lp)
    prob = cp.Problem(cp.Minimize(c @ v), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
    assert prob.status == cp.OPTIMAL, prob.status
    return prob.value


def write_sdpa(path, c, blocks, a_lp, b_lp):
    m = len(c)
    lines = [str(m), str(len(blocks) + (1 if len(b_lp) else 0))]
    sizes = [str(f0.shape[0]) for f0, _ in blocks]
    if len(b_lp):
        sizes.append(str(-len(b_lp)))
    lines.append(" ".join(sizes))
    lines.append(" ".join(repr(float(x)) for x in c))
    for j, (f0, f) in enumerate(blocks, start=1):
        d = f0.shape[0]
        for var, mat in [(0, -f0)] + [(i + 1, a) for i, a in enumerate(f)]:
            for r in range(d):
                for col in range(r, d):
                    if mat[r, col] != 0.0:
                        lines.append(f"{var} {j} {r + 1} {col + 1} {float(mat[r, col])!r}")
    if len(b_lp):
        j = len(blocks) + 1
        for r in range(len(b_lp)):
            lines.append(f"0 {j} {r + 1} {r + 1} {float(b_lp[r])!r}")
            for i in range(m):
                lines.append(f"{i + 1} {j} {r + 1} {r + 1} {float(a_lp[r, i])!r}")
    path.write_text("\n".join(lines) + "\n")


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20261019)
    shapes = [(3, [3], 0), (5, [4], 2), (8, [5, 3], 0), (10, [6], 4), (12, [4, 4, 2], 3),
              (15, [8], 0), (20, [7, 5], 6), (25, [10], 2)]
    rows = []
    for idx, (m, dims, n_lp) in enumerate(shapes):
        c, blocks, a_lp, b_lp = random_problem(rng, m, dims, n_lp)
        value = solve(c, blocks, a_lp, b_lp)
        name = f"conic_{idx:02d}.dat-s"
        write_sdpa(out / name, c, blocks, a_lp, b_lp)
        rows.append(f"{name} {float(value)!r}")
    (out / "conic_objectives.txt").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
