"""Regenerate the frozen oracle outputs in ``fixtures/``: ``python3 tests/freeze_fixtures.py``.

Only the oracles and plain-data constructions are used here; the package is
imported solely to build inputs (random matrices and example matrices).
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from helpers import random_rows  # noqa: E402

OUT = Path(__file__).parent / "fixtures"
SEED = 20261015


def s(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def mat(rows) -> list[list[str]]:
    return [[s(x) for x in r] for r in rows]


def ladder_rows(q: list[Fraction], n: int) -> list[list[Fraction]]:
    rows = [[Fraction(int(j == 0)) for j in range(n + 1)] for _ in range(n + 1)]
    for a in range(1, n + 1):
        rows[a] = [Fraction(0)] * (n + 1)
    rows[1][n] += 1
    for a in range(2, n + 1):
        rows[a][a - 1] += q[a - 2]
        rows[a][n] += 1 - q[a - 2]
    return rows


def splitting_rows(n: int) -> list[list[Fraction]]:
    rows = [[Fraction(int(j == 0)) for j in range(n + 1)]]
    for a in range(1, n + 1):
        r = [Fraction(0)] * (n + 1)
        if a <= 2:
            r[n - 1] += Fraction(1, 2)
            r[n] += Fraction(1, 2)
        else:
            r[a - 2] = Fraction(1)
        rows.append(r)
    return rows


def entry_coefficients(top_rows: list[list[Fraction]], level: int) -> list[list[Fraction]]:
    """``C_{N,a}`` for ``N < level``: first entry into ``0..N`` from ``N+1`` in the level-``N+1`` matrix."""
    out = []
    for n in range(level):
        k = oracles.absorption_projection(top_rows, n + 1)
        top = n + 1
        p = k[top][top]
        if p == 1:
            out.append([Fraction(int(a == 0)) for a in range(n + 1)])
        else:
            out.append([k[top][a] / (1 - p) for a in range(n + 1)])
    return out


def d2_ineqs(c: list[list[Fraction]], big_a: int):
    ineqs = []
    for i in range(big_a):
        ineqs.append(([Fraction(int(j == i)) for j in range(big_a)], Fraction(1)))
        ineqs.append(([-Fraction(int(j == i)) for j in range(big_a)], Fraction(0)))
    for a in range(big_a):
        row = [Fraction(0)] * big_a
        if a >= 1:
            row[a - 1] -= 1
        for m in range(a, big_a):
            row[m] += c[m][a]
        ineqs.append((row, Fraction(1) if a == 0 else Fraction(0)))
    return ineqs


def main() -> None:
    rng = np.random.default_rng(SEED)
    OUT.mkdir(exist_ok=True)

    cases = []
    for _ in range(60):
        n = int(rng.integers(3, 7))
        rows = random_rows(n, rng)
        cases.append({"rows": mat(rows), "projections": {str(m): mat(oracles.absorption_projection(rows, m)) for m in range(1, n)}})
    (OUT / "projection_oracle.json").write_text(json.dumps(cases, indent=1))

    laws = []
    for _ in range(20):
        m = int(rng.integers(1, 7))
        j1 = Fraction(int(rng.integers(0, 5)), 4)
        holds = [[Fraction(int(rng.integers(0, 6)), 5) for _ in range(n + 1)] for n in range(1, m)]
        laws.append(
            {
                "nu1": [s(1 - j1), s(j1)],
                "holds": [[s(x) for x in h] for h in holds],
                "marginals": mat(oracles.enumerated_marginals((1 - j1, j1), holds, m)),
            }
        )
    (OUT / "marginals_oracle.json").write_text(json.dumps(laws, indent=1))

    q = [Fraction(1, n + 1) for n in range(1, 8)]
    eq = {str(n): [s(x) for x in oracles.stationary_by_solve(ladder_rows(q, n))] for n in range(1, 9)}
    (OUT / "ladder_equilibrium.json").write_text(json.dumps({"q": [s(x) for x in q], "equilibria": eq}, indent=1))

    verts = {}
    for name, top in (
        ("ladder", lambda n: ladder_rows(q, n)),
        ("splitting", splitting_rows),
        ("uniform", lambda n: [[Fraction(int(j == 0)) for j in range(n + 1)]] + [[Fraction(0)] + [Fraction(1, n)] * n for _ in range(n)]),
    ):
        verts[name] = {}
        for big_a in range(1, 5):
            c = entry_coefficients(top(big_a), big_a)
            vs = oracles.polytope_vertices(d2_ineqs(c, big_a), big_a)
            verts[name][str(big_a)] = sorted([["1/1"] + [s(x) for x in v] for v in vs])
    (OUT / "d2_vertices.json").write_text(json.dumps(verts, indent=1))

    cyl = []
    for name, rows, nu in (
        ("splitting", splitting_rows(5), [Fraction(0)] * 4 + [Fraction(1, 2)] * 2),
        ("ladder", ladder_rows([Fraction(3, 4)] * 4, 5), [Fraction(0)] * 5 + [Fraction(1)]),
    ):
        for n in range(1, 5):
            law, resid = oracles.projected_cylinder_law(nu, rows, n, 3, max_depth=200)
            cyl.append(
                {
                    "example": name,
                    "top": mat(rows),
                    "nu": [s(x) for x in nu],
                    "level": n,
                    "law": {",".join(map(str, k)): s(v) for k, v in sorted(law.items())},
                    "residual": s(resid),
                }
            )
    (OUT / "cylinder_oracle.json").write_text(json.dumps(cyl, indent=1))

    (OUT / "miracle.json").write_text(json.dumps({"ratio": str(oracles.miracle_factorisation())}, indent=1))


if __name__ == "__main__":
    main()
