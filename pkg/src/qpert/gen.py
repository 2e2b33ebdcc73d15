"""Seeded random problem generators.

Two families, both with dense H = B'B and data derived so the constructed
triple satisfies the equality constraints exactly:

* a feasible-point family: (x, s) >= 0 with roughly density * n positive
  entries each, overlap allowed, so (x, y, s) is feasible but not optimal;
* a degenerate-solution family: disjoint supports with x's = 0, fewer than
  m positives in x and fewer than n - m in s, so (x, y, s) is an optimal,
  primal-dual degenerate solution with a nonempty common-zero set.

Randomness comes from the Philox 4x64 counter-based generator keyed by the
seed, so a given (seed, params) pair reproduces bit-identical problems on
any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Iterate, StandardQP

# delta * I is added to the leading columns of A when a draw comes out
# rank deficient (practically never for dense uniform entries).
RANK_FIX_DELTA = 1e-2
MAX_REDRAWS = 10


@dataclass(frozen=True)
class GenParams:
    seed: int
    m_range: tuple = (10, 200)   # open interval, as drawn: m in (10, 200)
    n_range: tuple = (20, 500)
    density: float = 0.5
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        if self.m_range[0] + 1 >= self.m_range[1]:
            raise ValueError("empty m range")
        if self.n_range[0] + 1 >= self.n_range[1]:
            raise ValueError("empty n range")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _draw_dimensions(rng, params: GenParams):
    m = int(rng.integers(params.m_range[0] + 1, params.m_range[1]))
    n_lo = max(m + 1, params.n_range[0] + 1)
    if n_lo >= params.n_range[1]:
        raise ValueError("n range cannot accommodate n > m")
    n = int(rng.integers(n_lo, params.n_range[1]))
    return m, n


def _draw_constraints(rng, m: int, n: int, density: float) -> np.ndarray:
    for _ in range(MAX_REDRAWS):
        values = rng.uniform(-1.0, 1.0, size=(m, n))
        mask = rng.random(size=(m, n)) < density
        A = values * mask
        if np.linalg.matrix_rank(A, tol=1e-10 * max(1.0, np.linalg.norm(A, 2))) == m:
            return A
        A[:, :m] += RANK_FIX_DELTA * np.eye(m)
        if np.linalg.matrix_rank(A, tol=1e-10 * max(1.0, np.linalg.norm(A, 2))) == m:
            return A
    raise RuntimeError("could not draw a full-row-rank constraint matrix")


def _draw_quadratic(rng, n: int) -> np.ndarray:
    B = rng.uniform(-1.0, 1.0, size=(n, n))
    H = B.T @ B
    return 0.5 * (H + H.T)


def _finish(A, H, x, y, s, name) -> tuple[StandardQP, Iterate]:
    b = A @ x
    c = A.T @ y + s - H @ x
    qp = StandardQP(H=H, A=A, b=b, c=c, name=name)
    return qp, Iterate(x=x, y=y, s=s)


def generate_qts1(params: GenParams) -> tuple[StandardQP, Iterate]:
    """Feasible-point instance: returns (problem, feasible triple)."""
    rng = _rng(params.seed)
    m, n = _draw_dimensions(rng, params)
    A = _draw_constraints(rng, m, n, params.density)
    H = _draw_quadratic(rng, n)

    x = rng.uniform(0.0, params.scale, size=n) * (rng.random(n) < params.density)
    s = rng.uniform(0.0, params.scale, size=n) * (rng.random(n) < params.density)
    y = rng.uniform(-1.0, 1.0, size=m)
    return _finish(A, H, x, y, s, f"qts1-{params.seed}")


def generate_qts2(params: GenParams) -> tuple[StandardQP, Iterate]:
    """Degenerate-solution instance: returns (problem, optimal triple).

    Supports of x and s are disjoint with |supp(x)| < m and
    |supp(s)| < n - m, so the triple is complementary, optimal, and both
    primal and dual degenerate.
    """
    rng = _rng(params.seed)
    m, n = _draw_dimensions(rng, params)
    A = _draw_constraints(rng, m, n, params.density)
    H = _draw_quadratic(rng, n)

    target = int(np.ceil(params.density * n))
    k_x = min(m - 1, target)
    k_s = min(n - m - 1, target)
    order = rng.permutation(n)
    supp_x = order[:k_x]
    supp_s = order[k_x:k_x + k_s]

    x = np.zeros(n)
    s = np.zeros(n)
    x[supp_x] = rng.uniform(0.0, params.scale, size=k_x)
    s[supp_s] = rng.uniform(0.0, params.scale, size=k_s)
    y = rng.uniform(-1.0, 1.0, size=m)
    return _finish(A, H, x, y, s, f"qts2-{params.seed}")
