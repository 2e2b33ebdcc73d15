"""Monotone-LCP embedding of the QP optimality system and its residual terms.

Optimality of the equality-form QP is equivalent to the linear
complementarity problem z >= 0, Mz + q >= 0, z'(Mz + q) = 0 in the
variables z = (x, y+, y-), with M positive semidefinite.  The natural
residual r + w of that LCP gives a computable global error bound on the
distance to the solution set (up to a problem constant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import StandardQP


@dataclass(frozen=True)
class LcpInstance:
    M: np.ndarray
    q: np.ndarray


def lcp_embedding(qp: StandardQP) -> LcpInstance:
    """Assemble M = [[H, -A', A'], [A, 0, 0], [-A, 0, 0]] and q = (c, -b, b)."""
    n, m = qp.n, qp.m
    M = np.block([
        [qp.H, -qp.A.T, qp.A.T],
        [qp.A, np.zeros((m, m)), np.zeros((m, m))],
        [-qp.A, np.zeros((m, m)), np.zeros((m, m))],
    ])
    q = np.concatenate([qp.c, -qp.b, qp.b])
    return LcpInstance(M=M, q=q)


def residual_terms_feasible(x, s) -> tuple[float, float]:
    """Residual pair (r, w) for an equality-feasible point.

    r = ||min(x, s)||, w = ||(-x, -s, x's)_+||, Euclidean norms throughout.
    """
    x = linalg.as_vector(x)
    s = linalg.as_vector(s, x.size)
    r = float(np.linalg.norm(np.minimum(x, s)))
    parts = np.concatenate([-x, -s, [x @ s]])
    w = float(np.linalg.norm(np.maximum(parts, 0.0)))
    return r, w


def residual_terms_general(qp: StandardQP, x, y) -> tuple[float, float]:
    """Residual pair (r, w) for an arbitrary (x, y) with s = c - A'y + Hx.

    r stacks min(x, s), min(y+, Ax - b) and min(y-, b - Ax); w stacks the
    positive parts of (-s, b - Ax, Ax - b, -x) and the duality-gap term
    c'x - b'y + x'Hx.
    """
    x = linalg.as_vector(x, qp.n)
    y = linalg.as_vector(y, qp.m)
    s = qp.c - qp.A.T @ y + qp.H @ x
    y_plus = np.maximum(y, 0.0)
    y_minus = -np.minimum(y, 0.0)
    Axb = qp.A @ x - qp.b

    r_parts = np.concatenate([
        np.minimum(x, s),
        np.minimum(y_plus, Axb),
        np.minimum(y_minus, -Axb),
    ])
    r = float(np.linalg.norm(r_parts))

    gap = float(qp.c @ x - qp.b @ y + x @ (qp.H @ x))
    w_parts = np.concatenate([-s, -Axb, Axb, -x, [gap]])
    w = float(np.linalg.norm(np.maximum(w_parts, 0.0)))
    return r, w
