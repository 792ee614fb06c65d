"""Riccati residual norms evaluated entirely through low-rank Gram algebra.

For X = S'S the residual is K' M K with the stack K = [C; S; SA] and a small
symmetric coupling matrix M, so its Frobenius norm is sqrt(trace(M G M G))
with G = K K' of order l + 2r — no n x n matrix is ever formed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (DimensionMismatch, NotPositiveDefinite,
                     NumericalInconsistency, ZeroRhs)
from .linops import rowmul


@dataclass(frozen=True)
class ResidualReport:
    nres: float
    absolute_frobenius: float
    gram_dim: int


def _factor_rows(S):
    return S.S if hasattr(S, "S") else np.atleast_2d(np.asarray(S, dtype=float))


def _cc_norm(C):
    """||C'C||_F computed as ||CC'||_F on the small side."""
    G = C @ C.T
    return float(np.sqrt(np.sum(G * G)))


def _gram_frobenius(K, M):
    """||K' M K||_F via trace(MGMG), G symmetrized."""
    G = K @ K.T
    G = 0.5 * (G + G.T)
    H = M @ G
    val = float(np.sum(H * H.T))
    if val < 0.0:
        # exact value is a squared norm; tolerate accumulation noise only
        slack = max(1e-20, 64.0 * np.finfo(float).eps * float(np.sum(np.abs(H * H.T))))
        if val >= -slack:
            val = 0.0
        else:
            raise NumericalInconsistency(
                "trace(MGMG) = %g < 0 beyond accumulation tolerance" % val)
    return float(np.sqrt(val))


def nres_care(factor, P):
    """Relative residual of A'X + XA - XBB'X + C'C at X = S'S."""
    S = _factor_rows(factor)
    C = P.C
    if not np.any(C):
        raise ZeroRhs("C = 0: relative residual undefined")
    if S.size and S.shape[1] != P.n:
        raise DimensionMismatch("factor has %d columns, n = %d" % (S.shape[1], P.n))
    if S.shape[0] == 0:
        S = np.zeros((0, P.n))
    r, l = S.shape[0], C.shape[0]
    K = np.vstack([C, S, rowmul(S, P.A)])
    SB = S @ P.B
    d = l + 2 * r
    M = np.zeros((d, d))
    M[:l, :l] = np.eye(l)
    M[l:l + r, l:l + r] = -(SB @ SB.T)
    M[l:l + r, l + r:] = np.eye(r)
    M[l + r:, l:l + r] = np.eye(r)
    frob = _gram_frobenius(K, M)
    return ResidualReport(frob / _cc_norm(C), frob, d)


def nres_dare(factor, P):
    """Relative residual of -X + A'X(I + BB'X)^{-1}A + C'C at X = S'S.

    The middle inverse collapses through the push-through identity to
    (I + (SB)(SB)')^{-1} acting on the small side.
    """
    S = _factor_rows(factor)
    C = P.C
    if not np.any(C):
        raise ZeroRhs("C = 0: relative residual undefined")
    if S.shape[0] == 0 or not S.size:
        S = np.zeros((0, P.n))
    r, l = S.shape[0], C.shape[0]
    K = np.vstack([C, S, rowmul(S, P.A)])
    SB = S @ P.B
    N = np.eye(r) + SB @ SB.T
    try:
        cho = scipy.linalg.cho_factor(N, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("I + (SB)(SB)' failed Cholesky") from exc
    Ninv = scipy.linalg.cho_solve(cho, np.eye(r))
    d = l + 2 * r
    M = np.zeros((d, d))
    M[:l, :l] = np.eye(l)
    M[l:l + r, l:l + r] = -np.eye(r)
    M[l + r:, l + r:] = 0.5 * (Ninv + Ninv.T)
    frob = _gram_frobenius(K, M)
    return ResidualReport(frob / _cc_norm(C), frob, d)


def min_eig_difference(S1, S2):
    """Smallest eigenvalue of S2'S2 - S1'S1 via the joint row space."""
    A = _factor_rows(S1)
    B = _factor_rows(S2)
    if A.size and B.size and A.shape[1] != B.shape[1]:
        raise DimensionMismatch("factors act on different spaces")
    n = B.shape[1] if B.size else A.shape[1]
    T = np.vstack([np.zeros((0, n)), A.reshape(-1, n), B.reshape(-1, n)])
    if not np.any(T):
        return 0.0
    Q, _ = np.linalg.qr(T.T)
    D = (B @ Q).T @ (B @ Q) - (A @ Q).T @ (A @ Q)
    vals = np.linalg.eigvalsh(0.5 * (D + D.T))
    smallest = float(vals[0]) if vals.size else 0.0
    if Q.shape[1] < n:
        smallest = min(smallest, 0.0)
    return smallest
