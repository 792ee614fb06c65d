"""Small helpers that make dense and scipy.sparse A handles interchangeable."""

import numpy as np
import scipy.sparse


def rowmul(W, A):
    """W @ A for a dense row block W and dense or sparse A, as an ndarray."""
    if scipy.sparse.issparse(A):
        return np.asarray((A.T @ W.T).T)
    return W @ A


def one_norm(A):
    if scipy.sparse.issparse(A):
        return float(abs(A).sum(axis=0).max())
    return float(np.linalg.norm(A, 1))


def to_dense(A):
    if scipy.sparse.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)
