"""Structured inverse of I + T T' for triangular block-Toeplitz T.

The inverse is carried as two upper block-Toeplitz factors built from a pair
of small Gram solves (the Q2/Q3 systems), so that

    (I + T T')^{-1} = U1 U1' + U2 U2'

with U1 = toepU([Q2c; Q2b] LQ^{-T}) and U2 = toepU([Q3...; 0] LW^{-T}).
Two right-hand-side modes exist: the discrete sweep solves the inner system
whose operator is I + toepL(D) toepL(D)' with D the strict part of the
column, while the continuous sweep keeps the corner block Y on the diagonal
and solves the full system plus its trailing principal submatrix system.

Displacement-rank utilities used only by tests live at the bottom.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite, PcgFailure
from .pcg import (GramOperator, PcgConfig, TrailingGramOperator,
                  choose_preconditioner, pcg_solve)
from .toeplitz import (LOWER, UPPER, BlockToeplitzSpec, bt_apply,
                       bt_apply_transpose, densify)

DARE_MODE = "dare"
CARE_MODE = "care"


@dataclass
class SweepArtifacts:
    """Raw small-system solutions and their Cholesky factors.

    Q2c/Q2b split the Q2 solution into its leading blocks and bottom block;
    Q3t is the top block of the inner Q3 solve (discrete mode only, dropped
    from the applied column), Q3c the blocks that survive into U2.
    """

    Q2c: np.ndarray
    Q2b: np.ndarray
    Q3t: np.ndarray | None
    Q3c: np.ndarray
    W: np.ndarray
    Wtilde: np.ndarray
    LQ: np.ndarray
    LW: np.ndarray


def _chol(M, what):
    sym = 0.5 * (M + M.T)
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("%s is not positive definite" % what) from exc


def _lower_inv(L):
    return scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)


@dataclass
class StructuredInverse:
    artifacts: SweepArtifacts
    Y: np.ndarray | None
    mode: str
    t: int  # block order of the represented system
    p1: int
    p2: int
    u1: BlockToeplitzSpec | None  # normalized toepU factors; None when t == 0
    u2: BlockToeplitzSpec | None

    @property
    def dim(self):
        return self.p1 * self.t

    def apply(self, V):
        """Normalized contractions (Xi1, Xi2) with Xi1'Xi1 + Xi2'Xi2 = V' M^{-1} V."""
        q = V.shape[1] if V.ndim == 2 else 1
        if self.t == 0:
            return np.zeros((0, q)), np.zeros((0, q))
        if V.shape[0] != self.dim:
            raise DimensionMismatch(
                "V has %d rows, inverse acts on %d" % (V.shape[0], self.dim))
        return bt_apply_transpose(self.u1, V), bt_apply_transpose(self.u2, V)

    def apply_inverse(self, V):
        """M^{-1} V, i.e. U1 (U1' V) + U2 (U2' V)."""
        if self.t == 0:
            return np.asarray(V, dtype=float)
        xi1, xi2 = self.apply(V)
        return bt_apply(self.u1, xi1) + bt_apply(self.u2, xi2)


def apply_structured_inverse(inv, V):
    return inv.apply(V)


def _solve_spd(op, precond, rhs, cfg, kappa_bound):
    """PCG with a conditioning-aware acceptance floor.

    The attainable CG residual is about eps * kappa; demanding less on a
    badly conditioned Gram system would fail spuriously, so a column counts
    as solved once it reaches max(rel_tol, 100 eps kappa_bound).
    """
    if cfg.max_iter is None:
        # ill-conditioned Gram systems can need ~sqrt(kappa) > dim iterations
        cfg = PcgConfig(rel_tol=cfg.rel_tol, max_iter=50 * op.dim,
                        preconditioner=cfg.preconditioner)
    res = pcg_solve(op, precond, rhs, cfg)
    floor = max(cfg.rel_tol, 100.0 * np.finfo(float).eps * kappa_bound)
    bad = res.residuals > floor
    if np.any(bad):
        raise PcgFailure(
            "PCG missed tolerance on %d of %d columns (worst rel. residual %g, floor %g)"
            % (int(np.sum(bad)), res.x.shape[1], float(res.residuals.max()), floor))
    return res.x


def solve_sweep_systems(L_col, rhs_mode, cfg=None):
    """Build the structured inverse from a defining column [Y or 0; D].

    rhs_mode "dare" solves the inner (t-1)-block system driven by D alone;
    "care" keeps Y on the diagonal and solves the full t-block system for Q2
    and the trailing-submatrix system for Q3.
    """
    cfg = cfg or PcgConfig()
    if L_col.orientation != LOWER:
        raise DimensionMismatch("sweep systems expect a lower spec")
    t, p1, p2 = L_col.t, L_col.p1, L_col.p2
    blocks = L_col.blocks

    if rhs_mode == DARE_MODE:
        s = t - 1
        if s == 0:
            art = SweepArtifacts(
                Q2c=np.zeros((0, p1)), Q2b=np.eye(p1), Q3t=None,
                Q3c=np.zeros((0, p2)), W=np.eye(p2), Wtilde=np.eye(p2),
                LQ=np.eye(p1), LW=np.eye(p2))
            return StructuredInverse(art, None, rhs_mode, 0, p1, p2, None, None)
        D = blocks[1:]
        Dspec = BlockToeplitzSpec(D, LOWER)
        op = GramOperator(Dspec)
        precond = choose_preconditioner(Dspec, cfg)
        rhs_q2 = np.zeros((p1 * s, p1))
        rhs_q2[-p1:] = np.eye(p1)
        rhs_q3 = D.reshape(p1 * s, p2)
        kappa = 1.0 + s * float(np.sum(D * D))
        sol = _solve_spd(op, precond, np.hstack([rhs_q2, rhs_q3]), cfg, kappa)
        Q2, Q3 = sol[:, :p1], sol[:, p1:]
        Q2b, Q2c = Q2[-p1:], Q2[:-p1]
        Q3t, Q3c = Q3[:p1], Q3[p1:]
        W = np.eye(p2) - Q3.T @ rhs_q3
        Wtilde = W
        u2_col = np.vstack([Q3c, np.zeros((p1, p2))])
        Y = None
        sys_t = s
    elif rhs_mode == CARE_MODE:
        Y = blocks[0]
        op = GramOperator(L_col)
        precond = choose_preconditioner(L_col, cfg)
        rhs_q2 = np.zeros((p1 * t, p1))
        rhs_q2[-p1:] = np.eye(p1)
        kappa = 1.0 + t * float(np.sum(blocks * blocks))
        Q2 = _solve_spd(op, precond, rhs_q2, cfg, kappa)
        Q2b, Q2c = Q2[-p1:], Q2[:-p1]
        if t == 1:
            Q3 = np.zeros((0, p2))
        else:
            trail = TrailingGramOperator(L_col)
            trail_pc = choose_preconditioner(
                BlockToeplitzSpec(blocks[:-1], LOWER), cfg)
            rhs_q3 = blocks[1:].reshape(p1 * (t - 1), p2)
            Q3 = _solve_spd(trail, trail_pc, rhs_q3, cfg, kappa)
        rhs_q3 = blocks[1:].reshape(p1 * (t - 1), p2)
        W = np.eye(p2) - Q3.T @ rhs_q3
        Wtilde = W + W @ Y.T @ Y @ W
        Q3t, Q3c = None, Q3
        u2_col = np.vstack([Q3, np.zeros((p1, p2))])
        sys_t = t
    else:
        raise ValueError("rhs_mode must be 'dare' or 'care'")

    LQ = _chol(Q2b, "Q2b")
    LW = _chol(Wtilde, "Wtilde")
    art = SweepArtifacts(Q2c=Q2c, Q2b=0.5 * (Q2b + Q2b.T), Q3t=Q3t, Q3c=Q3c,
                         W=W, Wtilde=0.5 * (Wtilde + Wtilde.T), LQ=LQ, LW=LW)
    u1_blocks = (Q2.reshape(sys_t, p1, p1)) @ _lower_inv(LQ).T
    u2_blocks = (u2_col.reshape(sys_t, p1, p2)) @ _lower_inv(LW).T
    u1 = BlockToeplitzSpec(u1_blocks, UPPER)
    u2 = BlockToeplitzSpec(u2_blocks, UPPER)
    return StructuredInverse(art, Y, rhs_mode, sys_t, p1, p2, u1, u2)


# ---------------------------------------------------------------------------
# displacement-rank utilities (test oracles)

PLUS = "plus"
MINUS = "minus"


def displacement_residue(R, p, sign):
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    if R.ndim != 2 or R.shape[1] != n or n % p:
        raise DimensionMismatch("R must be square with order divisible by p")
    res = R.copy()
    if sign == PLUS:  # R - Z R Z'
        res[p:, p:] -= R[:-p, :-p]
    elif sign == MINUS:  # R - Z' R Z
        res[:-p, :-p] -= R[p:, p:]
    else:
        raise ValueError("sign must be 'plus' or 'minus'")
    return res


def displacement_rank(R, p, sign):
    """Block displacement count: ceil(numerical rank of the residue / p)."""
    res = displacement_residue(R, p, sign)
    sv = np.linalg.svd(res, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    return -(-rank // p)


def gs_reconstruct(R1, R2, sign):
    """Dense Gohberg-Semencul product of two generator columns."""
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    if R1.shape != R2.shape:
        raise DimensionMismatch("generator shapes differ")
    p = R1.shape[1]
    t = R1.shape[0] // p
    spec1 = BlockToeplitzSpec(R1.reshape(t, p, p), LOWER if sign == PLUS else UPPER)
    spec2 = BlockToeplitzSpec(R2.reshape(t, p, p), LOWER if sign == PLUS else UPPER)
    return densify(spec1) @ densify(spec2).T
