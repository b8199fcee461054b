"""Cyclic Jacobi eigensolver for batches of small Hermitian matrices."""

from __future__ import annotations

import numpy as np

__all__ = ["jacobi_eigh"]


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Diagonalize a stack of Hermitian matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    a : ndarray, shape (..., m, m)
        Hermitian matrices; only consistency of the two triangles is assumed.
    tol : float
        A matrix counts as diagonal once its off-diagonal Frobenius norm is
        below ``tol`` times its full Frobenius norm.
    max_sweeps : int
        Upper bound on sweeps over all (p, q) pairs.

    Returns
    -------
    eigenvalues : ndarray, shape (..., m)
        Unsorted real eigenvalues.
    eigenvectors : ndarray, shape (..., m, m)
        Columns are the eigenvectors, ``a = V diag(w) V^H``.
    converged : ndarray of bool, shape (...)
    """
    a = np.array(a, dtype=complex)
    shape = a.shape
    m = shape[-1]
    a = a.reshape((-1, m, m))
    batch = a.shape[0]
    v = np.broadcast_to(np.eye(m, dtype=complex), (batch, m, m)).copy()
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    offmask = ~np.eye(m, dtype=bool)

    def off_norm():
        return np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))

    done = off_norm() <= tol * scale
    sweeps = 0
    while not done.all() and sweeps < max_sweeps:
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                _rotate(a, v, p, q)
        done = off_norm() <= tol * scale
    w = np.real(np.einsum("bii->bi", a))
    return w.reshape(shape[:-1]), v.reshape(shape), done.reshape(shape[:-2])


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Zero a[:, p, q] in place with a phase-then-Givens unitary."""
    apq = a[:, p, q]
    r = np.abs(apq)
    active = r > 0
    if not active.any():
        return
    r_safe = np.where(active, r, 1.0)
    phase = np.where(active, apq / r_safe, 1.0)  # e^{i phi}
    app = a[:, p, p].real
    aqq = a[:, q, q].real
    tau = (aqq - app) / (2.0 * r_safe)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    c = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)
    s = np.where(active, t * c, 0.0)
    cph = np.conj(phase)

    # columns: A <- A U with U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q)
    for mat in (a, v):
        colp = mat[:, :, p].copy()
        colq = mat[:, :, q]
        mat[:, :, p] = colp * c[:, None] - colq * (s * cph)[:, None]
        mat[:, :, q] = colp * s[:, None] + colq * (c * cph)[:, None]
    # rows: A <- U^H A
    rowp = a[:, p, :].copy()
    rowq = a[:, q, :]
    a[:, p, :] = rowp * c[:, None] - rowq * (s * phase)[:, None]
    a[:, q, :] = rowp * s[:, None] + rowq * (c * phase)[:, None]
    a[:, p, q] = np.where(active, 0.0, a[:, p, q])
    a[:, q, p] = np.where(active, 0.0, a[:, q, p])
