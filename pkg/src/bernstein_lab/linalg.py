"""Dense linear-algebra kernels for small matrices (dimension <= ~40).

Everything here is hand-rolled on purpose: the package's spectral results
(singular values, adapted frames, minimum eigenvalues of quadratic forms)
must come from an implementation we control and can cross-check against an
independent library in the test suite.  Two kernels carry the load:

* ``jacobi_eigh`` -- cyclic-Jacobi diagonalization of symmetric matrices,
* ``jacobi_svd``  -- one-sided (Hestenes) Jacobi SVD, which computes small
  singular values to high relative accuracy.

Both accept a batch of matrices in the leading axes and rotate the whole
batch in lockstep; per-matrix skip thresholds make the batched result
bit-identical to a matrix-at-a-time run.
"""

from __future__ import annotations

import numpy as np

# Convergence contract: off-diagonal mass below OFF_DIAG_TOL relative to the
# Frobenius norm of the input, within MAX_SWEEPS cyclic sweeps.
OFF_DIAG_TOL = 1e-13
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Jacobi iteration failed to reach the off-diagonal tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = float(residual)


def _offdiag_mass(g):
    """Frobenius norm of the off-diagonal part, per batch member.

    Summed entry-by-entry (not as total minus diagonal, which cancels
    catastrophically once the off-diagonal part is small).
    """
    d = g.shape[-1]
    off = g.copy()
    idx = np.arange(d)
    off[..., idx, idx] = 0.0
    return np.sqrt(np.sum(off * off, axis=(-2, -1)))


def jacobi_eigh(a, tol=OFF_DIAG_TOL, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array, shape (..., d, d), symmetric in the last two axes.

    Returns
    -------
    (w, v) : eigenvalues ascending, shape (..., d); orthonormal eigenvectors
        in the columns of v, shape (..., d, d), so that a = v @ diag(w) @ v.T.

    Raises ``ConvergenceError`` if the off-diagonal mass does not drop below
    ``tol * max(1, ||a||_F)`` within ``max_sweeps`` sweeps.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[-1]
    if a.shape[-2] != d:
        raise ValueError("expected square matrices")
    batch_shape = a.shape[:-2]
    g = a.reshape((-1, d, d)).copy()
    nb = g.shape[0]
    v = np.tile(np.eye(d), (nb, 1, 1))
    scale = np.maximum(1.0, np.sqrt(np.sum(g * g, axis=(-2, -1))))
    # Rotations smaller than this cannot affect the convergence target.
    skip = (tol / (10.0 * max(d, 2))) * scale

    if d > 1:
        converged = False
        for _ in range(max_sweeps):
            # Freeze members that already meet the tolerance so a batched run
            # performs exactly the rotations a matrix-at-a-time run would.
            live = _offdiag_mass(g) > tol * scale
            if not np.any(live):
                converged = True
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = g[:, p, q]
                    active = live & (np.abs(apq) > skip)
                    if not np.any(active):
                        continue
                    app = g[:, p, p]
                    aqq = g[:, q, q]
                    tau = np.zeros(nb)
                    np.divide(aqq - app, 2.0 * apq, out=tau, where=active)
                    sgn = np.where(tau >= 0.0, 1.0, -1.0)
                    t = np.where(
                        active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0
                    )
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    cc = c[:, None]
                    ss = s[:, None]
                    gp = g[:, p, :].copy()
                    gq = g[:, q, :]
                    g[:, p, :] = cc * gp - ss * gq
                    g[:, q, :] = ss * gp + cc * gq
                    gp = g[:, :, p].copy()
                    gq = g[:, :, q]
                    g[:, :, p] = cc * gp - ss * gq
                    g[:, :, q] = ss * gp + cc * gq
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = cc * vp - ss * vq
                    v[:, :, q] = ss * vp + cc * vq
        else:
            converged = np.all(_offdiag_mass(g) <= tol * scale)
        if not converged:
            residual = np.max(_offdiag_mass(g) / scale)
            raise ConvergenceError("jacobi_eigh did not converge", residual)

    w = np.diagonal(g, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(batch_shape + (d,)), v.reshape(batch_shape + (d, d))


def jacobi_svd(a, tol=OFF_DIAG_TOL, max_sweeps=MAX_SWEEPS, compute_u=True):
    """One-sided Jacobi SVD: a = u @ diag(s) @ vt (full matrices).

    Columns of ``a`` are orthogonalized in place by right Givens rotations;
    the implicit symmetric matrix being diagonalized is ``a.T @ a``.  Works
    for any rectangular shape (..., r, c).  Singular values are returned
    descending, length min(r, c).  With ``compute_u=False`` only (s, vt) are
    computed, which skips the null-space completion of u.
    """
    a = np.asarray(a, dtype=float)
    r, c = a.shape[-2], a.shape[-1]
    batch_shape = a.shape[:-2]
    w = a.reshape((-1, r, c)).copy()
    nb = w.shape[0]
    v = np.tile(np.eye(c), (nb, 1, 1))

    gram_scale = np.maximum(1.0, np.sum(w * w, axis=(-2, -1)))  # ~ ||a.T a||_F

    def off_gram(wm):
        gram = np.einsum("bic,bid->bcd", wm, wm)
        return _offdiag_mass(gram)

    if c > 1:
        converged = False
        # A member is done once a whole sweep applies no rotation under the
        # pairwise relative criterion |<w_p, w_q>| <= 1e-14 ||w_p|| ||w_q||,
        # which bounds the relative non-orthogonality of the singular vectors
        # independently of the overall scale of the matrix.
        live = np.ones(nb, dtype=bool)
        for _ in range(max_sweeps):
            rotated = np.zeros(nb, dtype=bool)
            for p in range(c - 1):
                for q in range(p + 1, c):
                    wp = w[:, :, p]
                    wq = w[:, :, q]
                    alpha = np.sum(wp * wp, axis=-1)
                    beta = np.sum(wq * wq, axis=-1)
                    gamma = np.sum(wp * wq, axis=-1)
                    active = live & (
                        np.abs(gamma) > 1e-14 * np.sqrt(alpha * beta) + 1e-300
                    )
                    if not np.any(active):
                        continue
                    rotated |= active
                    tau = np.zeros(nb)
                    np.divide(beta - alpha, 2.0 * gamma, out=tau, where=active)
                    sgn = np.where(tau >= 0.0, 1.0, -1.0)
                    t = np.where(
                        active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0
                    )
                    cs = 1.0 / np.sqrt(1.0 + t * t)
                    sn = t * cs
                    cc = cs[:, None]
                    ss = sn[:, None]
                    wp = wp.copy()
                    w[:, :, p] = cc * wp - ss * wq
                    w[:, :, q] = ss * wp + cc * wq
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = cc * vp - ss * vq
                    v[:, :, q] = ss * vp + cc * vq
            live = rotated
            if not np.any(live):
                converged = True
                break
        if not converged:
            residual = np.max(off_gram(w) / gram_scale)
            raise ConvergenceError("jacobi_svd did not converge", residual)

    norms = np.sqrt(np.sum(w * w, axis=-2))  # (nb, c)
    order = np.argsort(-norms, axis=-1, kind="stable")
    norms = np.take_along_axis(norms, order, axis=-1)
    w = np.take_along_axis(w, order[:, None, :], axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)

    k = min(r, c)
    s = norms[:, :k]
    vt = np.swapaxes(v, -2, -1)

    if not compute_u:
        return (
            s.reshape(batch_shape + (k,)),
            vt.reshape(batch_shape + (c, c)),
        )

    u = np.zeros((nb, r, r))
    rank_tol = 1e-13 * np.maximum(norms[:, 0], 1e-300)
    for b in range(nb):
        cols = []
        for j in range(k):
            if norms[b, j] > rank_tol[b]:
                cols.append(w[b, :, j] / norms[b, j])
        base = np.array(cols).T if cols else np.zeros((r, 0))
        u[b] = np.hstack([base, complete_orthonormal(base)])
    return (
        u.reshape(batch_shape + (r, r)),
        s.reshape(batch_shape + (k,)),
        vt.reshape(batch_shape + (c, c)),
    )


def singular_values(a):
    """Descending singular values of a matrix (no vectors)."""
    s, _ = jacobi_svd(a, compute_u=False)
    return s


def det(a):
    """Determinant via LU with partial pivoting; supports batches (..., d, d)."""
    a = np.asarray(a, dtype=float)
    d = a.shape[-1]
    if a.shape[-2] != d:
        raise ValueError("expected square matrices")
    batch_shape = a.shape[:-2]
    m = a.reshape((-1, d, d)).copy()
    nb = m.shape[0]
    result = np.ones(nb)
    rows = np.arange(nb)
    for j in range(d):
        piv = j + np.argmax(np.abs(m[:, j:, j]), axis=-1)
        swap = piv != j
        if np.any(swap):
            bs = rows[swap]
            tmp = m[bs, j, :].copy()
            m[bs, j, :] = m[bs, piv[swap], :]
            m[bs, piv[swap], :] = tmp
            result[swap] = -result[swap]
        pivot = m[:, j, j]
        result *= pivot
        nonzero = pivot != 0.0
        if j < d - 1 and np.any(nonzero):
            factors = np.zeros((nb, d - j - 1))
            np.divide(m[:, j + 1 :, j], pivot[:, None], out=factors,
                      where=nonzero[:, None])
            m[:, j + 1 :, j:] -= factors[:, :, None] * m[:, None, j, j:]
    return result.reshape(batch_shape) if batch_shape else float(result[0])


def orthonormalize_columns(a):
    """Modified Gram-Schmidt orthonormalization of the columns of ``a``.

    Requires full column rank.  The normalization constants are positive, so
    for a Gaussian random input the result is Haar-distributed.
    """
    a = np.asarray(a, dtype=float)
    q = a.copy()
    d, k = q.shape
    for j in range(k):
        for i in range(j):
            q[:, j] -= (q[:, i] @ q[:, j]) * q[:, i]
        norm = np.sqrt(q[:, j] @ q[:, j])
        if norm <= 1e-13 * max(1.0, float(np.max(np.abs(a)))):
            raise ValueError("columns are numerically rank deficient")
        q[:, j] /= norm
    return q


def complete_orthonormal(base):
    """Extend orthonormal columns ``base`` (d, k) to a full basis of R^d.

    Candidates are the standard basis vectors taken in index order; a
    candidate is accepted when its residual against the span built so far is
    comfortably large.  A greedy max-residual pass mops up any slots left by
    pathological geometry, keeping the construction deterministic.
    """
    base = np.asarray(base, dtype=float)
    d, k = base.shape
    cols = [base[:, j] for j in range(k)]
    missing = d - k

    def residual(e):
        rvec = e.copy()
        for cvec in cols:
            rvec = rvec - (cvec @ rvec) * cvec
        return rvec

    out = []
    used = set()
    for idx in range(d):
        if len(out) == missing:
            break
        rvec = residual(np.eye(d)[:, idx])
        norm = np.sqrt(rvec @ rvec)
        if norm > 0.5:
            rvec /= norm
            cols.append(rvec)
            out.append(rvec)
            used.add(idx)
    while len(out) < missing:
        best, best_norm = None, -1.0
        for idx in range(d):
            if idx in used:
                continue
            rvec = residual(np.eye(d)[:, idx])
            norm = np.sqrt(rvec @ rvec)
            if norm > best_norm + 1e-15:
                best, best_norm = (idx, rvec, norm), norm
        idx, rvec, norm = best
        cols.append(rvec / norm)
        out.append(rvec / norm)
        used.add(idx)
    return np.array(out).T if out else np.zeros((d, 0))
