"""The quadratic form governing superharmonicity of the log projection factor.

On the space of admissible second-fundamental-form tensors (symmetric in the
two tangent slots, optionally trace-free per normal direction) the form

    F(h) = sum_{a,l,k} h_{a,l,k}^2
         + sum_{k, i} l_i^2 h_{n+i,i,k}^2
         + 2 sum_{k, i<j} l_i l_j h_{n+i,j,k} h_{n+j,i,k}

equals minus the Laplacian of log(star_omega) on a graph with parallel mean
curvature (indices i, j run over 1..min(n, m); k, l over 1..n).  Positive
definiteness of F with a margin epsilon, as a function of the singular
values, is the sharp flatness criterion this module maps out: it assembles
the Gram matrix of F over an explicit orthonormal basis, computes minimum
eigenvalues, and scans regions of singular-value space.

``evaluate_F_direct`` is the single source of truth for F; Gram matrices are
obtained from it by polarization, never from re-derived closed forms.  All
evaluators broadcast over leading axes of both the singular values and the
tensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .conditions import ConditionReport
from .geometry import star_omega

DEFAULT_EPSILON = 1e-3
BOUNDARY_BAND = 1e-6
# Absolute accuracy of the minimum-eigenvalue computation; pass/fail at an
# exact spectral boundary is decided within this tolerance.
EIG_TOL = 1e-10


def _tensor_of(h):
    return h.h if hasattr(h, "h") else np.asarray(h, dtype=float)


@dataclass(frozen=True)
class HBasis:
    """Orthonormal basis of the admissible h-tensor space.

    Tensors have shape (m, n, n); the inner product is the plain sum of
    entrywise products.  Ordering is deterministic: normal index outer; for
    each normal direction the trace-free diagonal directions (orthonormalized
    consecutive differences of diagonal units) when ``traceless``, otherwise
    the diagonal units in index order, followed by the symmetrized
    off-diagonal units (l < k) lexicographically.
    """

    n: int
    m: int
    traceless: bool
    tensors: np.ndarray  # (dim, m, n, n)

    @property
    def dim(self):
        return self.tensors.shape[0]


def h_space_basis(n, m, traceless) -> HBasis:
    """Build the orthonormal basis described on ``HBasis``.

    Dimension m*n(n+1)/2, minus one per normal direction when trace-free
    (which requires n >= 2).
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if traceless and n < 2:
        raise ValueError("trace-free basis requires n >= 2")
    per_alpha = []
    if traceless:
        diffs = []
        for j in range(n - 1):
            v = np.zeros(n)
            v[j] = 1.0
            v[j + 1] = -1.0
            for prev in diffs:
                v = v - (prev @ v) * prev
            v = v / np.sqrt(v @ v)
            diffs.append(v)
        for v in diffs:
            t = np.zeros((n, n))
            t[np.arange(n), np.arange(n)] = v
            per_alpha.append(t)
    else:
        for l in range(n):
            t = np.zeros((n, n))
            t[l, l] = 1.0
            per_alpha.append(t)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for l in range(n):
        for k in range(l + 1, n):
            t = np.zeros((n, n))
            t[l, k] = inv_sqrt2
            t[k, l] = inv_sqrt2
            per_alpha.append(t)

    tensors = []
    for a in range(m):
        for t in per_alpha:
            full = np.zeros((m, n, n))
            full[a] = t
            tensors.append(full)
    return HBasis(n=n, m=m, traceless=bool(traceless),
                  tensors=np.array(tensors))


def evaluate_F_direct(lambdas, h):
    """Evaluate F(h) at singular values ``lambdas``.

    ``lambdas`` has shape (..., n) and ``h`` shape (..., m, n, n), symmetric
    in the last two slots; leading axes broadcast.  Reduces to the squared
    norm of h at lambda = 0.  Signed singular values are accepted (the
    spectrum of the form only depends on the signs through an isometry).
    """
    hv = _tensor_of(h)
    lam = np.asarray(lambdas, dtype=float)
    m, n = hv.shape[-3], hv.shape[-2]
    if lam.shape[-1] != n:
        raise ValueError("lambdas length must match tangent dimension")
    p = min(n, m)
    # einsum accumulates sequentially, so padding a tensor with zero slots
    # (the 3-d cone reduction) reproduces the smaller evaluation bit for bit.
    s0 = np.einsum("...aij,...aij->...", hv, hv)
    if p == 0:
        return float(s0) if np.ndim(s0) == 0 else s0
    hp = hv[..., :p, :p, :]
    cross = np.einsum("...ijk,...jik->...ij", hp, hp)
    lamp = lam[..., :p]
    quad = np.einsum("...i,...ij,...j->...", lamp, cross, lamp)
    out = s0 + quad
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GramForm:
    """Gram matrix of F over an HBasis at fixed singular values."""

    lambdas: np.ndarray
    basis: HBasis
    gram: np.ndarray


def _pair_tensors(basis):
    t = basis.tensors
    return t[:, None] + t[None, :], t[:, None] - t[None, :]


def _gram_matrix(lams, basis, pair=None):
    """Gram matrices by polarization, batched over leading axes of lams."""
    sums, diffs = pair if pair is not None else _pair_tensors(basis)
    lam = np.asarray(lams, dtype=float)
    lamb = lam[..., None, None, :]
    g = 0.25 * (evaluate_F_direct(lamb, sums) - evaluate_F_direct(lamb, diffs))
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def assemble_gram(lambdas, basis: HBasis) -> GramForm:
    """Polarize F over the basis: gram[p,q] = (F(b_p+b_q) - F(b_p-b_q)) / 4."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (basis.n,):
        raise ValueError("lambdas must be a length-n vector")
    return GramForm(lambdas=lam, basis=basis, gram=_gram_matrix(lam, basis))


def min_eigenvalue(gram) -> float:
    """Smallest eigenvalue of a symmetric matrix (or GramForm)."""
    mat = gram.gram if isinstance(gram, GramForm) else np.asarray(gram, float)
    w, _ = linalg.jacobi_eigh(mat)
    return float(w[..., 0]) if mat.ndim == 2 else w[..., 0]


def optimal_condition(lambdas, m, epsilon=DEFAULT_EPSILON,
                      traceless=True) -> ConditionReport:
    """Spectral positivity of F on the admissible space at one lambda vector.

    Passes when the minimum eigenvalue of the Gram matrix is at least
    epsilon.  ``traceless=True`` is the minimal-submanifold case;
    ``traceless=False`` is the parallel-mean-curvature case whose positivity
    region is exactly the product condition's.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    lam = np.asarray(lambdas, dtype=float)
    basis = h_space_basis(lam.size, m, traceless)
    low = min_eigenvalue(assemble_gram(lam, basis))
    margin = low - epsilon
    return ConditionReport(
        condition_name="OptimalB",
        pass_=margin >= -EIG_TOL,
        margin=margin,
        details={"min_eigenvalue": low, "epsilon": float(epsilon),
                 "dim": basis.dim, "traceless": float(traceless)},
    )


@dataclass(frozen=True)
class RegionScanResult:
    """Minimum-eigenvalue landscape over a grid in singular-value space."""

    n: int
    m: int
    traceless: bool
    axes: tuple          # per-axis (lo, hi, steps)
    epsilon: float
    values: np.ndarray   # grid of minimum eigenvalues
    classification: np.ndarray  # grid of "inside" / "boundary" / "outside"

    def axis_points(self):
        return [np.linspace(lo, hi, steps) for (lo, hi, steps) in self.axes]

    def iter_rows(self):
        """Yield (lambda_tuple, min_eig, class) in lexicographic grid order."""
        points = self.axis_points()
        for idx in np.ndindex(self.values.shape):
            lam = tuple(float(points[a][i]) for a, i in enumerate(idx))
            yield lam, float(self.values[idx]), str(self.classification[idx])


def classify_margin(values, epsilon, band=BOUNDARY_BAND):
    """Tri-state classification of min-eigenvalues against epsilon."""
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape, "outside", dtype="<U8")
    out[values - epsilon > band] = "inside"
    out[np.abs(values - epsilon) <= band] = "boundary"
    return out


def region_scan(n, m, traceless, grid, epsilon=DEFAULT_EPSILON,
                chunk=4096) -> RegionScanResult:
    """Minimum eigenvalue of F at every node of a singular-value grid.

    ``grid`` gives (lo, hi, steps) per scanned axis and must have
    min(n, m) axes; the remaining singular values are zero.  Nodes are
    evaluated in deterministic lexicographic order.
    """
    p = min(n, m)
    grid = tuple((float(lo), float(hi), int(steps)) for lo, hi, steps in grid)
    if len(grid) != p:
        raise ValueError(f"grid must have min(n, m) = {p} axes")
    if any(steps < 1 for _, _, steps in grid):
        raise ValueError("empty grid")
    basis = h_space_basis(n, m, traceless)
    pair = _pair_tensors(basis)
    points = [np.linspace(lo, hi, steps) for (lo, hi, steps) in grid]
    mesh = np.meshgrid(*points, indexing="ij")
    shape = mesh[0].shape
    lam = np.zeros((int(np.prod(shape)), n))
    for a in range(p):
        lam[:, a] = mesh[a].reshape(-1)
    values = np.empty(lam.shape[0])
    for start in range(0, lam.shape[0], chunk):
        block = lam[start: start + chunk]
        grams = _gram_matrix(block, basis, pair=pair)
        w, _ = linalg.jacobi_eigh(grams)
        values[start: start + chunk] = w[..., 0]
    values = values.reshape(shape)
    return RegionScanResult(
        n=n, m=m, traceless=bool(traceless), axes=grid,
        epsilon=float(epsilon), values=values,
        classification=classify_margin(values, epsilon),
    )


def two_d_completed_square(lambdas, h, trace_tol=1e-9):
    """Completed-square form of F for n = 2 on trace-free tensors.

    Returns |h|^2 + (l1 h_{n+1,2,2} + l2 h_{n+2,1,2})^2
                  + (l1 h_{n+1,1,2} + l2 h_{n+2,1,1})^2,
    which agrees with ``evaluate_F_direct`` identically on trace-free input
    (the second square's partner terms vanish when m = 1).  Rejects tensors
    whose per-direction trace exceeds ``trace_tol``.
    """
    hv = _tensor_of(h)
    lam = np.asarray(lambdas, dtype=float)
    if hv.shape[-2:] != (2, 2) or lam.shape != (2,):
        raise ValueError("completed square applies to n = 2 only")
    traces = np.einsum("...akk->...a", hv)
    scale = 1.0 + np.max(np.abs(hv))
    if np.max(np.abs(traces)) > trace_tol * scale:
        raise ValueError("tensor is not trace-free per normal direction")
    m = hv.shape[-3]
    h122 = hv[..., 0, 1, 1]
    h112 = hv[..., 0, 0, 1]
    if m >= 2:
        h212 = hv[..., 1, 0, 1]
        h211 = hv[..., 1, 0, 0]
    else:
        h212 = np.zeros_like(h122)
        h211 = np.zeros_like(h122)
    norm2 = np.sum(hv * hv, axis=(-3, -2, -1))
    out = (norm2
           + (lam[0] * h122 + lam[1] * h212) ** 2
           + (lam[0] * h112 + lam[1] * h211) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def _diag_slot(hv, p):
    """h_{n+i,i,k} as an (..., p, n) array."""
    idx = np.arange(p)
    return hv[..., idx, idx, :]


def rhs_delta_star_omega(lambdas, h):
    """Analytic prediction for the Laplacian of the projection factor.

    Returns -omega * { sum h^2
                       - 2 sum_{k,i<j} l_i l_j h_{n+i,i,k} h_{n+j,j,k}
                       + 2 sum_{k,i<j} l_i l_j h_{n+j,i,k} h_{n+i,j,k} }.
    Broadcasts like ``evaluate_F_direct``.
    """
    hv = _tensor_of(h)
    lam = np.asarray(lambdas, dtype=float)
    m, n = hv.shape[-3], hv.shape[-2]
    p = min(n, m)
    omega = star_omega(lam)
    s0 = np.sum(hv * hv, axis=(-3, -2, -1))
    if p == 0:
        out = -omega * s0
        return float(out) if np.ndim(out) == 0 else out
    lamp = lam[..., :p]
    hd = _diag_slot(hv, p)
    diag_pairs = np.einsum("...ik,...jk->...ij", hd, hd)
    hp = hv[..., :p, :p, :]
    cross = np.einsum("...ijk,...jik->...ij", hp, hp)

    def strict_upper(x):
        full = np.einsum("...i,...ij,...j->...", lamp, x, lamp)
        diag = np.einsum("...i,...ii->...", lamp * lamp, x)
        return 0.5 * (full - diag)

    braces = s0 - 2.0 * strict_upper(diag_pairs) + 2.0 * strict_upper(cross)
    out = -omega * braces
    return float(out) if np.ndim(out) == 0 else out


def rhs_gradient_star_omega(lambdas, h):
    """Analytic tangential gradient of the projection factor.

    Component k is -omega * sum_i l_i h_{n+i,i,k}.
    """
    hv = _tensor_of(h)
    lam = np.asarray(lambdas, dtype=float)
    m, n = hv.shape[-3], hv.shape[-2]
    p = min(n, m)
    omega = np.asarray(star_omega(lam))
    if p == 0:
        return np.zeros(hv.shape[:-3] + (n,))
    hd = _diag_slot(hv, p)
    contract = np.einsum("...i,...ik->...k", lam[..., :p], hd)
    return -omega[..., None] * contract
