"""Pointwise differential geometry of graphs of maps f: R^n -> R^m.

A graph point carries a 2-jet of f; from its first derivative we build the
singular-value decomposition df(a_i) = lambda_i * a_{n+i} and the adapted
orthonormal frames of the graph

    e_i      = (a_i + lambda_i a_{n+i}) / sqrt(1 + lambda_i^2)   (tangent)
    e_{n+j}  = (a_{n+j} - lambda_j a_j) / sqrt(1 + lambda_j^2)   (normal)

and from the second derivative the second fundamental form h_{a,l,k} in that
frame, whose trace over (l, k) is the mean curvature vector.

Layout conventions, fixed once for the whole package:

* ``jac`` is n x m with rows indexed by domain variables:
  ``jac[i, a] = d f^a / d x^i``.  The induced metric in domain coordinates is
  then ``g = I + jac @ jac.T`` with eigenvalues 1 + lambda_i^2.
* ``hess`` is m x n x n, symmetric in its last two slots.
* Frames are stored with vectors in columns; singular values are nonnegative
  and descending, with sign freedom absorbed into the target basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg

# Near-equal singular values are grouped and their subspace basis re-derived
# canonically (Gram-Schmidt of standard-basis projections, index order) so
# that degenerate inputs produce deterministic, smoothly varying frames.
GROUP_TOL = 1e-12
RANK_TOL = 1e-12
FD_STEP = 1e-5


class DomainError(ValueError):
    """A point lies outside a MapSpec's parameter domain."""


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MapSpec:
    """A map f: R^n -> R^m on a rectangular parameter domain.

    ``value_fn(x)`` returns f(x) as a length-m array.  When ``deriv_fn`` is
    given it must return ``(jac, hess)`` analytically; otherwise ``jet``
    falls back to centered finite differences with step 1e-5 * (1 + |x|).
    """

    n: int
    m: int
    domain: np.ndarray  # (n, 2) rows (lo, hi)
    value_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Optional[Callable[[np.ndarray], tuple]] = None
    kind: str = "custom"
    name: Optional[str] = None
    coeffs: Optional[tuple] = None  # polynomial kind only

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float).reshape(self.n, 2)
        if np.any(dom[:, 0] > dom[:, 1]):
            raise ValueError("domain intervals must satisfy lo <= hi")
        object.__setattr__(self, "domain", _readonly(dom))

    @property
    def has_analytic_derivatives(self):
        return self.deriv_fn is not None

    def contains(self, x, slack=1e-12):
        x = np.asarray(x, dtype=float)
        pad = slack * (1.0 + np.abs(x))
        return bool(
            np.all(x >= self.domain[:, 0] - pad)
            and np.all(x <= self.domain[:, 1] + pad)
        )


@dataclass(frozen=True)
class Jet2:
    """Value, first and second derivatives of f at a point of the graph."""

    x: np.ndarray       # (n,)
    value: np.ndarray   # (m,)
    jac: np.ndarray     # (n, m)
    hess: np.ndarray    # (m, n, n), symmetric in the last two slots

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(self.x))
        object.__setattr__(self, "value", _readonly(self.value))
        object.__setattr__(self, "jac", _readonly(self.jac))
        object.__setattr__(self, "hess", _readonly(self.hess))


@dataclass(frozen=True)
class SingularData:
    """Singular values of df with the adapted frames of the graph.

    ``tangent_frame`` is (n+m, n) and ``normal_frame`` is (n+m, m), vectors
    in columns; together they form an orthonormal basis of R^{n+m}.
    ``domain_basis``/``target_basis`` hold the a_i / a_{n+j} in columns.
    ``degenerate_groups`` records which consecutive singular values were
    treated as equal when the frame was canonicalized.
    """

    lambdas: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    domain_basis: np.ndarray
    target_basis: np.ndarray
    degenerate_groups: tuple = ()

    def __post_init__(self):
        for name in ("lambdas", "tangent_frame", "normal_frame",
                     "domain_basis", "target_basis"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def n(self):
        return self.domain_basis.shape[0]

    @property
    def m(self):
        return self.target_basis.shape[0]


@dataclass(frozen=True)
class SffTensor:
    """Second fundamental form h_{a,l,k} in the adapted frame.

    ``h`` has shape (m, n, n) with h[j] the matrix of <II(e_l, e_k), e_{n+j}>;
    it is stored exactly symmetrized in (l, k).
    """

    h: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _readonly(self.h))
        object.__setattr__(self, "lambdas", _readonly(self.lambdas))


# ---------------------------------------------------------------------------
# jets


def _fd_derivatives(spec, x, step):
    n, m = spec.n, spec.m
    jac = np.zeros((n, m))
    hess = np.zeros((m, n, n))
    f0 = np.asarray(spec.value_fn(x), dtype=float)
    fp = np.zeros((n, m))
    fm = np.zeros((n, m))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        fp[i] = spec.value_fn(x + e)
        fm[i] = spec.value_fn(x - e)
        jac[i] = (fp[i] - fm[i]) / (2.0 * step)
        hess[:, i, i] = (fp[i] - 2.0 * f0 + fm[i]) / step**2
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step
            fpp = np.asarray(spec.value_fn(x + ei + ej), dtype=float)
            fpm = np.asarray(spec.value_fn(x + ei - ej), dtype=float)
            fmp = np.asarray(spec.value_fn(x - ei + ej), dtype=float)
            fmm = np.asarray(spec.value_fn(x - ei - ej), dtype=float)
            cross = (fpp - fpm - fmp + fmm) / (4.0 * step**2)
            hess[:, i, j] = cross
            hess[:, j, i] = cross
    return jac, hess


def jet(spec: MapSpec, x) -> Jet2:
    """Evaluate the 2-jet of ``spec`` at ``x``.

    Uses analytic derivatives when the spec provides them, centered finite
    differences with step 1e-5 * (1 + |x|) otherwise.  Raises ``DomainError``
    for points outside the parameter domain.
    """
    x = np.asarray(x, dtype=float).reshape(spec.n)
    if not spec.contains(x):
        raise DomainError(f"point {x.tolist()} outside domain")
    value = np.asarray(spec.value_fn(x), dtype=float).reshape(spec.m)
    if spec.deriv_fn is not None:
        jac, hess = spec.deriv_fn(x)
        jac = np.asarray(jac, dtype=float).reshape(spec.n, spec.m)
        hess = np.asarray(hess, dtype=float).reshape(spec.m, spec.n, spec.n)
        scale = 1.0 + np.max(np.abs(hess))
        if np.max(np.abs(hess - np.swapaxes(hess, -1, -2))) > 1e-12 * scale:
            raise ValueError("analytic second derivatives are not symmetric")
    else:
        step = FD_STEP * (1.0 + float(np.sqrt(x @ x)))
        jac, hess = _fd_derivatives(spec, x, step)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return Jet2(x=x, value=value, jac=jac, hess=hess)


def fd_consistency(spec: MapSpec, x, step=None):
    """Max deviation between finite-difference jets at steps h and h/2.

    For a smooth evaluator both steps carry O(h^2) error, so the deviation is
    itself O(h^2); a large value flags an inconsistent evaluator.
    """
    x = np.asarray(x, dtype=float).reshape(spec.n)
    if step is None:
        step = FD_STEP * (1.0 + float(np.sqrt(x @ x)))
    j1, h1 = _fd_derivatives(spec, x, step)
    j2, h2 = _fd_derivatives(spec, x, step / 2.0)
    scale = 1.0 + max(np.max(np.abs(j1)), np.max(np.abs(h1)))
    return max(np.max(np.abs(j1 - j2)), np.max(np.abs(h1 - h2))) / scale


# ---------------------------------------------------------------------------
# singular data and frames


def _canonical_span_basis(proj, k):
    """Deterministic orthonormal basis of a k-dim subspace given its projector.

    Gram-Schmidt of the projections of the standard basis vectors, taken in
    index order; a greedy max-residual pass fills any remaining slots.
    """
    d = proj.shape[0]
    chosen = []
    used = set()

    def resid(vec):
        r = vec.copy()
        for c in chosen:
            r = r - (c @ r) * c
        return r

    for idx in range(d):
        if len(chosen) == k:
            break
        r = resid(proj[:, idx])
        nrm = np.sqrt(r @ r)
        if nrm > 0.5:
            chosen.append(r / nrm)
            used.add(idx)
    while len(chosen) < k:
        best = None
        best_norm = -1.0
        for idx in range(d):
            if idx in used:
                continue
            r = resid(proj[:, idx])
            nrm = np.sqrt(r @ r)
            if nrm > best_norm + 1e-15:
                best = (idx, r, nrm)
                best_norm = nrm
        idx, r, nrm = best
        chosen.append(r / nrm)
        used.add(idx)
    return np.array(chosen).T


def _group_indices(lams, gtol):
    groups = []
    start = 0
    n = len(lams)
    for i in range(1, n + 1):
        if i == n or lams[i - 1] - lams[i] > gtol:
            groups.append(tuple(range(start, i)))
            start = i
    return tuple(groups)


def _frames_from_jac(jac, lams, vmat):
    """Canonicalize the SVD output of one jacobian into adapted bases."""
    n, m = jac.shape
    jac_t = jac.T
    gtol = GROUP_TOL * max(1.0, float(lams[0]) if n else 1.0)
    groups = _group_indices(lams, gtol)

    amat = vmat.copy()
    for grp in groups:
        if len(grp) > 1:
            cols = amat[:, grp[0]: grp[-1] + 1]
            amat[:, grp[0]: grp[-1] + 1] = _canonical_span_basis(
                cols @ cols.T, len(grp)
            )
    for j in range(n):
        col = amat[:, j]
        if col[int(np.argmax(np.abs(col)))] < 0:
            amat[:, j] = -col
    if linalg.det(amat) < 0:
        amat[:, n - 1] = -amat[:, n - 1]

    rank_tol = RANK_TOL * max(1.0, float(lams[0]) if n else 1.0)
    p = min(n, m)
    bcols = []
    for j in range(p):
        if lams[j] > rank_tol:
            w = jac_t @ amat[:, j]
            bcols.append(w / np.sqrt(w @ w))
    base = np.array(bcols).T if bcols else np.zeros((m, 0))
    bmat = np.hstack([base, linalg.complete_orthonormal(base)])
    return amat, bmat, groups


def _assemble_frames(lams, amat, bmat):
    n = amat.shape[0]
    m = bmat.shape[0]
    p = min(n, m)
    lam_t = np.asarray(lams, dtype=float)
    lam_nu = np.zeros(m)
    lam_nu[:p] = lam_t[:p]

    inv_t = 1.0 / np.sqrt(1.0 + lam_t**2)
    inv_nu = 1.0 / np.sqrt(1.0 + lam_nu**2)

    tangent = np.zeros((n + m, n))
    tangent[:n, :] = amat * inv_t[None, :]
    bpart = np.zeros((m, n))
    bpart[:, :p] = bmat[:, :p]
    tangent[n:, :] = bpart * (lam_t * inv_t)[None, :]

    normal = np.zeros((n + m, m))
    apart = np.zeros((n, m))
    apart[:, :p] = amat[:, :p]
    normal[:n, :] = -apart * (lam_nu * inv_nu)[None, :]
    normal[n:, :] = bmat * inv_nu[None, :]
    return tangent, normal


def singular_data(jac) -> SingularData:
    """Singular values of ``jac`` and the adapted orthonormal frames.

    Output is deterministic: within (near-)equal singular values the basis is
    re-derived from the standard basis in index order, each vector's largest
    component is made positive, and the domain basis is fixed to positive
    orientation so that the projection factor equals the determinant of the
    first n rows of the tangent frame.
    """
    jac = np.asarray(jac, dtype=float)
    if jac.ndim != 2:
        raise ValueError("jac must be a 2-d array")
    if not np.all(np.isfinite(jac)):
        raise ValueError("jac must have finite entries")
    n, m = jac.shape
    s, vt = linalg.jacobi_svd(jac.T, compute_u=False)
    lams = np.zeros(n)
    lams[: min(n, m)] = s
    amat, bmat, groups = _frames_from_jac(jac, lams, vt.T)
    tangent, normal = _assemble_frames(lams, amat, bmat)
    return SingularData(
        lambdas=lams,
        tangent_frame=tangent,
        normal_frame=normal,
        domain_basis=amat,
        target_basis=bmat,
        degenerate_groups=groups,
    )


def singular_data_batch(jacs):
    """Vectorized ``singular_data`` over a batch of jacobians (B, n, m).

    Returns (lambdas, tangent, normal, domain, target, groups) with the batch
    in the leading axis; ``groups`` is a list of per-node group tuples.
    """
    jacs = np.asarray(jacs, dtype=float)
    nb, n, m = jacs.shape
    s, vt = linalg.jacobi_svd(np.swapaxes(jacs, -1, -2), compute_u=False)
    lams = np.zeros((nb, n))
    lams[:, : min(n, m)] = s
    tangent = np.zeros((nb, n + m, n))
    normal = np.zeros((nb, n + m, m))
    domain = np.zeros((nb, n, n))
    target = np.zeros((nb, m, m))
    groups = []
    for b in range(nb):
        amat, bmat, grp = _frames_from_jac(jacs[b], lams[b], vt[b].T)
        tangent[b], normal[b] = _assemble_frames(lams[b], amat, bmat)
        domain[b] = amat
        target[b] = bmat
        groups.append(grp)
    return lams, tangent, normal, domain, target, groups


# ---------------------------------------------------------------------------
# scalar invariants of df


def star_omega(lambdas):
    """Projection factor of the graph onto the domain: 1/sqrt(prod(1+l^2)).

    Equals the volume form of R^n evaluated on the tangent frame; lies in
    (0, 1].  Sign of the input is immaterial.
    """
    lam = np.asarray(lambdas, dtype=float)
    return 1.0 / np.sqrt(np.prod(1.0 + lam * lam, axis=-1))


def induced_metric(jac):
    """Induced metric of the graph in domain coordinates: I + jac @ jac.T."""
    jac = np.asarray(jac, dtype=float)
    n = jac.shape[0]
    return np.eye(n) + jac @ jac.T


# ---------------------------------------------------------------------------
# second fundamental form


def _sff_from_arrays(hess, lams, domain, target):
    """Second fundamental form in the adapted frame (broadcasts over batches).

    The graph X(u) = (u, f(u)) has coordinate Hessian concentrated in the
    target block, so projecting onto the normal frame and converting the two
    coordinate slots to the orthonormal tangent frame gives

        h[j, i1, i2] = <hess(.,.,.), b_j> (a_{i1}, a_{i2})
                       / sqrt((1+l_j^2)(1+l_{i1}^2)(1+l_{i2}^2)).
    """
    n = domain.shape[-1]
    m = target.shape[-1]
    p = min(n, m)
    lam_t = lams
    lam_nu = np.zeros(lams.shape[:-1] + (m,))
    lam_nu[..., :p] = lam_t[..., :p]
    ctang = domain / np.sqrt(1.0 + lam_t * lam_t)[..., None, :]
    cnorm = target / np.sqrt(1.0 + lam_nu * lam_nu)[..., None, :]
    core = np.einsum("...alk,...li,...kj->...aij", hess, ctang, ctang)
    h = np.einsum("...aj,...aik->...jik", cnorm, core)
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def second_fundamental_form(jet2: Jet2) -> SffTensor:
    """Second fundamental form of the graph at a 2-jet, in adapted frames."""
    sd = singular_data(jet2.jac)
    h = _sff_from_arrays(jet2.hess, sd.lambdas, sd.domain_basis,
                         sd.target_basis)
    return SffTensor(h=h, lambdas=sd.lambdas)


def mean_curvature(sff: SffTensor):
    """Mean curvature vector in the adapted normal frame: H_j = sum_k h[j,k,k]."""
    return np.einsum("...jkk->...j", sff.h)


# ---------------------------------------------------------------------------
# polynomial map specs and JSON interface


def _poly_value(coeffs, n, m, x):
    out = np.zeros(m)
    for a, table in enumerate(coeffs):
        acc = 0.0
        for powers, c in table:
            term = c
            for i in range(n):
                if powers[i]:
                    term *= x[i] ** powers[i]
            acc += term
        out[a] = acc
    return out


def _poly_derivs(coeffs, n, m, x):
    jac = np.zeros((n, m))
    hess = np.zeros((m, n, n))
    for a, table in enumerate(coeffs):
        for powers, c in table:
            for i in range(n):
                if powers[i] == 0:
                    continue
                term = c * powers[i]
                for t in range(n):
                    p = powers[t] - (1 if t == i else 0)
                    if p:
                        term *= x[t] ** p
                jac[i, a] += term
            for i in range(n):
                for j in range(i, n):
                    if i == j:
                        if powers[i] < 2:
                            continue
                        term = c * powers[i] * (powers[i] - 1)
                        for t in range(n):
                            p = powers[t] - (2 if t == i else 0)
                            if p:
                                term *= x[t] ** p
                        hess[a, i, i] += term
                    else:
                        if powers[i] == 0 or powers[j] == 0:
                            continue
                        term = c * powers[i] * powers[j]
                        for t in range(n):
                            p = powers[t]
                            if t == i or t == j:
                                p -= 1
                            if p:
                                term *= x[t] ** p
                        hess[a, i, j] += term
                        hess[a, j, i] += term
    return jac, hess


def polynomial_spec(n, m, coeffs, domain, name=None) -> MapSpec:
    """MapSpec for a polynomial map given per-component monomial tables.

    ``coeffs[a]`` is an iterable of ``(powers, c)`` with ``powers`` a length-n
    integer tuple.  Derivatives are analytic (exact monomial calculus).
    """
    frozen = tuple(
        tuple((tuple(int(p) for p in powers), float(c)) for powers, c in table)
        for table in coeffs
    )
    for table in frozen:
        for powers, _ in table:
            if len(powers) != n or any(p < 0 for p in powers):
                raise ValueError("monomial powers must be length-n nonnegative")
    if len(frozen) != m:
        raise ValueError("need one coefficient table per target component")
    return MapSpec(
        n=n,
        m=m,
        domain=np.asarray(domain, dtype=float),
        value_fn=lambda x: _poly_value(frozen, n, m, x),
        deriv_fn=lambda x: _poly_derivs(frozen, n, m, x),
        kind="polynomial",
        name=name,
        coeffs=frozen,
    )


def linear_spec(a_matrix, domain=None) -> MapSpec:
    """MapSpec of the linear map x -> x @ a_matrix (jac constant, hess zero)."""
    a_matrix = np.asarray(a_matrix, dtype=float)
    n, m = a_matrix.shape
    if domain is None:
        domain = [[-10.0, 10.0]] * n
    coeffs = []
    for a in range(m):
        table = []
        for i in range(n):
            if a_matrix[i, a] != 0.0:
                powers = tuple(1 if t == i else 0 for t in range(n))
                table.append((powers, a_matrix[i, a]))
        coeffs.append(table)
    return polynomial_spec(n, m, coeffs, domain, name="linear")


def mapspec_from_json(obj) -> MapSpec:
    """Build a MapSpec from its JSON object form.

    Schema: ``{"n": int, "m": int, "kind": "polynomial"|"builtin",
    "coeffs": [[{"powers": [...], "c": r}, ...], ...] | "name": str,
    "domain": [[lo, hi], ...]}``.
    """
    kind = obj.get("kind")
    if kind == "polynomial":
        coeffs = [
            [(tuple(entry["powers"]), float(entry["c"])) for entry in table]
            for table in obj["coeffs"]
        ]
        return polynomial_spec(
            int(obj["n"]), int(obj["m"]), coeffs, obj["domain"]
        )
    if kind == "builtin":
        from . import surfaces

        return surfaces.builtin_surface(obj["name"], domain=obj.get("domain"))
    raise ValueError(f"unknown MapSpec kind {kind!r}")


def mapspec_to_json(spec: MapSpec):
    """Serialize a polynomial or builtin MapSpec to its JSON object form."""
    if spec.kind == "polynomial":
        return {
            "n": spec.n,
            "m": spec.m,
            "kind": "polynomial",
            "coeffs": [
                [{"powers": list(powers), "c": c} for powers, c in table]
                for table in spec.coeffs
            ],
            "domain": [list(row) for row in spec.domain.tolist()],
        }
    if spec.kind == "builtin":
        return {
            "n": spec.n,
            "m": spec.m,
            "kind": "builtin",
            "name": spec.name,
            "domain": [list(row) for row in spec.domain.tolist()],
        }
    raise ValueError("only polynomial and builtin specs are serializable")
