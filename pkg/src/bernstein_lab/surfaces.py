"""Built-in exact minimal graphs used by the discrete verification suite.

Every entry returns a ``MapSpec`` with analytic first and second derivatives.
Minimality is not taken on faith: the test suite certifies each surface by
computing the mean curvature trace from the second fundamental form.

Names: ``holo_z2``, ``holo_z3`` (holomorphic curves as graphs R^2 -> R^2),
``scherk`` (codimension one, ln(cos x / cos y)), ``catenoid_graph``
(codimension one over an annulus), ``lawson_osserman`` (the Lipschitz
minimal cone R^4 -> R^3 over a Hopf-map sphere), and ``lagrangian_harmonic``
(gradient graph of a harmonic polynomial potential, a special Lagrangian).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import MapSpec, polynomial_spec

SQRT5_HALF = math.sqrt(5.0) / 2.0


def _as_domain(domain, default):
    if domain is None:
        return np.asarray(default, dtype=float)
    return np.asarray(domain, dtype=float)


def _holo_z2(domain):
    dom = _as_domain(domain, [[-1.0, 1.0], [-1.0, 1.0]])
    return polynomial_spec(
        2, 2,
        [[((2, 0), 1.0), ((0, 2), -1.0)], [((1, 1), 2.0)]],
        dom, name="holo_z2",
    )


def _holo_z3(domain):
    dom = _as_domain(domain, [[-1.0, 1.0], [-1.0, 1.0]])
    return polynomial_spec(
        2, 2,
        [[((3, 0), 1.0), ((1, 2), -3.0)], [((2, 1), 3.0), ((0, 3), -1.0)]],
        dom, name="holo_z3",
    )


def _scherk(domain):
    dom = _as_domain(domain, [[-1.2, 1.2], [-1.2, 1.2]])
    limit = math.pi / 2.0 - 1e-6
    if np.max(np.abs(dom)) >= limit:
        raise ValueError("scherk domain must stay inside |x|, |y| < pi/2")

    def value(x):
        return np.array([math.log(math.cos(x[0]) / math.cos(x[1]))])

    def derivs(x):
        tx, ty = math.tan(x[0]), math.tan(x[1])
        jac = np.array([[-tx], [ty]])
        hess = np.array([[[-(1.0 + tx * tx), 0.0], [0.0, 1.0 + ty * ty]]])
        return jac, hess

    return MapSpec(n=2, m=1, domain=dom, value_fn=value, deriv_fn=derivs,
                   kind="builtin", name="scherk")


def _radial_spec(phi, dphi, d2phi, n, dom, name, r_min):
    """Radial graph f(x) = phi(|x|) with analytic derivatives."""
    corners_min = np.where(
        (dom[:, 0] <= 0.0) & (dom[:, 1] >= 0.0),
        0.0,
        np.minimum(np.abs(dom[:, 0]), np.abs(dom[:, 1])),
    )
    if math.sqrt(float(np.sum(corners_min**2))) < r_min:
        raise ValueError(f"{name} domain must keep |x| >= {r_min}")

    def value(x):
        return np.array([phi(math.sqrt(float(x @ x)))])

    def derivs(x):
        r = math.sqrt(float(x @ x))
        d1, d2 = dphi(r), d2phi(r)
        jac = (d1 * x / r)[:, None]
        hess = (d2 * np.outer(x, x) / r**2
                + d1 * (np.eye(n) / r - np.outer(x, x) / r**3))[None]
        return jac, hess

    return MapSpec(n=n, m=1, domain=dom, value_fn=value, deriv_fn=derivs,
                   kind="builtin", name=name)


def _catenoid(domain):
    # Rectangular patch of the annulus 1.1 <= r <= 3 on which the catenoid
    # height arccosh(r) is smooth.
    dom = _as_domain(domain, [[1.0, 2.1], [1.0, 2.1]])
    return _radial_spec(
        phi=math.acosh,
        dphi=lambda r: 1.0 / math.sqrt(r * r - 1.0),
        d2phi=lambda r: -r / (r * r - 1.0) ** 1.5,
        n=2, dom=dom, name="catenoid_graph", r_min=1.05,
    )


def _lawson_osserman(domain):
    """The cone x -> (sqrt(5)/2) |x| eta(x/|x|) with eta the Hopf map.

    In coordinates x = (x1, x2, x3, x4), writing z1 = x1 + i x2 and
    z2 = x3 + i x4, the quadratic Q(x) = (|z1|^2 - |z2|^2, 2 Re(z1 conj(z2)),
    2 Im(z1 conj(z2))) restricts to eta on the unit sphere, so
    f(x) = c Q(x) / |x| with c = sqrt(5)/2; f is 1-homogeneous.
    """
    dom = _as_domain(domain, [[0.5, 1.5]] * 4)
    corners_min = np.where(
        (dom[:, 0] <= 0.0) & (dom[:, 1] >= 0.0),
        0.0,
        np.minimum(np.abs(dom[:, 0]), np.abs(dom[:, 1])),
    )
    if math.sqrt(float(np.sum(corners_min**2))) < 0.05:
        raise ValueError("lawson_osserman domain must exclude the origin")

    def q_val(x):
        x1, x2, x3, x4 = x
        return np.array([
            x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4,
            2.0 * (x1 * x3 + x2 * x4),
            2.0 * (x2 * x3 - x1 * x4),
        ])

    def q_grad(x):
        x1, x2, x3, x4 = x
        return np.array([
            [2 * x1, 2 * x2, -2 * x3, -2 * x4],
            [2 * x3, 2 * x4, 2 * x1, 2 * x2],
            [-2 * x4, 2 * x3, 2 * x2, -2 * x1],
        ], dtype=float)

    q_hess = np.zeros((3, 4, 4))
    q_hess[0] = np.diag([2.0, 2.0, -2.0, -2.0])
    q_hess[1, 0, 2] = q_hess[1, 2, 0] = 2.0
    q_hess[1, 1, 3] = q_hess[1, 3, 1] = 2.0
    q_hess[2, 1, 2] = q_hess[2, 2, 1] = 2.0
    q_hess[2, 0, 3] = q_hess[2, 3, 0] = -2.0

    def value(x):
        r = math.sqrt(float(x @ x))
        return SQRT5_HALF * q_val(x) / r

    def derivs(x):
        x = np.asarray(x, dtype=float)
        r = math.sqrt(float(x @ x))
        q = q_val(x)
        dq = q_grad(x)  # (3, 4): dq[a, i] = dQ^a/dx^i
        jac = SQRT5_HALF * (dq / r - np.outer(q, x) / r**3).T
        hess = SQRT5_HALF * (
            q_hess / r
            - (dq[:, :, None] * x[None, None, :]
               + dq[:, None, :] * x[None, :, None]) / r**3
            - q[:, None, None] * np.eye(4)[None] / r**3
            + 3.0 * q[:, None, None] * np.outer(x, x)[None] / r**5
        )
        return jac, hess

    return MapSpec(n=4, m=3, domain=dom, value_fn=value, deriv_fn=derivs,
                   kind="builtin", name="lawson_osserman")


def _harmonic_potential_table(degree):
    """Monomial table of Re((x + i y)^degree)."""
    table = []
    for k in range(0, degree + 1, 2):
        coeff = math.comb(degree, k) * (-1.0) ** (k // 2)
        table.append(((degree - k, k), coeff))
    return table


def _diff_table(table, axis):
    out = []
    for powers, c in table:
        if powers[axis] == 0:
            continue
        new = list(powers)
        new[axis] -= 1
        out.append((tuple(new), c * powers[axis]))
    return out


def _lagrangian_harmonic(domain, degree=3):
    """Gradient graph of the harmonic potential Re((x+iy)^degree).

    The potential solves Laplace's equation, so the Hessian of the potential
    is trace-free and the graph of its gradient is special Lagrangian, hence
    minimal.
    """
    if degree < 2:
        raise ValueError("degree must be at least 2")
    dom = _as_domain(domain, [[-1.0, 1.0], [-1.0, 1.0]])
    f_table = _harmonic_potential_table(int(degree))
    coeffs = [_diff_table(f_table, 0), _diff_table(f_table, 1)]
    spec = polynomial_spec(2, 2, coeffs, dom, name="lagrangian_harmonic")
    return spec


_BUILTINS = {
    "holo_z2": _holo_z2,
    "holo_z3": _holo_z3,
    "scherk": _scherk,
    "catenoid_graph": _catenoid,
    "lawson_osserman": _lawson_osserman,
    "lagrangian_harmonic": _lagrangian_harmonic,
}


def builtin_names():
    return tuple(sorted(_BUILTINS))


def builtin_surface(name, domain=None, **params) -> MapSpec:
    """Construct a named built-in surface, optionally on a custom domain.

    Domains are validated against each surface's region of smoothness
    (Scherk needs |x|, |y| < pi/2; the radial graphs must avoid their
    singular radius).
    """
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown surface {name!r}; choices: {', '.join(builtin_names())}"
        ) from None
    return factory(domain, **params)
