"""Confluent (degenerate energy) SUSY transformations through Jordan chains.

Integral method: u_j = -2 u1 v_j with

    w_j(x) = w_j(x0) + int_{x0}^x u1 u_{j-1},   v_j(x) = v_j(x0) + int_{x0}^x w_j / u1^2.

Differential method (k = 2): u2 = c2 u1 + d2 u1 int_{x0}^x dy/u1^2 + du1/deps.

Values of v_j, w_j come from panel quadrature; their derivatives follow
exactly from the defining relations, so every chain member carries a jet.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isinf

import numpy as np
import sympy as sp
from scipy import integrate

from . import _jet
from ._panels import PanelMesh
from .errors import InvalidParameterError, QuadratureOverflowError, SingularTransformationError
from .schrodinger import (DEFAULT_BOX, Potential, WaveFunction, count_nodes, decays,
                          harmonic_oscillator, oscillator_eigenfunction)
from .susy import NonSingularityReport, SusyTransform, partner_potential

TAIL_LENGTH = 5.0


@dataclass(frozen=True)
class JordanChain:
    eps: float
    u: tuple  # u_1..u_k; an entry is None when it cannot be formed (see notes)
    method: str
    constants: tuple
    x0: float
    base_potential: Potential = field(default_factory=harmonic_oscillator)
    w: tuple = ()  # key functions w_2..w_k (integral method)
    notes: tuple = ()

    @property
    def order(self) -> int:
        return len(self.u)


def _tail(f2, a: float, direction: int) -> float:
    """Integral of f2 over the TAIL_LENGTH units beyond the grid edge a."""
    lo, hi = (a - TAIL_LENGTH, a) if direction < 0 else (a, a + TAIL_LENGTH)
    val, _ = integrate.quad(lambda y: float(f2(np.array([y]))[0]), lo, hi, epsabs=1e-300, limit=200)
    return val


def _has_node(values: np.ndarray) -> bool:
    s = np.sign(values)
    return bool(np.any(s == 0) or np.any(s != s.flat[0]))


def chain_integral(u1: WaveFunction, k: int = 2, x0: float = float("-inf"), constants=None,
                   domain=DEFAULT_BOX, potential: Potential | None = None) -> JordanChain:
    """Jordan chain of length k by nested quadrature.

    ``constants`` holds (v_j(x0), w_j(x0)) for j = 2..k.  An infinite ``x0``
    anchors at the matching grid edge; w_2 then receives a tail estimate.
    When u1 has a node, or decays towards an infinite anchor, the v_j
    integrals diverge: for k = 2 the chain keeps w_2 (all the partner needs)
    and leaves u_2 unset, for k > 2 it raises.
    """
    if k < 2:
        raise InvalidParameterError("a Jordan chain needs k >= 2")
    potential = potential or harmonic_oscillator()
    constants = list(constants) if constants is not None else [(0.0, 0.0)] * (k - 1)
    if len(constants) != k - 1:
        raise InvalidParameterError(f"expected {k - 1} (v, w) anchor pairs, got {len(constants)}")
    a, b = domain
    anchor = a if x0 == float("-inf") else b if x0 == float("inf") else float(x0)
    mesh = PanelMesh(domain, anchor)
    u1_nodes = u1(mesh.x)
    if not np.all(np.isfinite(u1_nodes)):
        raise QuadratureOverflowError("u1 is not finite on the quadrature mesh")
    singular_u1 = _has_node(u1_nodes)
    if singular_u1 and k > 2:
        raise QuadratureOverflowError("integral of w_j/u1^2 diverges: u1 has a node in the domain")
    # w_j/u1^2 is not integrable towards an infinite anchor where u1 decays
    open_end = isinf(x0) and decays(u1, domain, "left" if x0 < 0 else "right")
    if open_end and k > 2:
        raise QuadratureOverflowError("v_j diverges at the infinite anchor (u1 decays there); use a finite x0")

    members: list = [u1]
    keys = []
    prev_nodes = u1_nodes
    notes = []
    for j in range(2, k + 1):
        v0, w0 = constants[j - 2]
        if j == 2 and isinf(x0):
            tail = _tail(lambda y: u1(y) ** 2, anchor, -1 if x0 < 0 else 1)
            w0 = w0 + tail if x0 < 0 else w0 - tail
        w_pf = mesh.cumulative(u1_nodes * prev_nodes, w0)
        prev = members[-1]
        w_fn = _key_function(w_pf, u1, prev, j)
        keys.append(w_fn)
        if singular_u1 or open_end:
            why = "u1 has a node" if singular_u1 else "u1 decays at the infinite anchor"
            notes.append(f"u2 not formed: {why}, so v2 diverges; w2 is exact")
            members.append(None)
            break
        integrand = w_pf.nodes / u1_nodes**2
        if not np.all(np.isfinite(integrand)):
            raise QuadratureOverflowError(f"integral of w_{j}/u1^2 overflowed")
        v_pf = mesh.cumulative(integrand, v0)
        if not np.all(np.isfinite(v_pf.nodes)):
            raise QuadratureOverflowError(f"v_{j} overflowed")
        members.append(_chain_member(v_pf, w_fn, u1, j, potential))
        prev_nodes = -2 * u1_nodes * v_pf.nodes
    return JordanChain(u1.energy, tuple(members), "integral", tuple(map(tuple, constants)),
                       float(x0), potential, tuple(keys), tuple(notes))


def _key_function(w_pf, u1: WaveFunction, prev: WaveFunction, j: int) -> WaveFunction:
    def jet_fn(x, k):
        if k == 0:
            return w_pf(x)[None]
        return _jet.integrate(_jet.mul(u1.jet(x, k - 1), prev.jet(x, k - 1)), w_pf(x))

    return WaveFunction(jet_fn, None, name=f"w{j}")


def _chain_member(v_pf, w_fn: WaveFunction, u1: WaveFunction, j: int, potential) -> WaveFunction:
    def jet_fn(x, k):
        u = u1.jet(x, k)
        if k == 0:
            return -2 * u * v_pf(x)
        dv = _jet.div(w_fn.jet(x, k - 1), _jet.mul(u[:k], u[:k]))
        return -2 * _jet.mul(u, _jet.integrate(dv, v_pf(x)))

    return WaveFunction(jet_fn, u1.energy, name=f"u{j}")


def chain_differential(u1: WaveFunction, du1_deps: WaveFunction, c2: float, d2: float,
                       x0: float = 0.0, domain=DEFAULT_BOX,
                       potential: Potential | None = None) -> JordanChain:
    """Second chain member from the parametric derivative of u1."""
    potential = potential or harmonic_oscillator()
    mesh = PanelMesh(domain, x0)
    u1_nodes = u1(mesh.x)
    if _has_node(u1_nodes):
        raise QuadratureOverflowError("integral of 1/u1^2 diverges: u1 has a node in the domain")
    inv = 1.0 / u1_nodes**2
    if not np.all(np.isfinite(inv)):
        raise QuadratureOverflowError("1/u1^2 overflowed on the quadrature mesh")
    i_pf = mesh.cumulative(inv, 0.0)

    def jet_fn(x, k):
        u = u1.jet(x, k)
        if k == 0:
            second = u * i_pf(x)
        else:
            second = _jet.mul(u, _jet.integrate(_jet.reciprocal(_jet.mul(u[:k], u[:k])), i_pf(x)))
        return c2 * u + d2 * second + du1_deps.jet(x, k)

    u2 = WaveFunction(jet_fn, u1.energy, name="u2")
    return JordanChain(u1.energy, (u1, u2), "differential", (float(c2), float(d2)), float(x0), potential)


def match_constants(chain: JordanChain, du1_deps: WaveFunction, x0: float = 0.0,
                    points=None, domain=DEFAULT_BOX) -> tuple[float, float]:
    """(c2, d2) reproducing the integral-method u2 in the differential form.

    Solved by collocation of u2 at two points.
    """
    if chain.method != "integral" or chain.u[1] is None:
        raise InvalidParameterError("need an integral-method chain with u2 formed")
    u1, u2 = chain.u[0], chain.u[1]
    probe = chain_differential(u1, du1_deps, 0.0, 0.0, x0, domain)
    basis_d = chain_differential(u1, du1_deps.scaled(0.0), 0.0, 1.0, x0, domain).u[1]
    pts = np.array(points if points is not None else [x0 - 0.5, x0 + 0.5], dtype=float)
    rhs = u2(pts) - probe.u[1](pts)
    mat = np.column_stack([u1(pts), basis_d(pts)])
    c2, d2 = np.linalg.solve(mat, rhs)
    return float(c2), float(d2)


def key_wronskian(chain: JordanChain) -> WaveFunction:
    """W(u1, u2) of a k = 2 chain; equals -2 w2 for the integral method."""
    if chain.order != 2:
        raise InvalidParameterError("key_wronskian is defined for k = 2 chains")
    if chain.method == "integral":
        return chain.w[0].scaled(-2.0)
    u1, u2 = chain.u

    def jet_fn(x, k):
        a, b = u1.jet(x, k + 1), u2.jet(x, k + 1)
        return _jet.mul(a[: k + 1], _jet.diff(b)) - _jet.mul(_jet.diff(a), b[: k + 1])

    return WaveFunction(jet_fn, None, name="W(u1,u2)")


def confluent_partner(chain: JordanChain, interval=None, check: bool = True) -> Potential:
    """V - [log W(u1..uk)]''; for k = 2 written as V - (u1^2/w2)'."""
    base = chain.base_potential
    c2 = 2 * base.convention_factor
    if chain.order == 2:
        wk = key_wronskian(chain)
        if check:
            grid = interval or DEFAULT_BOX
            if count_nodes(wk, grid):
                raise SingularTransformationError("the key Wronskian has a node")

        def jet_fn(x, k):
            return base.jet(x, k) - c2 * _jet.diff(_jet.log_derivative(wk.jet(x, k + 2)))

        return Potential(lambda x: jet_fn(x, 0)[0], f"confluent[{chain.eps:g}]", base.domain,
                         base.convention_factor, jet_fn, {"eps": chain.eps, "method": chain.method})
    if any(u is None for u in chain.u):
        raise SingularTransformationError("chain members missing; the seed has a node")
    t = SusyTransform(chain.u, base, confluent=True)
    return partner_potential(t, interval or DEFAULT_BOX, check)


def validate_confluent_seed(u1: WaveFunction, b2: float, interval=DEFAULT_BOX) -> NonSingularityReport:
    """Seed admissibility for k = 2 from edge behaviour of u1.

    With u1 vanishing on the left, b2 = w2(-inf) and w2 ranges over
    (b2, b2 + N), N = int u1^2.  If u1 vanishes only on the right, b2 is read
    as w2(+inf) and w2 ranges over (b2 - N, b2).
    """
    left, right = decays(u1, interval, "left"), decays(u1, interval, "right")
    nodes = [count_nodes(u1, interval)]
    if not (left or right):
        return NonSingularityReport("singular", "u1 vanishes at neither edge: w2 has a node for every b2",
                                    nodes)
    total = float("inf")
    if left and right:
        x = np.linspace(*interval, 4001)
        total = float(integrate.simpson(u1(x) ** 2, x=x))
    if left:
        admissible = b2 >= 0 or (right and b2 <= -total)
        edge = np.isclose(b2, 0.0, atol=1e-14) or (right and np.isclose(b2, -total, rtol=1e-10))
        rng = "b2 >= 0" + (f" or b2 <= {-total:.6g}" if right else "")
    else:
        admissible = b2 <= 0
        edge = np.isclose(b2, 0.0, atol=1e-14)
        rng = "b2 <= 0 (b2 = w2(+inf))"
    if not admissible:
        return NonSingularityReport("singular", f"w2 has a node; admissible range {rng}", nodes)
    normalizable = left and right
    if normalizable and edge:
        return NonSingularityReport("nonsingular", f"b2 on the edge of {rng}: level deleted", nodes,
                                    deleted_levels=[u1.energy])
    if normalizable:
        return NonSingularityReport("nonsingular", f"b2 inside {rng}: isospectral", nodes)
    chain = chain_integral(u1, 2, float("-inf") if left else float("inf"), [(0.0, b2)], interval)
    w2 = chain.w[0]
    try:
        created = decays(lambda x: u1(x) / w2(x), interval, "both")
    except FloatingPointError:
        created = False
    return NonSingularityReport("nonsingular", f"one-edge seed, {rng}", nodes,
                                created_levels=[u1.energy] if created else [])


_x = sp.Symbol("x", real=True)
_b2 = sp.Symbol("b2", real=True)
_C32 = _x**2 / 2 - sp.diff(
    4 * _x**2 / (sp.sqrt(sp.pi) * (2 * _b2 + 1) * sp.exp(_x**2)
                 + sp.sqrt(sp.pi) * sp.exp(_x**2) * sp.erf(_x) - 2 * _x), _x)


def isospectral_closed_form(b2: float) -> Potential:
    """Printed one-parameter family built on psi_1, b2 = w2(-inf)."""
    f = sp.lambdify(_x, _C32.subs(_b2, b2), modules=["scipy", "numpy"])
    return Potential(lambda x: np.broadcast_to(f(x), np.shape(x)).astype(float), "2susy-c32",
                     meta={"b2": b2})


def psi1_family(b2: float, domain=DEFAULT_BOX) -> JordanChain:
    """Integral-method chain on psi_1 with w2(-inf) = b2."""
    return chain_integral(oscillator_eigenfunction(1), 2, float("-inf"), [(0.0, b2)], domain)
