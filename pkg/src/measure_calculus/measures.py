"""Finite nonnegative measures as weighted particle clouds.

Atoms are kept in insertion order and are never merged, so ``delta_0 + delta_0``
has two atoms at the same location. Integrals do not care, but the
distinction between ``eta({x}) = 0`` and ``eta({x}) > 0`` stays constructible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, MeasureCalculusError, NumericError
from .geometry import Manifold


@dataclass(frozen=True, eq=False)
class ParticleMeasure:
    """``sum_i w_i delta_{x_i}`` with ``w_i > 0``; the empty list is the zero measure."""

    weights: np.ndarray
    points: np.ndarray
    manifold: Manifold

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        x = np.array(self.points, dtype=float).reshape(len(w), self.manifold.dim)
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise InputError("atom weights must be positive and finite")
        for p in x:
            self.manifold.check_point(p)
        w.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", x)

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(zip(self.weights, self.points))

    def __repr__(self):
        atoms = ", ".join(f"({w:g}, {p.tolist()})" for w, p in self)
        return f"ParticleMeasure([{atoms}] on {self.manifold})"

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_zero(self) -> bool:
        return len(self.weights) == 0

    def moment(self, q: float) -> float:
        """``eta(rho_o^q)``."""
        return integrate(self, lambda x: self.manifold.origin_distance(x) ** q)

    def scaled(self, c: float) -> "ParticleMeasure":
        if c < 0:
            raise InputError("scale factor must be nonnegative")
        if c == 0:
            return zero_measure(self.manifold)
        return ParticleMeasure(c * self.weights, self.points, self.manifold)

    def normalized(self) -> "ParticleMeasure":
        if self.is_zero:
            raise InputError("cannot normalize the zero measure")
        return self.scaled(1.0 / self.mass)


def zero_measure(manifold: Manifold) -> ParticleMeasure:
    return ParticleMeasure(np.empty(0), np.empty((0, manifold.dim)), manifold)


def make_measure(manifold: Manifold, atoms: Iterable) -> ParticleMeasure:
    """Build a measure from ``(weight, location)`` pairs, dropping zero weights."""
    ws, xs = [], []
    for w, x in atoms:
        w = float(w)
        if w < 0.0:
            raise InputError(f"negative atom weight {w}")
        if w == 0.0:
            continue
        ws.append(w)
        xs.append(np.atleast_1d(np.asarray(x, dtype=float)))
    if not ws:
        return zero_measure(manifold)
    return ParticleMeasure(np.array(ws), np.array(xs), manifold)


def dirac(manifold: Manifold, x, weight: float = 1.0) -> ParticleMeasure:
    return make_measure(manifold, [(weight, x)])


def _same_manifold(a: ParticleMeasure, b: ParticleMeasure):
    if a.manifold != b.manifold:
        raise InputError(f"measures live on different manifolds ({a.manifold} vs {b.manifold})")


def concat(a: ParticleMeasure, b: ParticleMeasure) -> ParticleMeasure:
    """``a + b`` as the concatenated atom list."""
    _same_manifold(a, b)
    return ParticleMeasure(
        np.concatenate([a.weights, b.weights]),
        np.concatenate([a.points, b.points]),
        a.manifold,
    )


def integrate(eta: ParticleMeasure, h: Callable) -> float:
    """``eta(h) = sum_i w_i h(x_i)``."""
    total = 0.0
    for w, x in eta:
        v = float(h(x))
        if not np.isfinite(v):
            raise NumericError(f"integrand is not finite at {x}")
        total += w * v
    return total


def integrate_signed(gamma: ParticleMeasure, eta: ParticleMeasure, h: Callable) -> float:
    """``(gamma - eta)(h)`` as a difference of two nonnegative integrals."""
    return integrate(gamma, h) - integrate(eta, h)


def add_dirac(eta: ParticleMeasure, s: float, x) -> ParticleMeasure:
    """``eta + s delta_x``; the new atom is appended even if ``x`` is already an atom."""
    if not s > 0.0:
        raise InputError(f"Dirac weight must be positive, got {s}")
    return concat(eta, dirac(eta.manifold, x, s))


def convex_combine(mu: ParticleMeasure, nu: ParticleMeasure, s: float) -> ParticleMeasure:
    """``(1-s) mu + s nu``."""
    if not 0.0 <= s <= 1.0:
        raise InputError(f"convex weight must lie in [0, 1], got {s}")
    _same_manifold(mu, nu)
    return concat(mu.scaled(1.0 - s), nu.scaled(s))


def pushforward(eta: ParticleMeasure, T: Callable) -> ParticleMeasure:
    """Image measure ``eta o T^{-1}``: same weights, atoms moved by ``T``."""
    m = eta.manifold
    pts = [m.project_point(T(x)) for x in eta.points]
    pts = np.array(pts).reshape(len(eta), m.dim)
    return ParticleMeasure(eta.weights, pts, m)


def reweight(eta: ParticleMeasure, g: Callable) -> ParticleMeasure:
    """Density reweighting ``(g eta)(A) = int_A g d eta``."""
    w = np.array([float(g(x)) for x in eta.points])
    if np.any(w < 0.0):
        raise InputError("reweighting density is negative at an atom")
    if not np.all(np.isfinite(w)):
        raise NumericError("reweighting density is not finite")
    w = w * eta.weights
    keep = w > 0.0
    return ParticleMeasure(w[keep], eta.points[keep], eta.manifold)


def sample_field(v, eta: ParticleMeasure) -> np.ndarray:
    """Evaluate a vector field at the atoms (or validate an already sampled one)."""
    if callable(v):
        out = np.array([v(x) for x in eta.points], dtype=float).reshape(len(eta), eta.manifold.dim)
    else:
        out = np.asarray(v, dtype=float)
        if out.shape != (len(eta), eta.manifold.dim):
            raise InputError(f"field sample of shape {out.shape} does not match {len(eta)} atoms")
    if eta.manifold.is_sphere:
        for x, u in zip(eta.points, out):
            eta.manifold.check_tangent(x, u)
    return out


def l2_inner(v, w, eta: ParticleMeasure) -> float:
    """``<v, w>_{L^2(eta)} = sum_i w_i <v(x_i), w(x_i)>``."""
    vs, ws = sample_field(v, eta), sample_field(w, eta)
    return float(np.sum(eta.weights * np.einsum("ij,ij->i", vs, ws)))


def l2_norm(v, eta: ParticleMeasure) -> float:
    return float(np.sqrt(l2_inner(v, v, eta)))


# ----------------------------------------------------------------------
# unequal-mass Wasserstein metric
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Coupling:
    """Optimal plan between ``gamma`` (rows) and ``eta`` (columns) and its cost ``pi(rho^p)``."""

    plan: np.ndarray
    cost: float
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def marginal_error(self) -> float:
        """Largest relative violation of the marginal constraints."""
        scale = max(1.0, float(np.sum(self.row_marginal)))
        if self.plan.size == 0:
            return 0.0
        r = np.abs(self.plan.sum(axis=1) - self.row_marginal).max()
        c = np.abs(self.plan.sum(axis=0) - self.col_marginal).max()
        return float(max(r, c) / scale)


def cost_matrix(gamma: ParticleMeasure, eta: ParticleMeasure, p: float) -> np.ndarray:
    m = gamma.manifold
    return np.array([[m.distance(x, y) ** p for y in eta.points] for x in gamma.points]).reshape(len(gamma), len(eta))


def coupling_marginals(gamma: ParticleMeasure, eta: ParticleMeasure):
    """Row sums ``eta(M) gamma`` and column sums ``gamma(M) eta``."""
    return eta.mass * gamma.weights, gamma.mass * eta.weights


def _spanning_basis(plan: np.ndarray):
    """Basic cells of a vertex plan, completed with zero cells to a spanning tree of rows and columns."""
    n, k = plan.shape
    parent = list(range(n + k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    basis = []
    positive = [(i, j) for i, j in zip(*np.nonzero(plan > 0.0))]
    zero = [(i, j) for i in range(n) for j in range(k) if not plan[i, j] > 0.0]
    for i, j in positive + zero:
        a, b = find(i), find(n + j)
        if a != b:
            parent[a] = b
            basis.append((int(i), int(j)))
        elif plan[i, j] > 0.0:
            return None  # positive support has a cycle: not a vertex
        if len(basis) == n + k - 1:
            break
    return basis


def _northwest_corner(rows: np.ndarray, cols: np.ndarray):
    n, k = len(rows), len(cols)
    plan = np.zeros((n, k))
    r, c = rows.copy(), cols.copy()
    i = j = 0
    basis = []
    while i < n and j < k:
        t = min(r[i], c[j])
        plan[i, j] = t
        basis.append((i, j))
        r[i] -= t
        c[j] -= t
        if i == n - 1:
            j += 1
        elif j == k - 1 or r[i] <= c[j]:
            i += 1
        else:
            j += 1
    return plan, basis


def _tree_path(basis, n: int, src: int, dst: int):
    """Basic cells on the tree path from row node ``src`` to column node ``n + dst``."""
    adj: dict[int, list] = {}
    for i, j in basis:
        adj.setdefault(i, []).append((n + j, (i, j)))
        adj.setdefault(n + j, []).append((i, (i, j)))
    prev = {src: None}
    stack = [src]
    while stack:
        a = stack.pop()
        for b, cell in adj.get(a, []):
            if b not in prev:
                prev[b] = (a, cell)
                stack.append(b)
    path, node = [], n + dst
    while prev[node] is not None:
        node, cell = prev[node]
        path.append(cell)
    return path[::-1]


def _polish(C: np.ndarray, plan: np.ndarray, basis, max_pivots: int = 10_000) -> np.ndarray:
    """Transportation simplex (MODI) pivots until no reduced cost is negative.

    Reduced costs come from floating potentials; those too close to zero for
    the potentials to resolve are recomputed as an exactly rounded sum around
    their cycle, so the sign of every reduced cost is decided correctly.
    """
    n, k = C.shape
    band = 8 * (n + k) * np.finfo(float).eps * max(1.0, float(np.abs(C).max()))
    plan = plan.copy()
    for _ in range(max_pivots):
        # potentials u_i + v_j = C_ij on basic cells
        u, v = np.full(n, np.nan), np.full(k, np.nan)
        u[basis[0][0]] = 0.0
        pending = list(basis)
        while pending:
            rest = []
            for i, j in pending:
                if not np.isnan(u[i]):
                    v[j] = C[i, j] - u[i]
                elif not np.isnan(v[j]):
                    u[i] = C[i, j] - v[j]
                else:
                    rest.append((i, j))
            pending = rest
        reduced = C - u[:, None] - v[None, :]
        for i, j in basis:
            reduced[i, j] = np.inf
        entering = path = None
        i0, j0 = np.unravel_index(np.argmin(reduced), reduced.shape)
        if reduced[i0, j0] < -band:
            entering = (int(i0), int(j0))
        else:
            for i, j in zip(*np.nonzero(reduced < band)):
                cyc = _tree_path(basis, n, int(i), int(j))
                exact = math.fsum([C[i, j]] + [C[c] if t % 2 else -C[c] for t, c in enumerate(cyc)])
                if exact < 0.0:
                    entering, path = (int(i), int(j)), cyc
                    break
        if entering is None:
            break
        if path is None:
            path = _tree_path(basis, n, *entering)
        minus = path[0::2]
        leave = min(minus, key=lambda c: plan[c])
        theta = plan[leave]
        for t, cell in enumerate(path):
            plan[cell] += -theta if t % 2 == 0 else theta
        plan[leave] = 0.0
        plan[entering] += theta
        basis = [c for c in basis if c != leave] + [entering]
    return np.clip(plan, 0.0, None)


def optimal_coupling(gamma: ParticleMeasure, eta: ParticleMeasure, p: float) -> Coupling:
    """Solve the transportation LP ``min pi(rho^p)`` over ``C(gamma, eta)``.

    HiGHS dual simplex supplies a vertex; transportation-simplex pivots then
    settle reduced costs below the solver's dual tolerance, which matters when
    the optimal cost is tiny and is raised to the power ``1/p``.
    """
    if not p > 0:
        raise InputError(f"p must be positive, got {p}")
    _same_manifold(gamma, eta)
    rows, cols = coupling_marginals(gamma, eta)
    n, k = len(gamma), len(eta)
    if n == 0 or k == 0:
        return Coupling(np.zeros((n, k)), 0.0, rows, cols)
    if n * k > 10_000:
        raise InputError(f"{n} x {k} coupling exceeds the supported problem size")
    C = cost_matrix(gamma, eta, p)
    # equality constraints: row sums then column sums of the flattened plan
    A = np.zeros((n + k, n * k))
    for i in range(n):
        A[i, i * k:(i + 1) * k] = 1.0
    for j in range(k):
        A[n + j, j::k] = 1.0
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([rows, cols]), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise MeasureCalculusError(f"transportation LP failed: {res.message}")
    plan = np.clip(res.x.reshape(n, k), 0.0, None)
    basis = _spanning_basis(plan)
    if basis is None:
        plan, basis = _northwest_corner(rows, cols)
    plan = _polish(C, plan, basis)
    return Coupling(plan, float(np.sum(plan * C)), rows, cols)


def wasserstein_p(gamma: ParticleMeasure, eta: ParticleMeasure, p: float) -> float:
    """``|gamma(1+rho_o^p) - eta(1+rho_o^p)| + (inf_pi pi(rho^p))^{1/max(p,1)}``."""
    if not p > 0:
        raise InputError(f"p must be positive, got {p}")
    _same_manifold(gamma, eta)
    o_dist = gamma.manifold.origin_distance
    mass_term = abs(
        integrate(gamma, lambda x: 1.0 + o_dist(x) ** p) - integrate(eta, lambda x: 1.0 + o_dist(x) ** p)
    )
    cost = optimal_coupling(gamma, eta, p).cost
    return float(mass_term + max(cost, 0.0) ** (1.0 / max(p, 1.0)))


# ----------------------------------------------------------------------
# text format: one atom per line, "weight x1 x2 ... xd"
# ----------------------------------------------------------------------


def parse_measure(text: str, manifold: Manifold) -> ParticleMeasure:
    """Parse the line format; blank lines and ``#`` comments are skipped."""
    atoms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = [float(t) for t in line.split()]
        except ValueError:
            raise InputError(f"line {lineno}: not a list of numbers: {line!r}") from None
        if len(vals) != manifold.dim + 1:
            raise InputError(f"line {lineno}: expected weight and {manifold.dim} coordinates, got {len(vals)} values")
        x = np.array(vals[1:])
        if manifold.is_sphere:
            # files written with limited precision: accept and renormalize near-unit points
            x = manifold.project_point(x, tol=1e-6)
        atoms.append((vals[0], x))
    return make_measure(manifold, atoms)


def load_measure(path, manifold: Manifold) -> ParticleMeasure:
    return parse_measure(Path(path).read_text(), manifold)


def format_measure(eta: ParticleMeasure) -> str:
    return "".join(" ".join(format(v, ".17g") for v in (w, *x)) + "\n" for w, x in eta)


def save_measure(eta: ParticleMeasure, path) -> None:
    Path(path).write_text(format_measure(eta))


def as_measure(manifold: Manifold, atoms: Sequence) -> ParticleMeasure:
    """Accept a measure, a list of ``(w, x)`` pairs or a list of ``[w, x1, ..., xd]`` rows."""
    if isinstance(atoms, ParticleMeasure):
        return atoms
    pairs = []
    for a in atoms:
        if len(a) == 2 and np.ndim(a[1]) == 1:
            pairs.append((a[0], a[1]))
        else:
            pairs.append((a[0], np.asarray(a[1:], dtype=float)))
    return make_measure(manifold, pairs)
