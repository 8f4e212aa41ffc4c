"""Enveloping-algebra elements as differential operators and their
fundamental solutions.

An EnvelopingElement is a complex combination of ordered words in the
generators E_i of the base group.  On the group it acts as
P_u f(x) = Σ c_w D_{w_1}···D_{w_k} f(x) with
D_i f(x) = d/dt f(exp(-tE_i)·x)|_0, realized by nested central differences
on the analytic evaluation of f (the one-parameter subgroups are exact in
coordinates).  On the abelian picture every generator acts as -∂_i, so Q_u
is constant-coefficient and has the polynomial symbol
symbol(u)(λ) = Σ c_w Π (-iλ_{w_j}).

Fundamental solutions are built by Tikhonov-regularized Fourier division on
the abelian picture, E = 𝓕⁻¹[conj(P)/(|P|²+ε²)], and pulled back to the
group along Γ; the twisted coordinate is evaluated by a semidiscrete
inverse transform (exact trigonometric sum), never by interpolation.
Candidate solutions are graded by weak residuals |⟨E, Pᵤᵗφ⟩ - φ(e)|.
"""

from dataclasses import dataclass

import numpy as np

from .extension import tilde_eval_coords
from .groups import n_mul, rho_apply, s_mul
from .testfuncs import Axis, GridFunction, dual_axis, grid_mesh, grid_nodes

__all__ = [
    "EnvelopingElement", "SymbolPolynomial", "ZeroOperatorError",
    "generator_flow", "generator_field", "apply_P", "apply_Q", "symbol",
    "transpose", "operator_identity_residual", "FundamentalSolution",
    "fundamental_solution_abelian", "fundamental_solution_group",
    "weak_residuals", "apply_P_grid",
]

MAX_WORD = 4

_DEFAULT_H = {0: 1e-4, 1: 1e-4, 2: 3e-3, 3: 1e-2, 4: 3e-2}


class ZeroOperatorError(ValueError):
    """Raised when an operator with identically-zero symbol is inverted."""


@dataclass(frozen=True)
class EnvelopingElement:
    """Σ c_w · E_{w_1}···E_{w_k}; terms = (coefficient, word)."""

    dim: int
    terms: tuple

    def __post_init__(self):
        norm = []
        for c, word in self.terms:
            word = tuple(int(i) for i in word)
            if any(i < 0 or i >= self.dim for i in word):
                raise IndexError(f"generator index out of range in word {word}")
            norm.append((complex(c), word))
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def max_word(self):
        return max((len(w) for _, w in self.terms), default=0)


def transpose(u):
    """Formal transpose: words reversed, coefficient × (-1)^{|word|}."""
    return EnvelopingElement(
        u.dim, tuple((c * (-1.0) ** len(w), w[::-1]) for c, w in u.terms))


# ── generator flows and stencils ─────────────────────────────────────────────

def generator_flow(group, m, i):
    """x ↦ exp(tE_i)·x in coordinates (exact); returns flow(t, x)."""
    if group == "M":
        def flow(t, x):
            out = np.array(x, dtype=float, copy=True)
            out[..., i] += t
            return out
        return flow
    d_n = m * (m - 1) // 2
    if group == "N":
        if i >= d_n:
            raise IndexError(f"generator {i} out of range for N, m={m}")

        def flow(t, x):
            x = np.asarray(x, dtype=float)
            g = np.zeros(d_n)
            g[i] = t
            return n_mul(m, g, x)
        return flow
    if group == "S":
        if i >= d_n + m - 1:
            raise IndexError(f"generator {i} out of range for S, m={m}")

        def flow(t, x):
            x = np.asarray(x, dtype=float)
            g = np.zeros(d_n + m - 1)
            g[i] = t
            return s_mul(m, g, x)
        return flow
    raise ValueError(f"unknown group {group!r}")


def generator_field(i, group, m=None, h_fd=1e-4):
    """D_i f(x) = d/dt f(exp(-tE_i)·x)|_0 by central differences."""
    flow = generator_flow(group, m, i)

    def field(f):
        def df(x):
            return (np.asarray(f(flow(-h_fd, x)), dtype=complex)
                    - np.asarray(f(flow(h_fd, x)), dtype=complex)) / (2 * h_fd)
        return df

    return field


def _apply_word(f, word, flows, x, h):
    if not word:
        return np.asarray(f(x), dtype=complex)
    flow = flows[word[0]]
    lo = _apply_word(f, word[1:], flows, flow(-h, x), h)
    hi = _apply_word(f, word[1:], flows, flow(h, x), h)
    return (lo - hi) / (2 * h)


def _apply(u, f, group, m, points, h_fd):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if u.max_word > MAX_WORD:
        raise ValueError(f"word length {u.max_word} exceeds supported {MAX_WORD}")
    flows = {i: generator_flow(group, m, i) for i in range(u.dim)}
    out = np.zeros(points.shape[0], dtype=complex)
    for c, word in u.terms:
        h = h_fd if h_fd is not None else _DEFAULT_H[len(word)]
        out += c * _apply_word(f, word, flows, points, h)
    return out


def apply_P(u, f, group, m, points, h_fd=None):
    """P_u f at points: nested group-flow stencils per word."""
    return _apply(u, f, group, m, points, h_fd)


def apply_Q(u, f, points, h_fd=None):
    """Q_u f at points: every generator acts as -∂_i."""
    return _apply(u, f, "M", None, points, h_fd)


# ── symbols ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SymbolPolynomial:
    """Polynomial in λ: terms map exponent tuples → complex coefficients."""

    dim: int
    terms: tuple  # ((exponents, coefficient), ...)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape[:-1], dtype=complex)
        for exps, c in self.terms:
            val = np.full(lam.shape[:-1], c, dtype=complex)
            for i, e in enumerate(exps):
                if e:
                    val = val * lam[..., i] ** e
            out += val
        return out

    @property
    def is_zero(self):
        return all(abs(c) == 0 for _, c in self.terms)


def symbol(u):
    """The Fourier multiplier of Q_u: word (i_1..i_k) ↦ Π (-iλ_{i_j})."""
    acc = {}
    for c, word in u.terms:
        exps = [0] * u.dim
        for i in word:
            exps[i] += 1
        key = tuple(exps)
        acc[key] = acc.get(key, 0j) + c * (-1j) ** len(word)
    return SymbolPolynomial(u.dim, tuple(sorted(acc.items())))


# ── the operator identity on invariant extensions ────────────────────────────

def q_remap(u, case, m):
    """Map group generator indices to the M slots they act on.

    Differentiating the invariance relation f̃(ι(s)∘base, shift−s) = f̃
    pairs each acting-layer generator with −∂ on its shift slot and each
    top-layer generator with −∂ on its top slot.  In M coordinates
    (top, shift) for K1 this sends acting index i ↦ (m−1)+i and top index
    i ↦ i−k; for H the (n, shift) order keeps every index in place.
    """
    if case == "H":
        return u
    d_n = m * (m - 1) // 2
    k = d_n - (m - 1)

    def remap(i):
        return (m - 1) + i if i < k else i - k

    return EnvelopingElement(
        u.dim, tuple((c, tuple(remap(i) for i in w)) for c, w in u.terms))

def _m_coords_fun(f, case, m, base, shift):
    """f̃ as a function of the abelian (top, shift) / (n, shift) slots,
    with the acting slots frozen at the given extended point."""
    d_n = m * (m - 1) // 2
    base = np.asarray(base, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if case == "K1":
        k = d_n - (m - 1)

        def h(y):
            y = np.asarray(y, dtype=float)
            act = np.broadcast_to(base[:k], y.shape[:-1] + (k,))
            b = np.concatenate([act, y[..., : m - 1]], axis=-1)
            return tilde_eval_coords(f, case, m, b, y[..., m - 1:])

        return h, np.concatenate([base[k:], shift])

    def h(y):
        y = np.asarray(y, dtype=float)
        b_slot = np.broadcast_to(base[d_n:], y.shape[:-1] + (m - 1,))
        b = np.concatenate([y[..., :d_n], b_slot], axis=-1)
        return tilde_eval_coords(f, case, m, b, y[..., d_n:])

    return h, np.concatenate([base[:d_n], shift])


def operator_identity_residual(u, f, case, m, points, h_fd=None):
    """max |P_u f̃(p) − Q_u f̃(p)| over extended points; returns (res, scale).

    P_u differentiates the base-group slots (group N for K1, S for H) at
    fixed shift; Q_u differentiates the abelian (top, shift) slots at fixed
    acting coordinates.
    """
    group = "N" if case == "K1" else "S"
    p_vals, q_vals = [], []
    for base, shift in points:
        base = np.asarray(base, dtype=float)
        shift = np.asarray(shift, dtype=float)

        def F(b):
            s = np.broadcast_to(shift, b.shape[:-1] + shift.shape)
            return tilde_eval_coords(f, case, m, b, s)

        p_vals.append(apply_P(u, F, group, m, base[None, :], h_fd)[0])
        h, y0 = _m_coords_fun(f, case, m, base, shift)
        uq = q_remap(EnvelopingElement(y0.shape[0], u.terms), case, m)
        q_vals.append(apply_Q(uq, h, y0[None, :], h_fd)[0])
    p_vals, q_vals = np.asarray(p_vals), np.asarray(q_vals)
    scale = float(max(np.max(np.abs(p_vals)), np.max(np.abs(q_vals)), 1e-300))
    return float(np.max(np.abs(p_vals - q_vals))), scale


# ── fundamental solutions ────────────────────────────────────────────────────

@dataclass(frozen=True)
class FundamentalSolution:
    values: GridFunction
    epsilon: float


def _divided_symbol(u, axes, epsilon):
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    sym = symbol(u)
    if sym.is_zero:
        raise ZeroOperatorError("operator symbol is identically zero")
    dual = tuple(dual_axis(a) for a in axes)
    P = sym(grid_mesh(dual))
    return dual, np.conj(P) / (np.abs(P) ** 2 + epsilon**2)


def fundamental_solution_abelian(u, axes, epsilon=1e-8):
    """E = 𝓕⁻¹[conj(P)/(|P|²+ε²)] on the given spatial axes."""
    from .harmonic import fourier_inverse

    axes = tuple(axes)
    dual, Ehat = _divided_symbol(u, axes, epsilon)
    E = fourier_inverse(GridFunction(dual, Ehat), axes)
    return FundamentalSolution(E, float(epsilon))


def _twist_exponent(group, m, mesh):
    """(per-point phase coordinate w, index map) for the Γ-pullback.

    Returns w such that E_group(point) = E_M(w, on-grid tail coords), where
    only the first M coordinate is off-grid.
    """
    if group == "N" and m == 3:
        # Γ(h)(x, z, y) = h(z − x·y, y, x)
        x, z, y = mesh[..., 0], mesh[..., 1], mesh[..., 2]
        return z - x * y, (1, 2, 0)  # E_M axes (v1, v2, u) ← group axes (z, y, x)
    if group == "S" and m == 2:
        # Γ(h)(n, t) = h(e^{-2t} n, t)
        n, t = mesh[..., 0], mesh[..., 1]
        return np.exp(-2.0 * t) * n, (0, 1)
    raise ValueError(f"group solution not supported for {group!r}, m={m}")


def fundamental_solution_group(u, group, m, axes, epsilon=1e-8):
    """Γ-pullback of the abelian fundamental solution onto group coordinates.

    Supported: abelian N (m=2), Heisenberg N (m=3), S (m=2).  The abelian
    solution is computed on the permuted axes that make every untwisted
    coordinate land on-grid; the single twisted coordinate is evaluated by
    the semidiscrete inverse transform along its frequency axis.
    """
    from .harmonic import fourier_inverse

    axes = tuple(axes)
    uq = q_remap(u, "K1" if group == "N" else "H", m)
    if group == "N" and m == 2:
        return fundamental_solution_abelian(uq, axes, epsilon)

    mesh = grid_mesh(axes)
    w, perm = _twist_exponent(group, m, mesh)
    m_axes = tuple(axes[p] for p in perm)
    dual, Ehat = _divided_symbol(uq, m_axes, epsilon)

    # invert the on-grid tail axes (all but the first M axis) by FFT,
    # keeping the first axis in frequency: C[λ_1, tail spatial indices]
    C = Ehat
    for ax in range(1, len(m_axes)):
        a, da = m_axes[ax], dual[ax]
        vals = np.fft.ifftshift(C, axes=ax)
        lam = 2.0 * np.pi * np.fft.fftfreq(a.points, a.step)
        fac = (np.exp(1j * lam * (a.center - a.half_width))
               * da.step * a.points / (2.0 * np.pi))
        shape = [1] * C.ndim
        shape[ax] = -1
        C = np.fft.ifft(vals * fac.reshape(shape), axis=ax)

    lam1 = grid_nodes(dual[0])
    # E(point) = Σ_{λ1} C[λ1, tail(point)] e^{iλ1 w(point)} Δλ1/(2π)
    if group == "N" and m == 3:
        # tail indices: v2 ← y (axis 2), u ← x (axis 0)
        phase = np.exp(1j * w[..., None] * lam1)
        E = np.einsum("lki,ijkl->ijk", C, phase) * dual[0].step / (2 * np.pi)
    else:  # S, m=2: tail index t (axis 1)
        phase = np.exp(1j * w[..., None] * lam1)
        E = np.einsum("lj,ijl->ij", C, phase) * dual[0].step / (2 * np.pi)
    return FundamentalSolution(GridFunction(axes, E), float(epsilon))


def apply_P_grid(u, f, group, m, axes, h_fd=None):
    """P_u f sampled on the product grid (stencils on analytic f)."""
    mesh = grid_mesh(axes)
    flat = mesh.reshape(-1, mesh.shape[-1])
    vals = _apply(u, f, group, m, flat, h_fd)
    return GridFunction(tuple(axes), vals.reshape(mesh.shape[:-1]))


def weak_residuals(sol, u, group, m, phis, h_fd=None):
    """|⟨E, P_uᵗ φ⟩ − φ(e)| per test function φ, by grid quadrature."""
    E = sol.values
    ut = transpose(u)
    out = []
    dim = len(E.axes)
    e = np.zeros(dim)
    for phi in phis:
        tphi = apply_P_grid(ut, phi, group, m, E.axes, h_fd)
        pairing = np.sum((E.samples * tphi.samples).ravel(order="C")) * E.cell
        out.append(float(abs(pairing - complex(phi(e)))))
    return out
