"""Fourier transforms, group and abelian convolutions, and the reduction
identities that trade the noncommutative convolution on N (resp. S) for the
commutative one on the abelian picture.

Conventions: forward kernel e^{-i<λ,x>}, frequency-side measure Πdλ/(2π);
with the grid transform realized as FFT × Πh × center phase, the discrete
Parseval identity is machine-exact.  The dual of a uniform axis is again a
uniform axis (center 0, half-width π/h), so transforms stay inside
GridFunction.

Haar measure is Lebesgue in coordinates: dn on N (bi-invariant) and dn·dt
on S (right-invariant; left invariance fails by the modular function, which
is reported as a diagnostic, never assumed).

The two sides of the reduction identity have pointwise-equal integrands
under the natural parameterization, so computing them on a shared grid
would compare nothing.  The group side is therefore evaluated after the
substitution Z = Y^{-1}∘base (nodes on f's mass) while the abelian side
integrates against φ directly (nodes on φ's mass): two independent
discretizations whose difference is a genuine quadrature residual.
"""

from dataclasses import dataclass

import numpy as np

from .extension import tilde_eval_coords
from .groups import n_inv, n_mul, rho_scale, s_inv, s_mul
from .testfuncs import (
    Axis, GridFunction, dual_axis, grid_mesh, grid_nodes, sample,
)

__all__ = [
    "PlancherelReport", "fourier_forward", "fourier_inverse",
    "fourier_eval", "plancherel_check", "convolve_group", "convolve_abelian",
    "convolve_extended_c", "convolve_extended_c_substituted",
    "convolve_extended_group", "theorem31_residual",
    "projected_convolution_check", "group_law",
]


def group_law(group, m):
    """(mul, inv, coordinate dim) for group "N" or "S" of matrix size m."""
    d_n = m * (m - 1) // 2
    if group == "N":
        return (lambda x, y: n_mul(m, x, y)), (lambda x: n_inv(m, x)), d_n
    if group == "S":
        return (lambda x, y: s_mul(m, x, y)), (lambda x: s_inv(m, x)), d_n + m - 1
    raise ValueError(f"unknown group {group!r}")


# ── Fourier transforms ───────────────────────────────────────────────────────

def _axis_phases(axes, sign):
    """Per-axis phase e^{sign·i·λ·x0} in fftfreq order."""
    out = []
    for a in axes:
        lam = 2.0 * np.pi * np.fft.fftfreq(a.points, a.step)
        out.append(np.exp(sign * 1j * lam * (a.center - a.half_width)))
    return out


def _apply_axis_factors(vals, factors):
    for ax, fac in enumerate(factors):
        shape = [1] * vals.ndim
        shape[ax] = -1
        vals = vals * fac.reshape(shape)
    return vals


def fourier_forward(gf):
    """(𝓕f)(λ_j) = Σ_k f(x_k) e^{-i λ_j x_k} Πh on the dual grid."""
    vals = np.fft.fftn(gf.samples)
    phases = [p * a.step for p, a in zip(_axis_phases(gf.axes, -1), gf.axes)]
    vals = _apply_axis_factors(vals, phases)
    return GridFunction(tuple(dual_axis(a) for a in gf.axes),
                        np.fft.fftshift(vals))


def fourier_inverse(F, axes=None):
    """Σ_j F(λ_j) e^{+i λ_j x_k} ΠΔλ/(2π) on the given spatial axes.

    The default axes are the centered duals of F's axes; pass the original
    axes to undo fourier_forward exactly.
    """
    if axes is None:
        axes = tuple(dual_axis(a) for a in F.axes)
    axes = tuple(axes)
    if tuple(a.points for a in axes) != tuple(a.points for a in F.axes):
        raise ValueError("axis point counts do not match")
    vals = np.fft.ifftshift(F.samples)
    # e^{+iλx0} Δλ/(2π); ifftn divides by ΠP, so multiply it back
    factors = [p * da.step * a.points / (2.0 * np.pi)
               for p, da, a in zip(_axis_phases(axes, +1), F.axes, axes)]
    vals = _apply_axis_factors(vals, factors)
    return GridFunction(axes, np.fft.ifftn(vals))


def fourier_eval(F, points):
    """Semidiscrete inverse: Σ F(λ)e^{+i<λ,x>}ΠΔλ/(2π) at arbitrary points."""
    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, points.shape[-1])
    cell = float(np.prod([a.step for a in F.axes]))
    lams = [grid_nodes(a) for a in F.axes]
    out = np.empty(flat.shape[0], dtype=complex)
    for i, x in enumerate(flat):
        acc = F.samples
        for ax in range(len(F.axes) - 1, -1, -1):
            acc = acc @ np.exp(1j * lams[ax] * x[ax])
        out[i] = acc
    out *= cell / (2.0 * np.pi) ** len(F.axes)
    return out.reshape(points.shape[:-1])


@dataclass(frozen=True)
class PlancherelReport:
    time_norm_sq: float
    freq_norm_sq: float
    rel_err: float


def plancherel_check(f, axes):
    """Compare ∫|f|² dx with ∫|𝓕f|² Πdλ/(2π)."""
    gf = f if isinstance(f, GridFunction) else sample(f, axes)
    time_sq = float(np.sum(np.abs(gf.samples.ravel(order="C")) ** 2)) * gf.cell
    F = fourier_forward(gf)
    freq_sq = float(np.sum(np.abs(F.samples.ravel(order="C")) ** 2))
    freq_sq *= F.cell / (2.0 * np.pi) ** len(F.axes)
    rel = abs(time_sq - freq_sq) / max(time_sq, 1e-300)
    return PlancherelReport(time_sq, freq_sq, rel)


# ── convolution engines ──────────────────────────────────────────────────────

_CHUNK = 1 << 21  # pair evaluations per block


def _nodes_and_cell(axes, dim):
    nodes = grid_mesh(axes).reshape(-1, dim)
    cell = float(np.prod([a.step for a in axes]))
    return nodes, cell


def _chunks(total, npoints):
    step = max(1, _CHUNK // max(npoints, 1))
    for lo in range(0, total, step):
        yield lo, min(lo + step, total)


def convolve_group(g, f, group, m, points, axes):
    """(g∗f)(X) = ∫ f(Y^{-1}X) g(Y) dY by Haar quadrature over the axes."""
    mul, inv, dim = group_law(group, m)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nodes, cell = _nodes_and_cell(axes, dim)
    weights = np.asarray(g(nodes), dtype=complex) * cell
    nodes_inv = inv(nodes)
    out = np.zeros(points.shape[0], dtype=complex)
    for lo, hi in _chunks(nodes.shape[0], points.shape[0]):
        vals = f(mul(nodes_inv[lo:hi, None, :], points[None, :, :]))
        out += np.tensordot(weights[lo:hi], np.asarray(vals, dtype=complex),
                            axes=(0, 0))
    return out


def convolve_abelian(g, f, points, axes):
    """(g∗_c f)(X) = ∫ f(X−Y) g(Y) dY."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nodes, cell = _nodes_and_cell(axes, points.shape[-1])
    weights = np.asarray(g(nodes), dtype=complex) * cell
    out = np.zeros(points.shape[0], dtype=complex)
    for lo, hi in _chunks(nodes.shape[0], points.shape[0]):
        vals = f(points[None, :, :] - nodes[lo:hi, None, :])
        out += np.tensordot(weights[lo:hi], np.asarray(vals, dtype=complex),
                            axes=(0, 0))
    return out


def _c_translate(case, m, base, shift, y):
    """The ∗_c translate: subtract y's slots from (top, shift), fix acting.

    For H the n-slot composes by the N law (the T picture is the direct
    product N × R^{m-1}); the b-slot of the base is untouched.
    """
    d_n = m * (m - 1) // 2
    if case == "K1":
        k = d_n - (m - 1)
        y_act, y_top = y[..., :k], y[..., k:]
        top = base[..., k:] - y_top
        act = np.broadcast_to(base[..., :k], top.shape[:-1] + (k,))
        return np.concatenate([act, top], axis=-1), shift - y_act
    y_n, y_t = y[..., :d_n], y[..., d_n:]
    n_new = n_mul(m, n_inv(m, y_n), base[..., :d_n])
    b = np.broadcast_to(base[..., d_n:], n_new.shape[:-1] + (m - 1,))
    return np.concatenate([n_new, b], axis=-1), shift - y_t


def convolve_extended_c(phi, F_ext, case, m, base_points, shift_points, axes):
    """(φ ∗_c F)(base, u): quadrature over the base group's coordinates.

    φ lives on the base group (N for K1, S for H); F_ext(base, shift) is an
    extended-group function (typically a tilde extension).
    """
    base_points = np.atleast_2d(np.asarray(base_points, dtype=float))
    shift_points = np.atleast_2d(np.asarray(shift_points, dtype=float))
    dim = base_points.shape[-1]
    nodes, cell = _nodes_and_cell(axes, dim)
    weights = np.asarray(phi(nodes), dtype=complex) * cell
    out = np.zeros(base_points.shape[0], dtype=complex)
    for lo, hi in _chunks(nodes.shape[0], base_points.shape[0]):
        y = nodes[lo:hi, None, :]
        nb, ns = _c_translate(case, m, base_points[None, :, :],
                              shift_points[None, :, :], y)
        vals = np.asarray(F_ext(nb, ns), dtype=complex)
        out += np.tensordot(weights[lo:hi], vals, axes=(0, 0))
    return out


def convolve_extended_c_substituted(phi, F_ext, case, m, base_points,
                                    shift_points, axes):
    """Same integral as convolve_extended_c after substituting W = p ⊖ Y,
    so the quadrature nodes sit on F's abelian-slot mass instead of φ's.
    The substitution has Jacobian 1; `axes` parameterize W in M-order
    (top, shift) for K1 and (n, shift) for H.
    """
    base_points = np.atleast_2d(np.asarray(base_points, dtype=float))
    shift_points = np.atleast_2d(np.asarray(shift_points, dtype=float))
    d_n = m * (m - 1) // 2
    dim_w = d_n if case == "K1" else d_n + m - 1
    nodes, cell = _nodes_and_cell(axes, dim_w)
    out = np.zeros(base_points.shape[0], dtype=complex)
    for lo, hi in _chunks(nodes.shape[0], base_points.shape[0]):
        w = nodes[lo:hi, None, :]
        x = base_points[None, :, :]
        s = shift_points[None, :, :]
        if case == "K1":
            k = d_n - (m - 1)
            w_top, w_shift = w[..., : m - 1], w[..., m - 1:]
            act = np.broadcast_to(x[..., :k], (hi - lo,) + x.shape[1:-1] + (k,))
            top = np.broadcast_to(w_top, act.shape[:-1] + (m - 1,))
            fv = F_ext(np.concatenate([act, top], axis=-1),
                       np.broadcast_to(w_shift, act.shape[:-1] + (k,)))
            y = np.concatenate([s - w_shift, x[..., k:] - w_top], axis=-1)
        else:
            w_n, w_t = w[..., :d_n], w[..., d_n:]
            b = np.broadcast_to(x[..., d_n:], (hi - lo,) + x.shape[1:-1] + (m - 1,))
            base = np.concatenate(
                [np.broadcast_to(w_n, b.shape[:-1] + (d_n,)), b], axis=-1)
            fv = F_ext(base, np.broadcast_to(w_t, b.shape[:-1] + (m - 1,)))
            y_n = n_mul(m, x[..., :d_n], n_inv(m, w_n))
            y = np.concatenate([y_n, np.broadcast_to(s - w_t, y_n.shape[:-1] + (m - 1,))], axis=-1)
        vals = np.asarray(fv, dtype=complex) * np.asarray(phi(y), dtype=complex)
        out += vals.sum(axis=0) * cell
    return out


def convolve_extended_group(phi, F_ext, case, m, base_points, shift_points,
                            axes, substituted=False):
    """(φ ∗ F)(base, u) = ∫ φ(Y) F(Y^{-1}∘base, u) dY over the base group.

    With substituted=True the variable change Z = Y^{-1}∘base places the
    nodes on F's mass: ∫ φ(base∘Z^{-1}) F(Z, u) J(Z) dZ.  On N the change
    is measure-preserving (J = 1); on S it picks up the modular factor
    J(Z) = Π_{i<j} a_i/a_j evaluated at t_base − t_Z.
    """
    group = "N" if case == "K1" else "S"
    mul, inv, dim = group_law(group, m)
    base_points = np.atleast_2d(np.asarray(base_points, dtype=float))
    shift_points = np.atleast_2d(np.asarray(shift_points, dtype=float))
    npts = base_points.shape[0]
    nodes, cell = _nodes_and_cell(axes, dim)
    nodes_inv = inv(nodes)
    out = np.zeros(npts, dtype=complex)
    if substituted:
        for lo, hi in _chunks(nodes.shape[0], npts):
            z = nodes[lo:hi, None, :]
            zi = nodes_inv[lo:hi, None, :]
            s = np.broadcast_to(shift_points[None, :, :],
                                (hi - lo, npts, shift_points.shape[-1]))
            zb = np.broadcast_to(z, (hi - lo, npts, dim))
            fv = np.asarray(F_ext(zb, s), dtype=complex)
            pv = np.asarray(phi(mul(base_points[None, :, :], zi)), dtype=complex)
            if group == "S":
                d_n = m * (m - 1) // 2
                dt = base_points[None, :, d_n:] - z[..., d_n:]
                pv = pv * np.prod(rho_scale(m, dt), axis=-1)
            out += (fv * pv).sum(axis=0) * cell
        return out
    weights = np.asarray(phi(nodes), dtype=complex) * cell
    for lo, hi in _chunks(nodes.shape[0], npts):
        y = nodes_inv[lo:hi, None, :]
        arg = mul(y, base_points[None, :, :])
        s = np.broadcast_to(shift_points[None, :, :],
                            arg.shape[:-1] + (shift_points.shape[-1],))
        vals = np.asarray(F_ext(arg, s), dtype=complex)
        out += np.tensordot(weights[lo:hi], vals, axes=(0, 0))
    return out


# ── reduction identities ─────────────────────────────────────────────────────

def theorem31_residual(phi, f, case, m, points, axes_phi, axes_f):
    """max |(φ∗f̃)(p) − (φ∗_c f̃)(p)| over extended points p.

    points: iterable of (base coords, shift coords) pairs.  The two sides
    are discretized independently: one with nodes on φ's mass (axes_phi),
    the other with substituted variables placing the nodes on f's mass
    (axes_f).  For K1 the substitution is applied on the group side
    (Z = Y^{-1}∘base); for H it is applied on the abelian side (W = p ⊖ Y),
    because the group-side substitution on the non-unimodular S shears the
    integrand exponentially and is numerically useless.  Returns
    (residual, scale), scale = max |lhs|.
    """
    base_points = np.atleast_2d(np.asarray([p[0] for p in points], dtype=float))
    shift_points = np.atleast_2d(np.asarray([p[1] for p in points], dtype=float))

    def F_ext(base, shift):
        return tilde_eval_coords(f, case, m, base, shift)

    if case == "K1":
        lhs = convolve_extended_group(phi, F_ext, case, m, base_points,
                                      shift_points, axes_f, substituted=True)
        rhs = convolve_extended_c(phi, F_ext, case, m, base_points,
                                  shift_points, axes_phi)
    else:
        lhs = convolve_extended_group(phi, F_ext, case, m, base_points,
                                      shift_points, axes_phi)
        rhs = convolve_extended_c_substituted(phi, F_ext, case, m, base_points,
                                              shift_points, axes_f)
    scale = float(np.max(np.abs(lhs)))
    return float(np.max(np.abs(lhs - rhs))), scale


def _acting_slots(case, m):
    """Positions of the acting slots in the extended coordinate order."""
    d_n = m * (m - 1) // 2
    if case == "K1":
        return list(range(d_n - (m - 1)))
    return list(range(d_n, d_n + m - 1))


def projected_convolution_check(phi, f, case, m, axes_ext, freq_indices):
    """Projected convolution theorem at dual-grid frequency points.

    LHS: the full extended-coordinate transform of φ∗f̃ (group-law
    quadrature), integrated over the acting-slot frequencies with measure
    ΠΔλ/(2π).  RHS: the transform of the acting=0 slice of f̃ times the
    transform of φ, the latter taken with φ's acting coordinate paired with
    the shift frequency.  freq_indices index the remaining dual axes.
    Returns (residual, scale).
    """
    axes_ext = tuple(axes_ext)
    act = _acting_slots(case, m)
    d_base = m * (m - 1) // 2 + (0 if case == "K1" else m - 1)
    n_ext = len(axes_ext)
    rest = [i for i in range(n_ext) if i not in act]
    shift_slots = list(range(d_base, n_ext))
    for i, j in zip(act, shift_slots):
        if abs(axes_ext[i].center) > 1e-15:
            raise ValueError("acting axes must be centered at 0")
        if (axes_ext[i].points, axes_ext[i].step) != (axes_ext[j].points, axes_ext[j].step):
            raise ValueError("acting and shift axes must share P and h")

    def F_ext(base, shift):
        return tilde_eval_coords(f, case, m, base, shift)

    # LHS -------------------------------------------------------------------
    mesh = grid_mesh(axes_ext).reshape(-1, n_ext)
    conv = convolve_extended_group(phi, F_ext, case, m, mesh[:, :d_base],
                                   mesh[:, d_base:], axes_ext[:d_base])
    G = GridFunction(axes_ext, conv.reshape([a.points for a in axes_ext]))
    Ghat = fourier_forward(G)
    proj = Ghat.samples
    for i in sorted(act, reverse=True):
        proj = proj.sum(axis=i) * Ghat.axes[i].step / (2.0 * np.pi)

    # RHS -------------------------------------------------------------------
    slice_axes = tuple(axes_ext[i] for i in rest)

    def f_slice(pts):
        full = np.zeros(pts.shape[:-1] + (n_ext,))
        for j, i in enumerate(rest):
            full[..., i] = pts[..., j]
        return F_ext(full[..., :d_base], full[..., d_base:])

    Fhat0 = fourier_forward(sample(f_slice, slice_axes))
    phihat = fourier_forward(sample(phi, axes_ext[:d_base]))

    pair = {i: j for i, j in zip(act, shift_slots)}
    for i in range(d_base):
        pair.setdefault(i, i)
    rest_pos = {i: k for k, i in enumerate(rest)}

    lhs_vals, rhs_vals = [], []
    for idx in freq_indices:
        idx = tuple(idx)
        lhs_vals.append(proj[idx])
        phi_idx = tuple(idx[rest_pos[pair[i]]] for i in range(d_base))
        rhs_vals.append(Fhat0.samples[idx] * phihat.samples[phi_idx])
    lhs_vals, rhs_vals = np.asarray(lhs_vals), np.asarray(rhs_vals)
    scale = float(max(np.max(np.abs(lhs_vals)), np.max(np.abs(rhs_vals))))
    return float(np.max(np.abs(lhs_vals - rhs_vals))), scale
