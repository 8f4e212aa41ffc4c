"""Analytic test functions (polynomial × Gaussian) and uniform grids.

TestFunction is the finite stand-in for a Schwartz function: a sum of terms
c · Π (x_i - μ_i)^{α_i} · exp(-½ Σ w_i (x_i - μ_i)²), evaluable at arbitrary
real points — integrands in this toolkit are always evaluated analytically,
never interpolated.

Axis is a per-coordinate uniform grid: center c, half-width L, P points
(P a power of two), step h = 2L/P, nodes c - L + k h.  The dual grid
λ_j = 2πj/(Ph), j = -P/2 .. P/2-1, is again an Axis (center 0, half-width
π/h), so GridFunction carries both sides of the Fourier transform.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TestFunction", "Axis", "GridFunction", "gaussian", "poly_gaussian",
    "random_gaussian", "derivative", "shift_function", "scale_argument",
    "grid_nodes", "grid_mesh", "sample", "quadrature", "dual_axis",
    "export_csv", "export_binary", "import_binary",
]


@dataclass(frozen=True)
class TestFunction:
    """Σ c·(x-μ)^α·exp(-½ Σ w_i (x_i-μ_i)²); terms = (c, α, μ, w)."""

    dim: int
    terms: tuple

    def __post_init__(self):
        norm = []
        for c, alpha, mu, w in self.terms:
            alpha = np.asarray(alpha, dtype=int)
            mu = np.asarray(mu, dtype=float)
            w = np.asarray(w, dtype=float)
            if alpha.shape != (self.dim,) or mu.shape != (self.dim,) or w.shape != (self.dim,):
                raise ValueError("term vectors must have length dim")
            if np.any(w <= 0):
                raise ValueError("widths must be positive")
            if np.any(alpha < 0):
                raise ValueError("exponents must be nonnegative")
            norm.append((complex(c), alpha, mu, w))
        object.__setattr__(self, "terms", tuple(norm))

    def __call__(self, x):
        """Evaluate at points, shape (..., dim) → complex (...)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected last axis {self.dim}, got {x.shape[-1]}")
        out = np.zeros(x.shape[:-1], dtype=complex)
        for c, alpha, mu, w in self.terms:
            d = x - mu
            val = np.exp(-0.5 * np.sum(w * d * d, axis=-1))
            for i in range(self.dim):
                if alpha[i]:
                    val = val * d[..., i] ** alpha[i]
            out += c * val
        return out


def gaussian(center, widths, coef=1.0):
    center = np.atleast_1d(np.asarray(center, dtype=float))
    widths = np.broadcast_to(np.asarray(widths, dtype=float), center.shape)
    dim = center.shape[0]
    return TestFunction(dim, ((coef, np.zeros(dim, dtype=int), center, widths),))


def poly_gaussian(coef, powers, center, widths):
    center = np.atleast_1d(np.asarray(center, dtype=float))
    dim = center.shape[0]
    widths = np.broadcast_to(np.asarray(widths, dtype=float), (dim,))
    return TestFunction(dim, ((coef, powers, center, widths),))


def random_gaussian(rng, dim, center_scale=1.0, width_range=(0.6, 1.6)):
    center = rng.uniform(-center_scale, center_scale, dim)
    widths = rng.uniform(*width_range, dim)
    return gaussian(center, widths)


def shift_function(f, delta):
    """f(· - delta), exact on the term data."""
    delta = np.asarray(delta, dtype=float)
    return TestFunction(
        f.dim, tuple((c, a, mu + delta, w) for c, a, mu, w in f.terms))


def scale_argument(f, scales):
    """f(s ⊙ ·) for per-axis scales s (diagonal substitution, exact)."""
    s = np.broadcast_to(np.asarray(scales, dtype=float), (f.dim,))
    if np.any(s == 0):
        raise ValueError("scales must be nonzero")
    terms = []
    for c, a, mu, w in f.terms:
        coef = c * np.prod(s.astype(complex) ** a)
        terms.append((coef, a, mu / s, w * s * s))
    return TestFunction(f.dim, tuple(terms))


def derivative(f, axis):
    """∂f/∂x_axis, term by term (exact); used as a symbolic oracle."""
    terms = []
    for c, a, mu, w in f.terms:
        if a[axis] > 0:
            a1 = a.copy()
            a1[axis] -= 1
            terms.append((c * a[axis], a1, mu, w))
        a2 = a.copy()
        a2[axis] += 1
        terms.append((-c * w[axis], a2, mu, w))
    return TestFunction(f.dim, tuple(terms))


# ── grids ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Axis:
    center: float
    half_width: float
    points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half-width must be positive")
        p = self.points
        if p < 2 or (p & (p - 1)) != 0:
            raise ValueError(f"points must be a power of two >= 2, got {p}")

    @property
    def step(self):
        return 2.0 * self.half_width / self.points


def grid_nodes(axis):
    return axis.center - axis.half_width + axis.step * np.arange(axis.points)


def dual_axis(axis):
    """The dual frequency grid λ_j = 2πj/(Ph) as an Axis."""
    return Axis(0.0, np.pi / axis.step, axis.points)


def grid_mesh(axes):
    """Stacked nodes of the product grid, shape (P1, ..., Pk, k)."""
    grids = np.meshgrid(*[grid_nodes(a) for a in axes], indexing="ij")
    return np.stack(grids, axis=-1)


@dataclass(frozen=True)
class GridFunction:
    axes: tuple
    samples: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != tuple(a.points for a in axes):
            raise ValueError(f"sample shape {s.shape} does not match axes")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "samples", s)

    @property
    def cell(self):
        return float(np.prod([a.step for a in self.axes]))


def sample(f, axes):
    axes = tuple(axes)
    shape = tuple(a.points for a in axes)
    if np.prod(shape) <= 1 << 21 or len(axes) == 1:
        return GridFunction(axes, f(grid_mesh(axes)))
    # large product grids: evaluate slice by slice along the first axis
    out = np.empty(shape, dtype=complex)
    first = grid_nodes(axes[0])
    rest = grid_mesh(axes[1:])
    for k, x0 in enumerate(first):
        pts = np.concatenate(
            [np.full(rest.shape[:-1] + (1,), x0), rest], axis=-1)
        out[k] = f(pts)
    return GridFunction(axes, out)


def quadrature(f, axes):
    """Riemann sum over the product grid; fixed (C-order) summation order."""
    axes = tuple(axes)
    if isinstance(f, GridFunction):
        vals = f.samples
    elif callable(f):
        vals = np.asarray(f(grid_mesh(axes)), dtype=complex)
    else:
        vals = np.asarray(f, dtype=complex)
    cell = float(np.prod([a.step for a in axes]))
    return complex(np.sum(vals.ravel(order="C"))) * cell


# ── exports ──────────────────────────────────────────────────────────────────

_MAGIC = b"ANHGRID1"


def export_csv(gf, path):
    """CSV rows: node coordinates, re, im."""
    mesh = grid_mesh(gf.axes).reshape(-1, len(gf.axes))
    vals = gf.samples.ravel(order="C")
    with open(path, "w") as fh:
        cols = [f"x{i}" for i in range(len(gf.axes))] + ["re", "im"]
        fh.write(",".join(cols) + "\n")
        for row, v in zip(mesh, vals):
            coords = ",".join(repr(float(c)) for c in row)
            fh.write(f"{coords},{float(v.real)!r},{float(v.imag)!r}\n")


def export_binary(gf, path):
    """Little-endian dump: magic, ndim, per-axis (P, L, center), samples."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.int64(len(gf.axes)).astype("<i8").tobytes())
        for a in gf.axes:
            fh.write(np.int64(a.points).astype("<i8").tobytes())
            fh.write(np.float64(a.half_width).astype("<f8").tobytes())
            fh.write(np.float64(a.center).astype("<f8").tobytes())
        inter = np.empty(gf.samples.size * 2)
        inter[0::2] = gf.samples.real.ravel(order="C")
        inter[1::2] = gf.samples.imag.ravel(order="C")
        fh.write(inter.astype("<f8").tobytes())


def import_binary(path):
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a grid dump")
        ndim = int(np.frombuffer(fh.read(8), "<i8")[0])
        axes = []
        for _ in range(ndim):
            p = int(np.frombuffer(fh.read(8), "<i8")[0])
            hw = float(np.frombuffer(fh.read(8), "<f8")[0])
            c = float(np.frombuffer(fh.read(8), "<f8")[0])
            axes.append(Axis(c, hw, p))
        shape = tuple(a.points for a in axes)
        inter = np.frombuffer(fh.read(), "<f8")
        vals = inter[0::2] + 1j * inter[1::2]
        return GridFunction(tuple(axes), vals.reshape(shape))
