"""Finite sections of multiplication operators on the circle.

A symbol ``f`` on the unit circle is stored by its Fourier coefficients on a
finite index window.  The multiplication operator by ``f`` acts on the
two-sided Fourier basis; splitting off the non-negative modes (the analytic
half) gives the 2x2 picture

    M_f = [[Ttilde, Htilde], [H, T]]   on  (negative modes) (+) (modes >= 0)

whose blocks at section size N are, with the negative modes enumerated as
``-1, -2, ..., -N``:

    T[i, j]      = fc(i - j)        (N+1) x (N+1)   Toeplitz
    H[i, j]      = fc(i + j + 1)    (N+1) x N       Hankel
    Ttilde[i, j] = fc(j - i)        N x N
    Htilde[i, j] = fc(-(i + j + 1)) N x (N+1)

``Ttilde``/``Htilde`` are the Toeplitz/Hankel sections of the reflected
symbol ``z -> f(1/z)``; for symbols with real coefficients this agrees with
the conjugate symbol ``z -> conj(f(conj(z)))``.

For an invertible symbol, reordering the block rows and columns of the
sections of ``f`` and of ``1/f`` produces a matricial-coupling pair of the
two Hankel operators:

    [[Htilde_f, Ttilde_f], [T_f, H_f]] @ [[H_g, T_g], [Ttilde_g, Htilde_g]]

is the identity up to truncation (g = 1/f).  :func:`mc_residual_hankel`
measures that defect on the interior sub-block where the finite convolution
agrees with the infinite one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SymbolInversionError
from .numkernel import spectral_norm, svd, zeros

SIGMA_ZERO_REL = 1e-12  # singular values below this (relative) count as zero


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class SymbolFC:
    """Fourier coefficients of a circle symbol on a finite index window.

    ``coeffs[p]`` is the coefficient of ``z**(offset + p)``; indices outside
    the window are zero.
    """

    offset: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128))
        if c.ndim != 1 or c.size == 0:
            raise PreconditionError("coeffs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise PreconditionError("symbol coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def support(self) -> tuple[int, int]:
        """Smallest index window containing all nonzero coefficients."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return (0, 0)
        return (self.offset + int(nz[0]), self.offset + int(nz[-1]))

    @property
    def wiener_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def coeff(self, j) -> np.ndarray:
        """Coefficient(s) at integer index/array ``j`` (zero off-window)."""
        j = np.asarray(j)
        p = j - self.offset
        valid = (p >= 0) & (p < self.coeffs.size)
        out = np.where(valid, self.coeffs[np.clip(p, 0, self.coeffs.size - 1)], 0.0)
        return out if out.ndim else complex(out)

    def restricted(self, j_min: int, j_max: int) -> "SymbolFC":
        """Truncate to the window [j_min, j_max] (inclusive)."""
        js = np.arange(j_min, j_max + 1)
        return SymbolFC(offset=j_min, coeffs=self.coeff(js))

    def trimmed(self, threshold: float) -> "SymbolFC":
        """Drop leading/trailing coefficients with modulus <= threshold."""
        keep = np.nonzero(np.abs(self.coeffs) > threshold)[0]
        if keep.size == 0:
            return SymbolFC(offset=0, coeffs=np.zeros(1, dtype=np.complex128))
        return SymbolFC(offset=self.offset + int(keep[0]),
                        coeffs=self.coeffs[keep[0]: keep[-1] + 1])


def evaluate_on_grid(f: SymbolFC, grid: int) -> np.ndarray:
    """Values ``f(exp(2 pi i k / grid))`` for k = 0..grid-1 via the FFT."""
    if grid < 1:
        raise PreconditionError("grid must be positive")
    buf = np.zeros(grid, dtype=np.complex128)
    idx = (np.arange(f.coeffs.size) + f.offset) % grid
    np.add.at(buf, idx, f.coeffs)
    return np.fft.ifft(buf) * grid


def winding_number(values: np.ndarray) -> int:
    """Winding of a nonvanishing closed loop of grid values around 0."""
    phases = np.angle(values)
    diffs = np.diff(np.concatenate([phases, phases[:1]]))
    diffs = (diffs + np.pi) % (2 * np.pi) - np.pi
    return int(np.rint(diffs.sum() / (2 * np.pi)))


def _fft_grid(requested: int, minimum: int) -> int:
    g = max(int(requested), int(minimum), 16)
    return 1 << (g - 1).bit_length()


def invert_symbol(f: SymbolFC, grid: int, tol: float,
                  tail_rel: float = 1e-16) -> SymbolFC:
    """Fourier coefficients of ``1/f`` by grid evaluation and inverse FFT.

    The grid is enlarged to at least four times the coefficient support (and
    to a power of two); the returned window is centered, so inverses with
    negative-index support (e.g. ``1/z``) come out correctly.  Coefficients
    below ``tail_rel`` times the largest one are trimmed.  Use
    :func:`convolution_residual` to bound the quality of the truncation.

    Raises
    ------
    SymbolInversionError
        If ``min |f|`` on the grid is not larger than ``tol``; the error
        reports that minimum and the winding number of the grid values.
    """
    g = _fft_grid(grid, 4 * f.coeffs.size)
    values = evaluate_on_grid(f, g)
    min_abs = float(np.min(np.abs(values)))
    if min_abs <= tol:
        wind = winding_number(values) if min_abs > 0 else None
        raise SymbolInversionError(
            f"symbol comes within {min_abs:.3e} of zero on a {g}-point grid "
            f"(threshold {tol:g}); it is not invertible at this resolution",
            min_abs=min_abs, winding=wind,
        )
    coeffs = np.fft.fft(1.0 / values) / g
    centered = np.roll(coeffs, g // 2)
    inv = SymbolFC(offset=-(g // 2), coeffs=centered)
    return inv.trimmed(tail_rel * float(np.max(np.abs(centered))))


def convolve(f: SymbolFC, g: SymbolFC) -> SymbolFC:
    """Coefficient sequence of the product symbol ``f * g``."""
    return SymbolFC(offset=f.offset + g.offset,
                    coeffs=np.convolve(f.coeffs, g.coeffs))


def convolution_residual(f: SymbolFC, g: SymbolFC) -> float:
    """l1 distance of the coefficients of ``f * g`` from the delta at 0."""
    prod = convolve(f, g)
    c = prod.coeffs.copy()
    pos = -prod.offset
    if 0 <= pos < c.size:
        c[pos] -= 1.0
        return float(np.sum(np.abs(c)))
    return float(np.sum(np.abs(c))) + 1.0


# ---------------------------------------------------------------------------
# finite sections


@dataclass(frozen=True)
class SectionBlocks:
    """The four blocks of the size-N section of a multiplication operator."""

    N: int
    Ttilde: np.ndarray
    Htilde: np.ndarray
    H: np.ndarray
    T: np.ndarray

    def assemble(self) -> np.ndarray:
        """Full section ``[[Ttilde, Htilde], [H, T]]`` on (K-part) (+) (H-part)."""
        top = np.hstack([self.Ttilde, self.Htilde])
        bottom = np.hstack([self.H, self.T])
        return np.vstack([top, bottom])

    def reordered(self) -> np.ndarray:
        """Block rows/columns swapped: ``[[Htilde, Ttilde], [T, H]]``."""
        top = np.hstack([self.Htilde, self.Ttilde])
        bottom = np.hstack([self.T, self.H])
        return np.vstack([top, bottom])

    def reordered_inverse_layout(self) -> np.ndarray:
        """The complementary layout ``[[H, T], [Ttilde, Htilde]]``."""
        top = np.hstack([self.H, self.T])
        bottom = np.hstack([self.Ttilde, self.Htilde])
        return np.vstack([top, bottom])


def build_sections(f: SymbolFC, N: int) -> SectionBlocks:
    """Toeplitz/Hankel blocks of the size-N section of multiplication by f.

    See the module docstring for the entry conventions; the assembled 2x2
    block matrix is the (2N+1) x (2N+1) section of the multiplication
    operator with the negative modes enumerated as -1, -2, ..., -N.
    """
    if N < 1:
        raise PreconditionError("section size N must be >= 1")
    pos = np.arange(N + 1)   # H-part mode indices 0..N
    neg = np.arange(N)       # K-part slots, slot i <-> mode -(i+1)
    t = f.coeff(pos[:, None] - pos[None, :])
    h = f.coeff(pos[:, None] + neg[None, :] + 1)
    ttilde = f.coeff(neg[None, :] - neg[:, None])
    htilde = f.coeff(-(neg[:, None] + pos[None, :] + 1))
    return SectionBlocks(N=N, Ttilde=ttilde, Htilde=htilde, H=h, T=t)


def toeplitz_section(f: SymbolFC, N: int) -> np.ndarray:
    """Plain (2N+1) x (2N+1) section on modes -N..N: entry (p, q) = fc(p - q)."""
    modes = np.arange(-N, N + 1)
    return f.coeff(modes[:, None] - modes[None, :])


def section_mode_order(N: int) -> np.ndarray:
    """Mode enumeration (-1, ..., -N, 0, ..., N) used by the section blocks."""
    return np.concatenate([-np.arange(1, N + 1), np.arange(0, N + 1)])


@dataclass(frozen=True)
class HankelCouplingReport:
    """Truncation defect of the section coupling between f and 1/f."""

    N: int
    grid: int
    f_support: tuple[int, int]
    inv_support: tuple[int, int]
    interior_rows: tuple[int, int]   # mode range, inclusive
    interior_cols: tuple[int, int]
    interior_residual: float
    full_residual: float
    inversion_l1: float
    min_abs_on_grid: float
    winding: int


def mc_residual_hankel(f: SymbolFC, N: int, tol: float = 1e-8,
                       grid: int = 0) -> HankelCouplingReport:
    """Residual of the reordered section pair of f and 1/f against identity.

    The inverse symbol is truncated to the section window [-N, N], so the
    reported defect measures the symbol tail at scale N; for a fixed symbol
    with geometrically decaying inverse it decreases as N grows.  The
    residual is the spectral norm of (product - identity) restricted to the
    rows and columns whose convolution support lies fully inside the section
    (full-block residual is reported alongside).
    """
    a1, a2 = f.support
    if a2 - a1 > 2 * N:
        raise PreconditionError(
            f"symbol support width {a2 - a1} exceeds the section bandwidth {2 * N}"
        )
    g_grid = _fft_grid(grid, max(8 * (N + 1), 4 * f.coeffs.size))
    values = evaluate_on_grid(f, g_grid)
    inv_full = invert_symbol(f, g_grid, tol)
    inv = inv_full.restricted(-N, N).trimmed(0.0)
    b1, b2 = inv.support

    sec_f = build_sections(f, N)
    sec_g = build_sections(inv, N)
    product = sec_f.reordered() @ sec_g.reordered_inverse_layout()
    defect = product - np.eye(2 * N + 1)

    def positions(lo: int, hi: int) -> np.ndarray:
        ms = np.arange(lo, hi + 1)
        return np.where(ms < 0, -ms - 1, N + ms)

    row_lo, row_hi = max(-N, a2 - N), min(N, a1 + N)
    col_lo, col_hi = max(-N, -N - b1), min(N, N - b2)
    if row_lo > row_hi or col_lo > col_hi:
        raise PreconditionError(
            "no interior rows/columns at this section size; increase N"
        )
    sub = defect[np.ix_(positions(row_lo, row_hi), positions(col_lo, col_hi))]

    return HankelCouplingReport(
        N=N, grid=g_grid,
        f_support=(a1, a2), inv_support=(b1, b2),
        interior_rows=(row_lo, row_hi), interior_cols=(col_lo, col_hi),
        interior_residual=spectral_norm(sub),
        full_residual=spectral_norm(defect),
        inversion_l1=convolution_residual(f, inv),
        min_abs_on_grid=float(np.min(np.abs(values))),
        winding=winding_number(values),
    )


# ---------------------------------------------------------------------------
# singular values and diagnostics


def singular_values(a) -> np.ndarray:
    """Singular values of a matrix, non-increasing."""
    return svd(a).singulars.copy()


@dataclass(frozen=True)
class ShiftRecord:
    orientation: str  # "alpha_vs_beta" compares alpha[n] to beta[n+k]
    k: int
    c: float | None
    compared: int


@dataclass(frozen=True)
class ShiftComparabilityReport:
    """Best per-shift comparability constants of two singular value sequences.

    For each shift k and orientation, ``c`` is the worst two-sided ratio
    ``min(a/b, b/a)`` over index pairs where both entries are numerically
    nonzero; the verdict keeps the (orientation, k) with the largest c.
    """

    alpha: np.ndarray
    beta: np.ndarray
    threshold: float
    records: tuple[ShiftRecord, ...]
    verdict_orientation: str | None
    verdict_k: int | None
    verdict_c: float | None

    @property
    def comparable(self) -> bool:
        return self.verdict_c is not None

    def constant(self, orientation: str, k: int) -> float | None:
        for rec in self.records:
            if rec.orientation == orientation and rec.k == k:
                return rec.c
        raise KeyError((orientation, k))


def _check_sv_sequence(name: str, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise PreconditionError(f"{name} must be a non-empty 1-d sequence")
    if np.any(s < -1e-15):
        raise PreconditionError(f"{name} must be non-negative")
    if np.any(np.diff(s) > 1e-12 * max(1.0, float(s[0]))):
        raise PreconditionError(f"{name} must be non-increasing")
    return np.maximum(s, 0.0)


def shift_comparability(alpha, beta, k_max: int) -> ShiftComparabilityReport:
    """Search shifts 0..k_max for the best two-sided ratio bound.

    Entries below ``1e-12 * max(sigma)`` count as zero and are excluded from
    the ratios, so finite-rank tails are compared by support rather than by
    quotients of noise.  A shift with no comparable pair gets no constant;
    if none has one the verdict is "incomparable at this truncation".
    """
    alpha = _check_sv_sequence("alpha", alpha)
    beta = _check_sv_sequence("beta", beta)
    sigma_max = max(float(alpha.max()), float(beta.max()))
    threshold = SIGMA_ZERO_REL * sigma_max

    records = []
    best: tuple[str, int, float] | None = None
    for k in range(k_max + 1):
        for orientation, lead, trail in (("alpha_vs_beta", alpha, beta),
                                         ("beta_vs_alpha", beta, alpha)):
            span = min(lead.size, trail.size - k)
            cs = []
            for n_idx in range(max(span, 0)):
                a_n, b_n = lead[n_idx], trail[n_idx + k]
                if a_n > threshold and b_n > threshold:
                    cs.append(min(a_n / b_n, b_n / a_n))
            c = float(min(cs)) if cs else None
            records.append(ShiftRecord(orientation, k, c, len(cs)))
            if c is not None and (best is None or c > best[2]):
                best = (orientation, k, c)

    return ShiftComparabilityReport(
        alpha=alpha, beta=beta, threshold=threshold, records=tuple(records),
        verdict_orientation=None if best is None else best[0],
        verdict_k=None if best is None else best[1],
        verdict_c=None if best is None else best[2],
    )


@dataclass(frozen=True)
class BesovEstimate:
    """Quadrature estimate of the smoothness seminorm integral."""

    alpha: float
    order: int          # difference order, the smallest integer > alpha
    t_points: int
    s_points: int
    integral: float     # estimate of  int |t|^(-1-alpha*p) ||D_t^n g||_p^p dt
    seminorm: float     # integral ** (1/p)


@dataclass(frozen=True)
class SummabilityReport:
    """Schatten-type partial sums with a tail-trend diagnostic.

    These are diagnostics for eyeballing p-summability of a singular value
    sequence at finite truncation, never pass/fail verdicts.
    """

    p: float
    total: float                 # sum of sigma_n ** p
    partial_sums: np.ndarray
    tail_fraction: float         # share contributed by the trailing half
    besov: BesovEstimate | None = None


def spectral_summability(sv, p: float, besov_symbol: SymbolFC | None = None,
                         t_points: int = 128, s_points: int = 512) -> SummabilityReport:
    """Partial sums of ``sigma_n ** p`` plus an optional Besov-type estimate.

    When ``besov_symbol`` is given, the analytic projection of the symbol
    (coefficients at indices >= 0) is run through the difference-operator
    quadrature: with ``alpha = 1/p`` and ``n`` the smallest integer above
    alpha, ``(D_t g)(e^{is}) = g(e^{i(s+t)}) - g(e^{is})`` iterated n times,
    the reported integral approximates

        int_{-pi}^{pi} |t|^(-1-alpha*p) ||D_t^n g||_p^p dt

    on a uniform midpoint t-grid excluding t = 0.
    """
    if p < 1:
        raise PreconditionError("Schatten exponent p must be >= 1")
    s = np.asarray(sv, dtype=np.float64)
    if np.any(s < -1e-15):
        raise PreconditionError("singular values must be non-negative")
    s = np.maximum(s, 0.0)
    powers = s ** p
    total = float(powers.sum())
    partial = np.cumsum(powers)
    half = s.size // 2
    tail = float(powers[half:].sum() / total) if total > 0 else 0.0

    besov = None
    if besov_symbol is not None:
        besov = _besov_estimate(besov_symbol, p, t_points, s_points)

    return SummabilityReport(p=p, total=total, partial_sums=partial,
                             tail_fraction=tail, besov=besov)


def _besov_estimate(f: SymbolFC, p: float, t_points: int, s_points: int) -> BesovEstimate:
    alpha = 1.0 / p
    order = int(np.floor(alpha)) + 1
    # analytic projection: non-negative modes only
    j_hi = f.offset + f.coeffs.size - 1
    if j_hi < 0:
        g = SymbolFC(offset=0, coeffs=np.zeros(1, dtype=np.complex128))
    else:
        g = f.restricted(max(f.offset, 0), j_hi)
    grid = _fft_grid(s_points, 4 * g.coeffs.size)
    js = np.arange(g.coeffs.size) + g.offset

    integral = 0.0
    dt = np.pi / t_points
    for k in range(t_points):
        t = (k + 0.5) * dt
        mult = (np.exp(1j * js * t) - 1.0) ** order
        diff = SymbolFC(offset=g.offset, coeffs=g.coeffs * mult)
        vals = evaluate_on_grid(diff, grid)
        norm_p_pow = float(np.mean(np.abs(vals) ** p))
        integral += t ** (-1.0 - alpha * p) * norm_p_pow * dt
    integral *= 2.0  # even integrand: double the (0, pi] half
    return BesovEstimate(alpha=alpha, order=order, t_points=t_points,
                         s_points=grid, integral=integral,
                         seminorm=integral ** (1.0 / p))
