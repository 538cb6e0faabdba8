"""Rational-function machinery behind the kernel conversions.

``p * ftilde(p)`` of a Prony relaxation kernel is a rational complete
Bernstein function; its reciprocal is a rational Stieltjes function whose
poles interlace the kernel rates.  The scalar path expands exact
numerator/denominator polynomials and finds the interlaced real roots by
bracketed bisection; the 6x6 path never expands polynomials but linearizes
the partial-fraction data into a structured generalized eigenproblem and
extracts residues through a nullspace formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npoly
import scipy.linalg

from .kernels import (
    NumericsError,
    TOL_PSD,
    matrix_norm,
    psd_clip,
)

BISECT_REL_WIDTH = 1e-14    # relative bracket width before the Newton polish
TOL_RESIDUE = 1e-12         # negative residues within this (relative) are clipped
TOL_IMAG = 1e-6             # accepted relative imaginary part of pencil eigenvalues
TOL_CLUSTER = 1e-8          # relative gap for grouping refined repeated roots
TOL_NULLSPACE = 1e-8        # singular values below this (relative) span the nullspace
TOL_CANCEL = 1e-13          # residue norms below this (relative) are numerical dust;
                            # genuine residues can span many orders of magnitude
TOL_CROSSCHECK = 1e-5       # relative mismatch allowed between the two A-evaluations


class BracketError(NumericsError):
    """A guaranteed sign-change bracket failed; input is numerically degenerate."""


class DefectivePencilError(NumericsError):
    """A repeated pencil eigenvalue is not semisimple."""


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealPolynomial:
    """Dense real polynomial, coefficients ascending by degree."""

    coeffs: tuple

    @classmethod
    def make(cls, coeffs):
        c = [float(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        return cls(tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)

    def derivative(self):
        return RealPolynomial.make(npoly.polyder(self.coeffs))

    def __mul__(self, other):
        if isinstance(other, RealPolynomial):
            return RealPolynomial.make(npoly.polymul(self.coeffs, other.coeffs))
        return RealPolynomial.make(np.asarray(self.coeffs) * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return RealPolynomial.make(npoly.polyadd(self.coeffs, other.coeffs))


def product_of_monomials(rates):
    """``prod_k (p + r_k)`` as a RealPolynomial."""
    out = RealPolynomial.make([1.0])
    for r in rates:
        out = out * RealPolynomial.make([r, 1.0])
    return out


@dataclass(frozen=True)
class RationalStieltjes:
    """``a + b/p + sum mass/(p + pole)`` with nonnegative data."""

    constant: float
    pole_at_zero_mass: float
    modes: tuple

    def __call__(self, p):
        return (self.constant + self.pole_at_zero_mass / p
                + sum(m / (p + s) for s, m in self.modes))


# ---------------------------------------------------------------------------
# Scalar numerators and denominators
# ---------------------------------------------------------------------------

def cbf_as_rational(kernel):
    """Numerator and denominator of ``p * ftilde(p)`` for a relaxation kernel.

    ``D(p) = prod(p + r_k)`` and
    ``N(p) = (beta*p + a) D(p) + sum_k m_k p D(p)/(p + r_k)``, expanded.
    """
    rates = [r for r, _ in kernel.modes]
    den = product_of_monomials(rates)
    num = RealPolynomial.make(
        [kernel.equilibrium, kernel.newtonian]) * den
    p = RealPolynomial.make([0.0, 1.0])
    for i, (_, weight) in enumerate(kernel.modes):
        others = product_of_monomials(rates[:i] + rates[i + 1:])
        num = num + weight * (p * others)
    return num, den


def stieltjes_as_rational(kernel):
    """Numerator of ``p * htilde(p)`` for a creep kernel, plus the pole product.

    Returns ``(M, E)`` with ``p * htilde(p) = M(p) / (p * E(p))`` where
    ``E(p) = prod(p + s_j)``.  ``M(p) = a p E + b E + sum_j nu_j p E/(p+s_j)``.
    """
    rates = [r for r, _ in kernel.modes]
    pole_product = product_of_monomials(rates)
    num = RealPolynomial.make(
        [kernel.fluidity, kernel.instantaneous]) * pole_product
    p = RealPolynomial.make([0.0, 1.0])
    for i, (_, mass) in enumerate(kernel.modes):
        others = product_of_monomials(rates[:i] + rates[i + 1:])
        num = num + mass * (p * others)
    return num, pole_product


# ---------------------------------------------------------------------------
# Interlaced root finding
# ---------------------------------------------------------------------------

def _bisect(f, lo, hi, flo, fhi):
    """Bisection to relative width BISECT_REL_WIDTH, then one Newton step."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= BISECT_REL_WIDTH * mid:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def interlaced_roots(numerator, poles, has_dirac, has_equilibrium,
                     derivative=None):
    """Positive roots ``s`` of ``numerator(-s) = 0``, bracketed by interlacing.

    ``poles`` are the (sorted, positive) rates of the source kernel.  The
    Stieltjes structure places exactly one root strictly between consecutive
    rates, one below the smallest rate when the numerator does not vanish at
    zero (``has_equilibrium``), and one above the largest rate when the
    numerator carries the extra Dirac degree (``has_dirac``).  Each root is
    refined by bisection and polished with one Newton step.
    """
    poles = sorted(float(r) for r in poles)
    if derivative is None:
        derivative = numerator.derivative()

    def q(s):
        return numerator(-s)

    intervals = [(0.0, poles[0])] if poles else []
    intervals += list(zip(poles, poles[1:]))
    if has_dirac:
        # Cauchy bound on the root magnitudes of the numerator.
        bound = 1.0 + max(abs(c) for c in numerator.coeffs) / abs(
            numerator.leading)
        start = poles[-1] if poles else 0.0
        if bound <= start:
            bound = 2.0 * start + 1.0
        intervals.append((start, bound))
    if intervals and not has_equilibrium:
        intervals = intervals[1:]

    roots = []
    for lo, hi in intervals:
        flo, fhi = q(lo), q(hi)
        grow = 0
        while flo * fhi > 0.0 and has_dirac and hi > (poles[-1] if poles else 0.0) \
                and grow < 60 and (lo, hi) == intervals[-1]:
            # The Cauchy bound can undershoot for extreme coefficients.
            hi *= 2.0
            fhi = q(hi)
            grow += 1
        if flo == 0.0 or fhi == 0.0 or flo * fhi > 0.0:
            raise BracketError(
                f"no sign change in root bracket ({lo:.6g}, {hi:.6g}); "
                "rates may be numerically coincident")
        root = _bisect(q, lo, hi, flo, fhi)
        slope = -derivative(-root)
        if slope != 0.0:
            polished = root - q(root) / slope
            if lo < polished < hi:
                root = polished
        roots.append(root)
    return roots


# ---------------------------------------------------------------------------
# Scalar residues
# ---------------------------------------------------------------------------

def stieltjes_partial_fractions(numerator, denominator, roots):
    """Decompose ``denominator/numerator`` into Stieltjes canonical form.

    ``roots`` must be the positive-negated zeros of the numerator.  Returns
    the constant (value at infinity), the mass of the pole at zero (nonzero
    only when the numerator vanishes at zero) and one (pole, mass) pair per
    root.  Residues that come out negative beyond ``TOL_RESIDUE`` signal an
    upstream root error.
    """
    dnum = numerator.derivative()
    if numerator.degree > denominator.degree:
        constant = 0.0
    else:
        constant = denominator.leading / numerator.leading
    if numerator.coeffs[0] == 0.0:
        zero_mass = denominator(0.0) / dnum(0.0)
    else:
        zero_mass = 0.0
    masses = [denominator(-s) / dnum(-s) for s in roots]

    scale = abs(constant) + abs(zero_mass) + sum(abs(m) for m in masses)
    tol = TOL_RESIDUE * scale
    for value, what in [(constant, "constant"), (zero_mass, "pole-at-zero mass")]:
        if value < -tol:
            raise NumericsError(f"negative {what} {value:.3e} in decomposition")
    modes = []
    for s, m in zip(roots, masses):
        if m < -tol:
            raise NumericsError(
                f"negative residue {m:.3e} at pole {s:.6g}; root refinement failed")
        if m > 0.0:
            modes.append((s, m))
    modes.sort(key=lambda e: e[0])
    return RationalStieltjes(max(constant, 0.0), max(zero_mass, 0.0),
                             tuple(modes))



# ---------------------------------------------------------------------------
# 6x6 images and their structured linearization
# ---------------------------------------------------------------------------
#
# Both conversion directions reduce to the same problem.  For a relaxation
# kernel, U(p) = p*Rtilde(p) = p N + B + sum G_k p/(p+r_k); for a creep
# kernel, U(p) = p^2*Ctilde(p) = p A + D + sum H_j p/(p+s_j).  In either
# case U(p)^-1 is a matrix Stieltjes function
#
#     U(p)^-1 = constant + zero_mass/p + sum_k W_k/(p + rho_k)
#
# whose pieces are exactly the dual kernel's coefficients.  The poles are
# found from a structured linear pencil assembled from low-rank factors of
# the mode weights; everything is evaluated in the original rational form,
# never through expanded monomial coefficients, so wide rate spreads stay
# well conditioned.


@dataclass(frozen=True, eq=False)
class CbfImage:
    """``U(p) = p X + Y + sum_k Z_k p/(p + t_k)`` with PSD 6x6 data."""

    dirac: np.ndarray
    constant: np.ndarray
    modes: tuple

    def __call__(self, p):
        out = p * self.dirac + self.constant
        for t, z in self.modes:
            out = out + (p / (p + t)) * np.asarray(z)
        return out

    def derivative(self, p):
        out = np.array(self.dirac)
        for t, z in self.modes:
            out += (t / (p + t) ** 2) * np.asarray(z)
        return out

    def magnitude(self, s):
        """Size of the terms entering ``U(-s)``; reference for 'numerically zero'."""
        out = matrix_norm(self.dirac) * s + matrix_norm(self.constant)
        for t, z in self.modes:
            out += matrix_norm(z) * abs(s / (t - s)) if t != s else \
                matrix_norm(z)
        return max(out, 1e-300)

    @property
    def rate_scale(self):
        return max((t for t, _ in self.modes), default=1.0)


def cbf_image(kernel):
    """The image ``U`` whose inverse holds the dual kernel's coefficients."""
    # local import keeps the module dependency one-way at load time
    from .kernels import CREEP_KINDS, RELAXATION_KINDS
    if isinstance(kernel, RELAXATION_KINDS):
        return CbfImage(np.asarray(kernel.newtonian, dtype=float),
                        np.asarray(kernel.equilibrium, dtype=float),
                        kernel.modes)
    if isinstance(kernel, CREEP_KINDS):
        return CbfImage(np.asarray(kernel.instantaneous, dtype=float),
                        np.asarray(kernel.fluidity, dtype=float),
                        kernel.modes)
    raise TypeError(f"not a kernel: {type(kernel).__name__}")


def _psd_factor(m):
    """``L`` with ``L L^T = m`` and full column rank, via eigendecomposition."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=float))
    keep = w > 1e-14 * max(w[-1], 1e-300)
    return v[:, keep] * np.sqrt(w[keep])


def image_pencil_roots(image):
    """Pole locations of ``U(p)^-1`` with nullspace bases of ``U(-s)``.

    Writing ``Z_k = L_k L_k^T`` and ``w_k = sqrt(t_k) L_k^T v / (p + t_k)``
    turns ``U(p) v = 0`` into the symmetric linear pencil

        [Y + sum Z,  -sqrt(t) L] [v]       [-X   ] [v]
        [-sqrt(t) L^T,   t I   ] [w]  = p  [   -I] [w]

    whose entries stay at the scale of the data.  Finite eigenvalues with
    negative real part are the candidate poles; splinters of the semisimple
    zero eigenvalue (present when ``Y`` is singular) are removed.  Each
    cluster is confirmed against ``U(-s)`` itself: a cluster where ``U(-s)``
    stays regular is a pencil artifact, not a pole of the inverse, and is
    dropped.  Genuine poles may lie arbitrarily close to the source rates
    when a mode weight is nearly singular, so no distance-to-rate filtering
    is applied.
    """
    factors = [(t, _psd_factor(z)) for t, z in image.modes]
    total = np.array(image.constant)
    for _, z in image.modes:
        total += z
    dim = 6 + sum(f.shape[1] for _, f in factors)
    mm = np.zeros((dim, dim))
    ww = np.zeros((dim, dim))
    mm[:6, :6] = total
    ww[:6, :6] = -image.dirac
    col = 6
    for t, f in factors:
        r = f.shape[1]
        block = np.sqrt(t) * f
        mm[:6, col:col + r] = -block
        mm[col:col + r, :6] = -block.T
        mm[col:col + r, col:col + r] = t * np.eye(r)
        ww[col:col + r, col:col + r] = -np.eye(r)
        col += r

    rate_scale = image.rate_scale
    eigvals = scipy.linalg.eigvals(mm, ww)
    eigvals = eigvals[np.isfinite(eigvals)]
    eigvals = eigvals[np.abs(eigvals) <= 1e12 * rate_scale]
    candidates = []
    for lam in eigvals:
        if lam.real >= 0.0:
            continue
        s = -lam.real
        if abs(lam.imag) > TOL_IMAG * max(abs(lam), rate_scale):
            raise NumericsError(
                f"pencil eigenvalue {lam:.6g} is not real within tolerance")
        if s <= 1e-9 * rate_scale:
            continue   # splinter of the zero eigenvalue (singular Y)
        candidates.append(s)

    # Polish every candidate before clustering: splinters of a multiple
    # eigenvalue then collapse onto the same refined value, while genuinely
    # distinct poles that happen to lie close stay apart.
    candidates = sorted(_refine_root(image, s) for s in candidates)

    clusters = []
    for s in candidates:
        if clusters and s - clusters[-1][-1] <= TOL_CLUSTER * s:
            clusters[-1].append(s)
        else:
            clusters.append([s])

    out = []
    for group in clusters:
        s = float(np.mean(group))
        try:
            basis = _image_nullspace(image, s, len(group))
        except DefectivePencilError:
            continue   # regular point of U: spurious pencil eigenvalue
        out.append((s, basis))
    return out


def _refine_root(image, s):
    """Newton-polish a det-root via the smallest singular pair.

    ``g(s) = u' U(-s) v`` with ``u, v`` the minimal singular vectors of
    ``U(-s)`` vanishes at the root; its derivative is ``-u' U'(-s) v``.
    This converges quadratically even on semisimple multiple eigenvalues,
    where plain Newton on the determinant stalls.
    """
    for _ in range(3):
        u, _, vt = np.linalg.svd(image(-s))
        uu, vv = u[:, -1], vt[-1, :]
        slope = -float(uu @ image.derivative(-s) @ vv)
        if slope == 0.0:
            break
        step = float(uu @ image(-s) @ vv) / slope
        if abs(step) > 0.1 * s:
            break
        s = s - step
    return s


def _image_nullspace(image, s, multiplicity):
    """Orthonormal near-nullspace of ``U(-s)``.

    An empty nullspace means ``-s`` is a regular point and the eigenvalue
    cluster is a pencil artifact.  A nullspace thinner than the cluster but
    nonempty is accepted: the surplus members are artifacts that happened to
    polish onto a genuine root, and the nullspace dimension is authoritative
    (``U'`` is positive semidefinite on the negative axis, so true poles are
    always semisimple).
    """
    _, sv, vt = np.linalg.svd(image(-s))
    cutoff = TOL_NULLSPACE * image.magnitude(s)
    dimension = int(np.sum(sv <= cutoff))
    if dimension == 0:
        raise DefectivePencilError(
            f"eigenvalue cluster of size {multiplicity} at {s:.6g}: "
            f"U(-s) is regular there")
    return vt[6 - dimension:].T


@dataclass(frozen=True, eq=False)
class MatrixStieltjesParts:
    """``U(p)^-1 = constant + zero_mass/p + sum W/(p + rho)``."""

    constant: np.ndarray
    zero_mass: np.ndarray
    modes: tuple
    min_weight_eig: float   # most negative residue eigenvalue before
                            # clipping, relative to the decomposition scale


def _image_residue(image, s, basis):
    """Residue of ``U^-1`` at ``p = -s`` through the nullspace of ``U(-s)``."""
    gram = basis.T @ image.derivative(-s) @ basis
    core = basis @ np.linalg.solve(gram, basis.T)
    return 0.5 * (core + core.T)


def decompose_inverse(image, eigs=None):
    """Stieltjes decomposition of ``U(p)^-1``.

    The pole-at-zero mass comes from the nullspace of ``U(0) = Y``; mode
    weights from the nullspace residue formula; the constant either exactly
    zero (when the Dirac block is positive definite, so ``U^-1`` decays) or
    by evaluating ``U^-1`` beyond the largest pole and subtracting the
    recovered parts, cross-validated at a second point.
    """
    if eigs is None:
        eigs = image_pencil_roots(image)

    # A direction with Y-eigenvalue eps carries a pole at s ~ eps / v'U'(0)v.
    # Classify it as a pole at zero exactly when that implied location falls
    # under the same threshold used to discard zero splinters in the pencil,
    # so no pole is ever counted both here and as a finite mode.
    y = np.asarray(image.constant)
    delta = 1e-9 * image.rate_scale
    w, v = np.linalg.eigh(y) if matrix_norm(y) > 0.0 else (np.zeros(6),
                                                           np.eye(6))
    slope = image.derivative(0.0)
    keep = [i for i in range(6)
            if w[i] <= delta * float(v[:, i] @ slope @ v[:, i])]
    null_y = v[:, keep]
    if null_y.shape[1] > 0:
        gram = null_y.T @ slope @ null_y
        core = null_y @ np.linalg.solve(gram, null_y.T)
        zero_mass = 0.5 * (core + core.T)
    else:
        zero_mass = np.zeros((6, 6))

    raw_modes = [(s, _image_residue(image, s, basis)) for s, basis in eigs]

    def evaluate(p):
        return np.linalg.inv(image(p))

    rate_max = max((s for s, _ in raw_modes), default=1.0)
    p_star = 1.0 + 2.0 * rate_max
    probe = evaluate(p_star)
    scale = max([matrix_norm(probe), matrix_norm(zero_mass)]
                + [matrix_norm(w) for _, w in raw_modes])
    diagnostics = [0.0]

    def clipped(mat):
        out, low = psd_clip(mat)
        diagnostics[0] = min(diagnostics[0], low / scale)
        if low < -1e-6 * scale:
            raise NumericsError(
                f"residue matrix indefinite beyond tolerance "
                f"(eigmin {low:.3e}, scale {scale:.3e})")
        return out

    zero_mass = clipped(zero_mass)
    modes = [(s, clipped(w)) for s, w in raw_modes
             if matrix_norm(w) > TOL_CANCEL * scale]

    x = np.asarray(image.dirac)
    x_norm = matrix_norm(x)
    if x_norm > 0.0 and float(np.linalg.eigvalsh(x)[0]) > TOL_PSD * x_norm:
        # U ~ p X with X invertible, so U^-1 decays: no constant, exactly.
        constant = np.zeros((6, 6))
    else:
        constant = clipped(_constant_by_subtraction(
            evaluate, zero_mass, modes, p_star, probe, scale))
    return MatrixStieltjesParts(constant, zero_mass, tuple(modes),
                                diagnostics[0])


def _constant_by_subtraction(evaluate, zero_mass, modes, p_star, probe, scale):
    def tail(p, value):
        out = np.array(value)
        out -= zero_mass / p
        for s, w in modes:
            out -= np.asarray(w) / (p + s)
        return out

    constant = tail(p_star, probe)
    p_check = 2.7 * p_star + 0.3
    check = tail(p_check, evaluate(p_check))
    mismatch = matrix_norm(constant - check)
    if mismatch > TOL_CROSSCHECK * max(scale, matrix_norm(constant)):
        raise NumericsError(
            f"constant-term cross-validation mismatch {mismatch:.3e}; "
            "pole extraction is inconsistent")
    return 0.5 * (constant + check)
