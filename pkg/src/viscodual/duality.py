"""Conversions between relaxation and creep kernels.

The conversions are computed exactly in coefficient space: the Laplace
image ``p * ktilde(p)`` is a rational function, its reciprocal is again
rational with interlaced negative poles, and extracting roots plus
residues yields the dual kernel in the same finite-exponential class.  No
numerical Laplace inversion is involved.
"""

from __future__ import annotations

from .kernels import (
    InvalidKernel,
    MatrixCreep,
    MatrixRelaxation,
    ScalarCreep,
    ScalarRelaxation,
)
from .rational import (
    cbf_as_rational,
    cbf_image,
    decompose_inverse,
    interlaced_roots,
    stieltjes_as_rational,
    stieltjes_partial_fractions,
)


def dualize_relaxation_to_creep(kernel):
    """Creep kernel ``h`` with ``(f * h')(t) + ... = t``, i.e. duality in Laplace form.

    ``1/[p ftilde(p)] = p htilde(p)``: the reciprocal of the rational
    complete Bernstein image decomposes into the Stieltjes canonical form
    whose pieces are exactly the creep coefficients.
    """
    num, den = cbf_as_rational(kernel)
    roots = interlaced_roots(
        num, [r for r, _ in kernel.modes],
        has_dirac=kernel.newtonian > 0.0,
        has_equilibrium=kernel.equilibrium > 0.0)
    parts = stieltjes_partial_fractions(num, den, roots)
    return ScalarCreep.make(
        instantaneous=parts.constant,
        fluidity=parts.pole_at_zero_mass,
        modes=parts.modes)


def dualize_creep_to_relaxation(kernel):
    """Relaxation kernel dual to a creep kernel: ``1/[p htilde(p)] = p ftilde(p)``."""
    num, pole_product = stieltjes_as_rational(kernel)
    roots = interlaced_roots(
        num, [r for r, _ in kernel.modes],
        has_dirac=kernel.instantaneous > 0.0,
        has_equilibrium=kernel.fluidity > 0.0)
    parts = stieltjes_partial_fractions(num, pole_product, roots)
    return ScalarRelaxation.make(
        newtonian=parts.constant,
        equilibrium=parts.pole_at_zero_mass,
        modes=parts.modes)


def dualize_matrix_relaxation_to_creep(kernel):
    """6x6 analogue: ``p Rtilde(p) = p^-1 Ctilde(p)^-1``.

    Requires condition (*): ``N + B + sum G_k`` positive definite, which in
    the discrete class is equivalent to no direction having an identically
    vanishing kernel projection.
    """
    if not kernel.satisfies_positivity():
        raise InvalidKernel(
            "condition (*) fails: N + B + sum G_k is not positive definite")
    parts = decompose_inverse(cbf_image(kernel))
    return MatrixCreep.make(
        instantaneous=parts.constant,
        fluidity=parts.zero_mass,
        modes=parts.modes)


def dualize_matrix_creep_to_relaxation(kernel):
    """Mirror 6x6 conversion, creep to relaxation.

    The positivity hypothesis is read on the creep data: ``A + D + sum H_j``
    must be positive definite, otherwise some stress direction has no
    constitutive response at any time scale.
    """
    if not kernel.satisfies_positivity():
        raise InvalidKernel(
            "condition (**) fails: A + D + sum H_j is not positive definite")
    parts = decompose_inverse(cbf_image(kernel))
    return MatrixRelaxation.make(
        newtonian=parts.constant,
        equilibrium=parts.zero_mass,
        modes=parts.modes)


def dualize(kernel):
    """Dispatch to the conversion matching the kernel type."""
    if isinstance(kernel, ScalarRelaxation):
        return dualize_relaxation_to_creep(kernel)
    if isinstance(kernel, ScalarCreep):
        return dualize_creep_to_relaxation(kernel)
    if isinstance(kernel, MatrixRelaxation):
        return dualize_matrix_relaxation_to_creep(kernel)
    if isinstance(kernel, MatrixCreep):
        return dualize_matrix_creep_to_relaxation(kernel)
    raise TypeError(f"not a kernel: {type(kernel).__name__}")
