"""Finite-dimensional matrix *-algebras and positive maps between them.

An algebra is stored concretely: a linearly independent basis of complex
``d x d`` matrices whose span is closed under products and adjoints, plus a
unit (which may be a proper projection when the algebra sits non-unitally
inside the ambient matrix algebra).  Positive maps are stored by their matrix
in basis coordinates and tagged with the role they are meant to play: state,
conditional expectation, or completely positive map.

Verification never mutates anything.  Structural problems (shape mismatches,
codomain not inside the domain, dependent basis) raise :class:`StructuralError`;
numerical failures are returned in a :class:`VerificationReport`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, EIG_FLOOR, RANK_RTOL, dag, frob, min_eig, vec

__all__ = [
    "StructuralError",
    "MatrixStarAlgebra",
    "MapKind",
    "PositiveMap",
    "CheckResult",
    "VerificationReport",
    "full_matrix_algebra",
    "pauli_algebra",
    "diagonal_algebra",
    "scalar_algebra",
    "algebra_from_basis",
    "verify_algebra",
    "subalgebra_project",
    "map_from_images",
    "independent_columns",
    "state_from_density",
    "normalized_trace_state",
    "induced_density",
    "diagonal_compression",
    "average_with_involution",
    "cp_from_kraus",
    "cp_from_stochastic",
    "identity_map",
    "compose_maps",
    "iterate_map",
    "cp_kernel",
    "choi_matrix",
    "verify_positive_map",
]


class StructuralError(ValueError):
    """Malformed input: wrong shapes, dependent basis, codomain not contained
    in the domain, and similar.  Distinct from a failed numerical check."""


@dataclass
class CheckResult:
    name: str
    residual: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, residual: float, tol: float, detail: str = "") -> None:
        self.checks.append(CheckResult(name, float(residual), float(residual) <= tol, detail))


class MatrixStarAlgebra:
    """A *-algebra of complex matrices given by an explicit basis.

    Parameters
    ----------
    basis:
        Array of shape ``(n, d, d)``; must be linearly independent.
    unit:
        The algebra unit, a ``d x d`` matrix.  Defaults to the ambient
        identity; pass a projection for non-unital embeddings.
    """

    def __init__(self, basis: np.ndarray, unit: np.ndarray | None = None):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise StructuralError(f"basis must have shape (n, d, d), got {basis.shape}")
        self.basis = basis
        d = basis.shape[1]
        self.unit = np.eye(d, dtype=complex) if unit is None else np.asarray(unit, dtype=complex)
        if self.unit.shape != (d, d):
            raise StructuralError(f"unit shape {self.unit.shape} does not match ambient dimension {d}")
        # column-stacked basis and its pseudoinverse drive all coordinate work
        self._stack = basis.reshape(len(basis), d * d).T
        overlaps = dag(self._stack) @ self._stack
        norms2 = np.diagonal(overlaps).real
        if np.any(norms2 <= 0.0):
            raise StructuralError("basis contains a zero matrix")
        if np.count_nonzero(overlaps - np.diag(np.diagonal(overlaps))) == 0:
            # exactly orthogonal columns (matrix-unit-style bases): analytic
            # pseudoinverse, which keeps coordinate round-trips free of
            # factorization noise
            self._pinv = dag(self._stack) / norms2[:, None]
        else:
            sv = np.linalg.svd(self._stack, compute_uv=False)
            if len(basis) > 1 and sv[-1] < RANK_RTOL * sv[0]:
                raise StructuralError("basis matrices are linearly dependent")
            self._pinv = np.linalg.pinv(self._stack)
            if self._stack.shape[0] == self._stack.shape[1]:
                # square stacks with Gaussian-integer inverses (e.g. a unit
                # prepended to matrix units) deserve exact coordinates: round
                # and keep the result only if it is verifiably the inverse
                rounded = np.round(self._pinv.real) + 1j * np.round(self._pinv.imag)
                if (
                    np.abs(rounded - self._pinv).max() < 1e-10
                    and np.array_equal(rounded @ self._stack, np.eye(len(basis)))
                ):
                    self._pinv = rounded

    @property
    def dim(self) -> int:
        """Number of basis elements (linear dimension of the algebra)."""
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def coords(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Least-squares coordinates of ``x`` over the basis and the residual."""
        c = self._pinv @ vec(x)
        return c, frob(self._stack @ c - vec(x))

    def coords_many(self, xs: np.ndarray) -> tuple[np.ndarray, float]:
        """Coordinates for a stack of matrices ``(m, d, d)``; worst residual."""
        flat = xs.reshape(xs.shape[0], -1).T
        c = self._pinv @ flat
        res = np.linalg.norm(self._stack @ c - flat, axis=0)
        return c.T, float(res.max(initial=0.0))

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        """Matrix with the given basis coordinates."""
        return np.tensordot(coeffs, self.basis, axes=(0, 0))

    def element(self, x: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        """Return ``x`` checked for membership in the algebra span."""
        x = np.asarray(x, dtype=complex)
        _, res = self.coords(x)
        if res > tol:
            raise StructuralError(f"matrix is not in the algebra span (residual {res:.3e})")
        return x

    def is_commutative(self, tol: float = DEFAULT_TOL) -> bool:
        b = self.basis
        comm = np.einsum("iab,jbc->ijac", b, b) - np.einsum("jab,ibc->ijac", b, b)
        return float(np.abs(comm).max(initial=0.0)) <= tol

    def same_basis(self, other: "MatrixStarAlgebra", tol: float = DEFAULT_TOL) -> bool:
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and frob(self.basis - other.basis) <= tol
        )


def full_matrix_algebra(d: int) -> MatrixStarAlgebra:
    """The full matrix algebra, basis ordered with the unit first."""
    basis = [np.eye(d, dtype=complex)]
    for i in range(d):
        for j in range(d):
            if i == 0 and j == 0:
                continue
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            basis.append(e)
    return MatrixStarAlgebra(np.array(basis))


def pauli_algebra() -> MatrixStarAlgebra:
    """The 2x2 matrix algebra with the Hermitian unitary basis I, sx, sy, sz."""
    i2 = np.eye(2, dtype=complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return MatrixStarAlgebra(np.array([i2, sx, sy, sz]))


def diagonal_algebra(d: int) -> MatrixStarAlgebra:
    """Diagonal matrices with the indicator basis (functions on d points)."""
    basis = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        basis[k, k, k] = 1.0
    return MatrixStarAlgebra(basis)


def scalar_algebra() -> MatrixStarAlgebra:
    """The complex numbers as 1x1 matrices."""
    return MatrixStarAlgebra(np.ones((1, 1, 1), dtype=complex))


def algebra_from_basis(basis, unit=None) -> MatrixStarAlgebra:
    return MatrixStarAlgebra(np.asarray(basis, dtype=complex), unit)


def subalgebra_project(algebra: MatrixStarAlgebra, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares projection of ``x`` onto the algebra span.

    Returns the projected matrix and the Frobenius norm of what was cut off.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (algebra.ambient_dim, algebra.ambient_dim):
        raise StructuralError(
            f"matrix shape {x.shape} does not match ambient dimension {algebra.ambient_dim}"
        )
    c, res = algebra.coords(x)
    return algebra.combine(c), res


def verify_algebra(algebra: MatrixStarAlgebra, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check closure under products and adjoints and the unit laws."""
    b = algebra.basis
    n = algebra.dim
    report = VerificationReport()

    products = np.einsum("iab,jbc->ijac", b, b).reshape(n * n, *b.shape[1:])
    _, res = algebra.coords_many(products)
    report.add("product-closure", res, tol)

    adjoints = np.conj(np.transpose(b, (0, 2, 1)))
    _, res = algebra.coords_many(adjoints)
    report.add("adjoint-closure", res, tol)

    _, res = algebra.coords(algebra.unit)
    report.add("unit-membership", res, tol)

    left = np.einsum("ab,ibc->iac", algebra.unit, b) - b
    right = np.einsum("iab,bc->iac", b, algebra.unit) - b
    report.add("unit-law", max(frob(left), frob(right)), tol)

    herm = frob(algebra.unit - dag(algebra.unit))
    idem = frob(algebra.unit @ algebra.unit - algebra.unit)
    report.add("unit-projection", max(herm, idem), tol)
    return report


class MapKind(str, enum.Enum):
    STATE = "state"
    CONDITIONAL_EXPECTATION = "conditional_expectation"
    CP_MAP = "cp_map"


class PositiveMap:
    """Linear map between matrix *-algebras, stored in basis coordinates.

    ``matrix[i, j]`` is the coefficient of ``codomain.basis[i]`` in the image
    of ``domain.basis[j]``.
    """

    def __init__(
        self,
        domain: MatrixStarAlgebra,
        codomain: MatrixStarAlgebra,
        matrix: np.ndarray,
        kind: MapKind,
    ):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (codomain.dim, domain.dim):
            raise StructuralError(
                f"map matrix shape {matrix.shape} does not match (codomain {codomain.dim}, domain {domain.dim})"
            )
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix
        self.kind = MapKind(kind)

    def apply(self, x: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        """Image of ``x``; raises if ``x`` is not in the domain span."""
        c, res = self.domain.coords(x)
        if res > tol:
            raise StructuralError(f"argument is not in the domain span (residual {res:.3e})")
        return self.codomain.combine(self.matrix @ c)

    def apply_many(self, xs: np.ndarray) -> np.ndarray:
        c, _ = self.domain.coords_many(xs)
        return np.einsum("ik,kab->iab", c @ self.matrix.T, self.codomain.basis)

    def is_unital(self, tol: float = DEFAULT_TOL) -> bool:
        return frob(self.apply(self.domain.unit) - self.codomain.unit) <= tol


def map_from_images(
    domain: MatrixStarAlgebra,
    codomain: MatrixStarAlgebra,
    images: np.ndarray,
    kind: MapKind,
    tol: float = 1e-10,
) -> PositiveMap:
    """Build a map from the images of the domain basis, in order."""
    images = np.asarray(images, dtype=complex)
    if images.shape[0] != domain.dim:
        raise StructuralError(
            f"need one image per domain basis element ({domain.dim}), got {images.shape[0]}"
        )
    coeffs, res = codomain.coords_many(images)
    if res > tol:
        raise StructuralError(f"images are not inside the codomain span (residual {res:.3e})")
    return PositiveMap(domain, codomain, coeffs.T, kind)


def state_from_density(algebra: MatrixStarAlgebra, rho: np.ndarray) -> PositiveMap:
    """The functional a -> trace(rho a) as a map into the scalars."""
    rho = np.asarray(rho, dtype=complex)
    values = np.einsum("ab,iba->i", rho, algebra.basis)
    return PositiveMap(algebra, scalar_algebra(), values[None, :], MapKind.STATE)


def normalized_trace_state(algebra: MatrixStarAlgebra) -> PositiveMap:
    d = algebra.ambient_dim
    return state_from_density(algebra, np.eye(d) / d)


def induced_density(state: PositiveMap) -> np.ndarray:
    """Density matrix in the domain span representing a scalar functional.

    Solves trace(rho b_j) = phi(b_j) inside span(domain); for a positive
    functional on a *-closed algebra the solution is positive semidefinite.
    """
    alg = state.domain
    values = state.matrix[0]
    # trace(rho b_j) = vec(rho) . vec(b_j^T); constrain rho to the span
    pairing = alg.basis.transpose(0, 2, 1).reshape(alg.dim, -1)
    coeff_matrix = pairing @ alg._stack
    c = np.linalg.lstsq(coeff_matrix, values, rcond=None)[0]
    return alg.combine(c)


def diagonal_compression(d: int, domain: MatrixStarAlgebra | None = None) -> PositiveMap:
    """Conditional expectation keeping the diagonal of a d x d matrix."""
    dom = full_matrix_algebra(d) if domain is None else domain
    cod_basis = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        cod_basis[k, k, k] = 1.0
    cod = MatrixStarAlgebra(cod_basis)
    images = np.stack([np.diag(np.diagonal(b)) for b in dom.basis])
    return map_from_images(dom, cod, images, MapKind.CONDITIONAL_EXPECTATION)


def average_with_involution(domain: MatrixStarAlgebra, u: np.ndarray) -> PositiveMap:
    """Conditional expectation a -> (a + u a u*) / 2 for a Hermitian unitary u.

    The image is the commutant of ``u`` inside the domain.
    """
    u = np.asarray(u, dtype=complex)
    if frob(u @ u - np.eye(len(u))) > 1e-10 or frob(u - dag(u)) > 1e-10:
        raise StructuralError("averaging element must be a Hermitian unitary")
    images = (domain.basis + np.einsum("ab,ibc,cd->iad", u, domain.basis, dag(u))) / 2
    coeffs, res = domain.coords_many(images)
    if res > 1e-10:
        raise StructuralError("averaged images left the domain span")
    # codomain basis: a maximal independent subset of the averaged images
    keep = independent_columns(images.reshape(len(images), -1).T)
    cod = MatrixStarAlgebra(images[keep])
    return map_from_images(domain, cod, images, MapKind.CONDITIONAL_EXPECTATION)


def independent_columns(a: np.ndarray, rtol: float = RANK_RTOL) -> list[int]:
    """Indices of a maximal independent column subset, greedy by residual norm."""
    work = np.asarray(a, dtype=complex).copy()
    top = float(np.linalg.norm(work, axis=0).max(initial=0.0))
    keep: list[int] = []
    for _ in range(min(work.shape)):
        norms = np.linalg.norm(work, axis=0)
        k = int(np.argmax(norms))
        if norms[k] <= rtol * max(top, 1.0):
            break
        keep.append(k)
        v = work[:, k] / norms[k]
        work -= np.outer(v, v.conj() @ work)
    return sorted(keep)


def cp_from_kraus(domain: MatrixStarAlgebra, kraus: list[np.ndarray]) -> PositiveMap:
    """The map a -> sum_k V_k^* a V_k in domain coordinates."""
    images = np.zeros_like(domain.basis)
    for v in kraus:
        images = images + np.einsum("ab,ibc,cd->iad", dag(v), domain.basis, v)
    try:
        return map_from_images(domain, domain, images, MapKind.CP_MAP)
    except StructuralError as exc:
        raise StructuralError(f"Kraus images left the algebra span: {exc}") from None


def cp_from_stochastic(p: np.ndarray) -> PositiveMap:
    """Transition matrix acting on the diagonal algebra: (Tf)(y) = sum_x P[y,x] f(x)."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise StructuralError("transition matrix must be square")
    if np.any(p < -1e-12):
        raise StructuralError("transition matrix has negative entries")
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-9:
        raise StructuralError("transition matrix rows must sum to one")
    alg = diagonal_algebra(p.shape[0])
    return PositiveMap(alg, alg, p.astype(complex), MapKind.CP_MAP)


def identity_map(algebra: MatrixStarAlgebra, kind: MapKind = MapKind.CP_MAP) -> PositiveMap:
    return PositiveMap(algebra, algebra, np.eye(algebra.dim, dtype=complex), kind)


def compose_maps(outer: PositiveMap, inner: PositiveMap, kind: MapKind | None = None) -> PositiveMap:
    """outer o inner; the codomain of ``inner`` must match the domain of ``outer``."""
    if not inner.codomain.same_basis(outer.domain):
        raise StructuralError("composition mismatch: inner codomain differs from outer domain")
    k = kind if kind is not None else outer.kind
    return PositiveMap(inner.domain, outer.codomain, outer.matrix @ inner.matrix, k)


def iterate_map(t: PositiveMap, n: int) -> PositiveMap:
    if not t.domain.same_basis(t.codomain):
        raise StructuralError("only endomaps can be iterated")
    return PositiveMap(t.domain, t.codomain, np.linalg.matrix_power(t.matrix, n), t.kind)


def cp_kernel(pmap: PositiveMap) -> np.ndarray:
    """Block matrix [ map(b_i^* b_j) ]_{ij}.

    Positive semidefiniteness of this kernel is equivalent to complete
    positivity and works for maps defined on proper subalgebras, where the
    usual Choi matrix is unavailable.
    """
    b = pmap.domain.basis
    n = pmap.domain.dim
    products = np.einsum("iba,jbc->ijac", b.conj(), b).reshape(n * n, *b.shape[1:])
    images = pmap.apply_many(products)
    d2 = pmap.codomain.ambient_dim
    blocks = images.reshape(n, n, d2, d2)
    return blocks.transpose(0, 2, 1, 3).reshape(n * d2, n * d2)


def choi_matrix(pmap: PositiveMap) -> np.ndarray:
    """Standard Choi matrix sum_{ij} E_ij (x) map(E_ij).

    Requires the domain span to be the full ambient matrix algebra.
    """
    d = pmap.domain.ambient_dim
    if pmap.domain.dim != d * d:
        raise StructuralError("Choi matrix needs the full matrix algebra as domain")
    units = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            units[i * d + j, i, j] = 1.0
    images = pmap.apply_many(units)
    d2 = pmap.codomain.ambient_dim
    out = np.zeros((d * d2, d * d2), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d2 : (i + 1) * d2, j * d2 : (j + 1) * d2] = images[i * d + j]
    return out


def _embed_codomain(pmap: PositiveMap, tol: float) -> np.ndarray:
    """Coordinates of the codomain basis inside the domain span (CE only)."""
    coords, res = pmap.domain.coords_many(pmap.codomain.basis)
    if res > max(tol, 1e-8):
        raise StructuralError(
            f"codomain is not contained in the domain span (residual {res:.3e})"
        )
    return coords


def verify_positive_map(pmap: PositiveMap, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Run the checks appropriate for the map's declared kind."""
    report = VerificationReport()
    eig_floor = min(EIG_FLOOR, -tol)

    if pmap.kind is MapKind.STATE:
        if pmap.codomain.ambient_dim != 1 or pmap.codomain.dim != 1:
            raise StructuralError("a state must take scalar values")
        report.add("state-unital", abs(pmap.apply(pmap.domain.unit)[0, 0] - 1.0), tol)
        rho = induced_density(pmap)
        report.add("density-hermitian", frob(rho - dag(rho)), tol)
        report.add("density-positive", max(0.0, -min_eig(rho)), -eig_floor)
        return report

    if pmap.kind is MapKind.CONDITIONAL_EXPECTATION:
        embed = _embed_codomain(pmap, tol)  # (cod.dim, dom.dim) coordinates
        report.add("unit-match", frob(pmap.domain.unit - pmap.codomain.unit), tol)
        report.add("expectation-unital", frob(pmap.apply(pmap.domain.unit) - pmap.codomain.unit), tol)
        # idempotence: applying the map to its own images changes nothing
        again = pmap.matrix @ embed.T @ pmap.matrix
        report.add("idempotent", frob(again - pmap.matrix), tol)
        # bimodule property over the codomain, exhaustively on bases
        worst = 0.0
        cod_b = pmap.codomain.basis
        dom_images = pmap.apply_many(pmap.domain.basis)
        for i, bi in enumerate(cod_b):
            for j, bj in enumerate(cod_b):
                sandw = np.einsum("ab,kbc,cd->kad", bi, pmap.domain.basis, bj)
                lhs = pmap.apply_many(sandw)
                rhs = np.einsum("ab,kbc,cd->kad", bi, dom_images, bj)
                worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        report.add("bimodule", worst, tol)
        report.add("completely-positive", max(0.0, -min_eig(cp_kernel(pmap))), -eig_floor)
        return report

    # general CP map
    report.add("completely-positive", max(0.0, -min_eig(cp_kernel(pmap))), -eig_floor)
    unital_res = frob(pmap.apply(pmap.domain.unit) - pmap.codomain.unit)
    report.checks.append(
        CheckResult("unital", float(unital_res), True, "informational: unitality is not required of a CP map")
    )
    return report
