"""Finitely generated Hilbert modules over matrix *-algebras.

A module is presented by generators and relations in coordinate form: an
``(n, n, d0, d0)`` array of base-algebra-valued inner products between ``n``
generators (``d0`` is the ambient dimension of the base algebra), together
with an optional left action of another algebra and a dictionary of
distinguished vectors.  A vector is an ``(n, d0, d0)`` array of right
coefficients: ``x = sum_i e_i x[i]``.  An operator is an ``(n, n, d0, d0)``
block matrix acting on coefficients; adjointability is a property we verify,
not an assumption.

Since generators may be dependent, equality of vectors and operators is
always decided through the inner product, never through raw coefficients.
The :func:`quotient_null_space` routine extracts a minimal generating subset
(over the base algebra) and rewrites everything else in terms of it; the
surviving generators keep their original inner products verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core import (
    CheckResult,
    MatrixStarAlgebra,
    PositiveMap,
    StructuralError,
    VerificationReport,
    scalar_algebra,
)
from .linalg import DEFAULT_TOL, EIG_FLOOR, RANK_RTOL, block_matrix, dag, frob, min_eig

__all__ = [
    "HilbertModule",
    "LeftAction",
    "AdjointableOperator",
    "QuotientInfo",
    "inner_product",
    "apply_blocks",
    "compose_blocks",
    "dagger_blocks",
    "right_multiply",
    "identity_operator",
    "zero_operator",
    "rank_one",
    "left_action_operator",
    "operator_distance",
    "compose_adjointable",
    "apply",
    "vector_norm",
    "solve_adjoint",
    "extended_gram",
    "quotient_null_space",
    "quotient_module",
    "gns_construct",
    "tensor_over_base",
    "ModuleTensor",
    "restrict_left_action",
    "trivial_left_action",
    "verify_module",
    "verify_adjointable",
]


# ---------------------------------------------------------------------------
# coefficient arithmetic


def inner_product(gram: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Base-valued inner product <x, y> = sum_ij x_i^* G_ij y_j."""
    return np.einsum("iba,ijbc,jcd->ad", x.conj(), gram, y)


def apply_blocks(blocks: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ijab,jbc->iac", blocks, x)


def compose_blocks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ikab,kjbc->ijac", a, b)


def dagger_blocks(m: np.ndarray) -> np.ndarray:
    """Blockwise adjoint: (M^*)[i, j] = M[j, i]^dag."""
    return m.transpose(1, 0, 3, 2).conj()


def right_multiply(x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Right module action on coefficients."""
    return np.einsum("iab,bc->iac", x, b)


# ---------------------------------------------------------------------------
# modules, left actions, operators


@dataclass
class LeftAction:
    """Left action of ``algebra`` given per basis element as coefficient blocks.

    ``blocks[k]`` is the operator of ``algebra.basis[k]``, an
    ``(n, n, d0, d0)`` block matrix with entries in the base algebra.
    """

    algebra: MatrixStarAlgebra
    blocks: np.ndarray  # (m, n, n, d0, d0)

    def blocks_of(self, a: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        c, res = self.algebra.coords(a)
        if res > tol:
            raise StructuralError(f"element is not in the acting algebra (residual {res:.3e})")
        return np.einsum("k,kijab->ijab", c, self.blocks)


class HilbertModule:
    def __init__(
        self,
        base: MatrixStarAlgebra,
        gram: np.ndarray,
        left: LeftAction | None = None,
        distinguished: dict[str, np.ndarray] | None = None,
    ):
        gram = np.asarray(gram, dtype=complex)
        d0 = base.ambient_dim
        if gram.ndim != 4 or gram.shape[0] != gram.shape[1] or gram.shape[2:] != (d0, d0):
            raise StructuralError(
                f"gram must have shape (n, n, {d0}, {d0}), got {gram.shape}"
            )
        self.base = base
        self.gram = gram
        self.left = left
        self.distinguished = dict(distinguished or {})
        if left is not None and left.blocks.shape[1:] != (self.rank, self.rank, d0, d0):
            raise StructuralError("left action blocks do not match the module shape")

    @property
    def rank(self) -> int:
        """Number of generators (not necessarily independent)."""
        return self.gram.shape[0]

    def vector(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.rank, self.base.ambient_dim, self.base.ambient_dim):
            raise StructuralError(f"vector coefficients must have shape "
                                  f"({self.rank}, {self.base.ambient_dim}, {self.base.ambient_dim})")
        return coeffs

    def generator(self, i: int) -> np.ndarray:
        x = np.zeros((self.rank, self.base.ambient_dim, self.base.ambient_dim), dtype=complex)
        x[i] = self.base.unit
        return x

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return inner_product(self.gram, x, y)

    def zero_vector(self) -> np.ndarray:
        return np.zeros((self.rank, self.base.ambient_dim, self.base.ambient_dim), dtype=complex)


def vector_norm(module: HilbertModule, x: np.ndarray) -> float:
    """Module norm sqrt(||<x, x>||); zero exactly for null vectors."""
    g = module.inner(x, x)
    return float(np.sqrt(max(0.0, np.linalg.norm(g, 2))))


@dataclass
class AdjointableOperator:
    """Right-linear operator with a verified (or structurally known) adjoint."""

    module: HilbertModule
    blocks: np.ndarray  # (n, n, d0, d0)
    adjoint_blocks: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return apply_blocks(self.blocks, x)

    @property
    def H(self) -> "AdjointableOperator":
        return AdjointableOperator(self.module, self.adjoint_blocks, self.blocks)

    def __matmul__(self, other: "AdjointableOperator") -> "AdjointableOperator":
        return AdjointableOperator(
            self.module,
            compose_blocks(self.blocks, other.blocks),
            compose_blocks(other.adjoint_blocks, self.adjoint_blocks),
        )

    def __add__(self, other: "AdjointableOperator") -> "AdjointableOperator":
        return AdjointableOperator(
            self.module, self.blocks + other.blocks, self.adjoint_blocks + other.adjoint_blocks
        )

    def __sub__(self, other: "AdjointableOperator") -> "AdjointableOperator":
        return AdjointableOperator(
            self.module, self.blocks - other.blocks, self.adjoint_blocks - other.adjoint_blocks
        )

    def __mul__(self, scalar: complex) -> "AdjointableOperator":
        return AdjointableOperator(
            self.module, scalar * self.blocks, np.conj(scalar) * self.adjoint_blocks
        )

    __rmul__ = __mul__

    def matrix_form(self) -> np.ndarray:
        """The sesquilinear form <e_i, S e_j>, which determines the operator."""
        return compose_blocks(self.module.gram, self.blocks)


def identity_operator(module: HilbertModule) -> AdjointableOperator:
    n, d0 = module.rank, module.base.ambient_dim
    blocks = np.zeros((n, n, d0, d0), dtype=complex)
    for i in range(n):
        blocks[i, i] = module.base.unit
    return AdjointableOperator(module, blocks, blocks.copy())


def zero_operator(module: HilbertModule) -> AdjointableOperator:
    n, d0 = module.rank, module.base.ambient_dim
    blocks = np.zeros((n, n, d0, d0), dtype=complex)
    return AdjointableOperator(module, blocks, blocks.copy())


def rank_one(module: HilbertModule, x: np.ndarray, y: np.ndarray) -> AdjointableOperator:
    """|x><y| : z -> x <y, z>; its adjoint is |y><x|."""

    def one_side(u, v):
        w = np.einsum("kba,kjbc->jac", v.conj(), module.gram)
        return np.einsum("iab,jbc->ijac", u, w)

    return AdjointableOperator(module, one_side(x, y), one_side(y, x))


def left_action_operator(module: HilbertModule, a: np.ndarray) -> AdjointableOperator:
    """Operator of a left-algebra element; adjoint comes from the algebra."""
    if module.left is None:
        raise StructuralError("module has no left action")
    return AdjointableOperator(
        module,
        module.left.blocks_of(np.asarray(a, dtype=complex)),
        module.left.blocks_of(dag(np.asarray(a, dtype=complex))),
    )


def operator_distance(s: AdjointableOperator, t: AdjointableOperator) -> float:
    """Distance in the sesquilinear form; zero iff the operators agree."""
    return frob(s.matrix_form() - t.matrix_form())


def compose_adjointable(a: AdjointableOperator, b: AdjointableOperator) -> AdjointableOperator:
    """The product a b, with (a b)* = b* a* assembled from the given adjoints."""
    return a @ b


def apply(op: AdjointableOperator, x: np.ndarray) -> np.ndarray:
    return op(x)


def solve_adjoint(module: HilbertModule, blocks: np.ndarray, tol: float = 1e-8) -> AdjointableOperator:
    """Find adjoint blocks with coefficients in the base algebra, or fail.

    Solves  sum_k G[i,k] A[k,j] = (G o S)[j,i]^dag  for A with entries
    constrained to the span of the base algebra.  Raises when no solution
    exists within tolerance — e.g. right multiplication by a non-central
    element of a noncommutative base is not adjointable.
    """
    base = module.base
    n, d0, nb = module.rank, base.ambient_dim, base.dim
    rhs = dagger_blocks(compose_blocks(module.gram, blocks))
    # unknowns: A[k, j] = sum_m alpha[k, j, m] beta_m
    # equations per (i, j): sum_{k, m} G[i, k] beta_m alpha[k, j, m] = rhs[i, j]
    gb = np.einsum("ikab,mbc->ikmac", module.gram, base.basis)  # (n, n, nb, d0, d0)
    m_mat = gb.transpose(0, 3, 4, 1, 2).reshape(n * d0 * d0, n * nb)
    r_mat = rhs.transpose(0, 2, 3, 1).reshape(n * d0 * d0, n)
    alpha, residual, *_ = np.linalg.lstsq(m_mat, r_mat, rcond=None)
    achieved = frob(m_mat @ alpha - r_mat)
    if achieved > tol * max(1.0, frob(r_mat)):
        raise StructuralError(
            f"operator has no adjoint with coefficients in the base algebra "
            f"(residual {achieved:.3e})"
        )
    adj = np.einsum("kmj,mab->kjab", alpha.reshape(n, nb, n), base.basis)
    return AdjointableOperator(module, np.asarray(blocks, dtype=complex), adj)


# ---------------------------------------------------------------------------
# quotient by the length-zero subspace


def extended_gram(module: HilbertModule) -> np.ndarray:
    """Scalar Gram matrix of the family { e_i * beta_m } under tau o <.,.>.

    ``tau`` is the normalized ambient trace; positivity and base-linear
    dependence questions about the generators reduce to this matrix.
    """
    beta = module.base.basis
    d0 = module.base.ambient_dim
    # tau(beta_m^dag G beta_p) = sum_{b,c} G[b,c] (beta_p beta_m^dag)[c,b]
    pair = np.einsum("pcx,mbx->mpcb", beta, beta.conj())
    s = np.einsum("ijbc,mpcb->imjp", module.gram, pair) / d0
    n, nb = module.rank, module.base.dim
    return s.reshape(n * nb, n * nb)


@dataclass
class QuotientInfo:
    """Result of selecting a generating subset over the base algebra."""

    survivors: list[int]
    rewrite: np.ndarray  # (n_new, n_old, d0, d0): old generators over new ones
    residual: float
    threshold: float

    def rewrite_vector(self, x: np.ndarray) -> np.ndarray:
        return apply_blocks(self.rewrite, x)

    def rewrite_operator_blocks(self, blocks: np.ndarray, inject: np.ndarray) -> np.ndarray:
        return compose_blocks(self.rewrite, compose_blocks(blocks, inject))


def quotient_null_space(module: HilbertModule, rtol: float = RANK_RTOL) -> QuotientInfo:
    """Greedy minimal generating subset over the base algebra.

    Pivoted block Cholesky on the extended Gram: repeatedly claim the
    generator with the largest remaining quadratic form and eliminate its
    block.  Dropped generators are then expressed over the survivors with
    base-algebra coefficients.
    """
    base = module.base
    n, nb, d0 = module.rank, base.dim, base.ambient_dim
    s_ext = extended_gram(module)
    scale = float(np.linalg.norm(s_ext, 2)) if s_ext.size else 0.0
    threshold = scale * rtol
    work = s_ext.copy()
    survivors: list[int] = []
    remaining = list(range(n))
    while remaining:
        scores = [
            float(np.trace(work[i * nb : (i + 1) * nb, i * nb : (i + 1) * nb]).real)
            for i in remaining
        ]
        k = int(np.argmax(scores))
        if scores[k] <= threshold or scores[k] <= 0.0:
            break
        i = remaining.pop(k)
        survivors.append(i)
        sl = slice(i * nb, (i + 1) * nb)
        pivot = work[sl, sl]
        inv = np.linalg.pinv(pivot, rcond=1e-12, hermitian=True)
        work = work - work[:, sl] @ inv @ work[sl, :]

    survivors.sort()
    idx = [i * nb + m for i in survivors for m in range(nb)]
    rewrite = np.zeros((len(survivors), n, d0, d0), dtype=complex)
    dropped = [i for i in range(n) if i not in survivors]
    residual = 0.0
    for a, s in enumerate(survivors):
        rewrite[a, s] = base.unit
    if dropped:
        s_surv = s_ext[np.ix_(idx, idx)]
        # <e_s beta_p, e_i>_tau = tau(beta_p^dag G[s, i])
        sub = module.gram[np.ix_(survivors, dropped)]
        # tau(beta_p^dag G) = (1/d0) sum_{b,c} conj(beta_p[b,c]) G[b,c]
        rhs = np.einsum("sibc,pbc->spi", sub, base.basis.conj()).reshape(
            len(idx), len(dropped)
        ) / d0
        gamma, *_ = np.linalg.lstsq(s_surv, rhs, rcond=rtol)
        # residual of each dropped generator in the tau-norm
        self_norms = np.array(
            [np.trace(module.gram[i, i]).real / d0 for i in dropped]
        )
        cross = np.real(np.einsum("ki,ki->i", rhs.conj(), gamma))
        residual = float(np.sqrt(np.abs(self_norms - cross).max(initial=0.0)))
        coeffs = gamma.reshape(len(survivors), nb, len(dropped))
        blocks = np.einsum("apj,pcd->ajcd", coeffs, base.basis)
        for col, i in enumerate(dropped):
            rewrite[:, i] = blocks[:, col]
    return QuotientInfo(survivors, rewrite, residual, threshold)


def _injection(info: QuotientInfo, n_old: int, base: MatrixStarAlgebra) -> np.ndarray:
    d0 = base.ambient_dim
    inj = np.zeros((n_old, len(info.survivors), d0, d0), dtype=complex)
    for a, s in enumerate(info.survivors):
        inj[s, a] = base.unit
    return inj


def quotient_module(module: HilbertModule, rtol: float = RANK_RTOL) -> tuple[HilbertModule, QuotientInfo]:
    """The same module on a minimal generating subset.

    Surviving generators keep their rows and columns of the inner-product
    table unchanged; dropped generators are rewritten over the survivors.
    """
    info = quotient_null_space(module, rtol)
    gram = module.gram[np.ix_(info.survivors, info.survivors)]
    inj = _injection(info, module.rank, module.base)
    left = None
    if module.left is not None:
        blocks = np.stack(
            [info.rewrite_operator_blocks(b, inj) for b in module.left.blocks]
        )
        left = LeftAction(module.left.algebra, blocks)
    distinguished = {k: info.rewrite_vector(v) for k, v in module.distinguished.items()}
    return HilbertModule(module.base, gram, left, distinguished), info


# ---------------------------------------------------------------------------
# GNS construction


def gns_construct(pmap: PositiveMap, reduce: bool = True, verify: bool = True) -> HilbertModule:
    """Generators-and-relations representation of a completely positive map.

    For ``T : A -> B`` the module is spanned by symbols, one per basis
    element of ``A``, with inner products ``<a_i, a_j> = T(a_i^* a_j)``,
    a left action of ``A`` by multiplication of symbols, and the class of
    the unit of ``A`` as the distinguished cyclic vector ("unit").  Then
    ``<unit, a . unit> = T(a)`` by construction.

    The map is verified first (complete positivity through its kernel, and
    the declared kind's axioms); a failing map is rejected, since a
    non-positive kernel is exactly a non-positive Gram matrix.
    """
    if verify:
        from .algebra_core import verify_positive_map

        report = verify_positive_map(pmap)
        if not report.passed:
            raise StructuralError(
                "refusing to build a module over an unverified map: "
                + "; ".join(f"{c.name}={c.residual:.2e}" for c in report.failures)
            )
    dom, cod = pmap.domain, pmap.codomain
    n, d0 = dom.dim, cod.ambient_dim
    b = dom.basis
    products = np.einsum("iba,jbc->ijac", b.conj(), b).reshape(n * n, *b.shape[1:])
    gram = pmap.apply_many(products).reshape(n, n, d0, d0)

    # left action: a_k . [a_j] = [a_k a_j], expanded over the symbol basis
    prod_coords, res = dom.coords_many(
        np.einsum("kab,jbc->kjac", b, b).reshape(n * n, *b.shape[1:])
    )
    if res > 1e-9:
        raise StructuralError("domain basis is not multiplicatively closed")
    struct = prod_coords.reshape(n, n, n)  # struct[k, j, l]: a_k a_j = sum_l . a_l
    blocks = np.einsum("kjl,ab->kljab", struct, cod.unit)
    left = LeftAction(dom, blocks)

    unit_coords, res = dom.coords(dom.unit)
    if res > 1e-9:
        raise StructuralError("the domain unit is not in the domain span")
    xi = np.einsum("i,ab->iab", unit_coords, cod.unit)

    module = HilbertModule(cod, gram, left, {"unit": xi})
    if reduce:
        module, _ = quotient_module(module)
    return module


# ---------------------------------------------------------------------------
# interior tensor product over the base


@dataclass
class ModuleTensor:
    """Interior tensor product of two modules over the left factor's base.

    ``pairs[k] = (i, j)`` names the image of ``e_i o e_j`` among the raw
    generators; the published ``module`` is the reduced one when
    ``reduce=True`` was requested (the default), and ``info`` maps raw
    generators to it.
    """

    module: HilbertModule
    pairs: list[tuple[int, int]]
    info: QuotientInfo
    left_factor: HilbertModule
    right_factor: HilbertModule

    def tensor_vector(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Image of the elementary tensor x o y."""
        e2 = self.right_factor
        if e2.left is None:
            raise StructuralError("right factor has no left action of the base")
        n1 = self.left_factor.rank
        raw = np.zeros((len(self.pairs), *y.shape[1:]), dtype=complex)
        moved = np.stack([apply_blocks(e2.left.blocks_of(x[i]), y) for i in range(n1)])
        for k, (i, j) in enumerate(self.pairs):
            raw[k] = moved[i, j]
        return self.info.rewrite_vector(raw)

    def op_left(self, s: AdjointableOperator) -> AdjointableOperator:
        """S o id for an adjointable S on the left factor."""
        raw = self._op_left_raw(s.blocks)
        raw_adj = self._op_left_raw(s.adjoint_blocks)
        inj = _injection(self.info, len(self.pairs), self.module.base)
        return AdjointableOperator(
            self.module,
            self.info.rewrite_operator_blocks(raw, inj),
            self.info.rewrite_operator_blocks(raw_adj, inj),
        )

    def _op_left_raw(self, s_blocks: np.ndarray) -> np.ndarray:
        e2 = self.right_factor
        n_pairs = len(self.pairs)
        d0 = self.module.base.ambient_dim
        raw = np.zeros((n_pairs, n_pairs, d0, d0), dtype=complex)
        # (S o id)(e_i o e_j) = sum_I e_I s[I, i] o e_j = sum_I e_I o (s[I, i] . e_j)
        cache: dict[tuple[int, int], np.ndarray] = {}
        for a, (ii, jj) in enumerate(self.pairs):
            for bb, (i, j) in enumerate(self.pairs):
                key = (ii, i)
                if key not in cache:
                    cache[key] = e2.left.blocks_of(s_blocks[ii, i])
                raw[a, bb] = cache[key][jj, j]
        return raw

    def op_right(self, s: AdjointableOperator, tol: float = 1e-8) -> AdjointableOperator:
        """id o S; requires S to commute with the base action on the right factor."""
        e2 = self.right_factor
        for k in range(e2.left.algebra.dim):
            act = AdjointableOperator(
                e2, e2.left.blocks[k], e2.left.blocks_of(dag(e2.left.algebra.basis[k]))
            )
            gap = operator_distance(act @ s, s @ act)
            if gap > tol:
                raise StructuralError(
                    "operator does not commute with the base action on the right "
                    f"factor (defect {gap:.3e}); id-tensor-S is not well defined"
                )
        raw = self._op_right_raw(s.blocks)
        raw_adj = self._op_right_raw(s.adjoint_blocks)
        inj = _injection(self.info, len(self.pairs), self.module.base)
        return AdjointableOperator(
            self.module,
            self.info.rewrite_operator_blocks(raw, inj),
            self.info.rewrite_operator_blocks(raw_adj, inj),
        )

    def _op_right_raw(self, s_blocks: np.ndarray) -> np.ndarray:
        n_pairs = len(self.pairs)
        d0 = self.module.base.ambient_dim
        raw = np.zeros((n_pairs, n_pairs, d0, d0), dtype=complex)
        for a, (ii, jj) in enumerate(self.pairs):
            for bb, (i, j) in enumerate(self.pairs):
                if ii == i:
                    raw[a, bb] = s_blocks[jj, j]
        return raw


def tensor_over_base(
    e1: HilbertModule,
    e2: HilbertModule,
    reduce: bool = True,
    rtol: float = RANK_RTOL,
) -> ModuleTensor:
    """Interior tensor product E1 (x)_B E2.

    ``e2`` must carry a left action of the base algebra of ``e1``; relations
    x b o y = x o b y hold automatically because inner products are computed
    through that action:  < x1 o y1, x2 o y2 > = < y1, <x1, x2> . y2 >.
    The left action carried by the result is the one of ``e1``'s acting
    algebra through ``a . (x o y) = (a x) o y``.
    """
    if not e1.base.same_basis(e2.base):
        raise StructuralError("the factors are modules over different base algebras")
    if e2.left is None or not e2.left.algebra.same_basis(e1.base):
        raise StructuralError(
            "the right factor must carry a left action of the left factor's base algebra"
        )
    n1, n2 = e1.rank, e2.rank
    base = e2.base
    d0 = base.ambient_dim

    # raw gram over pairs: G[(i,j),(I,J)] = < e_j, G1[i,I] . e_J >
    coords, res = e1.base.coords_many(e1.gram.reshape(n1 * n1, *e1.gram.shape[2:]))
    if res > 1e-8:
        raise StructuralError("left factor inner products are not in its base algebra")
    acts = np.einsum("pm,mjkab->pjkab", coords, e2.left.blocks).reshape(
        n1, n1, n2, n2, d0, d0
    )
    gram = np.einsum("jkab,iIkJbc->ijIJac", e2.gram, acts).reshape(
        n1 * n2, n1 * n2, d0, d0
    )

    pairs = [(i, j) for i in range(n1) for j in range(n2)]
    raw = HilbertModule(base, gram)
    if reduce:
        reduced, info = quotient_module(raw, rtol)
    else:
        reduced, info = raw, QuotientInfo(
            list(range(n1 * n2)),
            np.stack([raw.generator(i) for i in range(n1 * n2)]),
            0.0,
            0.0,
        )
    tensor = ModuleTensor(reduced, pairs, info, e1, e2)

    # push the left action and distinguished vectors through
    if e1.left is not None:
        blocks = np.stack(
            [
                tensor.op_left(
                    AdjointableOperator(
                        e1,
                        e1.left.blocks[k],
                        e1.left.blocks_of(dag(e1.left.algebra.basis[k])),
                    )
                ).blocks
                for k in range(e1.left.algebra.dim)
            ]
        )
        reduced.left = LeftAction(e1.left.algebra, blocks)
    for name1, v1 in e1.distinguished.items():
        for name2, v2 in e2.distinguished.items():
            key = name1 if name1 == name2 else f"{name1}|{name2}"
            reduced.distinguished[key] = tensor.tensor_vector(v1, v2)
    return tensor


# ---------------------------------------------------------------------------
# auxiliary constructions


def restrict_left_action(left: LeftAction, subalgebra: MatrixStarAlgebra) -> LeftAction:
    """The same action viewed from a subalgebra of the acting algebra."""
    blocks = np.stack([left.blocks_of(b) for b in subalgebra.basis])
    return LeftAction(subalgebra, blocks)


def trivial_left_action(rank: int, base: MatrixStarAlgebra) -> LeftAction:
    """Scalars acting by multiplication; always available."""
    d0 = base.ambient_dim
    blocks = np.zeros((1, rank, rank, d0, d0), dtype=complex)
    for i in range(rank):
        blocks[0, i, i] = base.unit
    return LeftAction(scalar_algebra(), blocks)


# ---------------------------------------------------------------------------
# verification


def verify_module(module: HilbertModule, tol: float = DEFAULT_TOL) -> VerificationReport:
    report = VerificationReport()
    g = module.gram
    base = module.base
    n = module.rank

    report.add("gram-hermitian", frob(g - dagger_blocks(g)), tol)

    flat = g.reshape(n * n, *g.shape[2:])
    _, res = base.coords_many(flat)
    report.add("gram-in-base", res, tol)

    floor = min(EIG_FLOOR, -tol)
    report.add("gram-positive", max(0.0, -min_eig(block_matrix(g))), -floor)

    for name, v in module.distinguished.items():
        _, res = base.coords_many(v)
        report.add(f"vector-in-base[{name}]", res, tol)
    if "unit" in module.distinguished:
        xi = module.distinguished["unit"]
        report.add(
            "unit-vector-normalized",
            frob(module.inner(xi, xi) - base.unit),
            tol,
        )

    if module.left is not None:
        alg = module.left.algebra
        unit_op = module.left.blocks_of(alg.unit)
        report.add(
            "left-unit-acts-as-identity",
            frob(compose_blocks(g, unit_op) - g),
            tol,
        )
        worst_mult = 0.0
        worst_star = 0.0
        for k in range(alg.dim):
            bk = module.left.blocks[k]
            star = module.left.blocks_of(dag(alg.basis[k]))
            # <e_i, a* e_j> must equal <a e_i, e_j>
            lhs = compose_blocks(g, star)
            rhs = dagger_blocks(compose_blocks(g, bk))
            worst_star = max(worst_star, frob(lhs - rhs))
            for l in range(alg.dim):
                prod = module.left.blocks_of(alg.basis[k] @ alg.basis[l])
                com = compose_blocks(bk, module.left.blocks[l])
                worst_mult = max(worst_mult, frob(compose_blocks(g, prod - com)))
        report.add("left-action-multiplicative", worst_mult, tol)
        report.add("left-action-star", worst_star, tol)
    return report


def verify_adjointable(op: AdjointableOperator, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check <x, S y> = <S* x, y> on all generator pairs."""
    report = VerificationReport()
    g = op.module.gram
    lhs = compose_blocks(g, op.blocks)
    rhs = dagger_blocks(compose_blocks(g, op.adjoint_blocks))
    report.add("adjoint-identity", frob(lhs - rhs), tol)
    return report
