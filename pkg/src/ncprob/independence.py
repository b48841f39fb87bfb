"""Constructive models of noncommutative independence.

Four constructions are provided, each as an explicit operator model on a
(module) tensor product together with a standalone moment formula, so that
``<vacuum, word vacuum> = formula(word)`` is a falsifiable statement:

* tensor independence of two states (both embeddings unital),
* monotone independence of two states (first leg embedded non-unitally as
  ``a (x) |1><1|`` — the first leg is the *later* measurement),
* conditional tensor independence of two commutative algebras over a common
  subalgebra (the noncommutative case is rejected, with the obstruction
  stated in the error),
* conditional monotone independence over an arbitrary matrix base algebra,
  where the roles swap: the first leg acts unitally as ``a . id`` and the
  second leg non-unitally through the projected form
  ``(unit unit*) a2 : x1 o x2  ->  1 o a2 <1, x1> x2``.

A unit letter fed to a non-unitally embedded leg acts as a projection, not
as the identity.  This is the single most error-prone consequence of
non-unital embeddings and is deliberately observable: a word may gain or
lose value when an explicit unit letter is inserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core import (
    MapKind,
    MatrixStarAlgebra,
    PositiveMap,
    StructuralError,
    VerificationReport,
    diagonal_algebra,
    map_from_images,
    independent_columns,
    verify_positive_map,
)
from .hilbert_module import (
    AdjointableOperator,
    HilbertModule,
    apply_blocks,
    compose_blocks,
    extended_gram,
    gns_construct,
    identity_operator,
    left_action_operator,
    operator_distance,
    rank_one,
    restrict_left_action,
    tensor_over_base,
    trivial_left_action,
)
from .linalg import DEFAULT_TOL, dag, frob, random_hermitian

__all__ = [
    "QuantumProbabilitySpace",
    "AlternatingWord",
    "JointRealization",
    "tensor_realize",
    "monotone_realize",
    "tensor_moment_formula",
    "monotone_moment_formula",
    "conditional_monotone_embed",
    "conditional_monotone_moment_formula",
    "conditional_tensor_realize",
    "ConditionalTensorProduct",
    "coins_game",
    "classical_coins_oracle",
    "random_alternating_word",
    "verify_independence",
    "IndependenceReport",
]


@dataclass
class QuantumProbabilitySpace:
    """An algebra together with a state or conditional expectation on it."""

    algebra: MatrixStarAlgebra
    functional: PositiveMap

    def __post_init__(self):
        if not self.functional.domain.same_basis(self.algebra):
            raise StructuralError("functional is not defined on the given algebra")

    def verify(self, tol: float = DEFAULT_TOL) -> VerificationReport:
        return verify_positive_map(self.functional, tol)

    @property
    def is_state(self) -> bool:
        return self.functional.kind is MapKind.STATE


class AlternatingWord:
    """A word in two algebras: a list of (leg, matrix) letters, legs 1 and 2.

    Leg 1 is the *later* leg throughout ("the future is on the left of the
    past").  Normalization multiplies out consecutive same-leg letters and
    nothing else; in particular an explicit unit letter between two letters
    of the other leg is kept, because on a non-unitally embedded leg it acts
    as a projection.
    """

    def __init__(self, letters):
        self.letters = [(int(leg), np.asarray(mat, dtype=complex)) for leg, mat in letters]
        for leg, _ in self.letters:
            if leg not in (1, 2):
                raise StructuralError(f"letter leg must be 1 or 2, got {leg}")

    def __len__(self) -> int:
        return len(self.letters)

    def normalized(self) -> "AlternatingWord":
        out: list[tuple[int, np.ndarray]] = []
        for leg, mat in self.letters:
            if out and out[-1][0] == leg:
                out[-1] = (leg, out[-1][1] @ mat)
            else:
                out.append((leg, mat))
        return AlternatingWord(out)

    def swap_legs(self) -> "AlternatingWord":
        return AlternatingWord([(3 - leg, mat) for leg, mat in self.letters])

    def check_membership(self, algebra1: MatrixStarAlgebra, algebra2: MatrixStarAlgebra,
                         tol: float = 1e-8) -> None:
        for k, (leg, mat) in enumerate(self.letters):
            alg = algebra1 if leg == 1 else algebra2
            _, res = alg.coords(mat)
            if res > tol:
                raise StructuralError(
                    f"letter {k} is not in the algebra of leg {leg} (residual {res:.3e})"
                )


@dataclass
class JointRealization:
    """Two algebras acting on one carrier with a common vacuum vector.

    ``unital_legs`` records which embedding is unital; the non-unital one
    sends the algebra unit to a proper projection.
    """

    carrier: HilbertModule
    vacuum: np.ndarray
    embed1: "callable"
    embed2: "callable"
    algebra1: MatrixStarAlgebra
    algebra2: MatrixStarAlgebra
    unital_legs: tuple[bool, bool]
    base: MatrixStarAlgebra | None = None

    def embed(self, leg: int, mat: np.ndarray) -> AdjointableOperator:
        return self.embed1(mat) if leg == 1 else self.embed2(mat)

    def moment(self, word: AlternatingWord) -> np.ndarray:
        """Vacuum expectation of the word, as a base-algebra element."""
        v = self.vacuum
        for leg, mat in reversed(word.letters):
            v = self.embed(leg, mat)(v)
        return self.carrier.inner(self.vacuum, v)

    def scalar_moment(self, word: AlternatingWord) -> complex:
        m = self.moment(word)
        if m.shape != (1, 1):
            raise StructuralError("scalar moment requested from a base-valued realization")
        return complex(m[0, 0])

    def verify(self, tol: float = DEFAULT_TOL) -> VerificationReport:
        """Check both embeddings are *-homomorphisms with the declared unitality."""
        report = VerificationReport()
        for leg, alg, unital in (
            (1, self.algebra1, self.unital_legs[0]),
            (2, self.algebra2, self.unital_legs[1]),
        ):
            worst_mult = 0.0
            worst_star = 0.0
            ops = [self.embed(leg, b) for b in alg.basis]
            for i, b in enumerate(alg.basis):
                worst_star = max(
                    worst_star, operator_distance(self.embed(leg, dag(b)), ops[i].H)
                )
                for j, c in enumerate(alg.basis):
                    worst_mult = max(
                        worst_mult,
                        operator_distance(self.embed(leg, b @ c), ops[i] @ ops[j]),
                    )
            report.add(f"leg{leg}-multiplicative", worst_mult, tol)
            report.add(f"leg{leg}-star", worst_star, tol)
            unit_gap = operator_distance(
                self.embed(leg, alg.unit), identity_operator(self.carrier)
            )
            if unital:
                report.add(f"leg{leg}-unital", unit_gap, tol)
            else:
                # the unit must land on a proper projection, strictly below one
                u = self.embed(leg, alg.unit)
                report.add(f"leg{leg}-unit-is-idempotent", operator_distance(u @ u, u), tol)
                report.checks[-1].detail = f"distance to identity {unit_gap:.3e}"
        gap = frob(self.carrier.inner(self.vacuum, self.vacuum) - _vacuum_target(self))
        report.add("vacuum-normalized", gap, tol)
        return report


def _vacuum_target(real: JointRealization) -> np.ndarray:
    base = real.carrier.base
    return base.unit


# ---------------------------------------------------------------------------
# scalar constructions: tensor and monotone


def _scalar_gns(space: QuantumProbabilitySpace) -> HilbertModule:
    if not space.is_state:
        raise StructuralError(
            "this construction needs states; use the conditional variants "
            "for conditional expectations"
        )
    return gns_construct(space.functional)


def _with_base_action(e: HilbertModule, base) -> HilbertModule:
    """The same module carrying only the base's bimodule action.

    The tensor product over the base needs exactly that action on its right
    factor; the full algebra action stays available on the original module
    for building embedded operators.
    """
    if base.ambient_dim == 1:
        action = trivial_left_action(e.rank, e.base)
    else:
        action = restrict_left_action(e.left, base)
    return HilbertModule(e.base, e.gram, action, e.distinguished)


def _as_scalar_tensor(s1: QuantumProbabilitySpace, s2: QuantumProbabilitySpace):
    e1 = _scalar_gns(s1)
    e2 = _scalar_gns(s2)
    tensor = tensor_over_base(e1, _with_base_action(e2, e1.base))
    vac = tensor.module.distinguished["unit"]
    return e1, e2, tensor, vac


def tensor_realize(
    s1: QuantumProbabilitySpace, s2: QuantumProbabilitySpace
) -> JointRealization:
    """Both algebras act on GNS(phi1) (x) GNS(phi2), each on its own slot."""
    e1, e2, tensor, vac = _as_scalar_tensor(s1, s2)

    def embed1(a):
        return tensor.op_left(left_action_operator(e1, a))

    def embed2(a):
        return tensor.op_right(left_action_operator(e2, a))

    return JointRealization(
        tensor.module, vac, embed1, embed2, s1.algebra, s2.algebra, (True, True)
    )


def monotone_realize(
    s1: QuantumProbabilitySpace, s2: QuantumProbabilitySpace
) -> JointRealization:
    """Monotone model: leg 1 acts as a (x) |1><1|, leg 2 as id (x) a.

    Leg 1 is non-unital: its unit letter becomes the rank-one projection
    onto the second factor's vacuum, which is what makes later measurements
    insensitive to earlier fine structure.
    """
    e1, e2, tensor, vac = _as_scalar_tensor(s1, s2)
    xi2 = e2.distinguished["unit"]
    vacuum_projection = tensor.op_right(rank_one(e2, xi2, xi2))

    def embed1(a):
        return tensor.op_left(left_action_operator(e1, a)) @ vacuum_projection

    def embed2(a):
        return tensor.op_right(left_action_operator(e2, a))

    return JointRealization(
        tensor.module, vac, embed1, embed2, s1.algebra, s2.algebra, (False, True)
    )


def tensor_moment_formula(
    word: AlternatingWord,
    phi1: PositiveMap,
    phi2: PositiveMap,
) -> complex:
    """phi1(ordered product of leg-1 letters) * phi2(same for leg 2)."""
    prod = {1: None, 2: None}
    for leg, mat in word.letters:
        prod[leg] = mat if prod[leg] is None else prod[leg] @ mat
    val = 1.0 + 0.0j
    for leg, phi in ((1, phi1), (2, phi2)):
        if prod[leg] is not None:
            val *= complex(phi.apply(prod[leg])[0, 0])
    return val


def monotone_moment_formula(
    word: AlternatingWord,
    phi1: PositiveMap,
    phi2: PositiveMap,
) -> complex:
    """Each leg-2 letter contributes its own expectation; leg-1 letters fuse.

    For the normalized word g0 f1 g1 ... fn gn the value is
    prod_i phi2(g_i) * phi1(f1 f2 ... fn).  Missing g-slots amount to unit
    letters on the unital leg and change nothing; an *explicit* unit among
    the f's still splits its neighbours' leg-2 letters into separate factors,
    which is the projection effect of the non-unital embedding.
    """
    w = word.normalized()
    val = 1.0 + 0.0j
    fused1 = None
    for leg, mat in w.letters:
        if leg == 2:
            val *= complex(phi2.apply(mat)[0, 0])
        else:
            fused1 = mat if fused1 is None else fused1 @ mat
    if fused1 is not None:
        val *= complex(phi1.apply(fused1)[0, 0])
    return val


# ---------------------------------------------------------------------------
# conditional monotone independence over a base algebra


def conditional_monotone_embed(
    e1: HilbertModule,
    e2: HilbertModule,
    algebra1: MatrixStarAlgebra,
    algebra2: MatrixStarAlgebra,
    tol: float = 1e-9,
) -> JointRealization:
    """Joint model of two algebras on E1 (x)_B E2.

    ``e1`` must carry a unit vector with <1,1> = unit and a left action of
    ``algebra1``; ``e2`` a unit vector and a left action of ``algebra2``
    whose restriction to the base gives the bimodule structure.  Leg 1 acts
    unitally as a . id.  Leg 2 acts through the projected form

        x1 o x2  |->  1 o a2 <1, x1> x2,

    i.e. project the first slot onto its unit vector, move the inner product
    across the tensor sign as a left base-action on the second slot, then
    apply a2.  This is an operator even when a2 fails to commute with the
    base action, which is exactly why the construction works where a naive
    id-tensor-a2 does not.
    """
    base = e1.base
    if e1.left is None or e2.left is None:
        raise StructuralError("both factors need left actions")
    if not e2.base.same_basis(base):
        raise StructuralError("the factors must be modules over the same base algebra")
    for e, name in ((e1, "first"), (e2, "second")):
        if "unit" not in e.distinguished:
            raise StructuralError(f"the {name} factor has no distinguished unit vector")
    xi1 = e1.distinguished["unit"]
    if frob(e1.inner(xi1, xi1) - base.unit) > tol:
        raise StructuralError("the first factor's unit vector is not normalized")

    e2b = _with_base_action(e2, base)
    tensor = tensor_over_base(e1, e2b)
    carrier = tensor.module
    vac = carrier.distinguished["unit"]
    n1 = e1.rank
    d0 = base.ambient_dim

    # <xi1, e_i> for every generator of the first factor
    overlaps = np.stack([e1.inner(xi1, e1.generator(i)) for i in range(n1)])

    def embed1(a):
        return tensor.op_left(left_action_operator(e1, a))

    def embed2(a):
        a = np.asarray(a, dtype=complex)
        act = e2.left.blocks_of(a)
        act_star = e2.left.blocks_of(dag(a))
        blocks = np.zeros((carrier.rank, carrier.rank, d0, d0), dtype=complex)
        adj_blocks = np.zeros_like(blocks)
        # columns only over the surviving pairs; the adjoint replaces a2 by
        # a2* and keeps the projection, since <T(x), y> = <x, T*(y)> moves
        # the overlap coefficient to the other side symmetrically
        for col, s in enumerate(tensor.info.survivors):
            i, j = tensor.pairs[s]
            move = e2b.left.blocks_of(overlaps[i])
            blocks[:, col] = tensor.tensor_vector(
                xi1, apply_blocks(compose_blocks(act, move), e2.generator(j))
            )
            adj_blocks[:, col] = tensor.tensor_vector(
                xi1, apply_blocks(compose_blocks(act_star, move), e2.generator(j))
            )
        return AdjointableOperator(carrier, blocks, adj_blocks)

    return JointRealization(
        carrier, vac, embed1, embed2, algebra1, algebra2, (True, False), base
    )


def conditional_monotone_moment_formula(
    word: AlternatingWord,
    expect1: PositiveMap,
    expect2: PositiveMap,
    tol: float = 1e-8,
) -> np.ndarray:
    """Base-valued moment of an alternating word under the two expectations.

    After padding both ends with leg-1 units (harmless, leg 1 is the unital
    leg here) the word has the shape a1(0) a2(1) a1(1) ... a2(n) a1(n) and
    the value is

        E1(a1(0)) . E2( a2(1) E1(a1(1)) a2(2) ... a2(n) ) . E1(a1(n)),

    with the interior expectations multiplied *inside* the leg-2 chain.  The
    result is checked to lie in the shared codomain algebra.
    """
    cod = expect1.codomain
    if not expect2.codomain.same_basis(cod):
        raise StructuralError("the two expectations must share their codomain")
    letters = word.normalized().letters
    if not letters:
        return cod.unit.copy()
    unit1 = expect1.domain.unit
    if letters[0][0] == 2:
        letters = [(1, unit1)] + letters
    if letters[-1][0] == 2:
        letters = letters + [(1, unit1)]
    a1s = [mat for leg, mat in letters[0::2]]
    a2s = [mat for leg, mat in letters[1::2]]
    if any(leg != 1 for leg, _ in letters[0::2]) or any(
        leg != 2 for leg, _ in letters[1::2]
    ):
        raise StructuralError("normalization failed to produce an alternating word")

    def insert(value: np.ndarray) -> np.ndarray:
        # interior expectations multiply inside the second algebra; over a
        # scalar base that means "scalar times the unit", over a matrix base
        # the value is already an element of it
        amb = expect2.domain.ambient_dim
        if value.shape == (amb, amb):
            return value
        if value.shape == (1, 1):
            return complex(value[0, 0]) * expect2.domain.unit
        raise StructuralError(
            "base values cannot be multiplied into the second algebra: "
            f"ambient dimensions {value.shape[0]} vs {amb}"
        )

    first = expect1.apply(a1s[0])
    if not a2s:
        value = first
    else:
        chain = a2s[0]
        for inner_a1, next_a2 in zip(a1s[1:-1], a2s[1:]):
            chain = chain @ insert(expect1.apply(inner_a1)) @ next_a2
        value = first @ expect2.apply(chain) @ expect1.apply(a1s[-1])
    _, res = cod.coords(value)
    if res > tol:
        raise StructuralError(
            f"moment left the base algebra (residual {res:.3e}); "
            "check that the expectations share their range"
        )
    return value


# ---------------------------------------------------------------------------
# conditional tensor independence (commutative case)


@dataclass
class ConditionalTensorProduct:
    """Amalgamated product of two commutative algebras over a common base.

    ``algebra`` is a faithful matrix model of the product; ``expectation``
    maps it onto the embedded copy of the base and is verified as a
    conditional expectation.  ``realization`` exposes the same structure in
    module form, including the base-valued vacuum functional.
    """

    algebra: MatrixStarAlgebra
    expectation: PositiveMap
    realization: JointRealization
    represent1: "callable"
    represent2: "callable"
    represent_base: "callable"


def conditional_tensor_realize(
    s1: QuantumProbabilitySpace,
    s2: QuantumProbabilitySpace,
    tol: float = 1e-9,
) -> ConditionalTensorProduct:
    """Tensor independence of two commutative algebras over a shared base.

    Rejects noncommutative inputs: for noncommutative algebras the relation
    a1 a0 (x) a2 = a1 (x) a0 a2 is incompatible with a multiplication on the
    amalgamated tensor product except in degenerate cases, because the two
    module orders E1 (x) E2 and E2 (x) E1 are genuinely non-isomorphic.
    """
    for s, name in ((s1, "first"), (s2, "second")):
        if s.functional.kind is not MapKind.CONDITIONAL_EXPECTATION:
            raise StructuralError(
                f"the {name} space must carry a conditional expectation"
            )
        if not s.algebra.is_commutative():
            raise StructuralError(
                f"the {name} algebra is noncommutative: the amalgamated product "
                "a1 a0 (x) a2 = a1 (x) a0 a2 admits a compatible multiplication "
                "only in exceptional cases, none of which are modeled here"
            )
    base = s1.functional.codomain
    if not s2.functional.codomain.same_basis(base):
        raise StructuralError("the two expectations must share the same base algebra")

    e1 = gns_construct(s1.functional)
    e2 = gns_construct(s2.functional)
    tensor = tensor_over_base(e1, _with_base_action(e2, base))
    carrier = tensor.module
    vac = carrier.distinguished["unit"]

    def embed1(a):
        return tensor.op_left(left_action_operator(e1, a))

    def embed2(a):
        return tensor.op_right(left_action_operator(e2, a))

    real = JointRealization(
        carrier, vac, embed1, embed2, s1.algebra, s2.algebra, (True, True), base
    )

    # faithful matrix model on the range of the scalarized Gram
    s_ext = extended_gram(carrier)
    lam, u = np.linalg.eigh(s_ext)
    keep = lam > float(lam[-1]) * 1e-12
    lam, u = lam[keep], u[:, keep]
    root = np.sqrt(lam)

    nb = base.dim
    n = carrier.rank

    def flatten(op: AdjointableOperator) -> np.ndarray:
        # blocks act on the extended family e_j beta_p; express the results
        # over the same family and compress onto the range of the Gram
        coeffs, res = base.coords_many(
            np.einsum("ijab,pbc->ijpac", op.blocks, base.basis).reshape(-1, *base.unit.shape)
        )
        if res > 1e-8:
            raise StructuralError("operator blocks left the base algebra span")
        k = coeffs.reshape(n, n, nb, nb).transpose(0, 3, 1, 2).reshape(n * nb, n * nb)
        return (u.conj().T * root[:, None]) @ k @ (u / root[None, :])

    pair_ops: list[AdjointableOperator] = []
    pair_mats: list[np.ndarray] = []
    for b in s1.algebra.basis:
        for c in s2.algebra.basis:
            op = embed1(b) @ embed2(c)
            pair_ops.append(op)
            pair_mats.append(flatten(op))
    stack = np.stack(pair_mats)
    keep_idx = independent_columns(stack.reshape(len(stack), -1).T)
    amalg = MatrixStarAlgebra(stack[keep_idx])

    base_images = np.stack([flatten(embed1(b)) for b in base.basis])
    base_keep = independent_columns(base_images.reshape(len(base_images), -1).T)
    base_alg = MatrixStarAlgebra(base_images[base_keep])

    def vacuum_value(op: AdjointableOperator) -> np.ndarray:
        return carrier.inner(vac, op(vac))

    images = []
    for k in keep_idx:
        val = vacuum_value(pair_ops[k])
        c, res = base.coords(val)
        if res > 1e-8:
            raise StructuralError("vacuum functional left the base algebra")
        images.append(np.einsum("m,mab->ab", c, base_images))
    expectation = map_from_images(
        amalg, base_alg, np.stack(images), MapKind.CONDITIONAL_EXPECTATION
    )
    report = verify_positive_map(expectation, tol)
    if not report.passed:
        raise StructuralError(
            "amalgamated expectation failed verification: "
            + "; ".join(f"{c.name}={c.residual:.2e}" for c in report.failures)
        )

    def represent1(a):
        return flatten(embed1(a))

    def represent2(a):
        return flatten(embed2(a))

    def represent_base(b):
        c, res = base.coords(b)
        if res > 1e-8:
            raise StructuralError("element is not in the base algebra")
        return np.einsum("m,mab->ab", c, base_images)

    return ConditionalTensorProduct(
        amalg, expectation, real, represent1, represent2, represent_base
    )


# ---------------------------------------------------------------------------
# the coins game


def coins_game(bias1: float = 0.7, bias2: float = 0.3):
    """Two coins conditioned oppositely on one fair coin.

    Y is fair.  Given Y = heads, X1 shows heads with probability ``bias1``
    and X2 with ``bias2``; given Y = tails the biases swap.  Both observable
    algebras are functions of (X_i, Y) on a 4-point space ordered
    (h,h), (h,t), (t,h), (t,t) with the second slot Y; the common base is
    the functions of Y.  Returns the two spaces and the base algebra.
    """
    if not (0.0 <= bias1 <= 1.0 and 0.0 <= bias2 <= 1.0):
        raise StructuralError("biases must be probabilities")
    alg = diagonal_algebra(4)
    # base: functions of Y inside the 4-point algebra
    chi_h = np.diag([1.0, 0.0, 1.0, 0.0]).astype(complex)
    chi_t = np.diag([0.0, 1.0, 0.0, 1.0]).astype(complex)
    base = MatrixStarAlgebra(np.stack([chi_h, chi_t]))

    def conditional(bias_h: float):
        # E[f | Y] for the law P(X=h | Y=h) = bias_h, P(X=h | Y=t) = 1-bias_h
        images = []
        for f in alg.basis:
            d = np.real(np.diagonal(f))
            given_h = bias_h * d[0] + (1 - bias_h) * d[2]
            given_t = (1 - bias_h) * d[1] + bias_h * d[3]
            images.append(given_h * chi_h + given_t * chi_t)
        return map_from_images(
            alg, base, np.stack(images), MapKind.CONDITIONAL_EXPECTATION
        )

    s1 = QuantumProbabilitySpace(alg, conditional(bias1))
    s2 = QuantumProbabilitySpace(alg, conditional(bias2))
    return s1, s2, base


def classical_coins_oracle(
    f: np.ndarray, g: np.ndarray, bias1: float = 0.7, bias2: float = 0.3
) -> np.ndarray:
    """E[f(X1, Y) g(X2, Y) | Y] by exhaustive enumeration of the 8 outcomes."""
    fd = np.real(np.diagonal(f))
    gd = np.real(np.diagonal(g))
    vals = {}
    for y, (p1h, p2h) in (("h", (bias1, bias2)), ("t", (1 - bias1, 1 - bias2))):
        total = 0.0
        for x1, p1 in (("h", p1h), ("t", 1 - p1h)):
            for x2, p2 in (("h", p2h), ("t", 1 - p2h)):
                f_idx = (0 if x1 == "h" else 2) + (0 if y == "h" else 1)
                g_idx = (0 if x2 == "h" else 2) + (0 if y == "h" else 1)
                total += p1 * p2 * fd[f_idx] * gd[g_idx]
        vals[y] = total
    chi_h = np.diag([1.0, 0.0, 1.0, 0.0])
    chi_t = np.diag([0.0, 1.0, 0.0, 1.0])
    return vals["h"] * chi_h + vals["t"] * chi_t


# ---------------------------------------------------------------------------
# the harness


@dataclass
class WordResult:
    word_length: int
    legs: list[int]
    residual: float


@dataclass
class IndependenceReport:
    results: list[WordResult] = field(default_factory=list)
    tolerance: float = DEFAULT_TOL

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def word_count(self) -> int:
        return len(self.results)


def random_alternating_word(
    algebra1: MatrixStarAlgebra,
    algebra2: MatrixStarAlgebra,
    rng: np.random.Generator,
    max_length: int = 6,
    hermitian: bool = True,
) -> AlternatingWord:
    """Random word with letters drawn from the two algebras.

    Letters are Hermitian with spectrum inside [-2, 2] (projected into the
    algebra span), which keeps long products well-scaled.
    """
    length = int(rng.integers(1, max_length + 1))
    legs = [int(rng.integers(1, 3))]
    while len(legs) < length:
        # bias toward alternation but allow same-leg repeats to exercise
        # normalization
        nxt = 3 - legs[-1] if rng.random() < 0.8 else legs[-1]
        legs.append(nxt)
    letters = []
    for leg in legs:
        alg = algebra1 if leg == 1 else algebra2
        raw = random_hermitian(alg.ambient_dim, rng)
        c, _ = alg.coords(raw)
        mat = alg.combine(c)
        if hermitian:
            mat = (mat + dag(mat)) / 2
        letters.append((leg, mat))
    return AlternatingWord(letters)


def verify_independence(
    realization: JointRealization,
    oracle,
    words: list[AlternatingWord],
    tol: float = DEFAULT_TOL,
) -> IndependenceReport:
    """Compare vacuum expectations against the formula oracle on each word."""
    report = IndependenceReport(tolerance=tol)
    for word in words:
        got = realization.moment(word)
        want = np.asarray(oracle(word))
        if want.shape == ():
            want = want.reshape(1, 1)
        report.results.append(
            WordResult(len(word), [leg for leg, _ in word.letters], frob(got - want))
        )
    return report
