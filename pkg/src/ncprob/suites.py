"""Named verification suites behind `ncprob verify`.

Each suite is a pure function from a RunConfig to a list of check rows
{"name", "residual", "tolerance", "passed", "detail"}; all randomness
comes from the config seed, so identical configs give identical rows.
Most rows compare against the config tolerance; rows that freeze a
sharper bound (exact-arithmetic identities, GNS representation, shift
isometry) carry their own tolerance and say so in the detail field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core import (
    MapKind,
    StructuralError,
    cp_from_stochastic,
    diagonal_algebra,
    diagonal_compression,
    full_matrix_algebra,
    identity_map,
    iterate_map,
    normalized_trace_state,
    pauli_algebra,
    state_from_density,
    verify_algebra,
    verify_positive_map,
)
from .dilation import (
    BudgetExceededError,
    central_unit_fiber,
    dilate_discrete,
    markov_scenario,
    random_unital_cp,
    scalar_fiber,
    verify_dilation,
    verify_product_system,
    white_noise_increment_check,
    white_noise_scenario,
)
from .hilbert_module import (
    apply_blocks,
    gns_construct,
    operator_distance,
    tensor_over_base,
    verify_module,
)
from .independence import (
    AlternatingWord,
    QuantumProbabilitySpace,
    classical_coins_oracle,
    coins_game,
    conditional_monotone_embed,
    conditional_monotone_moment_formula,
    conditional_tensor_realize,
    monotone_moment_formula,
    monotone_realize,
    random_alternating_word,
    tensor_moment_formula,
    tensor_realize,
)
from .linalg import frob, random_density

__all__ = ["RunConfig", "SUITE_NAMES", "run_suite", "SCHEMA_TAG"]

SCHEMA_TAG = "ncprob/1"

SUITE_NAMES = (
    "algebra",
    "module",
    "monotone",
    "conditional-monotone",
    "conditional-tensor",
    "dilation",
    "white-noise",
    "markov",
)


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    seed: int = 42
    max_word_length: int = 6
    trials: int = 200
    horizon: int = 3
    budget: int = 4096
    output_format: str = "json"

    def validate(self) -> None:
        if not (self.tolerance > 0.0):
            raise StructuralError("tolerance must be positive")
        for name in ("max_word_length", "trials", "horizon", "budget"):
            if getattr(self, name) < 1:
                raise StructuralError(f"{name} must be at least 1")
        if self.output_format not in ("json", "csv", "text"):
            raise StructuralError("format must be one of json, csv, text")

    def as_report_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "seed": self.seed,
            "max_word_length": self.max_word_length,
            "trials": self.trials,
            "horizon": self.horizon,
            "budget": self.budget,
        }


def _row(name: str, residual: float, tolerance: float, detail: str = "") -> dict:
    residual = float(residual)
    return {
        "name": name,
        "residual": residual,
        "tolerance": float(tolerance),
        "passed": bool(residual <= tolerance),
        "detail": detail,
    }


def _report_rows(prefix: str, report, tolerance: float) -> list[dict]:
    return [
        _row(f"{prefix}:{check.name}", check.residual, tolerance, check.detail)
        for check in report.checks
    ]


def _word_label(word: AlternatingWord) -> str:
    return "legs " + "".join(str(leg) for leg, _ in word.letters)


# ---------------------------------------------------------------------------


def suite_algebra(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    rows: list[dict] = []
    rng = np.random.default_rng(config.seed)
    for label, algebra in (
        ("m2", full_matrix_algebra(2)),
        ("diag3", diagonal_algebra(3)),
        ("pauli", pauli_algebra()),
    ):
        rows.extend(_report_rows(label, verify_algebra(algebra), tol))
    m2 = full_matrix_algebra(2)
    maps = [
        ("trace-state", normalized_trace_state(m2)),
        ("diag-compression", diagonal_compression(2, m2)),
        ("stochastic", cp_from_stochastic(np.array([[0.5, 0.5], [0.3, 0.7]]))),
        ("random-state", state_from_density(m2, random_density(2, rng))),
        ("random-cp", random_unital_cp(2, rng)),
    ]
    for label, pmap in maps:
        rows.extend(_report_rows(label, verify_positive_map(pmap), tol))
    return rows


def suite_module(config: RunConfig) -> list[dict]:
    rows: list[dict] = []
    rng = np.random.default_rng(config.seed)
    m2 = full_matrix_algebra(2)

    # GNS represents the map on the unit vector (fixed sharper bound)
    gns_tol = 1e-10
    maps = [identity_map(m2), normalized_trace_state(m2), diagonal_compression(2, m2)]
    maps.append(cp_from_stochastic(np.array([[0.5, 0.5], [0.3, 0.7]])))
    maps.append(
        cp_from_stochastic(np.array([[0.2, 0.3, 0.5], [0.1, 0.6, 0.3], [0.4, 0.4, 0.2]]))
    )
    while len(maps) < 10:
        if len(maps) % 2:
            maps.append(random_unital_cp(2, rng))
        else:
            maps.append(state_from_density(m2, random_density(2, rng)))
    worst = 0.0
    worst_label = ""
    for k, pmap in enumerate(maps):
        module = gns_construct(pmap)
        xi = module.distinguished["unit"]
        for b in pmap.domain.basis:
            acted = apply_blocks(module.left.blocks_of(b), xi)
            gap = frob(module.inner(xi, acted) - pmap.apply(b))
            if gap > worst:
                worst, worst_label = gap, f"map #{k} ({pmap.kind.value})"
    rows.append(_row("gns-representation", worst, gns_tol, f"worst: {worst_label}; fixed tolerance 1e-10"))

    # tensor associativity on raw (unreduced) grams (fixed sharper bound)
    assoc_tol = 1e-10
    worst = 0.0
    for k in range(10):
        mods = [gns_construct(random_unital_cp(2, rng), reduce=True) for _ in range(3)]
        e1, e2, e3 = mods
        left_first = tensor_over_base(e1, e2, reduce=False)
        right_first = tensor_over_base(e2, e3, reduce=False)
        g_left = tensor_over_base(left_first.module, e3, reduce=False).module.gram
        g_right = tensor_over_base(e1, right_first.module, reduce=False).module.gram
        worst = max(worst, float(np.abs(g_left - g_right).max()))
    rows.append(_row("tensor-associativity", worst, assoc_tol, "10 seeded module triples; fixed tolerance 1e-10"))

    # reductions preserve moments
    worst = 0.0
    for _ in range(5):
        pmap = random_unital_cp(2, rng)
        full = gns_construct(pmap, reduce=False)
        reduced = gns_construct(pmap, reduce=True)
        for b in m2.basis:
            lhs = full.inner(
                full.distinguished["unit"],
                apply_blocks(full.left.blocks_of(b), full.distinguished["unit"]),
            )
            rhs = reduced.inner(
                reduced.distinguished["unit"],
                apply_blocks(reduced.left.blocks_of(b), reduced.distinguished["unit"]),
            )
            worst = max(worst, frob(lhs - rhs))
    rows.append(_row("quotient-preserves-moments", worst, config.tolerance))

    base, fiber = central_unit_fiber(m2, 2)
    rows.extend(_report_rows("central-unit-fiber", verify_module(fiber), config.tolerance))
    return rows


def _seeded_state_pair(rng: np.random.Generator):
    m2 = full_matrix_algebra(2)
    s1 = QuantumProbabilitySpace(m2, state_from_density(m2, random_density(2, rng)))
    s2 = QuantumProbabilitySpace(m2, state_from_density(m2, random_density(2, rng)))
    return s1, s2


def suite_monotone(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    rows: list[dict] = []
    rng = np.random.default_rng(config.seed)
    s1, s2 = _seeded_state_pair(rng)

    mono = monotone_realize(s1, s2)
    tens = tensor_realize(s1, s2)
    worst_mono = worst_tens = 0.0
    worst_word = ""
    witness_gap = 0.0
    witness_word = ""
    for _ in range(config.trials):
        word = random_alternating_word(s1.algebra, s2.algebra, rng, config.max_word_length)
        got = mono.scalar_moment(word)
        want = monotone_moment_formula(word, s1.functional, s2.functional)
        gap = abs(got - want)
        if gap > worst_mono:
            worst_mono, worst_word = gap, _word_label(word)
        worst_tens = max(
            worst_tens,
            abs(tens.scalar_moment(word) - tensor_moment_formula(word, s1.functional, s2.functional)),
        )
        naive = tensor_moment_formula(word, s1.functional, s2.functional)
        cross = abs(want - naive)
        if cross > witness_gap:
            witness_gap, witness_word = cross, _word_label(word)
    rows.append(_row("realization-matches-formula", worst_mono, tol, f"worst word: {worst_word}"))
    rows.append(_row("tensor-realization-matches-formula", worst_tens, tol))

    # ordered two-letter factorization phi(f(X1) g(X2)) = phi1(f) phi2(g)
    worst = 0.0
    for _ in range(25):
        f = s1.algebra.element(_random_hermitian_in(s1.algebra, rng))
        g = s2.algebra.element(_random_hermitian_in(s2.algebra, rng))
        word = AlternatingWord([(1, f), (2, g)])
        split = complex(s1.functional.apply(f)[0, 0]) * complex(s2.functional.apply(g)[0, 0])
        worst = max(worst, abs(mono.scalar_moment(word) - split))
    rows.append(_row("ordered-two-letter-factorization", worst, tol))

    # at least one reversed word must separate monotone from tensor values;
    # the witness shape g(X2) f(X1) g'(X2) is fixed, since single letters and
    # ordered pairs always factor and a short word-length cap must not mask
    # the asymmetry
    for _ in range(25):
        f = _random_hermitian_in(s1.algebra, rng)
        g = _random_hermitian_in(s2.algebra, rng)
        gp = _random_hermitian_in(s2.algebra, rng)
        word = AlternatingWord([(2, g), (1, f), (2, gp)])
        want = monotone_moment_formula(word, s1.functional, s2.functional)
        naive = tensor_moment_formula(word, s1.functional, s2.functional)
        cross = abs(want - naive)
        if cross > witness_gap:
            witness_gap, witness_word = cross, _word_label(word)
    shortfall = max(0.0, 1e-3 - witness_gap)
    rows.append(
        _row(
            "order-sensitivity-witness",
            shortfall,
            0.0,
            f"largest monotone/tensor gap {witness_gap:.6f} on {witness_word or 'no word'};"
            " must exceed 1e-3",
        )
    )
    rows.extend(_report_rows("monotone-realization", mono.verify(tol), tol))
    return rows


def _random_hermitian_in(algebra, rng: np.random.Generator) -> np.ndarray:
    from .linalg import random_hermitian

    h = random_hermitian(algebra.ambient_dim, rng)
    coeffs, _ = algebra.coords(h)
    out = algebra.combine(coeffs)
    return 0.5 * (out + out.conj().T)


def suite_conditional_monotone(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    rows: list[dict] = []
    rng = np.random.default_rng(config.seed)
    m2 = full_matrix_algebra(2)
    comp = diagonal_compression(2, m2)
    base = comp.codomain

    e1 = gns_construct(comp)
    e2 = gns_construct(comp)
    joint = conditional_monotone_embed(e1, e2, m2, m2)

    worst = 0.0
    worst_word = ""
    worst_member = 0.0
    length = min(config.max_word_length, 5)
    for _ in range(config.trials):
        word = random_alternating_word(m2, m2, rng, length)
        got = joint.moment(word)
        want = conditional_monotone_moment_formula(word, comp, comp)
        gap = frob(got - want)
        if gap > worst:
            worst, worst_word = gap, _word_label(word)
        _, res = base.coords(want)
        worst_member = max(worst_member, res)
    rows.append(
        _row("realization-matches-formula", worst, tol, f"{config.trials} words (len <= {length}); worst: {worst_word}")
    )
    rows.append(_row("formula-stays-in-base", worst_member, tol))

    # sandwich identity: embedding a first-leg letter between second-leg
    # letters only sees its conditional expectation
    worst = 0.0
    for _ in range(10):
        a = _random_hermitian_in(m2, rng)
        b = _random_hermitian_in(m2, rng)
        c = _random_hermitian_in(m2, rng)
        lhs = joint.embed(2, a) @ joint.embed(1, b) @ joint.embed(2, c)
        rhs = joint.embed(2, a @ comp.apply(b) @ c)
        worst = max(worst, operator_distance(lhs, rhs))
    rows.append(_row("sandwich-identity", worst, tol))
    rows.extend(_report_rows("realization", joint.verify(tol), tol))
    return rows


def suite_conditional_tensor(config: RunConfig) -> list[dict]:
    rows: list[dict] = []
    exact_tol = 1e-12
    s1, s2, base = coins_game()
    product = conditional_tensor_realize(s1, s2)

    def indicator(k: int) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        m[k, k] = 1.0
        return m

    # frozen value: both coins show head with conditional probability 0.21
    head = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    got = product.realization.moment(AlternatingWord([(1, head), (2, head)]))
    frozen = frob(got - np.diag([0.21, 0.21, 0.21, 0.21]).astype(complex))
    rows.append(_row("frozen-head-head-value", frozen, exact_tol, "fixed tolerance 1e-12"))

    # conditional expectation factorizes, exhaustively over indicator pairs
    worst = 0.0
    worst_cls = 0.0
    for i in range(4):
        for j in range(4):
            f, g = indicator(i), indicator(j)
            word = AlternatingWord([(1, f), (2, g)])
            joint = product.realization.moment(word)
            split = s1.functional.apply(f) @ s2.functional.apply(g)
            worst = max(worst, frob(joint - split))
            worst_cls = max(worst_cls, frob(joint - classical_coins_oracle(f, g)))
    rows.append(_row("expectation-factorizes", worst, exact_tol, "16 indicator pairs; fixed tolerance 1e-12"))
    rows.append(_row("classical-oracle-agrees", worst_cls, exact_tol, "fixed tolerance 1e-12"))

    # base insertions attach to either leg without changing the value
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for _ in range(10):
        f = np.diag(rng.uniform(-1, 1, size=4)).astype(complex)
        g = np.diag(rng.uniform(-1, 1, size=4)).astype(complex)
        h = base.combine(rng.uniform(-1, 1, size=2))
        via1 = product.realization.moment(AlternatingWord([(1, f @ h), (2, g)]))
        via2 = product.realization.moment(AlternatingWord([(1, f), (2, h @ g)]))
        worst = max(worst, frob(via1 - via2))
    rows.append(_row("base-insertion-identity", worst, exact_tol, "fixed tolerance 1e-12"))
    rows.extend(
        _report_rows("amalgamated-expectation", verify_positive_map(product.expectation), config.tolerance)
    )
    return rows


def suite_dilation(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    rows: list[dict] = []
    rng = np.random.default_rng(config.seed)
    m2 = full_matrix_algebra(2)
    horizon = config.horizon

    # the trivial tower is trivial on the nose
    trivial = dilate_discrete(identity_map(m2), horizon, config.budget)
    ranks_ok = all(p.rank == 1 for p in trivial.system.powers)
    grams_ok = all(
        np.array_equal(p.gram, m2.unit[None, None]) for p in trivial.system.powers
    )
    rows.append(
        _row(
            "trivial-system-exact",
            0.0 if (ranks_ok and grams_ok) else 1.0,
            0.0,
            f"ranks {[p.rank for p in trivial.system.powers]}; gram equality {grams_ok}",
        )
    )

    # semigroup recovery for random unital CP maps and the stochastic chain
    worst = 0.0
    worst_label = ""
    scenarios = [("stochastic", markov_scenario(np.array([[0.5, 0.5], [0.3, 0.7]]), horizon, config.budget).scenario)]
    for k in range(10):
        scenarios.append((f"random-cp-{k}", dilate_discrete(random_unital_cp(2, rng), horizon, config.budget)))
    for label, scenario in scenarios:
        system = scenario.system
        for n in range(horizon + 1):
            tn = iterate_map(scenario.cp_map, n)
            e = system.powers[n]
            xi = system.units[n]
            for b in system.base.basis:
                gap = frob(e.inner(xi, apply_blocks(e.left.blocks_of(b), xi)) - tn.apply(b))
                if gap > worst:
                    worst, worst_label = gap, f"{label}, n={n}"
    rows.append(_row("semigroup-recovery", worst, tol, f"worst: {worst_label}"))

    sample = scenarios[1][1]
    rows.extend(_report_rows("shift", verify_dilation(sample, tol, seed=config.seed), tol))
    rows.extend(
        _report_rows("product-system", verify_product_system(sample.system, tol), tol)
    )

    # resource guard: an over-budget request must raise with the dimension
    try:
        dilate_discrete(random_unital_cp(2, rng), horizon=3, budget=10)
        guard = 1.0
        detail = "no error raised"
    except BudgetExceededError as err:
        guard = 0.0 if err.dimension > 10 else 1.0
        detail = f"raised with dimension {err.dimension}"
    rows.append(_row("budget-guard", guard, 0.0, detail))
    return rows


def suite_white_noise(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    rows: list[dict] = []
    horizon = config.horizon
    trials = min(config.trials, 100)

    fibers = [
        ("m2-central-unit", central_unit_fiber(full_matrix_algebra(2), 2)),
        ("scalar-2dim", scalar_fiber(2)),
    ]
    for label, (base, fiber) in fibers:
        scenario = white_noise_scenario(base, fiber, horizon, config.budget)
        r, s, t = 0, max(1, horizon // 2), horizon
        inc = white_noise_increment_check(
            scenario, r, s, t, trials=trials, seed=config.seed, tol=tol,
            max_word_length=config.max_word_length,
        )
        rows.append(_row(f"{label}:invariance", inc.invariance_residual, tol))
        rows.append(
            _row(
                f"{label}:mode-is-white-noise",
                0.0 if inc.mode == "white-noise" else 1.0,
                0.0,
                f"mode {inc.mode}; windows {inc.window_past} / {inc.window_future}",
            )
        )
        rows.append(
            _row(
                f"{label}:increment-factorization",
                inc.max_residual,
                tol,
                f"{inc.word_count} words; generated dimension {inc.generated_dimension}",
            )
        )
        rows.extend(
            _report_rows(f"{label}:dilation", verify_dilation(scenario, tol, seed=config.seed), tol)
        )
    return rows


def suite_markov(config: RunConfig) -> list[dict]:
    tol = config.tolerance
    shift_tol = 1e-10
    rows: list[dict] = []
    model = markov_scenario(np.array([[0.5, 0.5], [0.3, 0.7]]), config.horizon, config.budget)
    report = model.verify(tol=tol, seed=config.seed, trials=min(config.trials, 40))
    for check in report.checks:
        detail = check.detail
        if check.name == "shift-preserves-inner-products":
            row_tol = shift_tol
            detail = (detail + "; " if detail else "") + "fixed tolerance 1e-10"
        else:
            row_tol = tol
        rows.append(_row(f"chain:{check.name}", check.residual, row_tol, detail))
    inc = white_noise_increment_check(
        model.scenario, 0, max(1, config.horizon // 2), config.horizon,
        trials=min(config.trials, 60), seed=config.seed, tol=tol,
    )
    rows.append(
        _row(
            "chain:increment-mode-reported",
            0.0 if inc.mode == "markov-property" else 1.0,
            0.0,
            f"mode {inc.mode} (corner functional not shift-invariant)",
        )
    )
    rows.append(_row("chain:increment-factorization", inc.max_residual, tol))
    return rows


_SUITE_FUNCTIONS = {
    "algebra": suite_algebra,
    "module": suite_module,
    "monotone": suite_monotone,
    "conditional-monotone": suite_conditional_monotone,
    "conditional-tensor": suite_conditional_tensor,
    "dilation": suite_dilation,
    "white-noise": suite_white_noise,
    "markov": suite_markov,
}


def run_suite(name: str, config: RunConfig) -> dict:
    """Run one suite (or "all") and assemble the deterministic report."""
    config.validate()
    if name == "all":
        names = SUITE_NAMES
    elif name in _SUITE_FUNCTIONS:
        names = (name,)
    else:
        raise StructuralError(
            f"unknown suite {name!r}; expected one of {', '.join(SUITE_NAMES + ('all',))}"
        )
    checks = []
    for suite in names:
        for row in _SUITE_FUNCTIONS[suite](config):
            checks.append({**row, "name": f"{suite}/{row['name']}"})
    return {
        "schema": SCHEMA_TAG,
        "suite": name,
        "config": config.as_report_dict(),
        "checks": checks,
        "passed": all(row["passed"] for row in checks),
    }
