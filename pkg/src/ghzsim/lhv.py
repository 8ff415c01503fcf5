"""Local-hidden-variable analysis of the three-station statistics.

A deterministic local strategy assigns each station, per analyzer setting,
a value in {+1, −1, 0}; zero encodes a locally wrong event (a two-photon
count or a non-detection).  The sum of outcome moduli can only take the
values 3 (all right) and 1 (wrong events come in pairs), which forces the
moduli to be independent of the local settings — enumerated exhaustively in
:func:`lemma_check`.  The hidden-variable distribution therefore splits
into a right sector (64 all-±1 strategies) and an aggregated wrong-sector
weight, and reproducing the quantum tables becomes a small exact-rational
linear program solved in :mod:`ghzsim.simplex`.

The GHZ contradiction itself needs no inequalities
(:func:`ghz_paradox_check`), while the noise tolerance is an LP boundary:
white-noise-mixed quantum tables are feasible exactly up to visibility 1/2
(:func:`critical_visibility`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .circuit import innsbruck_circuit
from .events import trigger_select, two_pair_emission
from .fock import GhzsimError, StatePolynomial
from .measurement import (
    AnalyzerSetting,
    OUTCOMES,
    Outcome,
    OutcomeTable,
    SettingTriple,
    Station,
    add_noise,
    all_setting_triples,
    correlation_from_table,
    outcome_code,
    outcome_distribution,
)
from .simplex import solve_feasibility


class InadmissibleStrategyError(GhzsimError):
    """A strategy whose outcome modulus depends on the local setting."""


class TargetFormatError(GhzsimError):
    """Feasibility targets are malformed (coverage, normalization, wrong mass)."""


SETTINGS = (AnalyzerSetting.LINEAR45, AnalyzerSetting.CIRCULAR)
TRIPLES = all_setting_triples()
VALUES = (1, -1, 0)


StationAssignment = Tuple[int, int]  # value at linear45, value at circular


@dataclass(frozen=True)
class LocalStrategy:
    """Deterministic responses of the three stations for both settings."""

    g: StationAssignment
    h: StationAssignment
    z: StationAssignment

    def __post_init__(self) -> None:
        for assignment in (self.g, self.h, self.z):
            if any(v not in VALUES for v in assignment):
                raise ValueError("strategy values must lie in {+1, -1, 0}")

    def value(self, station: Station, setting: AnalyzerSetting) -> int:
        assignment = {Station.G: self.g, Station.H: self.h, Station.Z: self.z}[station]
        return assignment[SETTINGS.index(setting)]

    def outcomes(self, triple: SettingTriple) -> Outcome:
        return (
            self.value(Station.G, triple.g),
            self.value(Station.H, triple.h),
            self.value(Station.Z, triple.z),
        )


def enumerate_strategies() -> Tuple[LocalStrategy, ...]:
    """All 729 joint strategies (9 per station)."""
    per_station = tuple(product(VALUES, repeat=2))
    return tuple(
        LocalStrategy(g, h, z)
        for g, h, z in product(per_station, per_station, per_station)
    )


def right_sector_strategies() -> Tuple[LocalStrategy, ...]:
    """The 64 all-±1 strategies (χ = 1)."""
    signs = tuple(product((1, -1), repeat=2))
    return tuple(
        LocalStrategy(g, h, z) for g, h, z in product(signs, signs, signs)
    )


def sigma(strategy: LocalStrategy, triple: SettingTriple) -> int:
    """Sum of the three outcome moduli at the given settings."""
    return sum(abs(v) for v in strategy.outcomes(triple))


def has_setting_independent_moduli(strategy: LocalStrategy) -> bool:
    return all(
        abs(assignment[0]) == abs(assignment[1])
        for assignment in (strategy.g, strategy.h, strategy.z)
    )


def chi(strategy: LocalStrategy) -> int:
    """Indicator of an all-right strategy; defined only on admissible ones."""
    if not has_setting_independent_moduli(strategy):
        raise InadmissibleStrategyError(
            "outcome modulus depends on a local setting; chi is undefined"
        )
    return int(all(abs(a[0]) == 1 for a in (strategy.g, strategy.h, strategy.z)))


@dataclass(frozen=True)
class LemmaReport:
    """Exhaustive audit of which strategies keep sigma in {1, 3} everywhere."""

    total: int
    admissible: int
    chi_one: int
    chi_zero: int
    excluded: int
    excluded_with_even_sigma: int  # excluded strategies hitting sigma 0 or 2
    setting_dependent_excluded: int
    all_admissible_moduli_setting_independent: bool

    @property
    def consistent(self) -> bool:
        return (
            self.admissible == self.chi_one + self.chi_zero
            and self.excluded == self.excluded_with_even_sigma
            and self.all_admissible_moduli_setting_independent
        )


def admissible(strategy: LocalStrategy) -> bool:
    return all(sigma(strategy, triple) in (1, 3) for triple in TRIPLES)


def lemma_check() -> LemmaReport:
    """Enumerate all 729 strategies against the sigma constraint.

    The admissible set is exactly: per-station moduli independent of the
    local setting, with either all three stations live (χ = 1) or exactly
    one live (the paired-wrong sector, χ = 0).  Every excluded strategy is
    caught with sigma equal to 0 or 2 at some setting triple.
    """
    total = admissible_count = chi_one = chi_zero = 0
    excluded = excluded_even = dependent_excluded = 0
    moduli_ok = True
    for strategy in enumerate_strategies():
        total += 1
        if admissible(strategy):
            admissible_count += 1
            independent = has_setting_independent_moduli(strategy)
            moduli_ok = moduli_ok and independent
            if independent and chi(strategy) == 1:
                chi_one += 1
            else:
                chi_zero += 1
        else:
            excluded += 1
            sigmas = {sigma(strategy, triple) for triple in TRIPLES}
            if sigmas & {0, 2}:
                excluded_even += 1
            if not has_setting_independent_moduli(strategy):
                dependent_excluded += 1
    return LemmaReport(
        total=total,
        admissible=admissible_count,
        chi_one=chi_one,
        chi_zero=chi_zero,
        excluded=excluded,
        excluded_with_even_sigma=excluded_even,
        setting_dependent_excluded=dependent_excluded,
        all_admissible_moduli_setting_independent=moduli_ok,
    )


# ---------------------------------------------------------------------------
# Quantum targets
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def heralded_state() -> StatePolynomial:
    """The post-trigger three-station state behind the circuit."""
    return innsbruck_circuit().apply(trigger_select(two_pair_emission()))


@lru_cache(maxsize=None)
def _ideal_tables(conjugate: bool) -> Tuple[OutcomeTable, ...]:
    state = heralded_state()
    return tuple(outcome_distribution(state, triple, conjugate) for triple in TRIPLES)


def quantum_targets(
    visibility: Fraction = Fraction(1), conjugate: bool = False
) -> Tuple[OutcomeTable, ...]:
    """The eight outcome tables at the given fringe visibility."""
    return tuple(add_noise(t, Fraction(visibility)) for t in _ideal_tables(conjugate))


# ---------------------------------------------------------------------------
# Feasibility LP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeasibilityProblem:
    """Can a strategy mixture reproduce all eight outcome tables exactly?

    ``slack`` (an exact rational, default zero) loosens each cell equation
    to ``|model − target| <= slack`` for experiment-data ingestion; the
    wrong-mass match stays exact either way.
    """

    targets: Tuple[OutcomeTable, ...]
    slack: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "slack", Fraction(self.slack))
        if self.slack < 0:
            raise TargetFormatError("slack must be non-negative")
        by_code = {t.settings.code: t for t in self.targets}
        if len(self.targets) != len(TRIPLES) or set(by_code) != {
            t.code for t in TRIPLES
        }:
            raise TargetFormatError("targets must cover all 8 setting triples once")
        masses = {t.wrong_mass for t in self.targets}
        if len(masses) != 1:
            raise TargetFormatError(
                f"wrong mass must be setting-independent, got {sorted(masses)}"
            )

    def table(self, triple: SettingTriple) -> OutcomeTable:
        return next(t for t in self.targets if t.settings == triple)

    @property
    def wrong_mass(self) -> Fraction:
        return self.targets[0].wrong_mass


CertificateKey = Tuple[str, str]  # (settings code, outcome code) or ("mass", "")


@dataclass(frozen=True)
class Certificate:
    """Farkas functional proving no strategy mixture matches the targets.

    ``value`` is the functional applied to the targets;
    ``strategy_bound`` the maximum over the 64 right-sector strategies of
    the functional applied to that strategy's deterministic table, scaled
    by the right mass.  ``value > strategy_bound`` (with every strategy
    column non-positive) certifies infeasibility; ``verified`` records the
    solver-independent re-check.
    """

    coefficients: Mapping[CertificateKey, Fraction]
    value: Fraction
    strategy_bound: Fraction
    max_strategy_column: Fraction
    verified: bool


@dataclass(frozen=True)
class FeasibilityOutcome:
    feasible: bool
    distribution: Optional[Mapping[LocalStrategy, Fraction]]
    chi_zero_weight: Optional[Fraction]
    certificate: Optional[Certificate]
    iterations: int


def _cell_rows(problem: FeasibilityProblem):
    """LP data: 64 cell rows + 1 mass row over 64 strategy columns."""
    strategies = right_sector_strategies()
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    keys: List[CertificateKey] = []
    zero, one = Fraction(0), Fraction(1)
    for triple in TRIPLES:
        table = problem.table(triple)
        for outcome in OUTCOMES:
            row = [
                one if strategy.outcomes(triple) == outcome else zero
                for strategy in strategies
            ]
            rows.append(row)
            rhs.append(table.probabilities[outcome])
            keys.append((triple.code, outcome_code(outcome)))
    rows.append([one] * len(strategies))
    rhs.append(1 - problem.wrong_mass)
    keys.append(("mass", ""))
    return strategies, rows, rhs, keys


def _with_slack(rows, rhs, slack: Fraction):
    """Relax cell equalities to a ±slack band via surplus columns."""
    n = len(rows[0])
    cells = len(rows) - 1  # mass row stays exact
    wide_rows: List[List[Fraction]] = []
    wide_rhs: List[Fraction] = []
    zero, one = Fraction(0), Fraction(1)
    for i in range(cells):
        upper = list(rows[i]) + [zero] * (2 * cells)
        upper[n + i] = one
        wide_rows.append(upper)
        wide_rhs.append(rhs[i] + slack)
        lower = list(rows[i]) + [zero] * (2 * cells)
        lower[n + cells + i] = -one
        wide_rows.append(lower)
        wide_rhs.append(rhs[i] - slack)
    wide_rows.append(list(rows[-1]) + [zero] * (2 * cells))
    wide_rhs.append(rhs[-1])
    return wide_rows, wide_rhs


def lhv_feasibility(problem: FeasibilityProblem) -> FeasibilityOutcome:
    """Exact LP over the right-sector strategies plus the aggregated χ=0 mass.

    The wrong mass is matched by construction (it is setting-independent in
    the targets, validated at problem build time, and carried by the
    aggregated χ=0 weight), so the LP only asks whether non-negative
    weights on the 64 all-±1 strategies reproduce every right-event cell.
    """
    strategies, rows, rhs, keys = _cell_rows(problem)
    if problem.slack:
        solve_rows, solve_rhs = _with_slack(rows, rhs, problem.slack)
    else:
        solve_rows, solve_rhs = rows, rhs
    result = solve_feasibility(solve_rows, solve_rhs)
    if result.feasible:
        weights = result.solution[: len(strategies)]
        distribution = {
            strategy: weight
            for strategy, weight in zip(strategies, weights)
            if weight
        }
        return FeasibilityOutcome(
            True, distribution, problem.wrong_mass, None, result.iterations
        )
    certificate = _build_certificate(problem, keys, result.certificate, strategies)
    return FeasibilityOutcome(False, None, None, certificate, result.iterations)


def _build_certificate(
    problem: FeasibilityProblem,
    keys: Sequence[CertificateKey],
    dual: Sequence[Fraction],
    strategies: Sequence[LocalStrategy],
) -> Certificate:
    # with slack the dual covers doubled cell rows; fold the pairs back
    coeffs: Dict[CertificateKey, Fraction] = {}
    if len(dual) == len(keys):
        folded = list(dual)
    else:
        cells = len(keys) - 1
        folded = [dual[2 * i] + dual[2 * i + 1] for i in range(cells)]
        folded.append(dual[-1])
    for key, value in zip(keys, folded):
        coeffs[key] = value
    return evaluate_certificate(problem, coeffs)


def evaluate_certificate(
    problem: FeasibilityProblem, coeffs: Mapping[CertificateKey, Fraction]
) -> Certificate:
    """Verify a Farkas functional against the targets, solver-free."""
    strategies = right_sector_strategies()
    mass_coeff = coeffs.get(("mass", ""), Fraction(0))
    value = mass_coeff * (1 - problem.wrong_mass)
    for triple in TRIPLES:
        table = problem.table(triple)
        for outcome in OUTCOMES:
            c = coeffs.get((triple.code, outcome_code(outcome)), Fraction(0))
            value += c * table.probabilities[outcome]
    columns = []
    for strategy in strategies:
        column = mass_coeff
        for triple in TRIPLES:
            column += coeffs.get(
                (triple.code, outcome_code(strategy.outcomes(triple))), Fraction(0)
            )
        columns.append(column)
    max_column = max(columns)
    bound = max_column * (1 - problem.wrong_mass)
    verified = max_column <= 0 < value
    return Certificate(dict(coeffs), value, bound, max_column, verified)


def certificate_to_json(certificate: Certificate) -> dict:
    return {
        "coefficients": {
            (f"{code}|{outcome}" if code != "mass" else "mass"): str(value)
            for (code, outcome), value in certificate.coefficients.items()
        },
        "value": str(certificate.value),
        "strategy_bound": str(certificate.strategy_bound),
        "max_strategy_column": str(certificate.max_strategy_column),
        "verified": certificate.verified,
    }


def certificate_from_json(obj: Mapping[str, object]) -> Dict[CertificateKey, Fraction]:
    coeffs: Dict[CertificateKey, Fraction] = {}
    for key, value in obj["coefficients"].items():  # type: ignore[union-attr]
        if key == "mass":
            coeffs[("mass", "")] = Fraction(str(value))
        else:
            code, outcome = key.split("|")
            coeffs[(code, outcome)] = Fraction(str(value))
    return coeffs


# ---------------------------------------------------------------------------
# Mermin combination
# ---------------------------------------------------------------------------

MERMIN_TRIPLES = tuple(
    SettingTriple.from_code(code) for code in ("xxx", "xyy", "yxy", "yyx")
)


def mermin_value(tables: Sequence[OutcomeTable]) -> Fraction:
    """E(xxx) − E(xyy) − E(yxy) − E(yyx) from conditional correlations."""
    by_code = {t.settings.code: t for t in tables}
    e = {code: correlation_from_table(by_code[code]) for code in ("xxx", "xyy", "yxy", "yyx")}
    return e["xxx"] - e["xyy"] - e["yxy"] - e["yyx"]


def mermin_strategy_bound() -> int:
    """Exhaustive bound of the Mermin combination over deterministic strategies."""
    best = 0
    for strategy in right_sector_strategies():
        sgn = {}
        for triple in MERMIN_TRIPLES:
            r = strategy.outcomes(triple)
            sgn[triple.code] = r[0] * r[1] * r[2]
        best = max(best, abs(sgn["xxx"] - sgn["xyy"] - sgn["yxy"] - sgn["yyx"]))
    return best


def mermin_certificate(problem: FeasibilityProblem) -> Certificate:
    """The Mermin combination recast as an explicit Farkas functional.

    For each outcome cell of the four Mermin triples the coefficient is the
    outcome parity (with the xxx triple negated), shifted by −2 per unit of
    right mass so that every deterministic strategy column is non-positive.
    Positive ``value`` then proves infeasibility — exactly the statement
    that the quantum combination exceeds the deterministic bound of 2.
    """
    coeffs: Dict[CertificateKey, Fraction] = {("mass", ""): Fraction(-2)}
    for triple in MERMIN_TRIPLES:
        weight = Fraction(-1) if triple.code == "xxx" else Fraction(1)
        for outcome in OUTCOMES:
            parity = outcome[0] * outcome[1] * outcome[2]
            coeffs[(triple.code, outcome_code(outcome))] = -weight * parity
    return evaluate_certificate(problem, coeffs)


# ---------------------------------------------------------------------------
# GHZ paradox and critical visibility
# ---------------------------------------------------------------------------

PERFECT_CORRELATIONS: Tuple[Tuple[str, int], ...] = (
    ("xxx", 1),
    ("xyy", -1),
    ("yxy", -1),
    ("yyx", -1),
)


@dataclass(frozen=True)
class GhzParadoxReport:
    conjugate_convention: bool
    quantum_correlations: Mapping[str, Fraction]
    satisfying_all: int
    satisfying_after_drop: Tuple[int, ...]
    contradiction: bool


def ghz_paradox_check(conjugate: bool = False) -> GhzParadoxReport:
    """The inequality-free argument, restricted to the right sector.

    Verifies the four perfect quantum correlations from the derived state,
    then counts the all-±1 strategies compatible with all four product
    constraints (none) and with each constraint dropped (eight each).
    """
    state = heralded_state()
    correlations = {
        code: correlation_from_table(
            outcome_distribution(state, SettingTriple.from_code(code), conjugate)
        )
        for code, _ in PERFECT_CORRELATIONS
    }
    for code, expected in PERFECT_CORRELATIONS:
        if correlations[code] != expected:
            raise GhzsimError(
                f"derived correlation E({code}) = {correlations[code]}, "
                f"expected {expected}"
            )

    def satisfied(strategy: LocalStrategy, code: str, sign: int) -> bool:
        r = strategy.outcomes(SettingTriple.from_code(code))
        return r[0] * r[1] * r[2] == sign

    strategies = right_sector_strategies()
    all_four = sum(
        1
        for s in strategies
        if all(satisfied(s, code, sign) for code, sign in PERFECT_CORRELATIONS)
    )
    drops = []
    for skip in range(len(PERFECT_CORRELATIONS)):
        kept = [pc for i, pc in enumerate(PERFECT_CORRELATIONS) if i != skip]
        drops.append(
            sum(1 for s in strategies if all(satisfied(s, c, v) for c, v in kept))
        )
    return GhzParadoxReport(
        conjugate_convention=conjugate,
        quantum_correlations=correlations,
        satisfying_all=all_four,
        satisfying_after_drop=tuple(drops),
        contradiction=all_four == 0 and all(d > 0 for d in drops),
    )


def lemma_report_to_json(report: LemmaReport) -> dict:
    return {
        "total": report.total,
        "admissible": report.admissible,
        "chi_one": report.chi_one,
        "chi_zero": report.chi_zero,
        "excluded": report.excluded,
        "excluded_with_even_sigma": report.excluded_with_even_sigma,
        "setting_dependent_excluded": report.setting_dependent_excluded,
        "moduli_setting_independent": report.all_admissible_moduli_setting_independent,
    }


def lemma_report_from_json(obj: Mapping[str, object]) -> LemmaReport:
    return LemmaReport(
        total=int(obj["total"]),
        admissible=int(obj["admissible"]),
        chi_one=int(obj["chi_one"]),
        chi_zero=int(obj["chi_zero"]),
        excluded=int(obj["excluded"]),
        excluded_with_even_sigma=int(obj["excluded_with_even_sigma"]),
        setting_dependent_excluded=int(obj["setting_dependent_excluded"]),
        all_admissible_moduli_setting_independent=bool(obj["moduli_setting_independent"]),
    )


def ghz_report_to_json(report: GhzParadoxReport) -> dict:
    return {
        "conjugate": report.conjugate_convention,
        "correlations": {k: str(v) for k, v in report.quantum_correlations.items()},
        "satisfying_all": report.satisfying_all,
        "satisfying_after_drop": list(report.satisfying_after_drop),
        "contradiction": report.contradiction,
    }


def ghz_report_from_json(obj: Mapping[str, object]) -> GhzParadoxReport:
    return GhzParadoxReport(
        conjugate_convention=bool(obj["conjugate"]),
        quantum_correlations={
            k: Fraction(str(v)) for k, v in obj["correlations"].items()  # type: ignore[union-attr]
        },
        satisfying_all=int(obj["satisfying_all"]),
        satisfying_after_drop=tuple(obj["satisfying_after_drop"]),  # type: ignore[arg-type]
        contradiction=bool(obj["contradiction"]),
    )


@dataclass(frozen=True)
class CriticalVisibilityResult:
    v_star: Fraction
    feasible_at: Fraction
    infeasible_above: Fraction
    evaluations: Tuple[Tuple[Fraction, bool], ...]


def critical_result_to_json(result: CriticalVisibilityResult) -> dict:
    return {
        "v_star": str(result.v_star),
        "feasible_at": str(result.feasible_at),
        "infeasible_above": str(result.infeasible_above),
        "evaluations": [
            {"visibility": str(v), "feasible": ok} for v, ok in result.evaluations
        ],
    }


def critical_result_from_json(obj: Mapping[str, object]) -> CriticalVisibilityResult:
    return CriticalVisibilityResult(
        v_star=Fraction(str(obj["v_star"])),
        feasible_at=Fraction(str(obj["feasible_at"])),
        infeasible_above=Fraction(str(obj["infeasible_above"])),
        evaluations=tuple(
            (Fraction(str(entry["visibility"])), bool(entry["feasible"]))
            for entry in obj["evaluations"]  # type: ignore[union-attr]
        ),
    )


def feasibility_at_visibility(visibility: Fraction) -> FeasibilityOutcome:
    return lhv_feasibility(FeasibilityProblem(quantum_targets(Fraction(visibility))))


def critical_visibility(depth: int = 8) -> CriticalVisibilityResult:
    """Bisection of the LP boundary over the visibility interval [0, 1].

    With exact arithmetic the first midpoint 1/2 is decided exactly
    (feasible), every midpoint above is infeasible, and the returned
    threshold is exactly 1/2 with the bracket shrinking as 2^(−depth).
    """
    if depth < 1:
        raise ValueError("bisection depth must be at least 1")
    evaluations: List[Tuple[Fraction, bool]] = []

    def feasible(v: Fraction) -> bool:
        outcome = feasibility_at_visibility(v)
        evaluations.append((v, outcome.feasible))
        return outcome.feasible

    low, high = Fraction(0), Fraction(1)
    if not feasible(low):
        raise GhzsimError("white noise must be classically reproducible")
    if feasible(high):
        raise GhzsimError("the noiseless targets must be infeasible")
    for _ in range(depth):
        mid = (low + high) / 2
        if feasible(mid):
            low = mid
        else:
            high = mid
    return CriticalVisibilityResult(
        v_star=low,
        feasible_at=low,
        infeasible_above=high,
        evaluations=tuple(evaluations),
    )
