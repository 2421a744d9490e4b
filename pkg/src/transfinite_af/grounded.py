"""Grounded-extension engines.

Three regimes:

* finite AFs: exact stage iteration of the defense function from the
  empty set; stabilizes within n rounds and yields the least fixpoint.

* finitary lazy AFs: an attacker-closed window is iterated; stages are
  exact for every argument of the closure (the closure makes the
  restricted iteration agree with the global one level by level), and a
  stabilized closure decides NEVER too.

* family-presented lazy AFs: a symbolic verifier.  Inferring closed-form
  stages for arbitrary lazy AFs is not computable, so generators ship
  candidate stage maps and this module certifies them: the successor
  rule and its minimality are checked exactly through affine ordinal
  sups, the NEVER rule is checked locally (co-inductively), and family
  closed forms are validated against concrete samples before any
  symbolic use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from .core import AttackerFamily, AttackerSpec, FiniteAF, IndexMap, LazyAF, \
    spot_check_attacker_spec
from .errors import ClosureError, DomainError, IncompleteStageMap
from .ordinals import (
    NEVER,
    ZERO,
    AffineOrdinalExpr,
    Ordinal,
    StageValue,
    _Never,
)


# -- finite engine ------------------------------------------------------------


@dataclass(frozen=True)
class GroundedResult:
    """The grounded extension with its stage bookkeeping."""

    grounded: frozenset
    grounding_ordinal: Ordinal
    stages: Dict[int, StageValue]


def grounded_finite(af: FiniteAF) -> GroundedResult:
    """Iterate the defense function from the empty set to its fixpoint.

    The result is the least fixpoint; the grounding ordinal is the least
    k with G_k = G, a natural number bounded by the argument count.
    """
    stages: Dict[int, StageValue] = {}
    current: frozenset = frozenset()
    k = 0
    while True:
        nxt = af.defense_step(current)
        if nxt == current:
            break
        k += 1
        for x in nxt - current:
            stages[x] = Ordinal.from_int(k)
        current = nxt
    for x in range(af.n):
        stages.setdefault(x, NEVER)
    return GroundedResult(current, Ordinal.from_int(k), stages)


def stages_finite(af: FiniteAF) -> Dict[int, StageValue]:
    """Least stage of every argument: the k of first entry, or NEVER."""
    return grounded_finite(af).stages


# -- windowed approximation for finitary lazy AFs ------------------------------


@dataclass(frozen=True)
class OmegaApproximation:
    """Stage information for an attacker-closed window of a lazy AF.

    stages holds exact finite stages for closure arguments that entered
    within the step budget.  When the closure iteration stabilized,
    `never` is exact as well; otherwise undecided arguments are left in
    `unknown`.
    """

    stages: Dict[int, Ordinal]
    never: frozenset
    unknown: frozenset
    closure: frozenset
    stabilized: bool


def omega_approximation(af: LazyAF, window: int, steps: int,
                        closure_cap: Optional[int] = None) -> OmegaApproximation:
    """Iterate stages over the attacker closure of [0, window).

    Every closure argument must have a purely explicit attacker spec;
    family-presented attackers belong to the symbolic engine.  The
    closure is grown by reverse reachability and capped: breaching the
    cap is an error naming the offending argument, never a silent
    truncation.
    """
    if window < 1 or steps < 1:
        raise ValueError("window and steps must be >= 1")
    if closure_cap is None:
        closure_cap = max(8 * window + 64, 256)
    hi = window if af.universe is None else min(window, af.universe)
    closure = set()
    frontier = list(range(hi))
    attackers: Dict[int, Tuple[int, ...]] = {}
    while frontier:
        a = frontier.pop()
        if a in closure:
            continue
        closure.add(a)
        spec = af.attacker_spec(a)
        if spec.families:
            raise DomainError(
                f"argument {a} has family-presented attackers; "
                "use the symbolic engine")
        attackers[a] = spec.explicit
        for b in spec.explicit:
            if b not in closure:
                if len(closure) + len(frontier) >= closure_cap:
                    raise ClosureError(
                        f"attacker closure of window {window} exceeded cap "
                        f"{closure_cap} while closing argument {a}", a)
                frontier.append(b)

    stages: Dict[int, Ordinal] = {}
    current: set = set()
    stabilized = False
    for k in range(1, steps + 1):
        attacked = set()
        for y in current:
            for b in closure:
                if af.attacks(y, b):
                    attacked.add(b)
        nxt = {x for x in closure if all(b in attacked for b in attackers[x])}
        if nxt == current:
            stabilized = True
            break
        for x in nxt - current:
            stages[x] = Ordinal.from_int(k)
        current = nxt

    rest = closure - set(stages)
    if stabilized:
        return OmegaApproximation(stages, frozenset(rest), frozenset(),
                                  frozenset(closure), True)
    return OmegaApproximation(stages, frozenset(), frozenset(rest),
                              frozenset(closure), False)


# -- symbolic stage maps --------------------------------------------------------


@dataclass(frozen=True)
class StageFamily:
    """Closed-form stages for an affine-indexed family of arguments."""

    index_map: IndexMap
    stage: object  # AffineOrdinalExpr | NEVER
    k_start: int = 0

    def lookup(self, index: int) -> Optional[StageValue]:
        k = self.index_map.invert(index)
        if k is None or k < self.k_start:
            return None
        if self.stage is NEVER:
            return NEVER
        return self.stage.evaluate(k)


class SymbolicStageMap:
    """Candidate per-argument least stages for a lazy AF.

    Finitely many explicit exceptions, finitely many affine stage
    families, and (for generator-structured AFs whose universe has no
    finite family decomposition) a total fallback callable.  Maps with a
    fallback must declare their stage supremum; affine-complete maps
    compute it.

    family_all_never, when provided, answers "is stage(map(k)) NEVER for
    every k of this attacker family" exactly for generator-owned
    structure; without it the verifier falls back to affine alignment or
    sampling.
    """

    def __init__(self, families: Tuple[StageFamily, ...] = (),
                 exceptions: Optional[Dict[int, StageValue]] = None,
                 fallback: Optional[Callable[[int], StageValue]] = None,
                 sup_value: Optional[Ordinal] = None,
                 sup_attained: Optional[bool] = None,
                 sup_witness: Optional[int] = None,
                 family_all_never: Optional[Callable[[AttackerFamily],
                                                     Optional[bool]]] = None):
        self.families = tuple(families)
        self.exceptions = dict(exceptions or {})
        self.fallback = fallback
        self._sup_value = sup_value
        self._sup_attained = sup_attained
        self._sup_witness = sup_witness
        self._family_all_never = family_all_never

    @staticmethod
    def from_finite(stages: Dict[int, StageValue]) -> "SymbolicStageMap":
        return SymbolicStageMap(exceptions=dict(stages))

    def stage_of(self, index: int) -> StageValue:
        if index in self.exceptions:
            return self.exceptions[index]
        for fam in self.families:
            v = fam.lookup(index)
            if v is not None:
                return v
        if self.fallback is not None:
            return self.fallback(index)
        raise IncompleteStageMap(f"no stage value for argument {index}")

    def family_all_never(self, family: AttackerFamily) -> Optional[bool]:
        if self._family_all_never is not None:
            return self._family_all_never(family)
        return None

    def declared_sup(self) -> Tuple[Ordinal, bool, Optional[int]]:
        """(value, attained, witness) for the sup of all non-NEVER stages."""
        if self._sup_value is not None:
            return self._sup_value, bool(self._sup_attained), self._sup_witness
        if self.fallback is not None:
            raise DomainError(
                "stage maps with a fallback must declare their supremum")
        best, attained, witness = ZERO, True, None
        for idx, v in sorted(self.exceptions.items()):
            if v is NEVER:
                continue
            if v > best or (v == best and not attained):
                best, attained, witness = v, True, idx
        for fam in self.families:
            if fam.stage is NEVER:
                continue
            value, att = fam.stage.sup_over(fam.k_start)
            if value > best or (value == best and att and not attained):
                best, attained = value, att
                witness = fam.index_map(fam.k_start) if att else None
        return best, attained, witness


def grounding_ordinal_from_stages(stages: Iterable[StageValue]) -> Ordinal:
    """Least alpha with G_alpha = G, from the collection of least stages.

    The maximum when attained (some argument enters last), otherwise the
    supremum, which is then a limit reached as the union of earlier
    levels.  Finite collections always attain their max.
    """
    best = ZERO
    for v in stages:
        if v is NEVER:
            continue
        if v > best:
            best = v
    return best


def grounding_ordinal_of(result) -> Ordinal:
    """Extract the grounding ordinal from any engine output."""
    if isinstance(result, GroundedResult):
        return result.grounding_ordinal
    if isinstance(result, VerificationReport):
        if result.grounding_ordinal is None:
            raise DomainError("verification failed; no certified grounding ordinal")
        return result.grounding_ordinal
    if isinstance(result, SymbolicStageMap):
        return result.declared_sup()[0]
    if isinstance(result, dict):
        return grounding_ordinal_from_stages(result.values())
    return grounding_ordinal_from_stages(result)


# -- the verifier ----------------------------------------------------------------


@dataclass(frozen=True)
class StageViolation:
    subject: str
    rule: str
    message: str

    def __str__(self):
        return f"[{self.rule}] {self.subject}: {self.message}"


@dataclass
class VerificationReport:
    violations: List[StageViolation]
    checked: int
    grounding_ordinal: Optional[Ordinal]

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        if self.ok:
            return [f"verified {self.checked} arguments; "
                    f"grounding ordinal {self.grounding_ordinal}"]
        return [str(v) for v in self.violations]


def _attacker_spec_of(af, i: int) -> AttackerSpec:
    if isinstance(af, FiniteAF):
        return AttackerSpec(explicit=af.attackers_of(i))
    return af.attacker_spec(i)


class _Verifier:
    def __init__(self, af, candidate: SymbolicStageMap, sample: int, probe: int):
        self.af = af
        self.candidate = candidate
        self.sample = sample
        self.probe = probe
        self.violations: List[StageViolation] = []

    def bad(self, subject, rule, message):
        self.violations.append(StageViolation(str(subject), rule, message))

    def stage(self, i: int) -> StageValue:
        return self.candidate.stage_of(i)

    def spec(self, i: int) -> AttackerSpec:
        return _attacker_spec_of(self.af, i)

    # minstage(b) = least stage among the counter-attackers of b; NEVER
    # when b is never counter-attacked (in particular when unattacked).
    def minstage_concrete(self, b: int) -> StageValue:
        spec = self.spec(b)
        best: StageValue = NEVER
        for c in spec.explicit:
            v = self.stage(c)
            if v is not NEVER and (best is NEVER or v < best):
                best = v
        for fam in spec.families:
            prev = None
            for k in range(fam.k_start, fam.k_start + self.probe):
                v = self.stage(fam.member(k))
                if prev is not None and not self._stage_le(prev, v):
                    self.bad(b, "fragment",
                             f"attacker family stages decrease at k={k}; "
                             "outside the supported monotone fragment")
                prev = v
                if v is not NEVER and (best is NEVER or v < best):
                    best = v
        return best

    @staticmethod
    def _stage_le(x: StageValue, y: StageValue) -> bool:
        if x is NEVER:
            return y is NEVER
        if y is NEVER:
            return True
        return x <= y

    # -- rule (i): successor stages ------------------------------------

    def check_stage(self, a: int, s: Ordinal):
        if not s.is_successor:
            self.bad(a, "successor", f"stage {s} is not a successor ordinal")
            return
        beta = s.predecessor()
        spec = self.spec(a)
        tight = ZERO
        failed = False
        for b in spec.explicit:
            m = self.minstage_concrete(b)
            if m is NEVER:
                self.bad(a, "bound",
                         f"attacker {b} is never counter-attacked, yet stage is {s}")
                failed = True
            elif m > beta:
                self.bad(a, "bound",
                         f"attacker {b} first counter-attacked at {m} > {beta}")
                failed = True
            elif m > tight:
                tight = m
        for fam in spec.families:
            dse = fam.defense_stage_expr
            if dse is None:
                self.bad(a, "closed-form",
                         "attacker family lacks a defense stage closed form")
                failed = True
                continue
            if dse is NEVER:
                self.bad(a, "bound",
                         f"attacker family {fam.index_map} is never "
                         f"counter-attacked, yet stage is {s}")
                failed = True
                continue
            for k in range(fam.k_start, fam.k_start + self.probe):
                got = self.minstage_concrete(fam.member(k))
                want = dse.evaluate(k)
                if got is NEVER or got != want:
                    self.bad(a, "closed-form",
                             f"defense closed form gives {want} at k={k}, "
                             f"samples give {got}")
                    failed = True
                    break
            value, _attained = dse.sup_over(fam.k_start)
            if value > beta:
                self.bad(a, "bound",
                         f"family defense stages reach {value} > {beta}")
                failed = True
            elif value > tight:
                tight = value
        if not failed and tight != beta:
            self.bad(a, "least",
                     f"stage {s} claimed but defense completes at {tight}+1")

    # -- rule (ii): NEVER ------------------------------------------------

    def family_members_all_never(self, fam: AttackerFamily) -> bool:
        answer = self.candidate.family_all_never(fam)
        if answer is not None:
            return bool(answer)
        aff = fam.index_map.pure_affine
        if (aff is not None and self.candidate.fallback is None
                and all(f.index_map.pure_affine is not None
                        for f in self.candidate.families)):
            return self._all_never_by_alignment(fam, aff)
        # local sampled acceptance; sound only up to the documented
        # well-founded cross-checks
        return all(self.stage(fam.member(k)) is NEVER
                   for k in range(fam.k_start, fam.k_start + self.probe))

    def _all_never_by_alignment(self, fam: AttackerFamily, aff) -> bool:
        period = 1
        thresholds = [fam.k_start]
        for sf in self.candidate.families:
            a2 = sf.index_map.pure_affine
            step = a2.a // math.gcd(aff.a, a2.a)
            period = period * step // math.gcd(period, step)
            start = a2.a * sf.k_start + a2.b
            thresholds.append((start - aff.b) // aff.a + 1)
        if self.candidate.exceptions:
            top = max(self.candidate.exceptions)
            thresholds.append((top - aff.b) // aff.a + 1)
        if period > 10_000:
            return all(self.stage(fam.member(k)) is NEVER
                       for k in range(fam.k_start, fam.k_start + self.probe))
        stable = max(thresholds)
        for k in range(fam.k_start, stable + period + 1):
            try:
                if self.stage(fam.member(k)) is not NEVER:
                    return False
            except IncompleteStageMap:
                return False
        return True

    def attacker_never_in_g_plus(self, b: int) -> bool:
        spec = self.spec(b)
        for c in spec.explicit:
            if self.stage(c) is not NEVER:
                return False
        for fam in spec.families:
            if not self.family_members_all_never(fam):
                return False
        return True

    def check_never(self, a: int):
        spec = self.spec(a)
        for b in spec.explicit:
            if self.attacker_never_in_g_plus(b):
                return
        for fam in spec.families:
            for k in range(fam.k_start, fam.k_start + self.probe):
                if self.attacker_never_in_g_plus(fam.member(k)):
                    return
        if not spec.explicit and not spec.families:
            self.bad(a, "never", "claimed NEVER but the argument is unattacked")
        else:
            self.bad(a, "never",
                     "no attacker with all counter-attackers NEVER was found "
                     f"within the first {self.probe} family members")

    # -- supremum / grounding ordinal -------------------------------------

    def check_sup(self, sampled: List[Tuple[int, StageValue]]) -> Optional[Ordinal]:
        try:
            value, attained, witness = self.candidate.declared_sup()
        except DomainError as e:
            self.bad("sup", "sup", str(e))
            return None
        for i, s in sampled:
            if s is NEVER:
                continue
            if s > value:
                self.bad(i, "sup", f"stage {s} exceeds declared sup {value}")
            elif s == value and not attained:
                self.bad(i, "sup",
                         f"stage {s} attains a sup declared unattained")
        if attained:
            if witness is None:
                if not value.is_zero:
                    self.bad("sup", "sup", "attained sup without a witness")
            else:
                w = self.stage(witness)
                if w is NEVER or w != value:
                    self.bad("sup", "sup",
                             f"witness {witness} has stage {w}, declared sup {value}")
        else:
            if not value.is_limit and not value.is_zero:
                self.bad("sup", "sup",
                         f"unattained sup {value} must be a limit")
            cofinal = False
            for fam in self.candidate.families:
                if fam.stage is NEVER:
                    continue
                fam_sup, fam_att = fam.stage.sup_over(fam.k_start)
                if fam_sup > value:
                    self.bad("sup", "sup",
                             f"family stages reach {fam_sup} beyond declared "
                             f"sup {value}")
                if not fam_att and fam_sup == value:
                    cofinal = True
            if not cofinal and not value.is_zero:
                self.bad("sup", "sup",
                         f"no affine stage family certifies cofinality at {value}")
        return value


def verify_symbolic_stages(af, candidate: SymbolicStageMap, sample: int = 64,
                           probe: int = 6) -> VerificationReport:
    """Certify a candidate stage map against its AF.

    For each sampled argument: a successor stage must be exactly one
    above the level at which the last attacker gets counter-attacked
    (families handled through validated affine closed forms, so limits
    are exact), and a NEVER stage needs an attacker whose own
    counter-attackers are all NEVER.  The declared stage supremum, from
    which the grounding ordinal is read off, is cross-checked against
    samples and certified cofinal by an affine family when unattained.
    """
    if sample < 1:
        raise ValueError("sample must be >= 1")
    v = _Verifier(af, candidate, sample, probe)
    if isinstance(af, FiniteAF):
        indices = range(min(sample, af.n))
    else:
        hi = sample if af.universe is None else min(sample, af.universe)
        indices = range(hi)
        v.violations.extend(
            StageViolation("spec", "attacker-spec", msg)
            for msg in spot_check_attacker_spec(af, indices, bound=max(hi, 16)))

    sampled = []
    for a in indices:
        try:
            s = candidate.stage_of(a)
        except IncompleteStageMap as e:
            v.bad(a, "complete", str(e))
            continue
        sampled.append((a, s))
        if s is NEVER:
            v.check_never(a)
        else:
            v.check_stage(a, s)

    value = v.check_sup(sampled)
    ordinal = value if not v.violations else None
    return VerificationReport(v.violations, len(sampled), ordinal)
