"""Seeded property suites behind the `check` command.

Each suite runs randomized instances and collects violations; a failing
finite-AF property is shrunk by greedy argument removal before being
reported, so the dump is the smallest AF (under that greedy strategy)
still violating the property.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .constructions import (
    af_from_finite_tree,
    baumann_spanring,
    disjoint_union_with_embedding,
    ordinal_target_af,
)
from .core import FiniteAF, format_apx, parse_apx
from .errors import TransfiniteAFError
from .grounded import (
    SymbolicStageMap,
    grounded_finite,
    stages_finite,
    verify_symbolic_stages,
)
from .ordinals import (
    NEVER,
    OMEGA,
    ZERO,
    AffineOrdinalExpr,
    Ordinal,
    format_ordinal,
    fundamental_sequence,
    fundamental_sequence_expr,
    parse_ordinal,
)
from .rank_analysis import (
    build_self_defending_witness,
    largest_self_defending,
    merge_witnesses,
    rank_stage_bridge_check,
    ta_path_violations,
    ts_path_exists,
    verify_self_defending_witness,
    witness_path,
)
from .trees import FiniteTree


@dataclass
class SuiteResult:
    name: str
    trials: int
    checks: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "SuiteResult") -> "SuiteResult":
        return SuiteResult(
            name=f"{self.name}+{other.name}",
            trials=self.trials + other.trials,
            checks=self.checks + other.checks,
            violations=self.violations + other.violations,
        )

    def lines(self) -> List[str]:
        status = "pass" if self.passed else "FAIL"
        head = (f"suite {self.name}: {status} "
                f"({self.trials} trials, {self.checks} checks, "
                f"{len(self.violations)} violations)")
        return [head] + self.violations


# -- random instances ---------------------------------------------------------


def random_finite_af(rng: random.Random, max_args: int) -> FiniteAF:
    n = rng.randint(1, max_args)
    p = rng.uniform(0.05, 0.5)
    attacks = [(x, y) for x in range(n) for y in range(n) if rng.random() < p]
    return FiniteAF(n, attacks)


def random_finite_tree(rng: random.Random, max_nodes: int) -> FiniteTree:
    paths = [()]
    for _ in range(rng.randint(0, max_nodes - 1)):
        parent = rng.choice(paths)
        paths.append(parent + (rng.randint(0, 3),))
    return FiniteTree(paths)


def minimize_af(af: FiniteAF, violates: Callable[[FiniteAF], bool]) -> FiniteAF:
    """Greedy argument removal preserving the violation."""
    changed = True
    while changed and af.n > 1:
        changed = False
        for i in range(af.n):
            smaller = af.remove_argument(i)
            try:
                if violates(smaller):
                    af = smaller
                    changed = True
                    break
            except TransfiniteAFError:
                continue
    return af


def _dump(af: FiniteAF) -> str:
    return format_apx(af).replace("\n", " ")


# -- the defense function, independently, on bitmasks ---------------------------


def bitmask_least_fixpoint(af: FiniteAF) -> frozenset:
    """Inclusion-minimum over all 2^n subsets S with f(S) = S.

    A from-scratch implementation of the defense function on bitmasks;
    shares no code with FiniteAF.defense_step.
    """
    n = af.n
    targets = [0] * n
    attackers = [0] * n
    for x, y in af.attack_pairs:
        targets[x] |= 1 << y
        attackers[y] |= 1 << x
    fixpoints = []
    for s in range(1 << n):
        s_plus = 0
        t = s
        while t:
            low = t & -t
            s_plus |= targets[low.bit_length() - 1]
            t ^= low
        f_s = 0
        for i in range(n):
            if attackers[i] & ~s_plus == 0:
                f_s |= 1 << i
        if f_s == s:
            fixpoints.append(s)
    least = min(fixpoints, key=lambda s: bin(s).count("1"))
    assert all(least & ~s == 0 for s in fixpoints), "no inclusion-minimum"
    return frozenset(i for i in range(n) if least >> i & 1)


# -- the lemma suite -------------------------------------------------------------


def run_lemma_suite(trials: int, max_args: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    result = SuiteResult("lemmas", trials)

    def report(af: FiniteAF, message: str, violates) -> None:
        small = minimize_af(af, violates)
        result.violations.append(f"{message}; minimized: {_dump(small)}")

    for _ in range(trials):
        af = random_finite_af(rng, max_args)
        r = grounded_finite(af)
        g_plus = af.plus_set(r.grounded)
        result.checks += 1

        if af.n <= 10:
            def bad_lfp(a):
                return grounded_finite(a).grounded != bitmask_least_fixpoint(a)

            if bad_lfp(af):
                report(af, "grounded is not the least fixpoint", bad_lfp)
                continue

        if not af.is_conflict_free(r.grounded):
            report(af, "grounded extension not conflict-free",
                   lambda a: not a.is_conflict_free(grounded_finite(a).grounded))
        if r.grounding_ordinal > af.n:
            report(af, "grounding ordinal above argument count",
                   lambda a: grounded_finite(a).grounding_ordinal > a.n)

        def bad_dual(a):
            rr = grounded_finite(a)
            return largest_self_defending(a) != \
                frozenset(range(a.n)) - a.plus_set(rr.grounded)

        if bad_dual(af):
            report(af, "largest self-defending is not the complement of G+",
                   bad_dual)

        seeds = [frozenset()] + [frozenset({x}) for x in range(af.n)]
        if af.n >= 2:
            seeds.append(frozenset(rng.sample(range(af.n), 2)))
        for s in seeds:
            decision = ts_path_exists(af, s, prefix_depth=40)
            if decision.path_exists != (not (s & g_plus)):
                names = sorted(s)

                def bad_ts(a, _s=s):
                    if any(x >= a.n for x in _s):
                        return False
                    d = ts_path_exists(a, _s, prefix_depth=40)
                    gp = a.plus_set(grounded_finite(a).grounded)
                    return d.path_exists != (not (_s & gp))

                report(af, f"T_S path question disagrees with the oracle "
                           f"for seed {names}", bad_ts)
                break

        bridge = rank_stage_bridge_check(af)
        if not bridge.ok:
            report(af, f"rank/stage bridge violated: {bridge.violations[0]}",
                   lambda a: not rank_stage_bridge_check(a).ok)

        outside = [a for a in range(af.n) if a not in r.grounded]
        for a in outside[:2]:
            path = witness_path(af, a, 30)
            if ta_path_violations(af, a, path, g_plus):
                def bad_witness(x, _a=a):
                    if _a >= x.n:
                        return False
                    res = grounded_finite(x)
                    if _a in res.grounded:
                        return False
                    gp = x.plus_set(res.grounded)
                    return bool(ta_path_violations(
                        x, _a, witness_path(x, _a, 30), gp))

                report(af, f"witness path through T^{af.name(a)} failed",
                       bad_witness)
                break

        exact = stages_finite(af)
        ok = verify_symbolic_stages(af, SymbolicStageMap.from_finite(exact),
                                    sample=af.n)
        if not ok.ok:
            report(af, f"verifier rejected the exact stage map: "
                       f"{ok.violations[0]}",
                   lambda a: not verify_symbolic_stages(
                       a, SymbolicStageMap.from_finite(stages_finite(a)),
                       sample=a.n).ok)

        x = rng.randrange(af.n)
        tampered = dict(exact)
        if exact[x] is NEVER:
            tampered[x] = Ordinal.from_int(rng.randint(1, af.n + 1))
        elif rng.random() < 0.5:
            tampered[x] = exact[x] + 1
        else:
            tampered[x] = NEVER
        if verify_symbolic_stages(af, SymbolicStageMap.from_finite(tampered),
                                  sample=af.n).ok:
            result.violations.append(
                f"verifier accepted a perturbed stage map (argument {x}) "
                f"on {_dump(af)}")

        singles = [build_self_defending_witness(af, {x})
                   for x in largest_self_defending(af)]
        singles = [w for w in singles if w is not None]
        for i in range(len(singles) - 1):
            merged = merge_witnesses(singles[i], singles[i + 1])
            if not verify_self_defending_witness(af, merged):
                result.violations.append(
                    f"witness union not self-defending on {_dump(af)}")
                break
    return result


# -- the ordinal suite -------------------------------------------------------------


def _random_ordinal(rng: random.Random, depth: int = 2) -> Ordinal:
    if depth == 0 or rng.random() < 0.5:
        terms = []
        for e in range(rng.randint(0, 4), -1, -1):
            if rng.random() < 0.5:
                terms.append((Ordinal.from_int(e), rng.randint(1, 9)))
        return Ordinal(tuple(terms))
    exps = sorted({_random_ordinal(rng, depth - 1) for _ in range(rng.randint(1, 3))},
                  reverse=True)
    return Ordinal(tuple((e, rng.randint(1, 4)) for e in exps))


def run_ordinal_suite(trials: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    result = SuiteResult("ordinals", trials)
    for _ in range(trials):
        x = _random_ordinal(rng)
        y = _random_ordinal(rng)
        result.checks += 1
        if (x < y) + (x == y) + (x > y) != 1:
            result.violations.append(f"trichotomy broken for {x} vs {y}")
        if not (x <= x + y) or (y > ZERO and not (x < x + y)):
            result.violations.append(f"addition not monotone: {x} + {y}")
        s = x.successor()
        if not (x < s) or s.predecessor() != x:
            result.violations.append(f"successor/predecessor broken at {x}")
        if parse_ordinal(format_ordinal(x)) != x:
            result.violations.append(f"parse/format roundtrip broken at {x}")
        if x.is_limit:
            prev = None
            for i in range(5):
                v = fundamental_sequence(x, i)
                if v >= x or (prev is not None and v <= prev):
                    result.violations.append(
                        f"fundamental sequence not increasing below {x}")
                    break
                prev = v
            expr = fundamental_sequence_expr(x)
            if expr is not None:
                value, attained = expr.sup_over()
                if attained or value != x:
                    result.violations.append(
                        f"fundamental family sup is {value}, wanted {x}")
    return result


# -- the construction suite -----------------------------------------------------------


def bs_growth_rows(up_to: int) -> List[Tuple[int, int, int]]:
    """(truncate, argument count, b0 stage) for two-chain truncations."""
    rows = []
    for m in range(1, up_to + 1):
        af = baumann_spanring(truncate=2 * m)
        stage = stages_finite(af)[af.index_of("b0")]
        rows.append((2 * m, af.n, stage.as_int()))
    return rows


def write_growth_csv(path: str, up_to: int = 50) -> None:
    rows = bs_growth_rows(up_to)
    with open(path, "w") as fh:
        fh.write("truncate,args,b0_stage\n")
        for trunc, args, stage in rows:
            fh.write(f"{trunc},{args},{stage}\n")


def run_construction_suite(trials: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    result = SuiteResult("constructions", trials)

    for _ in range(trials):
        result.checks += 1
        ft = af_from_finite_tree(random_finite_tree(rng, 80))
        if stages_finite(ft.af) != ft.expected_stages():
            result.violations.append(
                f"tree-AF stages disagree with node ranks on a "
                f"{len(ft.tree)}-node tree (seed state)")

        parts = [random_finite_af(rng, 5), random_finite_af(rng, 5)]
        union, embed = disjoint_union_with_embedding(parts)
        got = stages_finite(union)
        for p, part in enumerate(parts):
            for j, v in stages_finite(part).items():
                if got[embed(p, j)] != v:
                    result.violations.append(
                        f"union does not preserve stages at part {p} "
                        f"argument {j}")
        want = max((grounded_finite(p).grounding_ordinal.as_int()
                    for p in parts), default=0)
        if grounded_finite(union).grounding_ordinal != want:
            result.violations.append("union grounding ordinal is not the "
                                     "sup of the parts'")

    for k in range(1, 7):
        result.checks += 1
        if grounded_finite(ordinal_target_af(k)).grounding_ordinal != k:
            result.violations.append(f"ordinal target {k} misses its mark")

    for text in ("w", "w*2"):
        result.checks += 1
        alpha = parse_ordinal(text)
        af = ordinal_target_af(alpha)
        report = verify_symbolic_stages(af, af.candidate_stages, sample=24)
        if not report.ok or report.grounding_ordinal != alpha:
            result.violations.append(
                f"ordinal target {text} failed symbolic certification")

    result.checks += 1
    bs = baumann_spanring()
    report = verify_symbolic_stages(bs, bs.candidate_stages, sample=32)
    if not report.ok or report.grounding_ordinal != OMEGA + OMEGA:
        result.violations.append("two-chain generator failed certification")

    result.checks += 1
    prev = 0
    for trunc, _args, stage in bs_growth_rows(20):
        if stage <= prev - 1 or stage < trunc // 4:
            result.violations.append(
                f"b0 stage stopped growing at truncation {trunc}")
            break
        prev = stage
    return result


# -- injected candidates ---------------------------------------------------------------


def parse_injected(text: str) -> Tuple[FiniteAF, Dict[int, object]]:
    """APX plus `%stage <name> <ordinal|NEVER>` annotation lines."""
    af = parse_apx(text)
    stages: Dict[int, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line.startswith("%stage"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: %stage needs a name and a value")
        _, name, value = parts
        idx = af.index_of(name)
        stages[idx] = NEVER if value == "NEVER" else parse_ordinal(value)
    return af, stages


def run_injected(path: str) -> SuiteResult:
    result = SuiteResult("inject", 1)
    with open(path) as fh:
        af, stages = parse_injected(fh.read())
    for i in range(af.n):
        if i not in stages:
            raise ValueError(f"injected stage map misses argument {af.name(i)}")
    report = verify_symbolic_stages(af, SymbolicStageMap.from_finite(stages),
                                    sample=af.n)
    result.checks = report.checked
    if not report.ok:
        def still_bad(a):
            try:
                keep = {i: stages[af.index_of(a.name(i))] for i in range(a.n)}
            except KeyError:
                return False
            return not verify_symbolic_stages(
                a, SymbolicStageMap.from_finite(keep), sample=a.n).ok

        small = minimize_af(af, still_bad)
        result.violations.append(
            f"injected stage map rejected: {report.violations[0]}; "
            f"minimized: {_dump(small)}")
    return result


# -- entry point ------------------------------------------------------------------------


def run_suites(suite: str, trials: int, max_args: int, seed: int,
               emit_plot: Optional[str] = None,
               inject: Optional[str] = None) -> SuiteResult:
    picked: List[SuiteResult] = []
    if suite in ("lemmas", "all"):
        picked.append(run_lemma_suite(trials, max_args, seed))
    if suite in ("ordinals", "all"):
        picked.append(run_ordinal_suite(max(trials * 10, 200), seed + 1))
    if suite in ("constructions", "all"):
        picked.append(run_construction_suite(max(trials // 2, 5), seed + 2))
    if inject is not None:
        picked.append(run_injected(inject))
    if emit_plot is not None:
        write_growth_csv(emit_plot)
    total = picked[0]
    for extra in picked[1:]:
        total = total.merge(extra)
    return total
