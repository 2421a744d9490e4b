"""Argumentation frameworks: finite and lazily presented.

Arguments are natural-number indices.  A finite AF stores the attack
relation explicitly with adjacency in both directions (attacker lookups
drive the tree reductions, so the reverse index matters).  A lazy AF is
a total decidable attack predicate over an infinite (or prefix-bounded)
universe together with a per-argument attacker description: a finite
explicit list and/or affine-indexed infinite families.

All values are immutable after construction; every operation is pure.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Tuple

from .errors import DomainError


# -- pairing -------------------------------------------------------------


def pair(x: int, y: int) -> int:
    """Cantor pairing <x,y> = (x+y)(x+y+1)/2 + y, a bijection N^2 -> N."""
    if x < 0 or y < 0:
        raise ValueError("pairing is defined on naturals")
    s = x + y
    return s * (s + 1) // 2 + y


def unpair(z: int) -> Tuple[int, int]:
    """Inverse of pair."""
    if z < 0:
        raise ValueError("unpair is defined on naturals")
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


# -- index maps ------------------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """k -> a*k + b with a >= 1 (strictly increasing, injective)."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 1 or self.b < 0:
            raise ValueError("affine step needs a >= 1 and b >= 0")

    def apply(self, k: int) -> int:
        return self.a * k + self.b

    def invert(self, v: int) -> Optional[int]:
        if v < self.b or (v - self.b) % self.a:
            return None
        return (v - self.b) // self.a


@dataclass(frozen=True)
class PairLeft:
    """x -> pair(left, x): embeds into the slice of a fixed left component."""

    left: int

    def apply(self, x: int) -> int:
        return pair(self.left, x)

    def invert(self, v: int) -> Optional[int]:
        l, r = unpair(v)
        return r if l == self.left else None


@dataclass(frozen=True)
class PairRight:
    """x -> pair(x, right)."""

    right: int

    def apply(self, x: int) -> int:
        return pair(x, self.right)

    def invert(self, v: int) -> Optional[int]:
        l, r = unpair(v)
        return l if r == self.right else None


@dataclass(frozen=True)
class IndexMap:
    """Composition of injective steps, applied left to right.

    User-supplied families are plain affine maps; pairing steps appear
    when generators embed families through disjoint unions or path
    codings.  Every step is strictly increasing, so members enumerate in
    increasing index order and inversion decides membership.
    """

    steps: Tuple = ()

    @staticmethod
    def affine(a: int, b: int) -> "IndexMap":
        return IndexMap((Affine(a, b),))

    @staticmethod
    def identity() -> "IndexMap":
        return IndexMap((Affine(1, 0),))

    def then(self, step) -> "IndexMap":
        return IndexMap(self.steps + (step,))

    def __call__(self, k: int) -> int:
        v = k
        for step in self.steps:
            v = step.apply(v)
        return v

    def invert(self, value: int) -> Optional[int]:
        v = value
        for step in reversed(self.steps):
            v = step.invert(v)
            if v is None:
                return None
        return v

    @property
    def pure_affine(self) -> Optional[Affine]:
        if len(self.steps) == 1 and isinstance(self.steps[0], Affine):
            return self.steps[0]
        return None


# -- attacker descriptions --------------------------------------------------


@dataclass(frozen=True)
class AttackerFamily:
    """An infinite family of attackers {index_map(k) : k >= k_start}.

    defense_stage_expr, when present, is the closed form (affine in k) of
    the least stage among the counter-attackers of member k.  It is
    generator-supplied and always validated against samples before any
    symbolic use; NEVER means no member is ever counter-attacked.
    """

    index_map: IndexMap
    k_start: int = 0
    defense_stage_expr: object = None  # AffineOrdinalExpr | NEVER | None

    def member(self, k: int) -> int:
        return self.index_map(k)

    def contains(self, index: int) -> bool:
        k = self.index_map.invert(index)
        return k is not None and k >= self.k_start

    def members_below(self, bound: int) -> list:
        """(k, index) pairs with index < bound; maps increase, so finite."""
        out = []
        k = self.k_start
        while True:
            v = self.index_map(k)
            if v >= bound:
                return out
            out.append((k, v))
            k += 1


@dataclass(frozen=True)
class AttackerSpec:
    """Complete description of the attackers of one argument."""

    explicit: Tuple[int, ...] = ()
    families: Tuple[AttackerFamily, ...] = ()

    @property
    def is_explicit(self) -> bool:
        return not self.families

    def contains(self, index: int) -> bool:
        return index in self.explicit or any(f.contains(index) for f in self.families)


# -- finite AFs ---------------------------------------------------------------


_NAME_RE = re.compile(r"[a-zA-Z0-9_]+\Z")


class FiniteAF:
    """A finite AF over arguments 0..n-1 with an explicit attack relation.

    Self-attacks are permitted.  Display names default to a0..a{n-1};
    custom names must be unique and match [a-zA-Z0-9_]+.
    """

    __slots__ = ("n", "attack_pairs", "_fwd", "_rev", "names", "_name_index")

    def __init__(self, n: int, attacks: Iterable[Tuple[int, int]] = (),
                 names: Optional[Sequence[str]] = None):
        if n < 0:
            raise ValueError("argument count must be >= 0")
        self.n = n
        pairs = frozenset((int(x), int(y)) for x, y in attacks)
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"attack ({x},{y}) out of range for n={n}")
        self.attack_pairs = pairs
        fwd = [[] for _ in range(n)]
        rev = [[] for _ in range(n)]
        for x, y in pairs:
            fwd[x].append(y)
            rev[y].append(x)
        self._fwd = tuple(tuple(sorted(t)) for t in fwd)
        self._rev = tuple(tuple(sorted(t)) for t in rev)
        if names is None:
            names = tuple(f"a{i}" for i in range(n))
        else:
            names = tuple(names)
            if len(names) != n:
                raise ValueError("need one name per argument")
            for nm in names:
                if not _NAME_RE.match(nm):
                    raise ValueError(f"bad argument name {nm!r}")
            if len(set(names)) != n:
                raise ValueError("argument names must be unique")
        self.names = names
        self._name_index = {nm: i for i, nm in enumerate(names)}

    # -- basic queries

    def _check(self, i: int):
        if not (0 <= i < self.n):
            raise IndexError(f"argument index {i} out of range [0,{self.n})")

    def attacks(self, x: int, y: int) -> bool:
        self._check(x)
        self._check(y)
        return (x, y) in self.attack_pairs

    def attackers_of(self, x: int) -> Tuple[int, ...]:
        self._check(x)
        return self._rev[x]

    def targets_of(self, x: int) -> Tuple[int, ...]:
        self._check(x)
        return self._fwd[x]

    def name(self, i: int) -> str:
        self._check(i)
        return self.names[i]

    def index_of(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise KeyError(f"unknown argument name {name!r}") from None

    def _as_extension(self, s) -> frozenset:
        s = frozenset(s)
        for x in s:
            self._check(x)
        return s

    # -- the primitive set operators

    def plus_set(self, s) -> frozenset:
        """S+ = arguments attacked by S."""
        s = self._as_extension(s)
        out = set()
        for y in s:
            out.update(self._fwd[y])
        return frozenset(out)

    def minus_set(self, s) -> frozenset:
        """S- = arguments attacking S."""
        s = self._as_extension(s)
        out = set()
        for y in s:
            out.update(self._rev[y])
        return frozenset(out)

    def defense_step(self, s) -> frozenset:
        """All x whose every attacker is attacked by s; monotone in s."""
        s = self._as_extension(s)
        s_plus = self.plus_set(s)
        return frozenset(x for x in range(self.n)
                         if all(a in s_plus for a in self._rev[x]))

    def is_conflict_free(self, s) -> bool:
        s = self._as_extension(s)
        return all(not (x, y) in self.attack_pairs for x in s for y in s)

    # -- editing (used by counterexample minimization)

    def remove_argument(self, i: int) -> "FiniteAF":
        self._check(i)
        remap = {old: new for new, old in
                 enumerate(o for o in range(self.n) if o != i)}
        attacks = [(remap[x], remap[y]) for x, y in self.attack_pairs
                   if x != i and y != i]
        names = tuple(self.names[o] for o in range(self.n) if o != i)
        return FiniteAF(self.n - 1, attacks, names)

    def __eq__(self, other):
        if not isinstance(other, FiniteAF):
            return NotImplemented
        return self.n == other.n and self.attack_pairs == other.attack_pairs

    def __hash__(self):
        return hash((self.n, self.attack_pairs))

    def __repr__(self):
        return f"FiniteAF(n={self.n}, attacks={len(self.attack_pairs)})"


# -- lazy AFs -----------------------------------------------------------------


class LazyAF:
    """An AF presented by a total attack predicate plus attacker specs.

    universe is None for all of N, or an int bounding an explicit finite
    prefix.  Any whole-universe scan must go through an explicit
    inspection window; there are no unbounded operations here.

    The attacker spec is declarative data about the predicate and is
    never trusted blindly: spot_check_attacker_spec probes soundness and
    completeness on a window, and the stage verifier re-probes whatever
    it relies on.
    """

    def __init__(self, attack_predicate: Callable[[int, int], bool],
                 attacker_spec_fn: Callable[[int], AttackerSpec],
                 universe: Optional[int] = None,
                 naming: Optional[Callable[[int], str]] = None,
                 candidate_stages=None):
        self._predicate = attack_predicate
        self._spec_fn = attacker_spec_fn
        self.universe = universe
        self._naming = naming
        self.candidate_stages = candidate_stages
        self._spec_cache = {}

    def _check(self, i: int):
        if i < 0 or (self.universe is not None and i >= self.universe):
            raise IndexError(f"argument index {i} outside the universe")

    def attacks(self, x: int, y: int) -> bool:
        self._check(x)
        self._check(y)
        return bool(self._predicate(x, y))

    def attacker_spec(self, x: int) -> AttackerSpec:
        self._check(x)
        spec = self._spec_cache.get(x)
        if spec is None:
            spec = self._spec_fn(x)
            self._spec_cache[x] = spec
        return spec

    def name(self, i: int) -> str:
        self._check(i)
        return self._naming(i) if self._naming else f"x{i}"


def materialize(af: LazyAF, n: int) -> FiniteAF:
    """The finite restriction of a lazy AF to arguments below n.

    Faithful for attack edges inside the window; stages computed on the
    result agree with the full AF exactly when the window is
    attacker-complete for the arguments of interest.
    """
    if af.universe is not None:
        n = min(n, af.universe)
    attacks = [(x, y) for x in range(n) for y in range(n) if af.attacks(x, y)]
    names = [af.name(i) for i in range(n)]
    if len(set(names)) != n:
        names = None
    return FiniteAF(n, attacks, names)


def spot_check_attacker_spec(af: LazyAF, args: Iterable[int], bound: int,
                             family_probe: int = 8) -> list:
    """Probe spec soundness/completeness against the attack predicate.

    For each argument: every spec member must really attack it, and every
    attacker found by scanning indices < bound must appear in the spec.
    Returns human-readable violation strings (empty = clean).
    """
    problems = []
    for a in args:
        spec = af.attacker_spec(a)
        for b in spec.explicit:
            if not af.attacks(b, a):
                problems.append(f"spec of {a}: explicit attacker {b} does not attack")
        for fam in spec.families:
            for k in range(fam.k_start, fam.k_start + family_probe):
                m = fam.member(k)
                if af.universe is not None and m >= af.universe:
                    break
                if not af.attacks(m, a):
                    problems.append(
                        f"spec of {a}: family member {m} (k={k}) does not attack")
        hi = bound if af.universe is None else min(bound, af.universe)
        for x in range(hi):
            if af.attacks(x, a) and not spec.contains(x):
                problems.append(f"spec of {a}: attacker {x} missing from spec")
    return problems


# -- APX text format ----------------------------------------------------------


class ApxParseError(ValueError):
    """Malformed APX input; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_ARG_RE = re.compile(r"arg\(([a-zA-Z0-9_]+)\)\.\Z")
_ATT_RE = re.compile(r"att\(([a-zA-Z0-9_]+),\s*([a-zA-Z0-9_]+)\)\.\Z")


def parse_apx(text: str) -> FiniteAF:
    """Parse APX: arg(<name>). / att(<x>,<y>). lines, % comments.

    The order of arg lines fixes the argument enumeration, bit-exact:
    the first arg line is index 0, and so on.
    """
    names = []
    seen = set()
    attacks = []
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        m = _ARG_RE.match(line)
        if m:
            nm = m.group(1)
            if nm in seen:
                raise ApxParseError(f"duplicate argument {nm!r}", lineno)
            seen.add(nm)
            names.append(nm)
            continue
        m = _ATT_RE.match(line)
        if m:
            pending.append((m.group(1), m.group(2), lineno))
            continue
        raise ApxParseError(f"unrecognized line {line!r}", lineno)
    index = {nm: i for i, nm in enumerate(names)}
    for x, y, lineno in pending:
        if x not in index:
            raise ApxParseError(f"attack references unknown argument {x!r}", lineno)
        if y not in index:
            raise ApxParseError(f"attack references unknown argument {y!r}", lineno)
        attacks.append((index[x], index[y]))
    return FiniteAF(len(names), attacks, names)


def format_apx(af: FiniteAF) -> str:
    lines = [f"arg({af.name(i)})." for i in range(af.n)]
    lines += [f"att({af.name(x)},{af.name(y)})."
              for x, y in sorted(af.attack_pairs)]
    return "\n".join(lines) + ("\n" if lines else "")


def format_dot(af: FiniteAF) -> str:
    lines = ["digraph af {"]
    lines += [f'  "{af.name(i)}";' for i in range(af.n)]
    lines += [f'  "{af.name(x)}" -> "{af.name(y)}";'
              for x, y in sorted(af.attack_pairs)]
    lines.append("}")
    return "\n".join(lines) + "\n"
