"""Colored ternary trees: generation, census recursions, growth bounds, signs,
index-function constraints and phase bookkeeping.

A tree is stored as its pre-order code: one character per node, upper case
for nonterminal nodes and lower case for terminals, ``b``/``B`` black and
``r``/``R`` red.  Every nonterminal node is followed by its three subtrees.
For example ``"Brrb"`` is the bracket tree ``[b[r][r][b]]``.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .resonance import approx

# first-generation child patterns, in the canonical order used throughout
FIRST_PATTERNS = ("bbb", "rrb", "rbr", "bbr", "brb")

J_MAX = 5


class MalformedTree(ValueError):
    pass


@dataclass(frozen=True)
class ColoredTree:
    code: str

    def __post_init__(self):
        if not self.code or self.code[0] != "B":
            raise MalformedTree("root must be a black nonterminal node")
        if set(self.code) - set("BRbr"):
            raise MalformedTree(f"bad symbols in {self.code!r}")
        if self._parse()[1] != len(self.code):
            raise MalformedTree(f"{self.code!r} is not a complete ternary tree")

    def _parse(self, start: int = 0):
        # returns (children table, end position)
        children: dict[int, tuple[int, int, int]] = {}

        def walk(i):
            if i >= len(self.code):
                raise MalformedTree(f"{self.code!r} ends early")
            if self.code[i].islower():
                return i + 1
            kids = []
            j = i + 1
            for _ in range(3):
                kids.append(j)
                j = walk(j)
            children[i] = tuple(kids)
            return j

        end = walk(start)
        return children, end

    @cached_property
    def children(self) -> dict[int, tuple[int, int, int]]:
        return self._parse()[0]

    @cached_property
    def parent(self) -> dict[int, int]:
        return {c: p for p, kids in self.children.items() for c in kids}

    @property
    def size(self) -> int:
        return len(self.code)

    @property
    def generation(self) -> int:
        return sum(c.isupper() for c in self.code)

    @property
    def terminals(self) -> list[int]:
        return [i for i, c in enumerate(self.code) if c.islower()]

    @property
    def nonterminals(self) -> list[int]:
        return [i for i, c in enumerate(self.code) if c.isupper()]

    @property
    def black_terminals(self) -> int:
        return self.code.count("b")

    @property
    def red_terminals(self) -> int:
        return self.code.count("r")

    def color(self, node: int) -> str:
        return "black" if self.code[node] in "bB" else "red"

    def bracket(self) -> str:
        """Bracket notation, e.g. ``[b[r][r][b]]``."""
        def render(i):
            if i not in self.children:
                return f"[{self.code[i]}]"
            return "[" + self.code[i].lower() + "".join(render(k) for k in self.children[i]) + "]"

        return render(0)

    def check(self) -> None:
        J = self.generation
        if self.size != 3 * J + 1 or len(self.terminals) != 2 * J + 1:
            raise MalformedTree(f"{self.code!r}: inconsistent node counts")
        for p, kids in self.children.items():
            if self.code[p] == "R" and any(self.code[k] not in "rR" for k in kids):
                raise MalformedTree(f"{self.code!r}: red node with a black child")


def first_generation() -> list[ColoredTree]:
    return [ColoredTree("B" + p) for p in FIRST_PATTERNS]


def expand(tree: ColoredTree) -> list[ColoredTree]:
    """Children in canonical order: terminals left to right, black ones sprouting
    each first-generation pattern in turn, red ones sprouting three red nodes."""
    if not isinstance(tree, ColoredTree):
        raise MalformedTree("expand needs a ColoredTree")
    code = tree.code
    out = []
    for i in tree.terminals:
        head, tail = code[:i], code[i + 1 :]
        if code[i] == "b":
            out.extend(ColoredTree(head + "B" + p + tail) for p in FIRST_PATTERNS)
        else:
            out.append(ColoredTree(head + "Rrrr" + tail))
    return out


def generation(J: int, j_max: int = J_MAX) -> list[ColoredTree]:
    if not 1 <= J <= j_max:
        raise ValueError(f"J must lie in [1, {j_max}] for enumeration, got {J}")
    trees = first_generation()
    for _ in range(J - 1):
        trees = [c for t in trees for c in expand(t)]
    return trees


def generation_codes(J: int, j_max: int = J_MAX) -> list[str]:
    """Same enumeration as :func:`generation` on bare strings (fast path)."""
    if not 1 <= J <= j_max:
        raise ValueError(f"J must lie in [1, {j_max}] for enumeration, got {J}")
    codes = ["B" + p for p in FIRST_PATTERNS]
    for _ in range(J - 1):
        nxt = []
        for code in codes:
            for i, c in enumerate(code):
                if c == "b":
                    head, tail = code[:i], code[i + 1 :]
                    nxt.extend(head + "B" + p + tail for p in FIRST_PATTERNS)
                elif c == "r":
                    nxt.append(code[:i] + "Rrrr" + code[i + 1 :])
        codes = nxt
    return codes


@dataclass(frozen=True)
class GenerationCensus:
    J: int
    N: int
    b: int
    r: int
    per_tree: Counter  # (b_k, r_k) -> multiplicity

    def row(self) -> tuple[int, int, int, int]:
        return (self.J, self.N, self.b, self.r)


def _census_from_counter(J: int, per_tree: Counter) -> GenerationCensus:
    N = sum(per_tree.values())
    b = sum(bk * m for (bk, _), m in per_tree.items())
    r = sum(rk * m for (_, rk), m in per_tree.items())
    return GenerationCensus(J, N, b, r, per_tree)


def census_enumerated(J: int) -> GenerationCensus:
    codes = generation_codes(J)
    return _census_from_counter(J, Counter((c.count("b"), c.count("r")) for c in codes))


_PATTERN_COUNTS = [(p.count("b"), p.count("r")) for p in FIRST_PATTERNS]


def census_recursive(J: int) -> GenerationCensus:
    """Evolve the multiset of ``(b_k, r_k)`` without building trees.

    A black terminal is replaced by each pattern ``(pb, pr)``, giving
    ``(b - 1 + pb, r + pr)``; a red terminal gives ``(b, r + 2)``.  Python
    integers keep the arithmetic exact for any ``J``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    per_tree = Counter(_PATTERN_COUNTS)
    for _ in range(J - 1):
        nxt: Counter = Counter()
        for (b, r), m in per_tree.items():
            for pb, pr in _PATTERN_COUNTS:
                nxt[(b - 1 + pb, r + pr)] += m * b
            if r:
                nxt[(b, r + 2)] += m * r
        per_tree = nxt
    return _census_from_counter(J, per_tree)


def census_totals(J: int) -> list[tuple[int, int, int]]:
    """``(N, b, r)`` for generations ``1..J``."""
    return [census_recursive(j).row()[1:] for j in range(1, J + 1)]


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def bound_check(J: int) -> tuple[int, int, int, bool]:
    """``(N(J), 5^J (2J-1)!!, 10^J Gamma(J+1/2)/sqrt(pi), ok)``.

    The Gamma bound is evaluated exactly through ``Gamma(J+1/2) =
    (2J-1)!! sqrt(pi) / 2^J`` and cross-checked in floating point.
    """
    N = census_recursive(J).N
    bound_a = 5**J * double_factorial(2 * J - 1)
    bound_b_num = 10**J * double_factorial(2 * J - 1)
    assert bound_b_num % 2**J == 0
    bound_b = bound_b_num // 2**J
    approx_b = math.exp(J * math.log(10) + math.lgamma(J + 0.5) - 0.5 * math.log(math.pi))
    if not math.isclose(approx_b, bound_b, rel_tol=1e-9):
        raise ArithmeticError("Gamma-function bound disagrees with the double factorial form")
    return N, bound_a, bound_b, N <= bound_a and N <= bound_b


def write_census_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["J", "N", "b", "r"])
        writer.writerows(rows)


# ----------------------------------------------------------------------------
# signs


def middle_predecessors(tree: ColoredTree, node: int) -> int:
    """Number of strict ancestors (excluding the root) that are middle children."""
    count = 0
    a = tree.parent.get(node)
    while a is not None and a != 0:
        if tree.children[tree.parent[a]][1] == a:
            count += 1
        a = tree.parent.get(a)
    return count


def psgn(tree: ColoredTree, node: int) -> int:
    """``-1`` for a middle child, ``+1`` otherwise (root included)."""
    p = tree.parent.get(node)
    if p is None:
        return 1
    return -1 if tree.children[p][1] == node else 1


def fsgn(tree: ColoredTree, node: int) -> int:
    """Sign after all conjugations along the path from the root."""
    sign = psgn(tree, node)
    a = tree.parent.get(node)
    while a is not None:
        sign *= psgn(tree, a)
        a = tree.parent.get(a)
    return sign


# ----------------------------------------------------------------------------
# index functions and phases


def validate_index_assignment(tree: ColoredTree, assignment: dict[int, int], N: float) -> tuple[bool, list[str]]:
    missing = [i for i in range(tree.size) if i not in assignment]
    if missing:
        raise ValueError(f"assignment misses nodes {missing}")
    n = assignment
    problems = []
    for a, (c1, c2, c3) in tree.children.items():
        combo = n[c1] - n[c2] + n[c3]
        if tree.code[a] == "B":
            if not approx(n[a], combo):
                problems.append(f"node {a}: {n[a]} not ≈ {combo}")
            if approx(n[a], n[c1]) or approx(n[a], n[c3]):
                problems.append(f"node {a}: resonant child index")
        else:
            if n[a] != combo:
                problems.append(f"node {a}: {n[a]} != {combo}")
            if n[a] == n[c1] or n[a] == n[c3]:
                problems.append(f"node {a}: child index equals parent")
    c1, _, c3 = tree.children[0]
    mu1 = 2 * (n[0] - n[c1]) * (n[0] - n[c3])
    if not abs(mu1) > N:
        problems.append(f"root phase |{mu1}| <= {N}")
    return not problems, problems


def find_index_assignment(tree: ColoredTree, N: float, band: int, root: int = 0):
    """First valid assignment by brute force (generations 1 and 2 only)."""
    if tree.generation > 2:
        raise ValueError("assignment search is limited to J <= 2")
    import itertools

    free = [i for i in range(1, tree.size)]
    rng = range(-band, band + 1)
    for values in itertools.product(rng, repeat=len(free)):
        a = {0: root, **dict(zip(free, values))}
        if validate_index_assignment(tree, a, N)[0]:
            return a
    return None


@dataclass(frozen=True)
class PhaseLedger:
    mu: tuple
    mu_tilde: tuple
    mu_hat: tuple

    def recover_mu(self) -> list:
        out = [self.mu_tilde[0]]
        out += [self.mu_tilde[j] - self.mu_tilde[j - 1] for j in range(1, len(self.mu_tilde))]
        return out


def phase_ledger(mu) -> PhaseLedger:
    mu = list(mu)
    if not mu:
        raise ValueError("empty phase list")
    tilde = list(np.cumsum(mu)) if not all(isinstance(m, int) for m in mu) else list(_cumsum_int(mu))
    hat = []
    acc = 1
    for m in tilde:
        acc = acc * m
        hat.append(acc)
    return PhaseLedger(tuple(mu), tuple(tilde), tuple(hat))


def _cumsum_int(xs):
    s = 0
    for x in xs:
        s += x
        yield s


def in_C_J(ledger: PhaseLedger, J: int) -> bool:
    """Membership test comparing ``mu~_{J+1}`` with ``mu~_J`` and ``mu_1``."""
    if len(ledger.mu_tilde) < J + 1:
        raise ValueError(f"ledger needs at least {J + 1} phases")
    nxt = abs(ledger.mu_tilde[J])
    c = (2 * J + 3) ** 3
    return nxt <= c * abs(ledger.mu_tilde[J - 1]) ** 0.99 or nxt <= c * abs(ledger.mu[0]) ** 0.99
