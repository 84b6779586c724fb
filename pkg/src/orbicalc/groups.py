"""Finite group combinatorics on explicit multiplication tables.

Groups are immutable: an order-n group stores an n x n index table with the
identity at index 0.  Subgroups are sorted element tuples of a parent group.
Everything downstream (conjugacy, normalizers, double cosets) picks
deterministic representatives: least element index, or lexicographically
least element set for subgroups.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import reduce

DEFAULT_ORDER_CAP = 2048


class GroupError(ValueError):
    pass


class FiniteGroup:
    """Group given by a validated Cayley table; element 0 is the identity."""

    __slots__ = ("order", "mul", "inv", "name", "_orders", "_exponent",
                 "_abelian", "_chartable", "_lock", "__weakref__")

    def __init__(self, mul: list[list[int]], name: str | None = None,
                 validate: bool = True):
        n = len(mul)
        table = tuple(tuple(int(x) for x in row) for row in mul)
        if any(len(row) != n for row in table):
            raise GroupError("multiplication table must be square")
        for row in table:
            for x in row:
                if not 0 <= x < n:
                    raise GroupError("table entry out of range")
        self.order = n
        self.mul = table
        self.name = name
        if validate:
            self._validate()
        inv = [None] * n
        for g in range(n):
            for h in range(n):
                if table[g][h] == 0:
                    inv[g] = h
                    break
            if inv[g] is None or table[inv[g]][g] != 0:
                raise GroupError("element without two-sided inverse")
        self.inv = tuple(inv)
        self._orders = None
        self._exponent = None
        self._abelian = None
        self._chartable = None
        self._lock = threading.Lock()

    def _validate(self):
        n = self.order
        t = self.mul
        for g in range(n):
            if t[0][g] != g or t[g][0] != g:
                raise GroupError("index 0 is not a two-sided identity")
        if n <= 256:
            for a in range(n):
                ta = t[a]
                for b in range(n):
                    tab = t[ta[b]]
                    tb = t[b]
                    for c in range(n):
                        if tab[c] != ta[tb[c]]:
                            raise GroupError("multiplication table is not associative")
        else:
            # Light's test on a generating set keeps validation quadratic
            gens = self._greedy_generators()
            for a in gens:
                for x in range(n):
                    txa = t[x][a]
                    for y in range(n):
                        if t[txa][y] != t[x][t[a][y]]:
                            raise GroupError("multiplication table is not associative")

    def _greedy_generators(self) -> list[int]:
        gens = []
        reach = {0}
        for g in range(1, self.order):
            if g not in reach:
                gens.append(g)
                reach = self._closure(gens)
                if len(reach) == self.order:
                    break
        return gens

    def _closure(self, gens) -> set[int]:
        seen = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul[x][g]
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return seen

    # -- basic element functions ----------------------------------------
    def conj(self, g: int, x: int) -> int:
        """g x g^{-1}."""
        return self.mul[self.mul[g][x]][self.inv[g]]

    def element_order(self, g: int) -> int:
        if self._orders is None:
            orders = []
            for x in range(self.order):
                k, y = 1, x
                while y != 0:
                    y = self.mul[y][x]
                    k += 1
                orders.append(k)
            self._orders = tuple(orders)
        return self._orders[g]

    @property
    def exponent(self) -> int:
        if self._exponent is None:
            self._exponent = reduce(math.lcm,
                                    (self.element_order(g) for g in range(self.order)), 1)
        return self._exponent

    @property
    def is_abelian(self) -> bool:
        if self._abelian is None:
            self._abelian = all(self.mul[a][b] == self.mul[b][a]
                                for a in range(self.order) for b in range(self.order))
        return self._abelian

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = self.inv[g], -k
        y = 0
        for _ in range(k):
            y = self.mul[y][g]
        return y

    def subgroup_generated(self, gens) -> "Subgroup":
        elems = sorted(self._closure(list(gens)))
        return Subgroup(self, elems, _trusted=True)

    def elements(self) -> range:
        return range(self.order)

    def __repr__(self):
        return f"FiniteGroup({self.name or 'order ' + str(self.order)})"


class Subgroup:
    """Sorted element tuple of a parent group, closed under mul and inverse."""

    __slots__ = ("group", "elements", "_index", "_gen")

    def __init__(self, group: FiniteGroup, elements, _trusted: bool = False):
        elems = tuple(sorted(set(int(x) for x in elements)))
        if not _trusted:
            if 0 not in elems:
                raise GroupError("subgroup must contain the identity")
            eset = set(elems)
            for a in elems:
                if group.inv[a] not in eset:
                    raise GroupError("subgroup not closed under inverse")
                for b in elems:
                    if group.mul[a][b] not in eset:
                        raise GroupError("subgroup not closed under multiplication")
        self.group = group
        self.elements = elems
        self._index = {g: i for i, g in enumerate(elems)}
        self._gen = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: int) -> bool:
        return g in self._index

    def __eq__(self, other):
        return (isinstance(other, Subgroup) and other.group is self.group
                and other.elements == self.elements)

    def __hash__(self):
        return hash((id(self.group), self.elements))

    def __repr__(self):
        return f"Subgroup{self.elements}"

    @property
    def is_cyclic(self) -> bool:
        return self.generator() is not None

    def generator(self) -> int | None:
        """Least element whose order equals |H|, or None if not cyclic."""
        if self._gen is None:
            self._gen = -1
            for g in self.elements:
                if self.group.element_order(g) == self.order:
                    self._gen = g
                    break
        return self._gen if self._gen >= 0 else None

    def as_group(self) -> tuple[FiniteGroup, dict[int, int]]:
        """Standalone FiniteGroup on reindexed elements, plus parent->local map."""
        idx = self._index
        table = [[idx[self.group.mul[a][b]] for b in self.elements]
                 for a in self.elements]
        return FiniteGroup(table, validate=False), dict(idx)

    def conjugate(self, g: int) -> "Subgroup":
        grp = self.group
        return Subgroup(grp, [grp.conj(g, x) for x in self.elements], _trusted=True)


@dataclass
class CyclicClass:
    """Conjugacy orbit of a cyclic subgroup with conjugating witnesses."""

    representative: Subgroup
    orbit: list[Subgroup]
    witnesses: dict[tuple[int, ...], int]  # member elements -> g with g rep g^-1 = member


@dataclass
class ConjStructure:
    classes: list[list[int]]
    class_of: list[int]
    cyclic_classes: list[CyclicClass] = field(default_factory=list)


def build_group(mul: list[list[int]] | None = None,
                perm_gens: list[list[int]] | None = None,
                degree: int | None = None,
                name: str | None = None,
                max_order: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Build a validated group from a Cayley table or permutation generators.

    Permutation generators are bijections on range(degree) given as image
    lists; the closure is enumerated breadth-first (identity gets index 0)
    and the table synthesized from composition.
    """
    if (mul is None) == (perm_gens is None):
        raise GroupError("provide exactly one of mul or perm_gens")
    if mul is not None:
        if len(mul) > max_order:
            raise GroupError(f"group order {len(mul)} exceeds cap {max_order}")
        return FiniteGroup(mul, name=name)
    if degree is None:
        degree = max((max(g) for g in perm_gens if g), default=-1) + 1
    gens = []
    for g in perm_gens:
        g = tuple(int(x) for x in g)
        if sorted(g) != list(range(degree)):
            raise GroupError(f"generator {g} is not a bijection on {degree} points")
        gens.append(g)
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    frontier = [ident]
    while frontier:
        cur = frontier.pop(0)
        for g in gens:
            nxt = tuple(g[cur[i]] for i in range(degree))
            if nxt not in index:
                if len(elems) >= max_order:
                    raise GroupError(f"closure exceeds order cap {max_order}")
                index[nxt] = len(elems)
                elems.append(nxt)
                frontier.append(nxt)
    n = len(elems)
    table = [[0] * n for _ in range(n)]
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            # product acts as "apply b, then a"
            table[i][j] = index[tuple(a[b[t]] for t in range(degree))]
    return FiniteGroup(table, name=name, validate=False)


def conjugacy_classes(g: FiniteGroup) -> ConjStructure:
    """Element conjugacy classes plus conjugacy orbits of cyclic subgroups."""
    n = g.order
    class_of = [-1] * n
    classes = []
    for x in range(n):
        if class_of[x] >= 0:
            continue
        orbit = sorted({g.conj(u, x) for u in range(n)})
        cid = len(classes)
        for y in orbit:
            class_of[y] = cid
        classes.append(orbit)
    return ConjStructure(classes=classes, class_of=class_of,
                         cyclic_classes=cyclic_subgroup_classes(g))


def cyclic_subgroup_classes(g: FiniteGroup) -> list[CyclicClass]:
    """Conjugacy classes of cyclic subgroups, deterministically represented.

    Representative = lexicographically least element set in the orbit; class
    list sorted by (subgroup order, representative elements).
    """
    n = g.order
    seen: dict[tuple[int, ...], Subgroup] = {}
    for x in range(n):
        h = g.subgroup_generated([x])
        seen.setdefault(h.elements, h)
    remaining = dict(seen)
    out = []
    while remaining:
        key = min(remaining)
        base = remaining[key]
        witnesses = {}
        orbit_keys = []
        for u in range(n):
            cj = base.conjugate(u)
            if cj.elements not in witnesses:
                witnesses[cj.elements] = u
                orbit_keys.append(cj.elements)
        rep_key = min(witnesses)
        # re-witness from the canonical representative: w u^-1 maps rep -> member
        w0 = witnesses[rep_key]
        rep = remaining.get(rep_key) or Subgroup(g, rep_key, _trusted=True)
        rewit = {}
        for k, u in witnesses.items():
            rewit[k] = g.mul[u][g.inv[w0]]
        orbit = []
        for k in sorted(witnesses):
            orbit.append(remaining.pop(k, None) or Subgroup(g, k, _trusted=True))
        out.append(CyclicClass(representative=rep, orbit=orbit, witnesses=rewit))
    out.sort(key=lambda c: (c.representative.order, c.representative.elements))
    return out


def normalizer(g: FiniteGroup, h: Subgroup) -> Subgroup:
    eset = set(h.elements)
    members = [u for u in range(g.order)
               if {g.conj(u, x) for x in h.elements} == eset]
    return Subgroup(g, members, _trusted=True)


def normalizer_action(g: FiniteGroup, sigma: Subgroup) -> dict[int, int]:
    """Power map of the conjugation action N(sigma) -> Aut(sigma).

    For cyclic sigma = <s> of order m, returns {u: a} with u s u^{-1} = s^a,
    a in (Z/m)^*.  The map is a group homomorphism onto its image.
    """
    s = sigma.generator()
    if s is None:
        raise GroupError("normalizer_action needs a cyclic subgroup")
    m = sigma.order
    powers = {}
    y = 0
    for k in range(m):
        powers[y] = k
        y = g.mul[y][s]
    action = {}
    for u in normalizer(g, sigma).elements:
        action[u] = powers[g.conj(u, s)] % m if m > 1 else 1
        if m > 1 and math.gcd(action[u], m) != 1:
            raise GroupError("conjugation did not induce an automorphism")
    return action


def centralizer(g: FiniteGroup, x: int) -> Subgroup:
    members = [h for h in range(g.order) if g.mul[h][x] == g.mul[x][h]]
    return Subgroup(g, members, _trusted=True)


@dataclass
class DoubleCoset:
    representative: int
    elements: list[int]
    intersection: Subgroup  # sigma intersect tau sigma tau^{-1}


def double_cosets(g: FiniteGroup, sigma: Subgroup) -> list[DoubleCoset]:
    """Representatives of sigma\\G/sigma with conjugated intersections.

    Representative = least element index in each coset; cosets listed by
    representative order.
    """
    n = g.order
    assigned = [False] * n
    out = []
    for tau in range(n):
        if assigned[tau]:
            continue
        coset = sorted({g.mul[a][g.mul[tau][b]]
                        for a in sigma.elements for b in sigma.elements})
        for y in coset:
            assigned[y] = True
        conj_sigma = {g.mul[g.mul[tau][s]][g.inv[tau]] for s in sigma.elements}
        inter = Subgroup(g, sorted(set(sigma.elements) & conj_sigma), _trusted=True)
        out.append(DoubleCoset(representative=tau, elements=coset, intersection=inter))
    return out


def generators_of(sigma: Subgroup) -> list[int]:
    """gen(sigma): elements of order |sigma|; gen(1) = {identity}."""
    s = sigma.generator()
    if s is None:
        raise GroupError("generators_of needs a cyclic subgroup")
    m = sigma.order
    return sorted(x for x in sigma.elements if sigma.group.element_order(x) == m)


# ---------------------------------------------------------------------------
# named constructors
# ---------------------------------------------------------------------------

def cyclic_group(m: int) -> FiniteGroup:
    table = [[(a + b) % m for b in range(m)] for a in range(m)]
    return FiniteGroup(table, name=f"C{m}", validate=False)


def direct_product(a: FiniteGroup, b: FiniteGroup, name: str | None = None) -> FiniteGroup:
    na, nb = a.order, b.order
    table = [[0] * (na * nb) for _ in range(na * nb)]
    for x1 in range(na):
        for y1 in range(nb):
            i = x1 * nb + y1
            for x2 in range(na):
                for y2 in range(nb):
                    j = x2 * nb + y2
                    table[i][j] = a.mul[x1][x2] * nb + b.mul[y1][y2]
    return FiniteGroup(table, name=name or f"{a.name}x{b.name}", validate=False)


def dihedral_group(k: int) -> FiniteGroup:
    """Symmetries of the regular k-gon, order 2k."""
    rot = [(i + 1) % k for i in range(k)]
    ref = [(k - i) % k for i in range(k)]
    return build_group(perm_gens=[rot, ref], degree=k, name=f"D{k}")


def symmetric_group(n: int) -> FiniteGroup:
    gens = []
    t = list(range(n))
    t[0], t[1] = t[1], t[0]
    gens.append(t)
    gens.append([(i + 1) % n for i in range(n)])
    return build_group(perm_gens=gens, degree=n, name=f"S{n}")


def alternating_group_4() -> FiniteGroup:
    return build_group(perm_gens=[[1, 0, 3, 2], [1, 2, 0, 3]], degree=4, name="A4")


def quaternion_group() -> FiniteGroup:
    # elements 1, i, j, k, -1, -i, -j, -k as (sign, axis) pairs
    labels = [(1, 0), (1, 1), (1, 2), (1, 3), (-1, 0), (-1, 1), (-1, 2), (-1, 3)]
    mul_axis = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    index = {lab: i for i, lab in enumerate(labels)}
    table = [[0] * 8 for _ in range(8)]
    for i, (s1, a1) in enumerate(labels):
        for j, (s2, a2) in enumerate(labels):
            s, a = mul_axis[(a1, a2)]
            table[i][j] = index[(s * s1 * s2, a)]
    return FiniteGroup(table, name="Q8", validate=True)


def klein_four() -> FiniteGroup:
    return direct_product(cyclic_group(2), cyclic_group(2), name="C2xC2")
