"""Finite G-sets as desk-scale orbifolds: equivariant K0, fixed points,
the cyclic-subgroup decomposition with SNF certificates, the inertia-form
dimension identity, and the double-coset (Mackey) scalar check.

Every decomposition is computed orbit by orbit: a transitive G-set is
canonicalized to its coset space G/H and the per-orbit block is cached by the
stabilizer, so large random unions reuse the same exact blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from weakref import WeakKeyDictionary

from .exact import Cyclotomic, is_n_local
from .fieldlin import rank as field_rank
from .groups import FiniteGroup, GroupError, Subgroup, conjugacy_classes, \
    cyclic_subgroup_classes, normalizer, normalizer_action
from .lattice import LatticeMap, invariant_sublattice, is_iso_over_localization, \
    mat_mul, mat_vec, merge_invariant_factors, snf_diagonal, solve_in_lattice, \
    solve_rational
from .repring import CharacterTable, RepRingElement, character_table, \
    cyclic_group_ring_decomposition, cyclic_ring, primitive_idempotent, \
    rational_form, restriction_matrix, _close_exponents, \
    _phi_component_power_matrix, _subgroup_as_group, vistoli_decompose

_block_cache: "WeakKeyDictionary[FiniteGroup, dict]" = WeakKeyDictionary()


class GSet:
    """Finite set with a validated left G-action table act[g][x]."""

    def __init__(self, group: FiniteGroup, act: list[list[int]],
                 validate: bool = True):
        self.group = group
        self.act = tuple(tuple(int(x) for x in row) for row in act)
        self.size = len(self.act[0]) if self.act else 0
        if len(self.act) != group.order:
            raise GroupError("action table needs one row per group element")
        if validate:
            self._validate()

    def _validate(self):
        n, m = self.group.order, self.size
        for row in self.act:
            if len(row) != m or any(not 0 <= x < m for x in row):
                raise GroupError("action table entry out of range")
        if any(self.act[0][x] != x for x in range(m)):
            raise GroupError("identity does not act trivially")
        mul = self.group.mul
        for g in range(n):
            ag = self.act[g]
            for h in range(n):
                ah = self.act[h]
                agh = self.act[mul[g][h]]
                for x in range(m):
                    if ag[ah[x]] != agh[x]:
                        raise GroupError("action table is not compatible with "
                                         "the group multiplication")

    # -- constructions ---------------------------------------------------
    @classmethod
    def point(cls, group: FiniteGroup) -> "GSet":
        return cls(group, [[0]] * group.order, validate=False)

    @classmethod
    def from_cosets(cls, group: FiniteGroup, h: Subgroup) -> "GSet":
        """Canonical transitive G-set on the left cosets of H, points ordered
        by least coset element; point 0 is H itself."""
        reps, index = _coset_points(group, h)
        act = [[0] * len(reps) for _ in range(group.order)]
        for g in range(group.order):
            for y, t in enumerate(reps):
                act[g][y] = index[_coset_key(group, h, group.mul[g][t])]
        return cls(group, act, validate=False)

    @classmethod
    def disjoint_union(cls, parts: list["GSet"]) -> "GSet":
        group = parts[0].group
        if any(p.group is not group for p in parts):
            raise GroupError("disjoint union needs a common group")
        act = []
        for g in range(group.order):
            row = []
            offset = 0
            for p in parts:
                row.extend(offset + p.act[g][x] for x in range(p.size))
                offset += p.size
            act.append(row)
        return cls(group, act, validate=False)

    # -- structure -------------------------------------------------------
    def orbits(self) -> list["Orbit"]:
        seen = [False] * self.size
        out = []
        for x in range(self.size):
            if seen[x]:
                continue
            transporter = {x: 0}
            frontier = [x]
            while frontier:
                y = frontier.pop(0)
                for g in range(self.group.order):
                    z = self.act[g][y]
                    if z not in transporter:
                        transporter[z] = self.group.mul[g][transporter[y]]
                        frontier.append(z)
            points = sorted(transporter)
            for y in points:
                seen[y] = True
            stab = Subgroup(self.group,
                            [g for g in range(self.group.order)
                             if self.act[g][x] == x], _trusted=True)
            out.append(Orbit(gset=self, base=x, points=points,
                             transporters={y: transporter[y] for y in points},
                             stabilizer=stab))
        return out

    def fixed_points(self, h: Subgroup) -> "FixedPointSet":
        """Points fixed by every element of H, with the induced N(H)-action."""
        if h.group is not self.group:
            raise GroupError("subgroup of a different group")
        pts = [x for x in range(self.size)
               if all(self.act[g][x] == x for g in h.elements)]
        nh = normalizer(self.group, h)
        index = {x: i for i, x in enumerate(pts)}
        perms = {u: tuple(index[self.act[u][x]] for x in pts) for u in nh.elements}
        return FixedPointSet(gset=self, subgroup=h, points=pts,
                             normalizer=nh, perms=perms)


def _coset_key(group: FiniteGroup, h: Subgroup, g: int) -> int:
    return min(group.mul[g][x] for x in h.elements)


def _coset_points(group: FiniteGroup, h: Subgroup):
    keys = sorted({_coset_key(group, h, g) for g in range(group.order)})
    return keys, {k: i for i, k in enumerate(keys)}


@dataclass
class Orbit:
    gset: GSet
    base: int
    points: list[int]
    transporters: dict[int, int]   # y -> g with g*base = y
    stabilizer: Subgroup


@dataclass
class FixedPointSet:
    gset: GSet
    subgroup: Subgroup
    points: list[int]
    normalizer: Subgroup
    perms: dict[int, tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.points)

    def as_gset(self) -> GSet:
        """Residual action of N(H) (as a standalone group) on the fixed set."""
        n_group, index_map = _subgroup_as_group(self.normalizer)
        act = [None] * n_group.order
        for u, local in index_map.items():
            act[local] = list(self.perms[u])
        return GSet(n_group, act)


# ---------------------------------------------------------------------------
# equivariant K0
# ---------------------------------------------------------------------------

@dataclass
class OrbitModule:
    orbit: Orbit
    stab_table: CharacterTable            # standalone table of the stabilizer
    local_index: dict[int, int]           # parent -> stabilizer-local element
    basis_size: int
    rational_orbits: list[list[int]] | None  # Galois orbits in rational mode


@dataclass
class EquivariantK0:
    """K0 of [X/G]: one representation ring per orbit, glued orbit-wise."""

    gset: GSet
    mode: str
    orbit_modules: list[OrbitModule]
    offsets: list[int]
    rank: int

    def zero(self):
        return [Fraction(0)] * self.rank

    def one(self):
        """Class of the trivial line bundle."""
        vec = self.zero()
        for om, off in zip(self.orbit_modules, self.offsets):
            if self.mode == "split":
                vec[off + om.stab_table.trivial_index] = Fraction(1)
            else:
                triv = om.stab_table.trivial_index
                idx = next(i for i, orb in enumerate(om.rational_orbits)
                           if triv in orb)
                vec[off + idx] = Fraction(1)
        return vec

    def multiply(self, a, b):
        out = self.zero()
        for om, off in zip(self.orbit_modules, self.offsets):
            size = om.basis_size
            pa = a[off:off + size]
            pb = b[off:off + size]
            if self.mode == "split":
                part = om.stab_table.multiply(pa, pb)
            else:
                part = _rational_multiply(om, pa, pb)
            for i, x in enumerate(part):
                out[off + i] = x
        return out


def _rational_multiply(om: OrbitModule, a, b):
    table = om.stab_table
    k = table.n_classes
    av = [Fraction(0)] * k
    bv = [Fraction(0)] * k
    for idx, orbit in enumerate(om.rational_orbits):
        for i in orbit:
            av[i] += a[idx]
            bv[i] += b[idx]
    vec = table.multiply(av, bv)
    out = []
    for orbit in om.rational_orbits:
        vals = {vec[i] for i in orbit}
        if len(vals) != 1:
            raise ArithmeticError("product left the invariant lattice")
        out.append(vals.pop())
    return out


def equivariant_k0(group: FiniteGroup, x: GSet, mode: str = "split") -> EquivariantK0:
    if mode not in ("split", "rational"):
        raise ValueError("mode must be 'split' or 'rational'")
    if x.group is not group:
        raise GroupError("G-set belongs to a different group")
    orbit_modules = []
    offsets = []
    off = 0
    for orbit in x.orbits():
        stab_group, local = _subgroup_as_group(orbit.stabilizer)
        table = character_table(stab_group)
        if mode == "split":
            size = table.n_classes
            rat_orbits = None
        else:
            rat = rational_form(stab_group)
            rat_orbits = rat.orbits
            size = rat.rank
        orbit_modules.append(OrbitModule(orbit=orbit, stab_table=table,
                                         local_index=local, basis_size=size,
                                         rational_orbits=rat_orbits))
        offsets.append(off)
        off += size
    return EquivariantK0(gset=x, mode=mode, orbit_modules=orbit_modules,
                         offsets=offsets, rank=off)


def rg_action(v: RepRingElement, k0: EquivariantK0, xi):
    """Multiply the class xi by the pull-back of V in R(G), orbit-wise."""
    group = k0.gset.group
    if v.owner is not group:
        raise GroupError("representation ring element owner mismatch")
    table = character_table(group)
    out = k0.zero()
    for om, off in zip(k0.orbit_modules, k0.offsets):
        res = _restriction_to_stab(group, table, om)
        res_v = mat_vec(res, list(v.coords))
        if k0.mode == "split":
            part = om.stab_table.multiply(res_v,
                                          xi[off:off + om.basis_size])
        else:
            res_orb = []
            for orbit in om.rational_orbits:
                vals = {res_v[i] for i in orbit}
                if len(vals) != 1:
                    raise ArithmeticError("restriction not Galois-invariant")
                res_orb.append(vals.pop())
            part = _rational_multiply(om, res_orb, xi[off:off + om.basis_size])
        for i, val in enumerate(part):
            out[off + i] = val
    return out


def _restriction_to_stab(group, table, om: OrbitModule):
    """Matrix of Res^G_H in the stabilizer's own character basis."""
    stab_table = om.stab_table
    rows = [[0] * table.n_classes for _ in range(stab_table.n_classes)]
    cond = math.lcm(table.conductor, stab_table.conductor)
    parent_elems = om.orbit.stabilizer.elements
    for i in range(table.n_classes):
        restricted = []
        for k in range(stab_table.n_classes):
            rep_local = stab_table.class_reps[k]
            rep_global = parent_elems[rep_local]
            restricted.append(table.value(i, rep_global).lift(cond))
        for u in range(stab_table.n_classes):
            acc = Cyclotomic.rational(0, cond)
            for k in range(stab_table.n_classes):
                acc = acc + restricted[k] * stab_table.values[u][k].conj() \
                    * stab_table.class_sizes[k]
            c = acc.as_fraction() / stab_table.group.order
            if c.denominator != 1:
                raise ArithmeticError("restriction multiplicity not integral")
            rows[u][i] = int(c)
    return rows


# ---------------------------------------------------------------------------
# the orbit-wise decomposition blocks
# ---------------------------------------------------------------------------

@dataclass
class SummandOrbitPart:
    base_point: int                 # canonical coset index
    points: list[int]               # the N(sigma)-orbit, canonical indices
    carriers: dict[int, int]        # point -> exponent b(u_y) used to propagate
    local_basis: list[list[int]]    # invariant rows in Phi_m coords at the base

    @property
    def rank(self) -> int:
        return len(self.local_basis)


@dataclass
class SummandBlock:
    sigma: Subgroup                 # class representative in G
    m: int
    fixed_points: list[int]         # canonical coset indices fixed by sigma
    parts: list[SummandOrbitPart]

    @property
    def rank(self) -> int:
        return sum(p.rank for p in self.parts)


@dataclass
class TransitiveBlock:
    """Decomposition data of the canonical transitive G-set G/H."""

    group: FiniteGroup
    stabilizer: Subgroup
    mode: str
    coset_reps: list[int]
    domain_rank: int
    summands: list[SummandBlock]
    matrix: list[list[int]]
    snf_diag: list[int]


def _transitive_block(group: FiniteGroup, h: Subgroup, mode: str) -> TransitiveBlock:
    with getattr(group, "_lock"):
        per_group = _block_cache.setdefault(group, {})
        cached = per_group.get((h.elements, mode))
    if cached is not None:
        return cached
    block = _build_transitive_block(group, h, mode)
    with getattr(group, "_lock"):
        _block_cache.setdefault(group, {})[(h.elements, mode)] = block
    return block


def _build_transitive_block(group: FiniteGroup, h: Subgroup, mode: str) -> TransitiveBlock:
    n = group.order
    reps, index = _coset_points(group, h)
    stab_group, local = _subgroup_as_group(h)
    stab_table = character_table(stab_group)
    if mode == "split":
        domain = [[1 if i == j else 0 for j in range(stab_table.n_classes)]
                  for i in range(stab_table.n_classes)]
        gal_exponents = None
    else:
        rat = rational_form(stab_group)
        domain = rat.basis
        gal_exponents = [a for a in range(1, group.exponent + 1)
                         if math.gcd(a, group.exponent) == 1]
    domain_rank = len(domain)

    summands = []
    rows = []
    for cls in cyclic_subgroup_classes(group):
        sigma = cls.representative
        ring = cyclic_ring(sigma)
        m = ring.m
        decomp = cyclic_group_ring_decomposition(m, n)
        proj = decomp.projections[decomp.part_index(m)]
        phi_m = len(proj)
        nsigma = normalizer(group, sigma)
        act_map = normalizer_action(group, sigma)
        b_of = {u: pow(act_map[u], -1, m) if m > 1 else 1 for u in nsigma.elements}

        fixed = [y for y in range(len(reps))
                 if all(index[_coset_key(group, h, group.mul[s][reps[y]])] == y
                        for s in sigma.elements)]
        # N(sigma)-orbits on the fixed cosets
        parts = []
        remaining = set(fixed)
        images = []  # per domain basis element: dict point -> Phi_m coords
        for bi in range(domain_rank):
            char_vec = domain[bi]
            per_point = {}
            for y in fixed:
                t = reps[y]
                tinv = group.inv[t]
                vals = []
                for v in range(m):
                    conj_el = group.mul[group.mul[tinv][ring.powers[v]]][t]
                    acc = Cyclotomic.rational(0, stab_table.conductor)
                    for ci, coeff in enumerate(char_vec):
                        if coeff:
                            acc = acc + stab_table.value(ci, local[conj_el]) * coeff
                    vals.append(acc)
                t_coords = []
                for j in range(m):
                    acc = Cyclotomic.rational(0, stab_table.conductor)
                    for v in range(m):
                        acc = acc + vals[v] * Cyclotomic.zeta(m, (-j * v) % m)
                    c = acc.as_fraction() / m
                    if c.denominator != 1:
                        raise ArithmeticError("fiber character has non-integral "
                                              "dual coordinates")
                    t_coords.append(int(c))
                per_point[y] = mat_vec(proj, t_coords)
            images.append(per_point)

        while remaining:
            y0 = min(remaining)
            orbit_pts = {y0: 1}
            frontier = [y0]
            while frontier:
                y = frontier.pop(0)
                for u in nsigma.elements:
                    z = index[_coset_key(group, h, group.mul[u][reps[y]])]
                    if z not in orbit_pts:
                        orbit_pts[z] = (b_of[u] * orbit_pts[y]) % m if m > 1 else 1
                        frontier.append(z)
            pts = sorted(orbit_pts)
            remaining -= set(pts)
            stab_exps = {act_map[u] % m if m > 1 else 1
                         for u in nsigma.elements
                         if index[_coset_key(group, h, group.mul[u][reps[y0]])] == y0}
            if mode == "rational":
                stab_exps |= {a % m if m > 1 else 1 for a in gal_exponents}
            stab_exps = _close_exponents(stab_exps, m)
            mats = [_phi_component_power_matrix(m, a) for a in sorted(stab_exps)]
            local_basis = invariant_sublattice(mats)
            parts.append(SummandOrbitPart(base_point=y0, points=pts,
                                          carriers=orbit_pts,
                                          local_basis=local_basis))
        summands.append(SummandBlock(sigma=sigma, m=m, fixed_points=fixed,
                                     parts=parts))

        # rows of the map: coordinates of each basis image in the summand basis
        for part in parts:
            for bi in range(domain_rank):
                vec = images[bi][part.base_point]
                coords = solve_in_lattice(part.local_basis, vec)
                if coords is None:
                    raise ArithmeticError("image missed the invariant sublattice")
                # consistency: the whole N-orbit must be the propagated family
                for y in part.points:
                    q = _phi_component_power_matrix(m, part.carriers[y])
                    expect = mat_vec(q, vec)
                    if [Fraction(t) for t in expect] != \
                       [Fraction(t) for t in images[bi][y]]:
                        raise ArithmeticError("image family is not equivariant")
                rows.append((len(summands) - 1, part, bi, coords))

    # assemble the square integer matrix: rows grouped by summand block/part
    matrix = []
    for s_idx, summand in enumerate(summands):
        for part in summand.parts:
            collected = [r for r in rows if r[0] == s_idx and r[1] is part]
            for t in range(part.rank):
                matrix.append([_int_entry(next(c for si, pp, bi, c in collected
                                               if bi == col)[t])
                               for col in range(domain_rank)])
    if len(matrix) != domain_rank:
        raise ArithmeticError(f"block rank mismatch: {len(matrix)} rows for "
                              f"domain of rank {domain_rank}")
    diag = snf_diagonal(matrix) if matrix else []
    if matrix and not is_iso_over_localization(matrix, n):
        raise ArithmeticError(f"SNF certificate failed for G/H block: {diag}")
    return TransitiveBlock(group=group, stabilizer=h, mode=mode,
                           coset_reps=reps, domain_rank=domain_rank,
                           summands=summands, matrix=matrix, snf_diag=diag)


def _int_entry(x):
    f = Fraction(x)
    if f.denominator != 1:
        raise ArithmeticError("expected integer coordinates")
    return int(f)


@dataclass
class OrbifoldDecomposition:
    """Per-sigma summand data and the certified decomposition map."""

    group: FiniteGroup
    gset: GSet
    mode: str
    blocks: list[TransitiveBlock]
    orbit_list: list[Orbit]
    summand_ranks: list[int]             # per sigma-class, totalled over orbits
    snf_diag: list[int]                  # merged invariant factors
    rank: int

    def assemble_matrix(self):
        """Full decomposition matrix, rows ordered (sigma-class, orbit)."""
        n_sigma = len(self.summand_ranks)
        col_offsets = []
        total_cols = 0
        for b in self.blocks:
            col_offsets.append(total_cols)
            total_cols += b.domain_rank
        out = []
        for s_idx in range(n_sigma):
            for b_idx, b in enumerate(self.blocks):
                summand = b.summands[s_idx]
                row_start = sum(b.summands[t].rank for t in range(s_idx))
                for r in range(summand.rank):
                    row = [0] * total_cols
                    src = b.matrix[row_start + r]
                    for c in range(b.domain_rank):
                        row[col_offsets[b_idx] + c] = src[c]
                    out.append(row)
        return out


def orbifold_decompose(group: FiniteGroup, x: GSet,
                       mode: str = "split") -> OrbifoldDecomposition:
    """Decompose K0([X/G]) over conjugacy classes of cyclic subgroups with an
    exact Z[1/|G|]-invertibility certificate, orbit by orbit."""
    if x.group is not group:
        raise GroupError("G-set belongs to a different group")
    orbit_list = x.orbits()
    blocks = [_transitive_block(group, orbit.stabilizer, mode)
              for orbit in orbit_list]
    n_sigma = len(cyclic_subgroup_classes(group))
    summand_ranks = [sum(b.summands[i].rank for b in blocks)
                     for i in range(n_sigma)]
    merged = merge_invariant_factors([b.snf_diag for b in blocks], group.order) \
        if blocks else []
    rank = sum(b.domain_rank for b in blocks)
    return OrbifoldDecomposition(group=group, gset=x, mode=mode, blocks=blocks,
                                 orbit_list=orbit_list,
                                 summand_ranks=summand_ranks,
                                 snf_diag=merged, rank=rank)


# ---------------------------------------------------------------------------
# inertia form
# ---------------------------------------------------------------------------

@dataclass
class InertiaDecomposition:
    group: FiniteGroup
    gset: GSet
    k0_rank: int
    inertia_orbit_count: int
    centralizer_form_dims: list[int]     # per conjugacy class of g
    iso_matrix: list[list[int]]          # C(g)-form <- G-invariants form
    dims_consistent: bool
    iso_bijective: bool
    character_map_rank: int | None       # rank of the explicit split-field map


def inertia_decompose(group: FiniteGroup, x: GSet,
                      with_character_map: bool = False) -> InertiaDecomposition:
    """Split-field inertia decomposition: the C(g)-form over conjugacy class
    representatives, the G-invariants form on the inertia set, the explicit
    isomorphism between the two, and the rank identity with K0([X/G])."""
    if x.group is not group:
        raise GroupError("G-set belongs to a different group")
    conj = conjugacy_classes(group)
    pairs = [(g, p) for g in range(group.order) for p in range(x.size)
             if x.act[g][p] == p]
    pair_index = {pr: i for i, pr in enumerate(pairs)}

    # G-orbits on the inertia set
    orbit_of = [-1] * len(pairs)
    orbit_reps = []
    for i, (g, p) in enumerate(pairs):
        if orbit_of[i] >= 0:
            continue
        oid = len(orbit_reps)
        orbit_reps.append((g, p))
        frontier = [(g, p)]
        orbit_of[i] = oid
        while frontier:
            (a, q) = frontier.pop()
            for hh in range(group.order):
                nxt = (group.conj(hh, a), x.act[hh][q])
                j = pair_index[nxt]
                if orbit_of[j] < 0:
                    orbit_of[j] = oid
                    frontier.append(nxt)
    n_orbits = len(orbit_reps)

    # centralizer form: C(g)-orbits on X^g per class representative
    cent_dims = []
    cent_orbit_ids = []  # per class: list of (class_idx, frozenset points)
    for cls in conj.classes:
        g = cls[0]
        fixed = [p for p in range(x.size) if x.act[g][p] == p]
        cent = [h for h in range(group.order)
                if group.mul[h][g] == group.mul[g][h]]
        seen = set()
        orbits_here = []
        for p in fixed:
            if p in seen:
                continue
            orb = {p}
            frontier = [p]
            while frontier:
                q = frontier.pop()
                for h in cent:
                    z = x.act[h][q]
                    if z not in orb:
                        orb.add(z)
                        frontier.append(z)
            seen |= orb
            orbits_here.append(frozenset(orb))
        cent_dims.append(len(orbits_here))
        cent_orbit_ids.append(orbits_here)

    # explicit isomorphism: each G-orbit of pairs meets the fiber over its
    # class representative in exactly one C(g)-orbit
    total_cent = sum(cent_dims)
    iso = [[0] * n_orbits for _ in range(total_cent)]
    ok = total_cent == n_orbits
    row_offset = []
    acc = 0
    for d in cent_dims:
        row_offset.append(acc)
        acc += d
    for oid in range(n_orbits):
        members = [pairs[i] for i in range(len(pairs)) if orbit_of[i] == oid]
        hit = set()
        for (g, p) in members:
            ci = conj.class_of[g]
            if g == conj.classes[ci][0]:
                for k, orb in enumerate(cent_orbit_ids[ci]):
                    if p in orb:
                        hit.add((ci, k))
        if len(hit) != 1:
            ok = False
            continue
        ci, k = hit.pop()
        iso[row_offset[ci] + k][oid] = 1
    if ok:
        ok = all(sum(row) == 1 for row in iso) and \
            all(sum(iso[r][c] for r in range(total_cent)) == 1
                for c in range(n_orbits))

    k0 = equivariant_k0(group, x, "split")
    dims_ok = k0.rank == n_orbits and total_cent == n_orbits

    char_rank = None
    if with_character_map:
        char_rank = _inertia_character_rank(group, x, k0, pairs, orbit_of,
                                            n_orbits)
    return InertiaDecomposition(group=group, gset=x, k0_rank=k0.rank,
                                inertia_orbit_count=n_orbits,
                                centralizer_form_dims=cent_dims,
                                iso_matrix=iso,
                                dims_consistent=dims_ok,
                                iso_bijective=ok,
                                character_map_rank=char_rank)


def _inertia_character_rank(group, x, k0, pairs, orbit_of, n_orbits):
    """Rank of the map (class of equivariant bundle) -> function on inertia
    orbits by fiber characters; full rank certifies the explicit iso."""
    cond = group.exponent
    rows = []
    for om, off in zip(k0.orbit_modules, k0.offsets):
        orbit = om.orbit
        for u in range(om.basis_size):
            row = [None] * n_orbits
            for i, (g, p) in enumerate(pairs):
                if p not in orbit.transporters:
                    continue
                t = orbit.transporters[p]
                conj_el = group.mul[group.mul[group.inv[t]][g]][t]
                val = om.stab_table.values[u][
                    om.stab_table.conj.class_of[om.local_index[conj_el]]]
                val = val.lift(cond) if val.conductor != cond else val
                oid = orbit_of[i]
                if row[oid] is None:
                    row[oid] = val
                elif not (row[oid] == val):
                    raise ArithmeticError("fiber character not constant on "
                                          "inertia orbits")
            rows.append([v if v is not None else Cyclotomic.rational(0, cond)
                         for v in row])
    return field_rank(rows)


# ---------------------------------------------------------------------------
# Mackey double-coset identity
# ---------------------------------------------------------------------------

@dataclass
class MackeyCosetTerm:
    representative: int
    in_normalizer: bool
    intersection_order: int
    kills_primitive: bool        # T_tau * (mult by e_sigma) == 0


@dataclass
class MackeyReport:
    group: FiniteGroup
    sigma: Subgroup
    index: int                          # [N(sigma) : sigma]
    scalar_certified: bool
    frobenius_transpose_ok: bool        # Ind == Res^T in the orthonormal bases
    coset_sum_ok: bool                  # sum of double-coset terms == Res o Ind
    terms: list[MackeyCosetTerm]


def mackey_check(group: FiniteGroup, sigma: Subgroup) -> MackeyReport:
    """Certify that projection o Res o Ind o inclusion is [N(sigma):sigma]
    times the identity on the invariant primitive summand, with the
    double-coset term analysis."""
    from .groups import double_cosets
    n = group.order
    ring = cyclic_ring(sigma)
    m = ring.m
    table = character_table(group)
    decomp = cyclic_group_ring_decomposition(m, n)
    top = decomp.part_index(m)
    proj = decomp.projections[top]
    section = decomp.sections[top]
    nsigma = normalizer(group, sigma)
    act_map = normalizer_action(group, sigma)
    exps = sorted({act_map[u] % m if m > 1 else 1 for u in nsigma.elements})
    basis = invariant_sublattice([_phi_component_power_matrix(m, a) for a in exps])
    r = len(basis)

    # inclusion: summand coords -> t-basis
    iota = [[Fraction(0)] * r for _ in range(m)]
    for c in range(r):
        comp = basis[c]
        for row in range(m):
            iota[row][c] = sum(Fraction(section[row][a]) * comp[a]
                               for a in range(len(comp)))
    # projection: average over the acting exponents, cut the top component,
    # then express in the invariant basis
    perms = [ring.power_map_matrix(a) for a in exps]
    avg = [[Fraction(0)] * m for _ in range(m)]
    for pmat in perms:
        for i in range(m):
            for j in range(m):
                if pmat[i][j]:
                    avg[i][j] += Fraction(1, len(perms))
    proj_avg = mat_mul(proj, avg)
    pi_rows = []
    for col in range(m):
        vec = [proj_avg[t][col] for t in range(len(proj))]
        coords = solve_in_lattice(basis, vec)
        if coords is None:
            raise ArithmeticError("projection failed to land in the summand")
        pi_rows.append(coords)
    pi = [[pi_rows[col][t] for col in range(m)] for t in range(r)]

    res = restriction_matrix(group, sigma).matrix
    ind = _induction_matrix(group, table, sigma, ring)
    frob_ok = ind == [list(col) for col in zip(*res)]

    comp = mat_mul(pi, mat_mul(res, mat_mul(ind, iota)))
    idx = nsigma.order // sigma.order
    scalar_ok = all(
        Fraction(comp[i][j]) == (Fraction(idx) if i == j else Fraction(0))
        for i in range(r) for j in range(r))

    # double-coset decomposition of Res o Ind
    e_vec = primitive_idempotent(sigma, n).element.coords
    e_mat = [[e_vec[(i - j) % m] for j in range(m)] for i in range(m)]
    res_ind = mat_mul(res, ind)
    total = [[Fraction(0)] * m for _ in range(m)]
    terms = []
    for dc in double_cosets(group, sigma):
        tau = dc.representative
        j_sub = dc.intersection
        jp_elems = sorted(group.mul[group.mul[group.inv[tau]][z]][tau]
                          for z in j_sub.elements)
        jp_sub = Subgroup(group, jp_elems, _trusted=True)
        res_jp = restriction_matrix(sigma, jp_sub).matrix
        jring = cyclic_ring(j_sub)
        jpring = cyclic_ring(jp_sub)
        mj = jring.m
        w = jpring.power_of[
            group.mul[group.mul[group.inv[tau]][jring.generator]][tau]]
        conj_mat = [[0] * mj for _ in range(mj)]
        for jcol in range(mj):
            conj_mat[(jcol * w) % mj if mj > 1 else 0][jcol] = 1
        res_j = restriction_matrix(sigma, j_sub).matrix
        ind_j = [list(col) for col in zip(*res_j)]
        term = mat_mul(ind_j, mat_mul(conj_mat, res_jp))
        for i in range(m):
            for j in range(m):
                total[i][j] += term[i][j]
        in_norm = tau in nsigma
        killed = all(
            sum(Fraction(term[i][t]) * Fraction(e_mat[t][j]) for t in range(m)) == 0
            for i in range(m) for j in range(m)) if not in_norm else False
        terms.append(MackeyCosetTerm(representative=tau, in_normalizer=in_norm,
                                     intersection_order=j_sub.order,
                                     kills_primitive=killed or in_norm))
    sum_ok = all(Fraction(total[i][j]) == Fraction(res_ind[i][j])
                 for i in range(m) for j in range(m))
    kills_ok = all(t.kills_primitive or t.in_normalizer for t in terms)
    return MackeyReport(group=group, sigma=sigma, index=idx,
                        scalar_certified=scalar_ok and kills_ok,
                        frobenius_transpose_ok=frob_ok,
                        coset_sum_ok=sum_ok, terms=terms)


def _induction_matrix(group, table, sigma, ring):
    """Frobenius formula: Ind from the t-power basis into the character basis."""
    n = group.order
    m = ring.m
    k = table.n_classes
    cond = math.lcm(table.conductor, m)
    out = [[0] * m for _ in range(k)]
    for j in range(m):
        class_values = []
        for rep in table.class_reps:
            acc = Cyclotomic.rational(0, cond)
            for u in range(n):
                conj_el = group.mul[group.mul[group.inv[u]][rep]][u]
                v = ring.power_of.get(conj_el)
                if v is not None:
                    acc = acc + Cyclotomic.zeta(m, (j * v) % m)
            class_values.append(acc * Fraction(1, m))
        for c in range(k):
            acc = Cyclotomic.rational(0, cond)
            for t in range(k):
                acc = acc + class_values[t] * table.values[c][t].conj() \
                    * table.class_sizes[t]
            coeff = acc.as_fraction() / n
            if coeff.denominator != 1 or coeff < 0:
                raise ArithmeticError("induction coefficient not integral")
            out[c][j] = int(coeff)
    return out


# ---------------------------------------------------------------------------
# cross-module consistency helpers
# ---------------------------------------------------------------------------

def point_degenerates_to_group_decomposition(group: FiniteGroup,
                                             mode: str = "split") -> bool:
    """On X = point the G-set decomposition must equal the R(G) one bit-exactly."""
    dec = orbifold_decompose(group, GSet.point(group), mode)
    vist = vistoli_decompose(group, mode)
    assembled = dec.assemble_matrix()
    want = [[_int_entry(x) for x in row] for row in vist.matrix]
    return assembled == want and dec.snf_diag == \
        merge_invariant_factors([vist.snf_diag], group.order)


def direct_summand_image(group: FiniteGroup, x: GSet, k0: EquivariantK0,
                         sigma: Subgroup, domain_vec) -> dict[int, list[Fraction]]:
    """Independent evaluation of the sigma-component of the decomposition map.

    For a class given in K0 coordinates, computes the primitive projection of
    the fiber characters at every sigma-fixed point straight from the
    definitions (no invariant-basis bookkeeping); used as an oracle against
    the cached block machinery and for functoriality checks.
    """
    ring = cyclic_ring(sigma)
    m = ring.m
    decomp = cyclic_group_ring_decomposition(m, group.order)
    proj = decomp.projections[decomp.part_index(m)]
    out = {}
    for om, off in zip(k0.orbit_modules, k0.offsets):
        orbit = om.orbit
        if k0.mode == "split":
            char_vec = domain_vec[off:off + om.basis_size]
        else:
            char_vec = [Fraction(0)] * om.stab_table.n_classes
            for idx, orb in enumerate(om.rational_orbits):
                for i in orb:
                    char_vec[i] += domain_vec[off + idx]
        for y in orbit.points:
            if any(x.act[s][y] != y for s in sigma.elements):
                continue
            t = orbit.transporters[y]
            tinv = group.inv[t]
            vals = []
            for v in range(m):
                conj_el = group.mul[group.mul[tinv][ring.powers[v]]][t]
                acc = Cyclotomic.rational(0, om.stab_table.conductor)
                for ci, coeff in enumerate(char_vec):
                    if coeff:
                        acc = acc + om.stab_table.value(
                            ci, om.local_index[conj_el]) * coeff
                vals.append(acc)
            t_coords = []
            for j in range(m):
                acc = Cyclotomic.rational(0, om.stab_table.conductor)
                for v in range(m):
                    acc = acc + vals[v] * Cyclotomic.zeta(m, (-j * v) % m)
                t_coords.append(acc.as_fraction() / m)
            out[y] = [sum(Fraction(proj[r][j]) * t_coords[j] for j in range(m))
                      for r in range(len(proj))]
    return out


def pullback_matrix(src: GSet, dst: GSet, point_map: list[int],
                    k0_src: EquivariantK0, k0_dst: EquivariantK0):
    """Matrix of the pull-back K0([Y/G]) -> K0([X/G]) along a G-map X -> Y.

    point_map[x] is the image of x; the map must be equivariant.
    """
    group = src.group
    for g in range(group.order):
        for p in range(src.size):
            if point_map[src.act[g][p]] != dst.act[g][point_map[p]]:
                raise GroupError("point map is not equivariant")
    table = character_table(group)
    rows = []
    for om_x, off_x in zip(k0_src.orbit_modules, k0_src.offsets):
        base_x = om_x.orbit.base
        target = point_map[base_x]
        om_y, off_y = next(
            (om, off) for om, off in zip(k0_dst.orbit_modules, k0_dst.offsets)
            if target in om.orbit.transporters)
        t = om_y.orbit.transporters[target]
        # fiber of the pulled-back bundle at base_x carries the Stab(base_x)
        # action transported into Stab(base_y)
        hx = om_x.orbit.stabilizer
        cond = math.lcm(om_x.stab_table.conductor, om_y.stab_table.conductor)
        block = [[0] * om_y.basis_size for _ in range(om_x.basis_size)]
        for u in range(om_y.basis_size):
            vals = []
            for k in range(om_x.stab_table.n_classes):
                rep_local = om_x.stab_table.class_reps[k]
                rep_global = hx.elements[rep_local]
                conj_el = group.mul[group.mul[group.inv[t]][rep_global]][t]
                vals.append(om_y.stab_table.values[u][
                    om_y.stab_table.conj.class_of[om_y.local_index[conj_el]]]
                    .lift(cond))
            for w in range(om_x.basis_size):
                acc = Cyclotomic.rational(0, cond)
                for k in range(om_x.stab_table.n_classes):
                    acc = acc + vals[k] * om_x.stab_table.values[w][k].conj() \
                        * om_x.stab_table.class_sizes[k]
                c = acc.as_fraction() / om_x.stab_table.group.order
                if c.denominator != 1:
                    raise ArithmeticError("pull-back coefficient not integral")
                block[w][u] = int(c)
        rows.append((off_x, off_y, block))
    out = [[0] * k0_dst.rank for _ in range(k0_src.rank)]
    for off_x, off_y, block in rows:
        for i, row in enumerate(block):
            for j, val in enumerate(row):
                out[off_x + i][off_y + j] = val
    return out
