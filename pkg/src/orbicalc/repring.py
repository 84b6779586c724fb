"""Representation rings with exact character arithmetic.

Character tables are computed by the Burnside-Dixon class-sum method: class
multiplication coefficients, simultaneous eigenvectors modulo a prime
p = 1 (mod exp(G)), and eigenvalue lifting to Q(zeta) by discrete logarithm.
Cyclic representation rings use the power basis of Z[t]/(t^m - 1) attached to
a deterministically chosen subgroup generator; the primitive idempotent e_sigma,
its Phi_m component, and the normalizer-invariant summands live there.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from weakref import WeakKeyDictionary

from .exact import Cyclotomic, cyclotomic_polynomial, euler_phi, divisors, \
    is_n_local, prime_factors
from .fieldlin import rank as field_rank
from .groups import CyclicClass, ConjStructure, FiniteGroup, GroupError, Subgroup, \
    conjugacy_classes, cyclic_subgroup_classes, generators_of, normalizer, \
    normalizer_action
from .lattice import LatticeMap, hnf_rows, invariant_sublattice, \
    is_iso_over_localization, mat_vec, smith_normal_form, snf_diagonal, \
    solve_in_lattice, solve_rational

_global_lock = threading.Lock()
_cyclic_ring_cache: "WeakKeyDictionary[FiniteGroup, dict]" = WeakKeyDictionary()
_component_cache: dict[tuple[int, int], "ComponentDecomposition"] = {}


@dataclass
class RepRingElement:
    """Vector over the irreducible basis of R(G), or over the t-power basis
    of Z[1/n][t]/(t^m - 1) when the owner is a cyclic subgroup."""

    owner: object
    coords: tuple

    def __post_init__(self):
        self.coords = tuple(self.coords)


@dataclass
class PrimitiveIdempotent:
    sigma: Subgroup
    element: RepRingElement  # t-power basis, Fraction coords


# ---------------------------------------------------------------------------
# mod-p linear algebra for the Dixon method
# ---------------------------------------------------------------------------

def _find_dixon_prime(exponent: int, order: int) -> int:
    p = exponent + 1
    bound = 2 * math.isqrt(order) + 1
    while True:
        if p > bound and p % exponent == (1 % exponent) and _is_prime(p):
            return p
        p += 1


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _primitive_root(p: int) -> int:
    factors = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise ArithmeticError("no primitive root found")


def _rref_mod(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    a = [r[:] for r in rows]
    n = len(a)
    m = len(a[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] % p), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(n):
            if i != r and a[i][c] % p:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def _nullspace_mod(rows: list[list[int]], p: int) -> list[list[int]]:
    n = len(rows)
    m = len(rows[0]) if n else 0
    a, pivots = _rref_mod(rows, p)
    free = [c for c in range(m) if c not in pivots]
    out = []
    for fc in free:
        v = [0] * m
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-a[i][fc]) % p
        out.append(v)
    return out


def _charpoly_mod(b: list[list[int]], p: int) -> list[int]:
    """Characteristic polynomial mod p (ascending coeffs), via Hessenberg form."""
    n = len(b)
    h = [row[:] for row in b]
    for k in range(n - 2):
        piv = next((i for i in range(k + 1, n) if h[i][k] % p), None)
        if piv is None:
            continue
        if piv != k + 1:
            h[k + 1], h[piv] = h[piv], h[k + 1]
            for row in h:
                row[k + 1], row[piv] = row[piv], row[k + 1]
        inv = pow(h[k + 1][k], -1, p)
        for i in range(k + 2, n):
            if h[i][k] % p:
                f = h[i][k] * inv % p
                h[i] = [(x - f * y) % p for x, y in zip(h[i], h[k + 1])]
                for row in h:
                    row[k + 1] = (row[k + 1] + f * row[i]) % p
    # p_m(x) over leading principal blocks of the Hessenberg matrix
    polys = [[1]]
    for m in range(1, n + 1):
        term = _poly_mul_mod([(-h[m - 1][m - 1]) % p, 1], polys[m - 1], p)
        beta = 1
        for i in range(1, m):
            beta = beta * h[m - i][m - i - 1] % p
            coef = h[m - 1 - i][m - 1] * beta % p
            if coef:
                term = _poly_sub_mod(term, [c * coef % p for c in polys[m - 1 - i]], p)
        polys.append(term)
    return polys[n]


def _poly_mul_mod(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _poly_sub_mod(a, b, p):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] = x % p
    for i, y in enumerate(b):
        out[i] = (out[i] - y) % p
    return out


def _poly_roots_mod(poly, p):
    roots = []
    for x in range(p):
        acc = 0
        for c in reversed(poly):
            acc = (acc * x + c) % p
        if acc == 0:
            roots.append(x)
    return roots


# ---------------------------------------------------------------------------
# character tables
# ---------------------------------------------------------------------------

class CharacterTable:
    """Exact irreducible character table over Q(zeta_exp(G)).

    Rows are sorted by (degree, canonical value key), so the table layout is
    reproducible; row 0 is always the trivial character.
    """

    def __init__(self, group: FiniteGroup, conj: ConjStructure,
                 values: list[list[Cyclotomic]], degrees: list[int]):
        self.group = group
        self.conj = conj
        self.values = [list(row) for row in values]
        self.degrees = list(degrees)
        self.conductor = group.exponent
        self.class_reps = [cls[0] for cls in conj.classes]
        self.class_sizes = [len(cls) for cls in conj.classes]
        self.n_classes = len(conj.classes)
        self._mult_cache: dict[tuple[int, int], tuple[int, ...]] = {}
        self._galois_cache: dict[int, list[int]] = {}

    # -- lookups ----------------------------------------------------------
    def value(self, char_idx: int, element: int) -> Cyclotomic:
        return self.values[char_idx][self.conj.class_of[element]]

    @property
    def trivial_index(self) -> int:
        return next(i for i, row in enumerate(self.values)
                    if all(v == 1 for v in row))

    def inner(self, row_a: list[Cyclotomic], row_b: list[Cyclotomic]) -> Fraction:
        """Standard character inner product; must come out rational."""
        n = self.group.order
        acc = Cyclotomic.rational(0, self.conductor)
        for k in range(self.n_classes):
            acc = acc + row_a[k] * row_b[k].conj() * self.class_sizes[k]
        return acc.as_fraction() / n

    def product_coeffs(self, i: int, j: int) -> tuple[int, ...]:
        """chi_i * chi_j = sum_k N_ijk chi_k with nonnegative integer N."""
        key = (i, j) if i <= j else (j, i)
        if key not in self._mult_cache:
            prod = [self.values[i][k] * self.values[j][k] for k in range(self.n_classes)]
            coeffs = []
            for k in range(len(self.values)):
                c = self.inner(prod, self.values[k])
                if c.denominator != 1 or c < 0:
                    raise ArithmeticError("character product failed to decompose")
                coeffs.append(int(c))
            self._mult_cache[key] = tuple(coeffs)
        return self._mult_cache[key]

    def multiply(self, a, b):
        """Product of coordinate vectors over the irreducible basis."""
        out = [Fraction(0)] * self.n_classes
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        for k, n in enumerate(self.product_coeffs(i, j)):
                            if n:
                                out[k] += x * y * n
        return out

    def galois_permutation(self, a: int) -> list[int]:
        """Row permutation induced by zeta -> zeta^a on all values."""
        if a not in self._galois_cache:
            keys = {tuple(v.sort_key() for v in row): i
                    for i, row in enumerate(self.values)}
            perm = []
            for row in self.values:
                image = tuple(v.galois(a).sort_key() for v in row)
                if image not in keys:
                    raise ArithmeticError("Galois action did not permute characters")
                perm.append(keys[image])
            self._galois_cache[a] = perm
        return self._galois_cache[a]

    def verify(self):
        n = self.group.order
        if sum(d * d for d in self.degrees) != n:
            raise ArithmeticError("degree squares do not sum to |G|")
        for i in range(len(self.values)):
            for j in range(i, len(self.values)):
                expect = Fraction(1 if i == j else 0)
                if self.inner(self.values[i], self.values[j]) != expect:
                    raise ArithmeticError("row orthogonality failed")
        return True


def character_table(group: FiniteGroup) -> CharacterTable:
    """Cached Burnside-Dixon character table."""
    with group._lock:
        if group._chartable is not None:
            return group._chartable
    table = _dixon_character_table(group)
    table.verify()
    with group._lock:
        if group._chartable is None:
            group._chartable = table
    return group._chartable


def _dixon_character_table(group: FiniteGroup) -> CharacterTable:
    conj = conjugacy_classes(group)
    k = len(conj.classes)
    n = group.order
    if k == 1:
        values = [[Cyclotomic.rational(1, 1)]]
        return CharacterTable(group, conj, values, [1])
    e = group.exponent
    p = _find_dixon_prime(e, n)
    z = pow(_primitive_root(p), (p - 1) // e, p)

    class_of = conj.class_of
    sizes = [len(c) for c in conj.classes]
    reps = [c[0] for c in conj.classes]
    inv_class = [class_of[group.inv[r]] for r in reps]

    # class multiplication coefficients a_ijk, counted pairwise
    counts = [[[0] * k for _ in range(k)] for _ in range(k)]
    for x in range(n):
        cx = class_of[x]
        mx = group.mul[x]
        for y in range(n):
            counts[cx][class_of[y]][class_of[mx[y]]] += 1
    mats = []
    for i in range(k):
        m_i = [[0] * k for _ in range(k)]
        for j in range(k):
            for t in range(k):
                a_ijt, rem = divmod(counts[i][j][t], sizes[t])
                if rem:
                    raise ArithmeticError("class algebra coefficient not integral")
                m_i[t][j] = a_ijt % p
        mats.append(m_i)

    # split F_p^k into common eigenspaces of the commuting class matrices
    spaces = [[[1 if i == j else 0 for j in range(k)] for i in range(k)]]
    for m_i in mats:
        if all(len(w) == 1 for w in spaces):
            break
        new_spaces = []
        for w in spaces:
            if len(w) == 1:
                new_spaces.append(w)
                continue
            basis, pivots = _rref_mod(w, p)
            restricted = []
            for vec in basis:
                image = [sum(m_i[r][c] * vec[c] for c in range(k)) % p
                         for r in range(k)]
                restricted.append([image[c] for c in pivots])
            bmat = [[restricted[j][i] for j in range(len(basis))]
                    for i in range(len(basis))]
            for lam in _poly_roots_mod(_charpoly_mod(bmat, p), p):
                shifted = [[(bmat[r][c] - (lam if r == c else 0)) % p
                            for c in range(len(bmat))] for r in range(len(bmat))]
                eigvecs = []
                for coeffs in _nullspace_mod(shifted, p):
                    vec = [0] * k
                    for c, b in zip(coeffs, basis):
                        if c:
                            vec = [(v + c * x) % p for v, x in zip(vec, b)]
                    eigvecs.append(vec)
                if eigvecs:
                    new_spaces.append(eigvecs)
        spaces = new_spaces
    if len(spaces) != k or any(len(w) != 1 for w in spaces):
        raise ArithmeticError("Dixon eigenvector split is inconsistent")

    # central characters omega_i, degrees, and lifted values
    rows = []
    seen = set()
    for (w,) in spaces:
        lead = next(i for i, x in enumerate(w) if x % p)
        scale = pow(w[lead], -1, p)
        w = [x * scale % p for x in w]
        omega = []
        for m_i in mats:
            image = [sum(m_i[r][c] * w[c] for c in range(k)) % p for r in range(k)]
            omega.append(image[lead] * pow(w[lead], -1, p) % p)
        key = tuple(omega)
        if key in seen:
            raise ArithmeticError("duplicate central character in Dixon split")
        seen.add(key)
        denom = 0
        for i in range(k):
            denom = (denom + omega[i] * omega[inv_class[i]] * pow(sizes[i], -1, p)) % p
        dsq = n * pow(denom, -1, p) % p
        degree = next((d for d in range(1, math.isqrt(n) + 1)
                       if d * d % p == dsq), None)
        if degree is None:
            raise ArithmeticError("degree lift failed in Dixon method")
        modular = [degree * omega[i] * pow(sizes[i], -1, p) % p for i in range(k)]

        values = []
        for i in range(k):
            g = reps[i]
            m = group.element_order(g)
            zm = pow(z, e // m, p)
            power_class = []
            y = 0
            for _ in range(m):
                power_class.append(class_of[y])
                y = group.mul[y][g]
            mults = []
            inv_m = pow(m, -1, p)
            for u in range(m):
                total = 0
                for v in range(m):
                    total = (total + modular[power_class[v]]
                             * pow(zm, -u * v % (p - 1), p)) % p
                mu = total * inv_m % p
                if mu > degree:
                    raise ArithmeticError("eigenvalue multiplicity lift out of range")
                mults.append(mu)
            if sum(mults) != degree:
                raise ArithmeticError("multiplicities do not sum to the degree")
            acc = Cyclotomic.rational(0, e)
            for u, mu in enumerate(mults):
                if mu:
                    acc = acc + Cyclotomic.zeta(e, u * (e // m)) * mu
            values.append(acc)
        rows.append((degree, values))

    rows.sort(key=lambda r: (r[0], [tuple(-c for c in v.coeffs) for v in r[1]]))
    degrees = [r[0] for r in rows]
    values = [r[1] for r in rows]
    for i in range(k):
        if not (values[i][0] == degrees[i]):
            raise ArithmeticError("identity column disagrees with degrees")
    return CharacterTable(group, conj, values, degrees)


# ---------------------------------------------------------------------------
# cyclic representation rings in the t-power basis
# ---------------------------------------------------------------------------

class CyclicRing:
    """Z[t]/(t^m - 1) presentation of R(sigma) for a cyclic subgroup sigma.

    The basis character t satisfies t(s) = zeta_m on the canonical generator
    s (least element of maximal order).
    """

    def __init__(self, sigma: Subgroup):
        s = sigma.generator()
        if s is None:
            raise GroupError("CyclicRing needs a cyclic subgroup")
        self.sigma = sigma
        self.group = sigma.group
        self.m = sigma.order
        self.generator = s
        powers = []
        y = 0
        for _ in range(self.m):
            powers.append(y)
            y = self.group.mul[y][s]
        self.powers = powers                      # powers[v] = s^v
        self.power_of = {g: v for v, g in enumerate(powers)}

    def mult(self, a, b):
        """Convolution modulo t^m - 1 (coefficients Fraction or Cyclotomic)."""
        m = self.m
        out = [Fraction(0)] * m
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[(i + j) % m] = out[(i + j) % m] + x * y
        return out

    def power_map_matrix(self, a: int):
        """Matrix of t^j -> t^(a j mod m) on the t-power basis."""
        m = self.m
        mat = [[0] * m for _ in range(m)]
        for j in range(m):
            mat[(a * j) % m][j] = 1
        return mat

    def action_exponents(self) -> list[int]:
        """Image of N(sigma) in (Z/m)^* acting on the dual power basis."""
        acts = normalizer_action(self.group, self.sigma)
        return sorted({a % self.m if self.m > 1 else 1 for a in acts.values()} | {1 % max(self.m, 2) if self.m == 1 else 1})


def cyclic_ring(sigma: Subgroup) -> CyclicRing:
    with _global_lock:
        per_group = _cyclic_ring_cache.setdefault(sigma.group, {})
        ring = per_group.get(sigma.elements)
        if ring is None:
            ring = CyclicRing(sigma)
            per_group[sigma.elements] = ring
        return ring


@dataclass
class ComponentDecomposition:
    """CRT decomposition Z[1/n][t]/(t^m - 1) = (+)_{j | m} Z[1/n][t]/(Phi_j)."""

    m: int
    n: int
    parts: list[int]                      # divisors j of m
    ranks: list[int]                      # phi(j)
    idempotents: list[list[Fraction]]     # eps_j in the t-power basis
    projections: list[list[list[int]]]    # P_j: phi(j) x m integer matrices
    sections: list[list[list[Fraction]]]  # S_j: m x phi(j), P_j S_j = I

    def part_index(self, j: int) -> int:
        return self.parts.index(j)


def cyclic_group_ring_decomposition(m: int, n: int) -> ComponentDecomposition:
    if m < 1 or n < 1 or n % m != 0:
        raise ValueError(f"need m | n, got m={m}, n={n}")
    key = (m, n)
    with _global_lock:
        if key in _component_cache:
            return _component_cache[key]
    parts = divisors(m)
    idempotents = []
    projections = []
    sections = []
    modulus = [0] * (m + 1)
    modulus[0], modulus[m] = -1, 1
    for j in parts:
        phi_j = [Fraction(c) for c in cyclotomic_polynomial(j)]
        co = [Fraction(1)]
        for j2 in parts:
            if j2 != j:
                co = _poly_mul(co, [Fraction(c) for c in cyclotomic_polynomial(j2)])
        u = _poly_invmod(co, phi_j)
        eps = _poly_rem(_poly_mul(co, u), modulus, m)
        for c in eps:
            if not is_n_local(c, n):
                raise ArithmeticError("CRT idempotent not n-local")
        idempotents.append(eps)
        deg = euler_phi(j)
        proj = [[0] * m for _ in range(deg)]
        int_phi = cyclotomic_polynomial(j)
        for col in range(m):
            mono = [Fraction(0)] * (col + 1)
            mono[col] = Fraction(1)
            red = _poly_rem_monic(mono, int_phi, deg)
            for row in range(deg):
                val = red[row]
                if val.denominator != 1:
                    raise ArithmeticError("projection should be integral")
                proj[row][col] = int(val)
        projections.append(proj)
        sec = [[Fraction(0)] * deg for _ in range(m)]
        for a in range(deg):
            mono = [Fraction(0)] * (a + 1)
            mono[a] = Fraction(1)
            vec = _poly_rem(_poly_mul(eps, mono), modulus, m)
            for row in range(m):
                sec[row][a] = vec[row]
        sections.append(sec)
    decomp = ComponentDecomposition(m=m, n=n, parts=parts,
                                    ranks=[euler_phi(j) for j in parts],
                                    idempotents=idempotents,
                                    projections=projections, sections=sections)
    _verify_component_decomposition(decomp)
    with _global_lock:
        _component_cache[key] = decomp
    return decomp


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1 if a and b else 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _poly_rem(a, modulus, m):
    """Remainder mod the monic integer polynomial, padded to length m."""
    r = list(a)
    deg_m = len(modulus) - 1
    for i in range(len(r) - 1, deg_m - 1, -1):
        c = r[i]
        if c:
            for j in range(deg_m + 1):
                r[i - deg_m + j] -= c * Fraction(modulus[j])
    del r[deg_m:]
    while len(r) < m:
        r.append(Fraction(0))
    return r[:m]


def _poly_rem_monic(a, modulus, out_len):
    return _poly_rem(a, modulus, out_len)


def _poly_invmod(a, modulus):
    """Inverse of a modulo a monic polynomial over Q."""
    from .exact import _frac_poly_ext_gcd
    g, s, _ = _frac_poly_ext_gcd(list(a), list(modulus))
    nz = [c for c in g if c != 0]
    if len(nz) != 1:
        raise ArithmeticError("element not invertible modulo polynomial")
    const = next(c for c in g if c != 0)
    deg = len(modulus) - 1
    inv = [c / const for c in s]
    return _poly_rem(inv, [int(c) if Fraction(c).denominator == 1 else c for c in modulus], deg) \
        if all(Fraction(c).denominator == 1 for c in modulus) else inv


def _verify_component_decomposition(d: ComponentDecomposition):
    m = d.m
    total = [Fraction(0)] * m
    for eps in d.idempotents:
        for i, c in enumerate(eps):
            total[i] += c
    expect = [Fraction(1)] + [Fraction(0)] * (m - 1)
    if total != expect:
        raise ArithmeticError("CRT idempotents do not sum to 1")
    for jdx, proj in enumerate(d.projections):
        deg = d.ranks[jdx]
        for a in range(deg):
            image = mat_vec(proj, [d.sections[jdx][r][a] for r in range(m)])
            want = [Fraction(1) if r == a else Fraction(0) for r in range(deg)]
            if [Fraction(x) for x in image] != want:
                raise ArithmeticError("projection/section pair is not split")


def primitive_idempotent(sigma: Subgroup, n: int) -> PrimitiveIdempotent:
    """e_sigma: product over minimal nontrivial subgroups rho' of sigma of
    (1 - averaging idempotent of rho'), in the t-power basis."""
    ring = cyclic_ring(sigma)
    m = ring.m
    if n % m != 0:
        raise ValueError("|sigma| must divide n")
    e = [Fraction(1)] + [Fraction(0)] * (m - 1)
    for q in prime_factors(m):
        avg = [Fraction(0)] * m
        for i in range(q):
            avg[(i * (m // q)) % m] += Fraction(1, q)
        one_minus = [Fraction(1 if i == 0 else 0) - avg[i] for i in range(m)]
        e = ring.mult(e, one_minus)
    if ring.mult(e, e) != e:
        raise ArithmeticError("primitive idempotent is not idempotent")
    decomp = cyclic_group_ring_decomposition(m, n)
    for jdx, j in enumerate(decomp.parts):
        image = mat_vec(decomp.projections[jdx], e)
        deg = decomp.ranks[jdx]
        want = [Fraction(1 if (j == m and r == 0) else 0) for r in range(deg)]
        if [Fraction(x) for x in image] != want:
            raise ArithmeticError("primitive idempotent has wrong CRT image")
    return PrimitiveIdempotent(sigma=sigma,
                               element=RepRingElement(owner=sigma, coords=e))


# ---------------------------------------------------------------------------
# restriction maps
# ---------------------------------------------------------------------------

def restriction_matrix(source, target: Subgroup) -> LatticeMap:
    """Matrix of Res from R(source) to R(target) in the canonical bases.

    source is a FiniteGroup (irreducible-character basis) or a cyclic
    Subgroup (t-power basis); a cyclic target uses its t-power basis, any
    other target its own irreducible-character basis.
    """
    if isinstance(source, Subgroup):
        return _restriction_cyclic_to_cyclic(source, target)
    group = source
    if target.group is not group:
        raise GroupError("target is not a subgroup of the source group")
    table = character_table(group)
    if target.is_cyclic:
        ring = cyclic_ring(target)
        m = ring.m
        rows = [[0] * table.n_classes for _ in range(m)]
        for i in range(table.n_classes):
            for j in range(m):
                acc = Cyclotomic.rational(0, table.conductor)
                for v in range(m):
                    val = table.value(i, ring.powers[v])
                    acc = acc + val * Cyclotomic.zeta(m, (-j * v) % m)
                c = acc.as_fraction() / m
                if c.denominator != 1 or c < 0:
                    raise ArithmeticError("restriction multiplicity not integral")
                rows[j][i] = int(c)
        return LatticeMap(matrix=rows)
    sub_group, index_map = _subgroup_as_group(target)
    sub_table = character_table(sub_group)
    rows = [[0] * table.n_classes for _ in range(sub_table.n_classes)]
    for i in range(table.n_classes):
        restricted = []
        for k in range(sub_table.n_classes):
            rep_local = sub_table.class_reps[k]
            rep_global = target.elements[rep_local]
            restricted.append(table.value(i, rep_global).lift(
                math.lcm(table.conductor, sub_table.conductor)))
        for u in range(sub_table.n_classes):
            acc = Cyclotomic.rational(0, sub_table.conductor)
            for k in range(sub_table.n_classes):
                acc = acc + restricted[k] * sub_table.values[u][k].conj() \
                    * sub_table.class_sizes[k]
            c = acc.as_fraction() / sub_group.order
            if c.denominator != 1 or c < 0:
                raise ArithmeticError("restriction multiplicity not integral")
            rows[u][i] = int(c)
    return LatticeMap(matrix=rows)


def _restriction_cyclic_to_cyclic(sigma: Subgroup, tau: Subgroup) -> LatticeMap:
    if tau.group is not sigma.group:
        raise GroupError("subgroups of different parent groups")
    if any(x not in sigma for x in tau.elements):
        raise GroupError("target is not contained in the source")
    big, small = cyclic_ring(sigma), cyclic_ring(tau)
    m, mp = big.m, small.m
    w = big.power_of[small.generator]
    if mp == 1:
        c = 0
    else:
        c = w // (m // mp)
        if w % (m // mp) != 0 or math.gcd(c, mp) != 1:
            raise ArithmeticError("generator bookkeeping failed")
    rows = [[0] * m for _ in range(mp)]
    for j in range(m):
        rows[(j * c) % mp][j] += 1
    return LatticeMap(matrix=rows)


_as_group_cache: "WeakKeyDictionary[FiniteGroup, dict]" = WeakKeyDictionary()


def _subgroup_as_group(h: Subgroup) -> tuple[FiniteGroup, dict[int, int]]:
    with _global_lock:
        per_group = _as_group_cache.setdefault(h.group, {})
        entry = per_group.get(h.elements)
        if entry is None:
            entry = h.as_group()
            per_group[h.elements] = entry
        return entry


# ---------------------------------------------------------------------------
# character diagram for cyclic subgroups
# ---------------------------------------------------------------------------

@dataclass
class CharacterIso:
    sigma: Subgroup
    conductor: int
    full_matrix: list[list[Cyclotomic]]       # R(sigma)_l -> Map(sigma, l), DFT
    primitive_basis: list[list[Fraction]]     # columns of the section of e_sigma part
    primitive_matrix: list[list[Cyclotomic]]  # values on gen(sigma) only
    generator_positions: list[int]            # power indices v with s^v in gen(sigma)
    commutes: bool
    supported_on_generators: bool


def character_iso(sigma: Subgroup, conductor: int | None = None) -> CharacterIso:
    """Commuting-square data for R(sigma)_l = Map(sigma, l) and the primitive
    part landing in functions supported on generators."""
    ring = cyclic_ring(sigma)
    m = ring.m
    n = sigma.group.order
    if conductor is None:
        conductor = m
    if conductor % m != 0:
        raise ValueError("model field conductor must be divisible by |sigma|")
    full = [[Cyclotomic.zeta(conductor, (j * v * (conductor // m)) % conductor)
             for j in range(m)] for v in range(m)]
    decomp = cyclic_group_ring_decomposition(m, n if n % m == 0 else m)
    top_idx = decomp.part_index(m)
    section = decomp.sections[top_idx]
    phi_m = decomp.ranks[top_idx]
    gen_pos = [v for v in range(m) if math.gcd(v, m) == 1] if m > 1 else [0]
    basis_cols = [[section[r][a] for r in range(m)] for a in range(phi_m)]
    images = []
    supported = True
    for col in basis_cols:
        func = [sum((full[v][j] * col[j] for j in range(m)),
                    Cyclotomic.rational(0, conductor)) for v in range(m)]
        for v in range(m):
            if v not in gen_pos and not func[v].is_zero():
                supported = False
        images.append(func)
    primitive_matrix = [[images[a][v] for a in range(phi_m)] for v in gen_pos]
    commutes = supported and field_rank(primitive_matrix) == phi_m
    return CharacterIso(sigma=sigma, conductor=conductor, full_matrix=full,
                        primitive_basis=basis_cols,
                        primitive_matrix=primitive_matrix,
                        generator_positions=gen_pos, commutes=commutes,
                        supported_on_generators=supported)


def degree_idempotent(sigma: Subgroup, g: int, n: int) -> RepRingElement:
    """e_g = (1/m) sum_chi chi(g)^{-1} chi in the t-power basis of l[sigma^v]."""
    ring = cyclic_ring(sigma)
    m = ring.m
    if n % m != 0:
        raise ValueError("|sigma| must divide n")
    if g not in ring.power_of:
        raise GroupError("element does not belong to the cyclic subgroup")
    i = ring.power_of[g]
    coords = [Cyclotomic.zeta(m, (-i * j) % m) * Fraction(1, m) for j in range(m)]
    return RepRingElement(owner=sigma, coords=coords)


# ---------------------------------------------------------------------------
# rational (Galois-descended) form of R(G)
# ---------------------------------------------------------------------------

@dataclass
class RationalForm:
    group: FiniteGroup
    orbits: list[list[int]]          # Galois orbits of character indices
    basis: list[list[int]]           # orbit-sum rows over the character basis
    galois_exponents: list[int]      # units a of Z/exp(G) that were applied

    @property
    def rank(self) -> int:
        return len(self.orbits)

    def multiply(self, a, b):
        """Structure constants of the orbit-sum basis (exact, integer)."""
        table = character_table(self.group)
        k = table.n_classes
        vec = [Fraction(0)] * k
        av = [Fraction(0)] * k
        bv = [Fraction(0)] * k
        for idx, orbit in enumerate(self.orbits):
            for i in orbit:
                av[i] += a[idx]
                bv[i] += b[idx]
        vec = table.multiply(av, bv)
        out = []
        for orbit in self.orbits:
            vals = {vec[i] for i in orbit}
            if len(vals) != 1:
                raise ArithmeticError("product left the invariant lattice")
            out.append(vals.pop())
        return out


def rational_form(group: FiniteGroup) -> RationalForm:
    table = character_table(group)
    e = table.conductor
    units = [a for a in range(1, e + 1) if math.gcd(a, e) == 1] or [1]
    perms = [table.galois_permutation(a) for a in units]
    k = table.n_classes
    seen = [False] * k
    orbits = []
    for i in range(k):
        if seen[i]:
            continue
        orbit = {i}
        frontier = [i]
        while frontier:
            x = frontier.pop()
            for perm in perms:
                y = perm[x]
                if y not in orbit:
                    orbit.add(y)
                    frontier.append(y)
        orbit = sorted(orbit)
        for x in orbit:
            seen[x] = True
        orbits.append(orbit)
    basis = []
    for orbit in orbits:
        row = [0] * k
        for i in orbit:
            row[i] = 1
        basis.append(row)
    return RationalForm(group=group, orbits=orbits, basis=basis,
                        galois_exponents=units)


# ---------------------------------------------------------------------------
# the cyclic-subgroup decomposition of R(G)_{1/n}
# ---------------------------------------------------------------------------

@dataclass
class VistoliSummand:
    sigma_class: CyclicClass
    m: int
    exponents: list[int]             # acting subgroup of (Z/m)^*
    basis: list[list[int]]           # invariant basis rows in Phi_m coords
    projection: list[list[int]]      # Phi_m projection (phi(m) x m)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def multiply_coords(self, a, b, n: int):
        """Product of two summand elements given in basis coordinates."""
        va = _combine(self.basis, a)
        vb = _combine(self.basis, b)
        prod = _phi_m_mult(va, vb, self.m)
        coords = solve_in_lattice(self.basis, prod)
        if coords is None:
            raise ArithmeticError("summand product left the invariant lattice")
        for c in coords:
            if not is_n_local(c, n):
                raise ArithmeticError("summand product not n-local")
        return coords


def _combine(basis_rows, coords):
    width = len(basis_rows[0]) if basis_rows else 0
    out = [Fraction(0)] * width
    for c, row in zip(coords, basis_rows):
        if c:
            for i, x in enumerate(row):
                out[i] += c * x
    return out


def _phi_m_mult(a, b, m: int):
    """Multiplication in Q[t]/(Phi_m) on the power basis."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    prod = [Fraction(0)] * (2 * deg)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
    for i in range(len(prod) - 1, deg - 1, -1):
        c = prod[i]
        if c:
            for j in range(deg + 1):
                prod[i - deg + j] -= c * phi[j]
    return prod[:deg]


@dataclass
class VistoliDecomposition:
    group: FiniteGroup
    mode: str
    domain_rank: int
    summands: list[VistoliSummand]
    matrix: list[list[Fraction]]         # stacked summand coords x domain basis
    map: LatticeMap
    snf_diag: list[int]
    tilde_idempotents: list[RepRingElement]
    is_ring_iso: bool
    idempotents_verified: bool

    @property
    def summand_ranks(self) -> list[int]:
        return [s.rank for s in self.summands]


def vistoli_decompose(group: FiniteGroup, mode: str = "split") -> VistoliDecomposition:
    """Decompose R(G)_{1/n} along conjugacy classes of cyclic subgroups.

    The map is (+)_sigma (primitive projection) o Res^G_sigma, with target the
    normalizer-invariant sublattice of each Phi_m component.  Certificates:
    SNF invertibility over Z[1/n], ring homomorphism on all basis products,
    and the pulled-back idempotents summing to 1 with zero pairwise products.
    """
    if mode not in ("split", "rational"):
        raise ValueError("mode must be 'split' or 'rational'")
    n = group.order
    table = character_table(group)
    k = table.n_classes
    if mode == "split":
        domain_rank = k
        domain_to_char = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
        rat = None
    else:
        rat = rational_form(group)
        domain_rank = rat.rank
        domain_to_char = rat.basis
    gal_exponents = rat.galois_exponents if rat else None

    summands = []
    blocks = []
    for cls in cyclic_subgroup_classes(group):
        sigma = cls.representative
        ring = cyclic_ring(sigma)
        m = ring.m
        decomp = cyclic_group_ring_decomposition(m, n)
        top = decomp.part_index(m)
        proj = decomp.projections[top]
        exps = set(ring.action_exponents())
        if mode == "rational":
            for a in gal_exponents:
                exps.add(a % m if m > 1 else 1)
        # close under the group law of (Z/m)^*
        exps = _close_exponents(exps, m)
        mats = [_phi_component_power_matrix(m, a) for a in sorted(exps)]
        basis = invariant_sublattice(mats) if mats else []
        summand = VistoliSummand(sigma_class=cls, m=m, exponents=sorted(exps),
                                 basis=basis, projection=proj)
        res = restriction_matrix(group, sigma)
        block_rows = []
        for bi in range(domain_rank):
            char_vec = domain_to_char[bi]
            t_vec = mat_vec(res.matrix, char_vec)
            comp = mat_vec(proj, t_vec)
            coords = solve_in_lattice(basis, comp)
            if coords is None:
                raise ArithmeticError("image missed the invariant sublattice")
            block_rows.append(coords)
        blocks.append([list(col) for col in zip(*block_rows)] if block_rows and basis
                      else [[] for _ in range(len(basis))])
        summands.append(summand)

    matrix = []
    for summand, block in zip(summands, blocks):
        for r in range(summand.rank):
            matrix.append([block[r][c] for c in range(domain_rank)])
    total_rank = len(matrix)
    if total_rank != domain_rank:
        raise ArithmeticError(
            f"summand ranks {sum(s.rank for s in summands)} != domain rank {domain_rank}")

    int_matrix = [[_as_int(x) for x in row] for row in matrix]
    diag = snf_diagonal(int_matrix)
    lmap = LatticeMap(matrix=int_matrix)
    if not is_iso_over_localization(lmap, n):
        raise ArithmeticError("invertibility certificate failed: SNF diagonal "
                              f"{diag} is not a unit over Z[1/{n}]")

    is_ring_iso = _check_ring_hom(group, table, rat, summands, matrix, mode, n)
    tilde, idem_ok = _pullback_idempotents(group, table, rat, summands, matrix, mode, n)
    return VistoliDecomposition(group=group, mode=mode, domain_rank=domain_rank,
                                summands=summands, matrix=matrix, map=lmap,
                                snf_diag=diag, tilde_idempotents=tilde,
                                is_ring_iso=is_ring_iso,
                                idempotents_verified=idem_ok)


def _as_int(x):
    f = Fraction(x)
    if f.denominator != 1:
        raise ArithmeticError("expected an integer matrix entry")
    return int(f)


def _close_exponents(exps: set[int], m: int) -> set[int]:
    if m == 1:
        return {1}
    out = set(exps) | {1}
    changed = True
    while changed:
        changed = False
        for a in list(out):
            for b in list(out):
                c = (a * b) % m
                if c not in out:
                    out.add(c)
                    changed = True
    return out


def _phi_component_power_matrix(m: int, a: int) -> list[list[int]]:
    """Matrix of t -> t^a on the power basis of Z[t]/(Phi_m)."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    cols = []
    for i in range(deg):
        mono = [0] * ((a * i) % m + 1)
        mono[(a * i) % m] = 1
        red = _poly_rem([Fraction(c) for c in mono], [0] * 0 or list(phi), deg)
        cols.append([_as_int(c) for c in red])
    return [[cols[j][i] for j in range(deg)] for i in range(deg)]


def _domain_multiply(table, rat, a, b, mode):
    if mode == "split":
        return table.multiply(a, b)
    return rat.multiply(a, b)


def _check_ring_hom(group, table, rat, summands, matrix, mode, n) -> bool:
    domain_rank = len(matrix[0]) if matrix else 0
    cols = [[matrix[r][c] for r in range(len(matrix))] for c in range(domain_rank)]
    offsets = []
    off = 0
    for s in summands:
        offsets.append(off)
        off += s.rank
    for i in range(domain_rank):
        ei = [Fraction(1) if t == i else Fraction(0) for t in range(domain_rank)]
        for j in range(i, domain_rank):
            ej = [Fraction(1) if t == j else Fraction(0) for t in range(domain_rank)]
            prod = _domain_multiply(table, rat, ei, ej, mode)
            lhs = [Fraction(0)] * len(matrix)
            for c, val in enumerate(prod):
                if val:
                    for r in range(len(matrix)):
                        lhs[r] += val * cols[c][r]
            for s, o in zip(summands, offsets):
                pa = [cols[i][o + t] for t in range(s.rank)]
                pb = [cols[j][o + t] for t in range(s.rank)]
                pc = s.multiply_coords(pa, pb, n)
                for t in range(s.rank):
                    if lhs[o + t] != pc[t]:
                        return False
    return True


def _pullback_idempotents(group, table, rat, summands, matrix, mode, n):
    domain_rank = len(matrix[0]) if matrix else 0
    if mode == "split":
        one = [Fraction(0)] * domain_rank
        one[table.trivial_index] = Fraction(1)
    else:
        one = [Fraction(0)] * domain_rank
        trivial_orbit = next(i for i, orbit in enumerate(rat.orbits)
                             if table.trivial_index in orbit)
        one[trivial_orbit] = Fraction(1)
    image_of_one = mat_vec(matrix, one)
    offsets = []
    off = 0
    for s in summands:
        offsets.append(off)
        off += s.rank
    tilde = []
    for s, o in zip(summands, offsets):
        target = [Fraction(0)] * len(matrix)
        for t in range(s.rank):
            target[o + t] = image_of_one[o + t]
        sol = solve_rational(matrix, target)
        if sol is None:
            raise ArithmeticError("idempotent pull-back failed")
        for c in sol:
            if not is_n_local(c, n):
                raise ArithmeticError("pulled-back idempotent not n-local")
        tilde.append(RepRingElement(owner=group, coords=sol))
    total = [sum(t.coords[i] for t in tilde) for i in range(domain_rank)]
    ok = total == list(one)
    for a in range(len(tilde)):
        for b in range(a, len(tilde)):
            prod = _domain_multiply(table, rat, tilde[a].coords, tilde[b].coords, mode)
            expect = list(tilde[a].coords) if a == b else [Fraction(0)] * domain_rank
            if [Fraction(x) for x in prod] != [Fraction(x) for x in expect]:
                ok = False
    return tilde, ok


def split_rational_compatibility(group: FiniteGroup) -> bool:
    """The split decomposition restricted to Galois invariants must agree with
    the rational decomposition (same summand coordinates after inclusion)."""
    split = vistoli_decompose(group, "split")
    ratd = vistoli_decompose(group, "rational")
    rat = rational_form(group)
    inc = [list(col) for col in zip(*rat.basis)]  # char x orbit inclusion
    lhs = [[sum(Fraction(split.matrix[r][c]) * inc[c][b]
                for c in range(len(inc)))
            for b in range(rat.rank)] for r in range(len(split.matrix))]
    # express each split-side row block in the rational-side basis
    off_split = 0
    off_rat = 0
    for s_split, s_rat in zip(split.summands, ratd.summands):
        for b in range(rat.rank):
            vec = _combine(s_split.basis,
                           [lhs[off_split + t][b] for t in range(s_split.rank)])
            coords = solve_in_lattice(s_rat.basis, vec)
            if coords is None:
                return False
            for t in range(s_rat.rank):
                if coords[t] != Fraction(ratd.matrix[off_rat + t][b]):
                    return False
        off_split += s_split.rank
        off_rat += s_rat.rank
    return True
