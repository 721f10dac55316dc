"""Critical relations: detection, shift-closure and proper collections.

Both kinds of orbit model reduce to the same table: ``ids[i][m]`` is an integer
naming the point f^m(c_{i+1}) for 0 <= m <= H, equal integers meaning equal
points.  All combinatorics runs on that table, so numeric maps and symbolic
orbit diagrams share one code path.

Relations use 1-based critical indices, as in ``CriticalRelation(2, 1, 1, 2)``.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import config
from .algebra import is_inf
from .errors import AmbiguousCollision, HorizonExhausted, PreconditionError
from .ratmap import CriticalSet, RatMap, critical_set, iterate_derivative, orbit


@dataclass(frozen=True, order=True)
class CriticalRelation:
    """The candidate relation f^m(c_i) = f^n(c_j)."""

    i: int
    j: int
    m: int
    n: int

    def __post_init__(self):
        if self.i < 1 or self.j < 1:
            raise ValueError("critical indices are 1-based")
        if self.m < 0 or self.n < 0 or self.m + self.n == 0:
            raise ValueError(f"need m, n >= 0 and m + n > 0, got ({self.m}, {self.n})")

    def __iter__(self):
        return iter((self.i, self.j, self.m, self.n))

    def shifted(self, k):
        return CriticalRelation(self.i, self.j, self.m + k, self.n + k)

    def __str__(self):
        return f"({self.i},{self.j};{self.m},{self.n})"


def as_relation(r) -> CriticalRelation:
    return r if isinstance(r, CriticalRelation) else CriticalRelation(*map(int, r))


class UnionFind:
    def __init__(self):
        self.parent = {}
        self.size = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            self.size[x] = 1
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def classes(self):
        out = defaultdict(list)
        for x in list(self.parent):
            out[self.find(x)].append(x)
        return out


class EquivClosure:
    """Shift-saturated equivalence on {(i, m): 1 <= i <= nu, 0 <= m <= H}."""

    def __init__(self, nu, H):
        self.nu, self.H = nu, H
        self.uf = UnionFind()
        for i in range(1, nu + 1):
            for m in range(H + 1):
                self.uf.find((i, m))

    def add(self, rel: CriticalRelation):
        i, j, m, n = rel
        if i > self.nu or j > self.nu:
            raise PreconditionError(f"relation {rel} refers to a critical index above nu = {self.nu}")
        k = 0
        while m + k <= self.H and n + k <= self.H:
            self.uf.union((i, m + k), (j, n + k))
            k += 1

    def saturate(self):
        changed = True
        while changed:
            changed = False
            for members in self.uf.classes().values():
                succ = [(i, m + 1) for i, m in members if m + 1 <= self.H]
                for a, b in zip(succ, succ[1:]):
                    if self.uf.union(a, b):
                        changed = True

    def same(self, a, b) -> bool:
        return self.uf.find(tuple(a)) == self.uf.find(tuple(b))

    def id_table(self):
        labels = {}
        table = []
        for i in range(1, self.nu + 1):
            row = []
            for m in range(self.H + 1):
                r = self.uf.find((i, m))
                row.append(labels.setdefault(r, len(labels)))
            table.append(row)
        return table


def closure(F: Iterable, nu, H) -> EquivClosure:
    c = EquivClosure(nu, H)
    for r in F:
        c.add(as_relation(r))
    c.saturate()
    return c


class OrbitModel:
    """Common interface: ``nu``, ``H``, ``ids`` and per-ray ``settled`` flags.

    A ray is settled when nothing beyond the horizon can create new
    coincidences with it (escaped to infinity, eventually periodic, or a
    symbolic model whose generators are exhaustive).
    """

    kind = "abstract"

    def __init__(self, nu, H, ids, settled):
        self.nu, self.H = nu, H
        self.ids = ids
        self.settled = list(settled)
        self.crit_ids = {ids[i][0]: i + 1 for i in range(nu)}

    def id(self, i, m):
        return self.ids[i - 1][m]

    def is_critical(self, i, m) -> bool:
        return self.ids[i - 1][m] in self.crit_ids

    def realizes(self, rel) -> bool | None:
        i, j, m, n = as_relation(rel)
        if i > self.nu or j > self.nu:
            return False
        if m > self.H or n > self.H:
            return None
        return self.ids[i - 1][m] == self.ids[j - 1][n]


class SymbolicModel(OrbitModel):
    """An orbit diagram given by generating relations; no other coincidences."""

    kind = "symbolic"

    def __init__(self, nu, generators=(), landings=(), H=config.SYMBOLIC_HORIZON):
        self.generators = [as_relation(g) for g in generators]
        self.landings = [tuple(map(int, l)) for l in landings]
        rels = self.generators + [CriticalRelation(i, j, m, 0) for i, m, j in self.landings]
        top = max([max(r.m, r.n) for r in rels], default=0)
        if H <= top:
            raise PreconditionError(f"horizon {H} must exceed the largest generator index {top}")
        cl = closure(rels, nu, H)
        for a in range(1, nu + 1):
            for b in range(a + 1, nu + 1):
                if cl.same((a, 0), (b, 0)):
                    raise PreconditionError(f"generators identify distinct critical points c{a} and c{b}")
        self.closure = cl
        super().__init__(nu, H, cl.id_table(), [True] * nu)

    @classmethod
    def from_json(cls, data, H=config.SYMBOLIC_HORIZON):
        return cls(int(data["nu"]), data.get("generators", ()), data.get("landings", ()), H=H)

    def to_json(self):
        return {
            "nu": self.nu,
            "generators": [list(g) for g in self.generators],
            "landings": [list(l) for l in self.landings],
        }


def fig1_model(H=config.SYMBOLIC_HORIZON) -> SymbolicModel:
    """Nine critical points with f^2(c1)=f(c2), f(c1)=f^4(c3), f^3(c4)=f^4(c5)=c6,
    f(c7)=f^4(c8), f(c8)=f(c9)."""
    return SymbolicModel(
        9,
        generators=[(2, 1, 1, 2), (3, 1, 4, 1), (8, 7, 4, 1), (9, 8, 1, 1)],
        landings=[(4, 3, 6), (5, 4, 6)],
        H=H,
    )


def _escape_radius(f: RatMap):
    c = f.num.coeffs / f.den.coeffs[0]
    lead = abs(c[-1])
    return 2.0 * max(1.0, (1.0 + float(np.sum(np.abs(c[:-1])))) / lead)


class NumericModel(OrbitModel):
    """Orbit table of an actual map, coincidences decided at a tolerance.

    Distances are measured after dividing by the largest finite orbit modulus.
    A coincidence is accepted only if the next three steps also agree (with the
    tolerance scaled by the local expansion).  For polynomials, points beyond
    an escape radius start an orbit that is infinite and never coincides.
    """

    kind = "numeric"

    def __init__(self, f: RatMap, tol=config.COLLISION_TOL, H=config.NUMERIC_HORIZON,
                 crit: CriticalSet | None = None, polynomial=None, confirm=3):
        if tol <= 0:
            raise PreconditionError("tolerance must be positive")
        polynomial = f.is_polynomial if polynomial is None else polynomial
        crit = critical_set(f) if crit is None else crit
        if polynomial:
            crit = crit.finite()
        self.f, self.crit, self.tol, self.polynomial = f, crit, tol, polynomial
        nu = crit.nu
        radius = _escape_radius(f) if f.is_polynomial else None
        pts, escaped_at = [], []
        for c in crit.points:
            o = orbit(f, c, H, snap=config.INF_SNAP)
            esc = None
            if radius is not None and not is_inf(c):
                for m, z in enumerate(o):
                    if is_inf(z) or abs(z) > radius:
                        esc = m
                        break
            pts.append(o)
            escaped_at.append(esc)
        self.points = pts
        self.escaped_at = escaped_at
        finite = [abs(z) for i, o in enumerate(pts) for m, z in enumerate(o)
                  if not is_inf(z) and (escaped_at[i] is None or m < escaped_at[i])]
        self.scale = max([1.0] + finite)
        ids, settled = self._assign_ids(confirm)
        super().__init__(nu, H, ids, settled)

    def _close(self, a, b, factor=1.0):
        if is_inf(a) or is_inf(b):
            return is_inf(a) and is_inf(b)
        return abs(a - b) / self.scale <= self.tol * factor

    def _confirm(self, i, m, j, n, steps):
        for k in range(1, steps + 1):
            if m + k > self.H or n + k > self.H:
                break
            if self._escaped(i, m + k) or self._escaped(j, n + k):
                return False
            try:
                factor = max(1.0, abs(iterate_derivative(self.f, self.points[i][m], k)))
            except Exception:
                factor = 1.0
            if not self._close(self.points[i][m + k], self.points[j][n + k], factor):
                return False
        return True

    def _escaped(self, i, m):
        e = self.escaped_at[i]
        return e is not None and m >= e

    def _assign_ids(self, confirm):
        nu, H = self.crit.nu, len(self.points[0]) - 1 if self.points else 0
        self.H = H
        ids = [[None] * (H + 1) for _ in range(nu)]
        reps = []  # (i, m) of each id's first node
        next_id = 0
        for m in range(H + 1):
            for i in range(nu):
                z = self.points[i][m]
                if self._escaped(i, m):
                    ids[i][m] = next_id
                    reps.append((i, m))
                    next_id += 1
                    continue
                matches = []
                for rid, (j, n) in enumerate(reps):
                    if self._escaped(j, n):
                        continue
                    w = self.points[j][n]
                    if self._close(z, w) and self._confirm(i, m, j, n, confirm):
                        matches.append(rid)
                if len(matches) > 1:
                    raise AmbiguousCollision(
                        f"f^{m}(c{i + 1}) matches several distinct orbit points within tolerance",
                        [reps[r] for r in matches],
                    )
                if matches:
                    ids[i][m] = matches[0]
                else:
                    ids[i][m] = next_id
                    reps.append((i, m))
                    next_id += 1
        settled = []
        for i in range(nu):
            row = ids[i]
            seen = set()
            repeat = False
            for m, x in enumerate(row):
                if x in seen:
                    repeat = True
                    break
                seen.add(x)
            settled.append(self.escaped_at[i] is not None or repeat)
        return ids, settled


def numeric_model(f: RatMap, tol=config.COLLISION_TOL, H=config.NUMERIC_HORIZON, crit=None,
                  polynomial=None) -> NumericModel:
    return NumericModel(f, tol=tol, H=H, crit=crit, polynomial=polynomial)


def _orient(i, j, m, n) -> CriticalRelation:
    if n == 0:
        return CriticalRelation(i, j, m, 0)
    if m == 0:
        return CriticalRelation(j, i, n, 0)
    if i >= j:
        return CriticalRelation(i, j, m, n)
    return CriticalRelation(j, i, n, m)


def detect_relations(model: OrbitModel):
    """First collisions for every pair of critical orbits (landings included)."""
    ids, nu = model.ids, model.nu
    found = []
    for a in range(nu):
        first = {}
        for m, x in enumerate(ids[a]):
            first.setdefault(x, m)
        # self collision: smallest m with an earlier repeat
        seen = {}
        for m, x in enumerate(ids[a]):
            if x in seen and m > 0:
                found.append(CriticalRelation(a + 1, a + 1, m, seen[x]))
                break
            seen.setdefault(x, m)
        for b in range(a + 1, nu):
            best = None
            for n, x in enumerate(ids[b]):
                for m in ([first[x]] if x in first else []):
                    key = (m + n, max(m, n))
                    if best is None or key < best[0]:
                        best = (key, m, n)
            if best is not None:
                _, m, n = best
                found.append(_orient(a + 1, b + 1, m, n))
    if isinstance(model, SymbolicModel):
        out = list(dict.fromkeys(model.generators))
        out += [r for r in found if r not in out]
        return out
    return found


def _minimal_pairs(model: OrbitModel):
    """Realized pairs ((i,m),(j,n)) not obtained by shifting a realized pair forward."""
    ids = model.ids
    classes = defaultdict(list)
    for i in range(model.nu):
        for m in range(model.H + 1):
            classes[ids[i][m]].append((i + 1, m))
    for members in classes.values():
        if len(members) < 2:
            continue
        groups = defaultdict(list)
        for i, m in members:
            key = ("c", i) if m == 0 else ids[i - 1][m - 1]
            groups[key].append((i, m))
        keys = list(groups)
        for ka_idx, ka in enumerate(keys):
            ga = groups[ka]
            # pairs inside one group only matter when a critical point is involved
            for x in range(len(ga)):
                for y in range(x + 1, len(ga)):
                    if ga[x][1] == 0 or ga[y][1] == 0:
                        yield ga[x], ga[y]
            for kb in keys[ka_idx + 1 :]:
                for p in ga:
                    for q in groups[kb]:
                        yield p, q


def _tail_period(ids_row, H):
    """Smallest P with the last stretch of the row P-periodic, or None."""
    for P in range(1, H // 2 + 1):
        if all(ids_row[t] == ids_row[t - P] for t in range(H - P + 1, H + 1)):
            if ids_row[H] == ids_row[H - P]:
                return P
    return None


def _extended_id(model: OrbitModel, periods, i, t):
    """Orbit id at index t, continuing eventually periodic rays past the horizon."""
    H = model.H
    if t <= H:
        return model.ids[i - 1][t]
    P = periods[i - 1]
    if P is None:
        return ("beyond", i, t)
    return model.ids[i - 1][t - P * -(-(t - H) // P)]


def is_full(F, model: OrbitModel):
    """True / False / None (undecided within the horizon).

    Walks run to twice the model horizon: settled periodic rays are continued
    by their period, and the closure is built on the longer index range.
    """
    F = [as_relation(r) for r in F]
    unknown = False
    for r in F:
        ok = model.realizes(r)
        if ok is False:
            return False
        if ok is None:
            unknown = True
    H2 = 2 * model.H
    cl = closure(F, model.nu, H2)
    settled = model.settled
    periods = [_tail_period(row, model.H) if settled[k] else None for k, row in enumerate(model.ids)]
    for (i, m), (j, n) in _minimal_pairs(model):
        k = 0
        states = set()
        while True:
            if m + k > H2 or n + k > H2:
                unknown = True
                break
            if cl.same((i, m + k), (j, n + k)):
                break
            a = _extended_id(model, periods, i, m + k)
            if a in model.crit_ids:
                return False
            # both orbits eventually periodic: a repeated state means the walk cycles forever
            state = (a, _extended_id(model, periods, j, n + k))
            if state in states and settled[i - 1] and settled[j - 1]:
                return False
            states.add(state)
            k += 1
    return None if unknown else True


def is_noncyclic(F) -> bool:
    graph = defaultdict(set)
    for r in map(as_relation, F):
        if r.m == 1 and r.n == 1 and r.i != r.j:
            graph[r.i].add(r.j)
    color = {}

    def visit(u):
        color[u] = 1
        for v in graph[u]:
            c = color.get(v, 0)
            if c == 1:
                return True
            if c == 0 and visit(v):
                return True
        color[u] = 2
        return False

    return not any(color.get(u, 0) == 0 and visit(u) for u in list(graph))


@dataclass(frozen=True)
class RelationCollection:
    relations: tuple
    full: bool | None = None
    minimally_full: bool | None = None
    proper: bool | None = None
    noncyclic: bool | None = None
    zeta: int | None = None
    free: tuple = ()
    horizon_exhausted: tuple = field(default=())

    def __len__(self):
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def to_json(self):
        return {
            "relations": [list(r) for r in self.relations],
            "full": self.full,
            "minimally_full": self.minimally_full,
            "proper": self.proper,
            "noncyclic": self.noncyclic,
            "zeta": self.zeta,
            "free": list(self.free),
            "horizon_exhausted": list(self.horizon_exhausted),
        }


def _inductive_procedure(model: OrbitModel):
    """Inductive construction of a proper collection.

    Returns (relations, m_values, free rays, rays whose m_i was cut by the horizon).
    """
    nu, H, ids = model.nu, model.H, model.ids
    crit_ids = set(model.crit_ids)
    m_val = {}
    rels, free, exhausted = [], [], []
    for i in range(1, nu + 1):
        forbidden = set(crit_ids)
        for j in range(1, i):
            for k in range(min(m_val[j], H + 1)):
                forbidden.add(ids[j - 1][k])
        own = set()
        mi = None
        for m in range(1, H + 1):
            x = ids[i - 1][m]
            if x in forbidden or x in own:
                mi = m
                break
            own.add(x)
        if mi is None:
            m_val[i] = H + 1
            free.append(i)
            if not model.settled[i - 1]:
                exhausted.append(i)
            continue
        m_val[i] = mi
        x = ids[i - 1][mi]
        cands = []
        for j in range(1, i + 1):
            top = min(m_val[j], H) if j < i else mi - 1
            for n in range(1, top + 1):
                if ids[j - 1][n] == x:
                    cands.append((j, n))
                    break
        if cands:
            ones = [c for c in cands if c[1] == 1]
            j, n = min(ones) if ones else min(cands)
            rels.append(CriticalRelation(i, j, mi, n))
        else:
            j = model.crit_ids[x]
            rels.append(CriticalRelation(i, j, mi, 0))
    return rels, m_val, free, exhausted


def build_proper(model: OrbitModel) -> RelationCollection:
    rels, _, free, exhausted = _inductive_procedure(model)
    if exhausted:
        warnings.warn(
            f"orbits of critical points {exhausted} undetermined within horizon {model.H}; treated as free",
            HorizonExhausted,
            stacklevel=2,
        )
    zeta = model.nu - len(rels)
    full = is_full(rels, model)
    minimal = full if full is not True else True
    proper = _proper_conditions(rels, model) and minimal
    return RelationCollection(
        tuple(rels), full, minimal, proper, is_noncyclic(rels), zeta, tuple(free), tuple(exhausted)
    )


def zeta(model: OrbitModel) -> int:
    rels, _, _, exhausted = _inductive_procedure(model)
    if exhausted:
        warnings.warn(f"zeta is conditional on horizon {model.H}", HorizonExhausted, stacklevel=2)
    return model.nu - len(rels)


def is_minimally_full(F, model: OrbitModel):
    F = [as_relation(r) for r in F]
    full = is_full(F, model)
    if full is False:
        return False
    if len(F) != zeta_free_count(model):
        return False
    return full


def zeta_free_count(model):
    """N = nu - zeta."""
    rels, _, _, _ = _inductive_procedure(model)
    return len(rels)


def _proper_conditions(F, model: OrbitModel) -> bool:
    F = [as_relation(r) for r in F]
    ids, H = model.ids, model.H
    # orientation: m > 0, and i >= j unless the relation is a landing
    for r in F:
        if r.m <= 0 or not (r.i >= r.j or r.n == 0):
            return False
        if r.i == r.j and not r.m > r.n:
            return False
    # f(c_i), ..., f^{m-1}(c_i) distinct, non-critical and off earlier orbits
    for r in F:
        if r.m - 1 > H:
            return False
        earlier = {ids[l - 1][k] for l in range(1, r.i) for k in range(H + 1)}
        seen = set()
        for k in range(1, r.m):
            x = ids[r.i - 1][k]
            if x in seen or x in model.crit_ids or x in earlier:
                return False
            seen.add(x)
    # uniqueness of first indices, of landing targets and of (j, n) in m = 1 relations
    firsts = [r.i for r in F]
    if len(firsts) != len(set(firsts)):
        return False
    landings = [r.j for r in F if r.n == 0]
    if len(landings) != len(set(landings)):
        return False
    ones = [(r.j, r.n) for r in F if r.m == 1 and r.n > 1]
    if len(ones) != len(set(ones)):
        return False
    # a relation (k, i; 1, l) feeding c_i needs l < m_i
    for r in F:
        if r.m > 1 and r.n > 0:
            for s in F:
                if s.j == r.i and s.m == 1 and not s.n < r.m:
                    return False
    return True


def is_proper(F, model: OrbitModel):
    if not _proper_conditions(F, model):
        return False
    return is_minimally_full(F, model)


def collection(F, model: OrbitModel) -> RelationCollection:
    """Wrap an arbitrary list of relations with its flags evaluated on ``model``."""
    F = tuple(as_relation(r) for r in F)
    rels, _, free, exhausted = _inductive_procedure(model)
    return RelationCollection(
        F,
        is_full(F, model),
        is_minimally_full(F, model),
        is_proper(F, model),
        is_noncyclic(F),
        model.nu - len(rels),
        tuple(free),
        tuple(exhausted),
    )
