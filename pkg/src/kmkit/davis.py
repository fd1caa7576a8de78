"""Building balls over F_q and Davis complexes of spherical residues.

Two building backends exist.  Finite-type data get the full building as
the orbit of the standard Borel subalgebra under the adjoint group:
chambers are subspaces of the windowed algebra in reduced row echelon
form, panels are the transported minimal parabolic subalgebras, and the
gallery word/parameter coordinates come from the BFS itself.  Rank-2 data
with an infinite Weyl group get the (q+1)-regular tree combinatorially,
chambers being reduced words with one field parameter per letter.  Other
configurations are refused by name.

Davis complexes are geometric realisations of the poset of spherical
residues (cosets w W_J at the Coxeter level) ordered by inclusion; the
simplices are the chains.  Residues whose type fills a finite-type
diagram component carry the marked flag.  Faces that might extend past a
ball boundary are flagged, never silently truncated.
"""

from dataclasses import dataclass
import itertools

from kmkit.errors import InputError, UnsupportedConfigurationError, WindowExceededError
from kmkit.exactalg import Matrix, ffield_make, rref
from kmkit.gcm import FINITE, classify
from kmkit import weyl
from kmkit.adrep import ad_exponential
from kmkit.cosheaf import SimplicialComplex
from kmkit.kmalg import assemble_g


def field_from_q(q):
    """F_q from a prime power."""
    if q < 2:
        raise InputError("q must be a prime power >= 2")
    p = next((d for d in range(2, q + 1) if q % d == 0))
    m = 0
    qq = q
    while qq % p == 0 and qq > 1:
        qq //= p
        m += 1
    if qq != 1:
        raise InputError("q = %r is not a prime power" % (q,))
    return ffield_make(p, m)


@dataclass(frozen=True)
class Chamber:
    index: int
    word: tuple
    params: tuple
    distance: int

    def to_json(self, ring):
        return {
            "index": self.index,
            "word": list(self.word),
            "params": [ring.to_json(t) for t in self.params],
            "distance": self.distance,
        }


@dataclass(frozen=True)
class Panel:
    index: int
    stype: int
    members: tuple
    complete: bool

    def to_json(self):
        return {
            "index": self.index,
            "type": self.stype,
            "chambers": list(self.members),
            "complete": self.complete,
        }


@dataclass
class BuildingBall:
    datum: object
    ring: object
    q: int
    radius: int
    backend: str
    chambers: list
    panels: list
    panel_of: dict  # (chamber index, s) -> panel index

    def chambers_at(self, distance):
        return [c for c in self.chambers if c.distance == distance]

    def to_json(self):
        return {
            "schema": 1,
            "backend": self.backend,
            "q": self.q,
            "radius": self.radius,
            "gcm": [list(r) for r in self.datum.gcm.entries],
            "chambers": [c.to_json(self.ring) for c in self.chambers],
            "panels": [p.to_json() for p in self.panels],
        }

    def adjacency_tsv(self):
        lines = []
        for p in self.panels:
            for a, b in itertools.combinations(p.members, 2):
                lines.append("%d\t%d\t%d" % (a, b, p.stype))
        return "\n".join(lines) + ("\n" if lines else "")


def building_ball(datum, q, radius):
    """Chambers within gallery distance `radius` of the base chamber.

    Supported: finite-type data (group orbit of the Borel subalgebra) and
    rank-2 data with infinite Weyl group (tree backend).  Everything else
    is refused with the missing backend named.
    """
    if radius < 0:
        raise InputError("radius must be >= 0")
    tags = classify(datum.gcm).tags
    if all(t == FINITE for t in tags):
        return _building_ball_group(datum, q, radius)
    n = datum.n
    if n == 2 and datum.gcm[0, 1] * datum.gcm[1, 0] >= 4:
        return _building_ball_tree(datum, q, radius)
    raise UnsupportedConfigurationError(
        "no building backend for this configuration: need finite type or "
        "rank-2 with infinite Weyl group (got rank %d, types %s)" % (n, list(tags))
    )


def _building_ball_tree(datum, q, radius):
    ring = field_from_q(q)
    elements = sorted(ring.elements())
    chambers = [Chamber(0, (), (), 0)]
    index_of = {((), ()): 0}
    frontier = [chambers[0]]
    for dist in range(1, radius + 1):
        nxt = []
        for c in frontier:
            for s in (1, 2):
                if c.word and c.word[-1] == s:
                    continue
                for t in elements:
                    ch = Chamber(len(chambers), c.word + (s,), c.params + (t,), dist)
                    chambers.append(ch)
                    index_of[(ch.word, ch.params)] = ch.index
                    nxt.append(ch)
        frontier = nxt
    # panels: key (prefix word, prefix params, type)
    groups = {}
    for c in chambers:
        for s in (1, 2):
            if c.word and c.word[-1] == s:
                key = (c.word[:-1], c.params[:-1], s)
            else:
                key = (c.word, c.params, s)
            groups.setdefault(key, []).append(c.index)
    panels = []
    panel_of = {}
    for key in sorted(groups, key=lambda k: (len(k[0]), k)):
        members = tuple(sorted(groups[key]))
        p = Panel(len(panels), key[2], members, complete=len(members) == q + 1)
        panels.append(p)
        for ci in members:
            panel_of[(ci, key[2])] = p.index
    return BuildingBall(datum, ring, q, radius, "rank2-tree", chambers, panels, panel_of)


def _full_positive_heights(datum):
    ball = weyl.enumerate_weyl_ball(datum, 64, max_elements=200_000)
    longest = max(w.length for w in ball)
    roots = weyl.enumerate_real_roots(datum, longest)
    return max(r.height for r in roots)


def _building_ball_group(datum, q, radius):
    ring = field_from_q(q)
    height = _full_positive_heights(datum)
    alg = assemble_g(datum, height, ring=ring)
    dim = alg.dim
    elements = sorted(ring.elements())

    borel = [i for i, b in enumerate(alg.basis) if b[0] != "f"]
    parabolic = {}
    simple = []
    for s in range(1, datum.n + 1):
        alpha = tuple(1 if k == s - 1 else 0 for k in range(datum.n))
        simple.append(alpha)
        parabolic[s] = borel + [alg.index[("f", alpha, 0)]]

    def transported_key(gmat, idxs):
        rows = [tuple(gmat[r, i] for r in range(dim)) for i in idxs]
        E, _ = rref(Matrix(ring, rows, ncols=dim))
        return tuple(E.rows[k] for k in range(len(idxs)))

    # coset representatives of P_s / B: identity plus x_s(t) n_s
    step = {}
    for s in range(1, datum.n + 1):
        alpha = simple[s - 1]
        neg = tuple(-x for x in alpha)
        n_s = (
            ad_exponential(alg, alpha, ring.one).matrix
            * ad_exponential(alg, neg, ring.neg(ring.one)).matrix
            * ad_exponential(alg, alpha, ring.one).matrix
        )
        step[s] = [ad_exponential(alg, alpha, t).matrix * n_s for t in elements]

    ident = Matrix.identity(ring, dim)
    base_key = transported_key(ident, borel)
    chambers = [Chamber(0, (), (), 0)]
    reps = [ident]
    seen = {base_key: 0}
    frontier = [0]
    for dist in range(1, radius + 1):
        nxt = []
        for ci in frontier:
            g = reps[ci]
            c = chambers[ci]
            for s in range(1, datum.n + 1):
                for ti, mat in enumerate(step[s]):
                    g2 = g * mat
                    key = transported_key(g2, borel)
                    if key in seen:
                        continue
                    ch = Chamber(len(chambers), c.word + (s,), c.params + (elements[ti],), dist)
                    seen[key] = ch.index
                    chambers.append(ch)
                    reps.append(g2)
                    nxt.append(ch.index)
        if not nxt:
            break
        frontier = nxt
    # panels via transported parabolic subalgebras
    groups = {}
    for ci, g in enumerate(reps):
        for s in range(1, datum.n + 1):
            pkey = (s, transported_key(g, parabolic[s]))
            groups.setdefault(pkey, []).append(ci)
    panels = []
    panel_of = {}
    for pkey in sorted(groups, key=lambda k: (k[0], k[1])):
        members = tuple(sorted(groups[pkey]))
        p = Panel(len(panels), pkey[0], members, complete=len(members) == q + 1)
        panels.append(p)
        for ci in members:
            panel_of[(ci, pkey[0])] = p.index
    return BuildingBall(datum, ring, q, radius, "finite-group", chambers, panels, panel_of)


def parabolic_index(datum, q, s):
    """|P_s : B| computed as the size of a complete s-panel in a ball."""
    if not 1 <= s <= datum.n:
        raise InputError("panel type %r out of range" % (s,))
    ball = building_ball(datum, q, 1)
    panel = ball.panels[ball.panel_of[(0, s)]]
    if not panel.complete:
        raise WindowExceededError("base panel incomplete at radius 1")
    return len(panel.members)


# ---------------------------------------------------------------------------
# Davis complexes


@dataclass
class DavisVertex:
    index: int
    types: tuple  # J as a sorted tuple of 1-based generator indices
    label: object  # coset word at Coxeter level, chamber set for buildings
    marked: bool
    complete: bool

    def to_json(self):
        return {
            "index": self.index,
            "types": list(self.types),
            "label": list(self.label) if isinstance(self.label, tuple) else sorted(self.label),
            "marked": self.marked,
            "complete": self.complete,
        }


@dataclass
class DavisComplex:
    complex: SimplicialComplex
    vertices: list  # DavisVertex
    source: str

    def vertex_count(self):
        return len(self.vertices)

    def to_json(self):
        return {
            "schema": 1,
            "source": self.source,
            "vertices": [v.to_json() for v in self.vertices],
            "complex": self.complex.to_json(),
        }

    def edge_tsv(self):
        lines = []
        for a, b in self.complex.faces(1):
            lines.append("%d\t%d" % (a, b))
        return "\n".join(lines) + ("\n" if lines else "")


def _spherical_subsets(gcm):
    n = gcm.n
    out = []
    for r in range(n + 1):
        for J in itertools.combinations(range(1, n + 1), r):
            if weyl.is_spherical(gcm, J):
                out.append(J)
    return out


def _marked_types(gcm, J):
    comps = gcm.components()
    marked = []
    for comp in comps:
        names = tuple(i + 1 for i in comp)
        if set(names) <= set(J):
            marked.append(names)
    return tuple(marked)


def _chains_complex(count, less, flags):
    """All chains of the poset as a simplicial complex on 0..count-1."""
    greater = {v: [] for v in range(count)}
    for a, b in less:
        greater[a].append(b)
    faces = []

    def extend(chain):
        faces.append(tuple(chain))
        last = chain[-1]
        for u in greater[last]:
            chain.append(u)
            extend(chain)
            chain.pop()

    for v in range(count):
        extend([v])
    boundary_flags = {}
    for f in faces:
        if any(flags[v] for v in f):
            boundary_flags[tuple(sorted(f))] = True
    return SimplicialComplex([tuple(sorted(f)) for f in faces], boundary_flags=boundary_flags)


def coxeter_davis_ball(datum, length_bound):
    """Davis complex of the Coxeter system from cosets w W_J, J spherical.

    Vertices are the minimal-length coset representatives with l(w) <=
    length_bound; for finite Weyl groups and a large enough bound this is
    the whole Davis complex.
    """
    ball = weyl.enumerate_weyl_ball(datum, length_bound)
    gcm = datum.gcm
    sphericals = _spherical_subsets(gcm)
    longest = {}
    for J in sphericals:
        longest[J] = max(w.length for w in weyl.enumerate_parabolic(datum, J))
    found = {}
    for w in ball:
        for J in sphericals:
            rep = weyl.coset_minimal(w, J)
            key = (J, rep.hmat)
            if key not in found:
                found[key] = rep
    order = sorted(found, key=lambda k: (len(k[0]), k[0], found[k].length, found[k].word))
    vertices = []
    index_of = {}
    for key in order:
        J, _ = key
        rep = found[key]
        complete = rep.length + longest[J] <= length_bound
        v = DavisVertex(
            index=len(vertices),
            types=J,
            label=rep.word,
            marked=bool(_marked_types(gcm, J)),
            complete=complete,
        )
        index_of[key] = v.index
        vertices.append(v)
    less = []
    for key_small in order:
        Js, _ = key_small
        ws = found[key_small]
        for key_big in order:
            Jb, _ = key_big
            if key_small == key_big or not set(Js) < set(Jb):
                continue
            if weyl.coset_minimal(ws, Jb) == found[key_big]:
                less.append((index_of[key_small], index_of[key_big]))
    # equal type sets never nest strictly unless subsets differ, but the
    # empty-vs-empty case with equal words is excluded above
    flags = [not v.complete for v in vertices]
    cx = _chains_complex(len(vertices), less, flags)
    return DavisComplex(cx, vertices, "coxeter")


def davis_realization_of_ball(ball):
    """Davis complex of a building ball: chains of spherical residues.

    A J-residue is a connected component of the chamber graph along
    panels of types in J; vertices ordered by inclusion, simplices are
    chains.  Residues touching incomplete panels are flagged.
    """
    datum = ball.datum
    gcm = datum.gcm
    sphericals = _spherical_subsets(gcm)
    n_ch = len(ball.chambers)
    vertices = []
    index_of = {}
    residue_sets = []
    for J in sphericals:
        comps = _residues(ball, J, n_ch)
        for comp in comps:
            incomplete = any(
                not ball.panels[ball.panel_of[(c, s)]].complete
                for c in comp
                for s in J
                if (c, s) in ball.panel_of
            )
            key = (J, comp)
            index_of[key] = len(vertices)
            residue_sets.append((J, comp))
            vertices.append(
                DavisVertex(
                    index=len(vertices),
                    types=J,
                    label=comp,
                    marked=bool(_marked_types(gcm, J)),
                    complete=not incomplete,
                )
            )
    less = []
    for i, (Ji, Ri) in enumerate(residue_sets):
        for j, (Jj, Rj) in enumerate(residue_sets):
            if i == j or not set(Ji) < set(Jj):
                continue
            if Ri <= Rj:
                less.append((i, j))
    flags = [not v.complete for v in vertices]
    cx = _chains_complex(len(vertices), less, flags)
    return DavisComplex(cx, vertices, "building-" + ball.backend)


def _residues(ball, J, n_ch):
    if not J:
        return [frozenset([c]) for c in range(n_ch)]
    parent = list(range(n_ch))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for p in ball.panels:
        if p.stype in J:
            for a, b in zip(p.members, p.members[1:]):
                union(a, b)
    groups = {}
    for c in range(n_ch):
        groups.setdefault(find(c), []).append(c)
    return sorted(
        (frozenset(g) for g in groups.values()), key=lambda s: min(s)
    )
