"""Finite simplicial complexes, coefficient systems, and exact homology.

Faces are stored as sorted vertex tuples and orientations are read off
that order, so the boundary of (v_0 < ... < v_k) drops v_i with sign
(-1)^i.  A cosheaf assigns a free module to every face and a
corestriction matrix to every codimension-1 inclusion; chain groups are
direct sums over the faces of one dimension.

Geodesic idempotent systems assign a projection to every vertex; their
cosheaf takes the image of the product of the vertex projections over
each face (the product must commute on the face, which is checked and
never repaired).  The homology-vanishing probe treats a counterexample
as a first-class finding: it is archived bit-exactly by the caller.
"""

from dataclasses import dataclass, field
import itertools
import random

from kmkit.errors import InputError, PropertyViolationError
from kmkit.exactalg import (
    Matrix,
    QQ,
    ZZ,
    rank_kernel,
    rref,
    smith_normal_form,
    solve_field,
)


# ---------------------------------------------------------------------------
# complexes


class SimplicialComplex:
    """Finite abstract simplicial complex with optional boundary flags.

    boundary_flags marks faces that are incomplete artifacts of a window
    truncation (e.g. panels cut by a building ball); homology callers may
    exclude flagged faces.
    """

    def __init__(self, faces, close=False, boundary_flags=None):
        face_set = set()
        for f in faces:
            t = tuple(sorted(set(f)))
            if len(t) != len(tuple(f)):
                raise InputError("face %r has repeated vertices" % (f,))
            face_set.add(t)
            if close:
                for k in range(1, len(t)):
                    face_set.update(itertools.combinations(t, k))
        by_dim = {}
        for f in face_set:
            by_dim.setdefault(len(f) - 1, []).append(f)
        for k, fs in by_dim.items():
            by_dim[k] = sorted(fs)
        # closure check
        for k, fs in by_dim.items():
            if k == 0:
                continue
            lower = set(by_dim.get(k - 1, ()))
            for f in fs:
                for sub in itertools.combinations(f, k):
                    if sub not in lower:
                        raise InputError("face %r missing subface %r" % (f, sub))
        self.faces_by_dim = by_dim
        self.vertices = tuple(v for (v,) in by_dim.get(0, ()))
        self.boundary_flags = dict(boundary_flags or {})

    @property
    def dim(self):
        return max(self.faces_by_dim) if self.faces_by_dim else -1

    def faces(self, k):
        return self.faces_by_dim.get(k, [])

    def all_faces(self):
        for k in sorted(self.faces_by_dim):
            yield from self.faces_by_dim[k]

    def has_face(self, f):
        t = tuple(sorted(f))
        return t in set(self.faces_by_dim.get(len(t) - 1, ()))

    def n_faces(self, k):
        return len(self.faces_by_dim.get(k, ()))

    def euler_characteristic(self):
        return sum((-1) ** k * len(fs) for k, fs in self.faces_by_dim.items())

    def is_tree(self):
        """Connected, acyclic, at most 1-dimensional."""
        if self.dim > 1:
            return False
        v = self.n_faces(0)
        e = self.n_faces(1)
        return v > 0 and v - e == 1 and self.is_connected()

    def is_connected(self):
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for a, b in self.faces(1):
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def to_json(self):
        return {
            "schema": 1,
            "faces": [list(f) for k in sorted(self.faces_by_dim) for f in self.faces_by_dim[k]],
            "boundary_flags": sorted(
                [list(f) for f, b in self.boundary_flags.items() if b]
            ),
        }

    def __repr__(self):
        counts = [self.n_faces(k) for k in range(self.dim + 1)]
        return "SimplicialComplex(%s)" % "/".join(str(c) for c in counts)


def complex_from_json(doc):
    return SimplicialComplex(
        [tuple(f) for f in doc["faces"]],
        close=True,
        boundary_flags={tuple(sorted(f)): True for f in doc.get("boundary_flags", [])},
    )


# small corpus constructors used by tests and the CLI

def point_complex():
    return SimplicialComplex([(0,)])


def path_complex(n):
    """Path on n vertices 0..n-1."""
    return SimplicialComplex([(i, i + 1) for i in range(n - 1)] or [(0,)], close=True)


def cycle_complex(n):
    return SimplicialComplex(
        [(i, (i + 1) % n) for i in range(n)], close=True
    )


def star_tree(leaves):
    """Star with center 0 and the given number of leaves."""
    return SimplicialComplex([(0, i) for i in range(1, leaves + 1)], close=True)


def solid_triangle():
    return SimplicialComplex([(0, 1, 2)], close=True)


def sphere_triangulation():
    """Boundary of the tetrahedron."""
    return SimplicialComplex(list(itertools.combinations(range(4), 3)), close=True)


def cone_over(complex_, apex):
    faces = [f + (apex,) for f in complex_.all_faces()] + list(complex_.all_faces())
    faces.append((apex,))
    return SimplicialComplex(faces, close=True)


def random_tree(n, seed):
    rng = random.Random(seed)
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return SimplicialComplex(edges or [(0,)], close=True)


# ---------------------------------------------------------------------------
# cosheaves


@dataclass
class CosheafAction:
    """Finite group action data: a multiplication table, vertex maps, and
    per-face matrices."""

    elements: tuple
    identity: object
    table: dict  # (g, h) -> gh
    vertex_maps: dict  # g -> {vertex: vertex}
    face_maps: dict  # (g, face) -> Matrix

    def apply_face(self, g, face):
        vm = self.vertex_maps[g]
        return tuple(sorted(vm[v] for v in face))


class Cosheaf:
    """Per-face free modules with corestrictions toward smaller faces."""

    def __init__(self, complex_, ring, dims, maps, action=None):
        self.complex = complex_
        self.ring = ring
        self.dims = dict(dims)
        self.maps = dict(maps)
        self.action = action

    def restriction(self, face, sub):
        face, sub = tuple(sorted(face)), tuple(sorted(sub))
        if len(sub) == len(face):
            if sub != face:
                raise InputError("faces of equal dimension are not nested")
            return Matrix.identity(self.ring, self.dims[face])
        return self.maps[(face, sub)]

    def to_json(self):
        return {
            "schema": 1,
            "ring": self.ring.tag(),
            "complex": self.complex.to_json(),
            "dims": [[list(f), d] for f, d in sorted(self.dims.items())],
            "maps": [
                [list(f), list(s), m.to_json()] for (f, s), m in sorted(self.maps.items())
            ],
        }


def trivial_cosheaf(complex_, dim, ring=QQ):
    """Every face carries ring^dim and every corestriction is the identity."""
    dims = {f: dim for f in complex_.all_faces()}
    maps = {}
    ident = Matrix.identity(ring, dim)
    for k in range(1, complex_.dim + 1):
        for f in complex_.faces(k):
            for sub in itertools.combinations(f, len(f) - 1):
                maps[(f, sub)] = ident
    return Cosheaf(complex_, ring, dims, maps)


def validate_cosheaf(C):
    """Check the cosheaf axioms; returns (ok, violations).

    Identity maps on equal faces are implicit (axiom i); composition
    squares are compared entrywise along both codimension-1 routes
    (axiom ii); when a group action is attached, its composition rule and
    the equivariance squares are checked as well.
    """
    violations = []
    cx = C.complex
    for k in range(1, cx.dim + 1):
        for f in cx.faces(k):
            for sub in itertools.combinations(f, k):
                m = C.maps.get((f, sub))
                if m is None:
                    violations.append({"axiom": "missing-map", "faces": [f, sub]})
                    continue
                if m.nrows != C.dims[sub] or m.ncols != C.dims[f]:
                    violations.append({"axiom": "shape", "faces": [f, sub]})
    for k in range(2, cx.dim + 1):
        for f in cx.faces(k):
            for sub2 in itertools.combinations(f, k - 1):
                routes = []
                for sub1 in itertools.combinations(f, k):
                    if set(sub2) <= set(sub1):
                        a = C.maps.get((f, sub1))
                        b = C.maps.get((sub1, sub2))
                        if a is not None and b is not None:
                            routes.append(b * a)
                if len(routes) >= 2 and any(r != routes[0] for r in routes[1:]):
                    violations.append({"axiom": "composition", "faces": [f, sub2]})
    act = C.action
    if act is not None:
        for g in act.elements:
            for h in act.elements:
                gh = act.table[(g, h)]
                for f in cx.all_faces():
                    hf = act.apply_face(h, f)
                    lhs = act.face_maps[(g, hf)] * act.face_maps[(h, f)]
                    rhs = act.face_maps[(gh, f)]
                    if lhs != rhs:
                        violations.append({"axiom": "action-composition", "faces": [f], "g": [g, h]})
        for g in act.elements:
            for k in range(1, cx.dim + 1):
                for f in cx.faces(k):
                    for sub in itertools.combinations(f, k):
                        gf, gsub = act.apply_face(g, f), act.apply_face(g, sub)
                        lhs = act.face_maps[(g, sub)] * C.maps[(f, sub)]
                        rhs = C.maps[(gf, gsub)] * act.face_maps[(g, f)]
                        if lhs != rhs:
                            violations.append({"axiom": "equivariance", "faces": [f, sub], "g": [g]})
    return not violations, violations


# ---------------------------------------------------------------------------
# chains and homology


@dataclass
class ChainComplexData:
    ring: object
    dims: tuple  # dim C_k for k = 0..d
    boundaries: tuple  # boundaries[k] : C_{k+1} -> C_k, k = 0..d-1
    offsets: tuple  # per degree: {face: column offset}

    def boundary(self, k):
        """The map C_k -> C_{k-1} (zero-shaped matrices at the ends)."""
        if 1 <= k <= len(self.boundaries):
            return self.boundaries[k - 1]
        rows = self.dims[k - 1] if 0 <= k - 1 < len(self.dims) else 0
        cols = self.dims[k] if 0 <= k < len(self.dims) else 0
        return Matrix.zeros(self.ring, rows, cols)


def chain_complex(C):
    """Boundary matrices of the oriented chain complex with coefficients."""
    cx = C.complex
    d = cx.dim
    offsets, dims = [], []
    for k in range(d + 1):
        off, total = {}, 0
        for f in cx.faces(k):
            off[f] = total
            total += C.dims[f]
        offsets.append(off)
        dims.append(total)
    ring = C.ring
    boundaries = []
    for k in range(1, d + 1):
        rows = dims[k - 1]
        cols = dims[k]
        body = [[ring.zero] * cols for _ in range(rows)]
        for f in cx.faces(k):
            cf = offsets[k][f]
            for i in range(len(f)):
                sub = f[:i] + f[i + 1 :]
                m = C.restriction(f, sub)
                rf = offsets[k - 1][sub]
                sign = 1 if i % 2 == 0 else -1
                for r in range(m.nrows):
                    for c in range(m.ncols):
                        v = m[r, c]
                        if not ring.is_zero(v):
                            body[rf + r][cf + c] = ring.add(
                                body[rf + r][cf + c],
                                v if sign > 0 else ring.neg(v),
                            )
        boundaries.append(Matrix(ring, body, ncols=cols))
    for k in range(len(boundaries) - 1):
        if not (boundaries[k] * boundaries[k + 1]).is_zero():
            raise PropertyViolationError("boundary squared nonzero at degree %d" % (k + 2,))
    return ChainComplexData(ring, tuple(dims), tuple(boundaries), tuple(offsets))


@dataclass
class HomologyReport:
    ring_tag: object
    chain_dims: tuple
    degrees: tuple  # per degree: {"rank": r, "torsion": [divisors]}

    def rank(self, k):
        if 0 <= k < len(self.degrees):
            return self.degrees[k]["rank"]
        return 0

    def torsion(self, k):
        if 0 <= k < len(self.degrees):
            return tuple(self.degrees[k]["torsion"])
        return ()

    def vanishing_above_zero(self):
        return all(
            d["rank"] == 0 and not d["torsion"] for d in self.degrees[1:]
        )

    def euler_from_chains(self):
        return sum((-1) ** k * d for k, d in enumerate(self.chain_dims))

    def euler_from_homology(self):
        return sum((-1) ** k * d["rank"] for k, d in enumerate(self.degrees))

    def to_json(self):
        return {
            "ring": self.ring_tag,
            "chain_dims": list(self.chain_dims),
            "homology": [
                {"degree": k, "rank": d["rank"], "torsion": list(d["torsion"])}
                for k, d in enumerate(self.degrees)
            ],
        }


def homology(C, ring=None):
    """Homology of the cosheaf chain complex.

    Over a field: ranks via Gaussian elimination.  Over Z: ranks and
    torsion via Smith normal form.  Passing a different ring than the
    cosheaf's requires the cosheaf to be defined over Z.
    """
    if ring is None:
        ring = C.ring
    if ring is not C.ring:
        if C.ring is not ZZ:
            raise InputError("ring change requires an integral cosheaf")
        conv = Cosheaf(
            C.complex,
            ring,
            C.dims,
            {
                k: Matrix(ring, [[ring.from_int(x) for x in row] for row in m.rows], ncols=m.ncols)
                for k, m in C.maps.items()
            },
        )
        C = conv
    data = chain_complex(C)
    degrees = []
    d = len(data.dims) - 1
    for k in range(d + 1):
        bk = data.boundary(k)
        bk1 = data.boundary(k + 1)
        if ring.is_field:
            rk = rank_kernel(bk)[0] if bk.ncols else 0
            rk1 = rank_kernel(bk1)[0] if bk1.ncols else 0
            degrees.append({"rank": data.dims[k] - rk - rk1, "torsion": ()})
        else:
            _, rk = smith_normal_form([list(r) for r in bk.rows], ncols=bk.ncols)
            div1, rk1 = smith_normal_form([list(r) for r in bk1.rows], ncols=bk1.ncols)
            degrees.append(
                {
                    "rank": data.dims[k] - rk - rk1,
                    "torsion": tuple(x for x in div1 if x != 1),
                }
            )
    report = HomologyReport(
        ring.tag() if hasattr(ring, "tag") else str(ring), tuple(data.dims), tuple(degrees)
    )
    if ring.is_field and report.euler_from_chains() != report.euler_from_homology():
        raise PropertyViolationError("Euler characteristic mismatch")
    return report


# ---------------------------------------------------------------------------
# geodesic idempotent systems


class IdempotentSystem:
    """Per-vertex idempotent matrices on ring^d plus a geodesic oracle.

    geodesic maps an ordered vertex pair (x, y), x != y, to the vertex
    tuple of the first simplex along [x, y].  For trees it is derived
    from the unique paths; otherwise the caller supplies it.
    """

    def __init__(self, complex_, ring, dim, lambdas, geodesic=None, cat0_asserted=False):
        self.complex = complex_
        self.ring = ring
        self.dim = dim
        self.lambdas = dict(lambdas)
        if geodesic is None:
            if not complex_.is_tree():
                raise InputError("geodesic oracle required for non-tree complexes")
            geodesic = tree_geodesic_oracle(complex_)
        self.geodesic = dict(geodesic)
        self.cat0_asserted = cat0_asserted

    @property
    def cat0_eligible(self):
        return self.cat0_asserted or self.complex.is_tree()

    def to_json(self, seed=None):
        doc = {
            "schema": 1,
            "ring": self.ring.tag(),
            "dim": self.dim,
            "complex": self.complex.to_json(),
            "lambdas": [[v, self.lambdas[v].to_json()] for v in sorted(self.lambdas)],
            "geodesic": [
                [list(k), list(v)] for k, v in sorted(self.geodesic.items())
            ],
        }
        if seed is not None:
            doc["seed"] = seed
        return doc


def tree_geodesic_oracle(complex_):
    """First edge along the unique path between each ordered vertex pair."""
    adj = {v: [] for v in complex_.vertices}
    for a, b in complex_.faces(1):
        adj[a].append(b)
        adj[b].append(a)
    oracle = {}
    for x in complex_.vertices:
        parent = {x: None}
        first = {x: None}
        queue = [x]
        while queue:
            v = queue.pop(0)
            for w in adj[v]:
                if w not in parent:
                    parent[w] = v
                    first[w] = w if v == x else first[v]
                    queue.append(w)
        for y, f in first.items():
            if y != x and f is not None:
                oracle[(x, y)] = tuple(sorted((x, f)))
    return oracle


def validate_geodesic_system(S):
    """Check idempotency plus the two geodesic commutation conditions.

    Returns (ok, violations); each violation names the condition and the
    vertices involved.
    """
    violations = []
    R = S.ring
    for v, m in S.lambdas.items():
        if m * m != m:
            violations.append({"condition": "idempotent", "vertices": [v]})
    edges = set(S.complex.faces(1))
    for a, b in edges:
        la, lb = S.lambdas[a], S.lambdas[b]
        if la * lb != lb * la:
            violations.append({"condition": "adjacent-commute", "vertices": [a, b]})
    for x in S.complex.vertices:
        for y in S.complex.vertices:
            if x == y:
                continue
            simplex = S.geodesic.get((x, y))
            if simplex is None:
                violations.append({"condition": "oracle-gap", "vertices": [x, y]})
                continue
            lx, ly = S.lambdas[x], S.lambdas[y]
            for z in simplex:
                lz = S.lambdas[z]
                if lx * lz * ly != lx * ly:
                    violations.append(
                        {"condition": "absorption", "vertices": [x, z, y]}
                    )
                if lx * lz != lz * lx:
                    violations.append(
                        {"condition": "geodesic-commute", "vertices": [x, z]}
                    )
    return not violations, violations


def _image_basis(M):
    """Canonical basis of the column space: pivot-row form of rref(M^T)."""
    E, pivots = rref(M.transpose())
    return [E.rows[i] for i in range(len(pivots))]


def idempotent_cosheaf(S):
    """The coefficient system F |-> im(prod_{x in F} Lambda_x).

    The product over a face must commute (checked pairwise); the
    corestriction into a subface is the inclusion of images written in
    the chosen bases.
    """
    if not S.ring.is_field:
        raise InputError("idempotent cosheaf construction needs a field")
    R = S.ring
    cx = S.complex
    bases, dims = {}, {}
    for f in cx.all_faces():
        for a, b in itertools.combinations(f, 2):
            la, lb = S.lambdas[a], S.lambdas[b]
            if la * lb != lb * la:
                raise PropertyViolationError(
                    "non-commuting projections on face %r" % (f,), witness=(a, b)
                )
        prod = Matrix.identity(R, S.dim)
        for v in f:
            prod = prod * S.lambdas[v]
        basis = _image_basis(prod)
        bases[f] = basis
        dims[f] = len(basis)
    maps = {}
    for k in range(1, cx.dim + 1):
        for f in cx.faces(k):
            for sub in itertools.combinations(f, k):
                # write each basis vector of A_F in the basis of A_sub
                sub_basis = bases[sub]
                cols = []
                if bases[f]:
                    target = Matrix(R, list(zip(*sub_basis)) if sub_basis else [], ncols=len(sub_basis))
                    for vec in bases[f]:
                        x = solve_field(target, vec) if sub_basis else None
                        if x is None:
                            raise PropertyViolationError(
                                "image of %r does not include into %r" % (f, sub)
                            )
                        cols.append(x)
                rows = [
                    [cols[j][i] for j in range(len(cols))] for i in range(dims[sub])
                ]
                maps[(f, sub)] = Matrix(R, rows, ncols=dims[f])
    return Cosheaf(cx, R, dims, maps)


CONSISTENT = "CONSISTENT"
COUNTEREXAMPLE = "COUNTEREXAMPLE"


@dataclass
class ProbeResult:
    report: HomologyReport
    verdict: str
    system_dump: dict

    def to_json(self):
        return {
            "verdict": self.verdict,
            "homology": self.report.to_json(),
            "system": self.system_dump,
        }


def conjecture_probe(S, seed=None):
    """Homology of the idempotent cosheaf and the vanishing verdict.

    CONSISTENT when H_m = 0 for every m > 0; COUNTEREXAMPLE otherwise,
    with the full system dumped for bit-exact archiving.
    """
    if not S.cat0_eligible:
        raise InputError("complex is neither a tree nor asserted CAT(0)")
    ok, violations = validate_geodesic_system(S)
    if not ok:
        raise PropertyViolationError("geodesic system invalid", witness=violations)
    C = idempotent_cosheaf(S)
    report = homology(C)
    verdict = CONSISTENT if report.vanishing_above_zero() else COUNTEREXAMPLE
    return ProbeResult(report, verdict, S.to_json(seed=seed))


def generate_geodesic_system(tree, dim, seed, ring=QQ, conjugate=False):
    """Random diagonal geodesic system on a tree, deterministic per seed.

    Every coordinate's support is grown as a connected subtree, which
    makes the absorption condition hold; the validator re-checks it
    anyway.  With conjugate=True all projections are conjugated by one
    deterministic invertible matrix, producing a non-diagonal system.
    """
    if not tree.is_tree():
        raise InputError("generator needs a tree complex")
    rng = random.Random(seed)
    verts = list(tree.vertices)
    adj = {v: [] for v in verts}
    for a, b in tree.faces(1):
        adj[a].append(b)
        adj[b].append(a)
    supports = {v: set() for v in verts}
    for c in range(dim):
        size = rng.randrange(0, len(verts) + 1)
        if size == 0:
            continue
        start = rng.choice(verts)
        region = {start}
        frontier = [w for w in adj[start]]
        while len(region) < size and frontier:
            w = frontier.pop(rng.randrange(len(frontier)))
            if w in region:
                continue
            region.add(w)
            frontier.extend(u for u in adj[w] if u not in region)
        for v in region:
            supports[v].add(c)
    lambdas = {}
    for v in verts:
        rows = [
            [ring.one if (i == j and i in supports[v]) else ring.zero for j in range(dim)]
            for i in range(dim)
        ]
        lambdas[v] = Matrix(ring, rows, ncols=dim)
    if conjugate and dim > 0:
        M = _random_invertible(dim, ring, rng)
        from kmkit.exactalg import invert_field

        Minv = invert_field(M)
        lambdas = {v: M * m * Minv for v, m in lambdas.items()}
    return IdempotentSystem(tree, ring, dim, lambdas)


def _random_invertible(dim, ring, rng):
    # unit upper triangular times unit lower triangular, always invertible
    up = [[ring.one if i == j else (ring.from_int(rng.randrange(3)) if j > i else ring.zero) for j in range(dim)] for i in range(dim)]
    lo = [[ring.one if i == j else (ring.from_int(rng.randrange(3)) if j < i else ring.zero) for j in range(dim)] for i in range(dim)]
    return Matrix(ring, up) * Matrix(ring, lo)
