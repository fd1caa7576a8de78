"""Generalized Cartan matrices, realisations, and type classification.

A realisation pairs n linearly independent coroots h_i in Z^d with n
linearly independent root covectors a_j in (Z^d)^* so that a_j(h_i)
reproduces the input matrix entry A_ij exactly.  The minimal variant uses
d = 2n - rank(A); the simply-connected variant takes the a_j to be the
standard basis covectors (so it needs det(A) != 0, see build_root_datum).
"""

from dataclasses import dataclass, field
from itertools import combinations

from kmkit.errors import InputError
from kmkit.exactalg import det_int, rank_int, Matrix, QQ, rank_kernel

FINITE = "Finite"
AFFINE = "Affine"
INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class GCM:
    """A validated generalized Cartan matrix."""

    entries: tuple  # tuple of tuple of int

    @property
    def n(self):
        return len(self.entries)

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def submatrix(self, indices):
        idx = sorted(indices)
        return tuple(tuple(self.entries[i][j] for j in idx) for i in idx)

    def components(self):
        """Connected components of the Coxeter diagram, as sorted index tuples."""
        n = self.n
        seen = [False] * n
        comps = []
        for start in range(n):
            if seen[start]:
                continue
            comp, stack = [], [start]
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in range(n):
                    if not seen[j] and self.entries[i][j] != 0:
                        seen[j] = True
                        stack.append(j)
            comps.append(tuple(sorted(comp)))
        return comps

    def to_json(self):
        return {"matrix": [list(r) for r in self.entries]}


def validate_gcm(matrix):
    """Check the GCM axioms; returns a GCM or raises InputError.

    The error detail names the violated axiom and the offending cell:
    {"axiom": ..., "row": i, "col": j} with 1-based indices.
    """
    rows = [list(r) for r in matrix]
    n = len(rows)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise InputError(
                "matrix is not square: row %d has %d entries, expected %d" % (i + 1, len(r), n),
                detail={"axiom": "square", "row": i + 1, "col": None},
            )
        for j, x in enumerate(r):
            if not isinstance(x, int) or isinstance(x, bool):
                raise InputError(
                    "entry (%d,%d) is not an integer" % (i + 1, j + 1),
                    detail={"axiom": "integer", "row": i + 1, "col": j + 1},
                )
    for i in range(n):
        if rows[i][i] != 2:
            raise InputError(
                "diagonal entry (%d,%d) = %d, expected 2" % (i + 1, i + 1, rows[i][i]),
                detail={"axiom": "diagonal", "row": i + 1, "col": i + 1},
            )
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if rows[i][j] > 0:
                raise InputError(
                    "off-diagonal entry (%d,%d) = %d must be <= 0" % (i + 1, j + 1, rows[i][j]),
                    detail={"axiom": "offdiag", "row": i + 1, "col": j + 1},
                )
            if (rows[i][j] == 0) != (rows[j][i] == 0):
                raise InputError(
                    "zero symmetry broken at (%d,%d)/(%d,%d)" % (i + 1, j + 1, j + 1, i + 1),
                    detail={"axiom": "zero-symmetry", "row": i + 1, "col": j + 1},
                )
    return GCM(tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class RootDatum:
    """A realisation of a GCM over Z.

    coroots[i] is h_i in Z^d; roots[j] is the covector of alpha_j, so the
    pairing alpha_j(h_i) = sum_k roots[j][k] * coroots[i][k] equals A_ij.
    completion records which unit covector coordinates were appended in
    the minimal construction (empty for simply-connected).
    """

    gcm: GCM
    d: int
    coroots: tuple
    roots: tuple
    variant: str
    completion: tuple = field(default=())

    @property
    def n(self):
        return self.gcm.n

    def pairing(self, j, i):
        return sum(a * b for a, b in zip(self.roots[j], self.coroots[i]))

    def root_covector(self, coeffs):
        """Covector of sum_j coeffs[j] * alpha_j."""
        return tuple(sum(c * self.roots[j][k] for j, c in enumerate(coeffs)) for k in range(self.d))

    def eval_on_coroot_vector(self, coeffs, h):
        """Value of (sum_j coeffs[j] alpha_j) on h in Z^d."""
        return sum(cv * hv for cv, hv in zip(self.root_covector(coeffs), h))

    def to_json(self):
        return {
            "matrix": [list(r) for r in self.gcm.entries],
            "variant": self.variant,
            "d": self.d,
            "coroots": [list(h) for h in self.coroots],
            "roots": [list(a) for a in self.roots],
            "completion": list(self.completion),
        }


def build_root_datum(gcm, variant="minimal"):
    """Construct a realisation of the given GCM.

    minimal: d = 2n - rank(A), coroots are standard basis vectors, root
    covectors read the columns of A and are completed to independence by
    unit coordinates on a set of columns outside a column basis of A.

    simply-connected: the literal reading where the alpha_i themselves are
    the standard basis covectors; requires det(A) != 0 and sets d = n with
    h_i the i-th row of A.
    """
    if not isinstance(gcm, GCM):
        gcm = validate_gcm(gcm)
    n = gcm.n
    A = gcm.entries
    if variant == "simply-connected":
        if det_int(A) == 0:
            raise InputError("simply-connected realisation needs det(A) != 0")
        coroots = tuple(tuple(A[i][j] for j in range(n)) for i in range(n))
        roots = tuple(tuple(1 if k == j else 0 for k in range(n)) for j in range(n))
        return RootDatum(gcm, n, coroots, roots, variant, completion=())
    if variant != "minimal":
        raise InputError("unknown realisation variant %r" % (variant,))
    rank = rank_int(A)
    d = 2 * n - rank
    coroots = tuple(tuple(1 if k == i else 0 for k in range(d)) for i in range(n))
    # choose a column basis greedily; leftover columns get the unit completion
    basis_cols = []
    for j in range(n):
        trial = basis_cols + [j]
        cols = [[A[i][c] for c in trial] for i in range(n)]
        if rank_int(cols, ncols=len(trial)) == len(trial):
            basis_cols.append(j)
    completion = tuple(j for j in range(n) if j not in basis_cols)
    roots = []
    for j in range(n):
        cov = [A[i][j] for i in range(n)]
        for k, cj in enumerate(completion):
            cov.append(1 if cj == j else 0)
        roots.append(tuple(cov))
    datum = RootDatum(gcm, d, coroots, tuple(roots), variant, completion=completion)
    _check_datum(datum)
    return datum


def _check_datum(datum):
    n = datum.n
    for i in range(n):
        for j in range(n):
            if datum.pairing(j, i) != datum.gcm[i, j]:
                raise AssertionError("pairing mismatch at (%d,%d)" % (i, j))
    if rank_int([list(h) for h in datum.coroots], ncols=datum.d) != n:
        raise AssertionError("coroots not independent")
    if rank_int([list(a) for a in datum.roots], ncols=datum.d) != n:
        raise AssertionError("roots not independent")


def is_finite_type(entries):
    """All principal minors positive (entries: square int tuple/list)."""
    k = len(entries)
    for size in range(1, k + 1):
        for sub in combinations(range(k), size):
            m = [[entries[i][j] for j in sub] for i in sub]
            if det_int(m) <= 0:
                return False
    return True


def _is_affine_component(entries):
    k = len(entries)
    if det_int(entries) != 0:
        return False
    for size in range(1, k):
        for sub in combinations(range(k), size):
            m = [[entries[i][j] for j in sub] for i in sub]
            if det_int(m) <= 0:
                return False
    return True


@dataclass(frozen=True)
class TypeReport:
    components: tuple  # ((indices, tag), ...)
    is_2_spherical: bool
    is_generic: bool

    @property
    def tags(self):
        return tuple(tag for _, tag in self.components)

    def to_json(self):
        return {
            "components": [{"indices": [i + 1 for i in idx], "type": tag} for idx, tag in self.components],
            "is_2_spherical": self.is_2_spherical,
            "is_generic": self.is_generic,
        }


def classify(gcm):
    """Finite/Affine/Indefinite per connected component, plus flags.

    A component is Finite iff all principal minors of its submatrix are
    positive, Affine iff all proper principal minors are positive and the
    determinant vanishes, Indefinite otherwise.
    """
    if not isinstance(gcm, GCM):
        gcm = validate_gcm(gcm)
    comps = []
    for idx in gcm.components():
        sub = gcm.submatrix(idx)
        if is_finite_type(sub):
            tag = FINITE
        elif _is_affine_component(sub):
            tag = AFFINE
        else:
            tag = INDEFINITE
        comps.append((idx, tag))
    n = gcm.n
    two_spherical = all(
        gcm[i, j] * gcm[j, i] <= 3 for i in range(n) for j in range(n) if i != j
    )
    generic = all(
        gcm[i, j] * gcm[j, i] >= 4 for i in range(n) for j in range(n) if i != j
    )
    return TypeReport(tuple(comps), two_spherical, generic)


# ---------------------------------------------------------------------------
# canned matrices used all over the test suite and docs

CARTAN_A1 = ((2,),)
CARTAN_A2 = ((2, -1), (-1, 2))
CARTAN_B2 = ((2, -1), (-2, 2))
CARTAN_G2 = ((2, -1), (-3, 2))
CARTAN_AFFINE_A1 = ((2, -2), (-2, 2))
CARTAN_GENERIC_33 = ((2, -3), (-3, 2))


def gcm_from_json(doc):
    """Parse the GCM input document {"matrix": [[int]], "variant": ...}."""
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise InputError('input document must be an object with a "matrix" key')
    gcm = validate_gcm(doc["matrix"])
    variant = doc.get("variant", "minimal")
    if variant not in ("minimal", "simply-connected"):
        raise InputError("unknown variant %r" % (variant,))
    return gcm, variant
