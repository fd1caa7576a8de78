"""Weyl group elements, reduced words, real roots, spherical subsets.

Elements act on covector coordinates of h^* through d x d integer
matrices and simultaneously on root-lattice coordinates through n x n
matrices; the d x d matrix is the element's identity (it is faithful for
the realisations built by the gcm module).  Generator indices are
1-based everywhere, matching the usual s_1, ..., s_n naming.
"""

from dataclasses import dataclass

from kmkit.errors import InputError, WindowExceededError
from kmkit.gcm import is_finite_type

DEFAULT_BALL_CAP = 2_000_000


@dataclass(frozen=True, order=True)
class Root:
    """A root written over the simple roots; real iff in the Weyl orbit
    of a simple root."""

    coeffs: tuple
    real: bool = True

    @property
    def height(self):
        return sum(self.coeffs)

    @property
    def is_positive(self):
        return any(self.coeffs) and all(c >= 0 for c in self.coeffs)

    @property
    def is_negative(self):
        return any(self.coeffs) and all(c <= 0 for c in self.coeffs)

    def __neg__(self):
        return Root(tuple(-c for c in self.coeffs), self.real)

    def to_json(self):
        return {"coeffs": list(self.coeffs), "real": self.real, "height": self.height}


def _mat_mul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def _mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def _identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


class WeylElement:
    """Group element with its action matrices and a cached canonical word."""

    __slots__ = ("datum", "hmat", "rmat", "_word")

    def __init__(self, datum, hmat, rmat, word=None):
        self.datum = datum
        self.hmat = hmat
        self.rmat = rmat
        self._word = word

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.hmat == other.hmat

    def __hash__(self):
        return hash(self.hmat)

    def __mul__(self, other):
        return WeylElement(self.datum, _mat_mul(self.hmat, other.hmat), _mat_mul(self.rmat, other.rmat))

    @property
    def is_identity(self):
        return self.hmat == _identity(self.datum.d)

    def apply_root_coeffs(self, coeffs):
        return _mat_vec(self.rmat, coeffs)

    def apply_covector(self, cov):
        return _mat_vec(self.hmat, cov)

    def image_of_simple(self, i):
        """Root coordinates of w(alpha_i), i 1-based."""
        return tuple(row[i - 1] for row in self.rmat)

    def has_descent(self, i):
        """True iff l(w s_i) < l(w), i.e. w(alpha_i) is negative."""
        img = self.image_of_simple(i)
        return all(c <= 0 for c in img) and any(img)

    @property
    def word(self):
        if self._word is None:
            self._word = _canonical_word(self)
        return self._word

    @property
    def length(self):
        return len(self.word)

    def inverse(self):
        w = identity_element(self.datum)
        for i in reversed(self.word):
            w = w * simple_reflection(self.datum, i)
        return w

    def __repr__(self):
        return "W[%s]" % ".".join(str(i) for i in self.word)


def identity_element(datum):
    return WeylElement(datum, _identity(datum.d), _identity(datum.n), word=())


def simple_reflection(datum, i):
    """The reflection s_i; involution sending alpha_i to -alpha_i."""
    n, d = datum.n, datum.d
    if not 1 <= i <= n:
        raise InputError("generator index %r out of range 1..%d" % (i, n))
    k = i - 1
    alpha = datum.roots[k]
    h = datum.coroots[k]
    hmat = tuple(
        tuple((1 if r == c else 0) - alpha[r] * h[c] for c in range(d)) for r in range(d)
    )
    A = datum.gcm.entries
    rmat = tuple(
        tuple((1 if r == c else 0) - (A[k][c] if r == k else 0) for c in range(n))
        for r in range(n)
    )
    return WeylElement(datum, hmat, rmat, word=(i,))


def from_word(datum, word):
    w = identity_element(datum)
    for i in word:
        w = w * simple_reflection(datum, i)
    return w


def _canonical_word(w):
    # strip the smallest right descent repeatedly; the letters come out
    # back to front
    datum = w.datum
    rev = []
    cur = w
    while True:
        for i in range(1, datum.n + 1):
            if cur.has_descent(i):
                rev.append(i)
                cur = cur * simple_reflection(datum, i)
                break
        else:
            break
    if not cur.is_identity:
        raise InputError("element is not generated by simple reflections")
    return tuple(reversed(rev))


def reduced_word(w):
    """Canonical reduced word of w (deterministic smallest-descent form)."""
    return w.word


def enumerate_real_roots(datum, height_bound):
    """All positive real roots of height <= height_bound, sorted.

    BFS closure of the simple roots under the reflections, pruned to
    positive roots inside the height window.
    """
    if height_bound < 1:
        raise InputError("height bound must be >= 1")
    n = datum.n
    A = datum.gcm.entries
    simple = [tuple(1 if j == k else 0 for j in range(n)) for k in range(n)]
    seen = set(simple)
    frontier = list(simple)
    while frontier:
        nxt = []
        for c in frontier:
            for i in range(n):
                pair = sum(A[i][j] * c[j] for j in range(n))
                img = tuple(x - (pair if j == i else 0) for j, x in enumerate(c))
                if img in seen:
                    continue
                if all(x >= 0 for x in img) and 0 < sum(img) <= height_bound:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    return [Root(c, real=True) for c in sorted(seen, key=lambda c: (sum(c), c))]


def is_spherical(gcm, J):
    """True iff the standard Coxeter subgroup generated by J is finite."""
    J = sorted(set(J))
    if not J:
        return True
    if any(not 1 <= j <= gcm.n for j in J):
        raise InputError("subset %r out of range 1..%d" % (J, gcm.n))
    return is_finite_type(gcm.submatrix([j - 1 for j in J]))


def enumerate_weyl_ball(datum, length_bound, max_elements=DEFAULT_BALL_CAP):
    """All Weyl elements of length <= length_bound, canonically ordered.

    Deduplication is by the d x d matrix on h^*.  Raises
    WindowExceededError when the ball grows past max_elements.
    """
    if length_bound < 0:
        raise InputError("length bound must be >= 0")
    gens = [simple_reflection(datum, i) for i in range(1, datum.n + 1)]
    start = identity_element(datum)
    seen = {start.hmat: start}
    frontier = [start]
    for depth in range(1, length_bound + 1):
        nxt = []
        for w in frontier:
            for s in gens:
                u = w * s
                if u.hmat not in seen:
                    seen[u.hmat] = u
                    nxt.append(u)
                    if len(seen) > max_elements:
                        raise WindowExceededError(
                            "Weyl ball exceeded %d elements at length %d" % (max_elements, depth)
                        )
        if not nxt:
            break
        frontier = nxt
    out = sorted(seen.values(), key=lambda w: (w.length, w.word))
    return out


def coset_minimal(w, J):
    """Minimal length representative of the coset w W_J (J 1-based)."""
    cur = w
    moved = True
    while moved:
        moved = False
        for j in sorted(J):
            if cur.has_descent(j):
                cur = cur * simple_reflection(cur.datum, j)
                moved = True
                break
    return cur


def enumerate_parabolic(datum, J):
    """All elements of the standard parabolic W_J; J must be spherical."""
    J = sorted(set(J))
    if not is_spherical(datum.gcm, J):
        raise InputError("subset %r is not spherical" % (J,))
    gens = [simple_reflection(datum, j) for j in J]
    start = identity_element(datum)
    seen = {start.hmat: start}
    frontier = [start]
    while frontier:
        nxt = []
        for w in frontier:
            for s in gens:
                u = w * s
                if u.hmat not in seen:
                    seen[u.hmat] = u
                    nxt.append(u)
        frontier = nxt
    return sorted(seen.values(), key=lambda w: (w.length, w.word))
