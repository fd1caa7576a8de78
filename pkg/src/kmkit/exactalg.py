"""Exact scalar and matrix arithmetic over Z, Q, F_p and F_{p^m}.

Scalars are plain Python values tagged by a ring object: Z uses int,
Q uses fractions.Fraction (always in lowest terms, positive denominator),
F_p uses int reduced to [0, p), and F_{p^m} uses an m-tuple of ints, the
coefficients of 1, x, ..., x^{m-1} modulo a fixed monic irreducible
modulus.  Ring objects supply the arithmetic; values themselves stay
hashable so matrices can be used as dict keys.

No floating point is used anywhere in this module or its clients.
"""

from fractions import Fraction
import math

from kmkit.errors import InputError


# ---------------------------------------------------------------------------
# rings


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Ring:
    """Common interface; subclasses implement arithmetic on raw values."""

    is_field = False
    char = 0

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a):
        return a == self.zero

    def pow(self, a, n):
        if n < 0:
            return self.pow(self.inv(a), -n)
        r = self.one
        while n:
            if n & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            n >>= 1
        return r

    def sum(self, values):
        r = self.zero
        for v in values:
            r = self.add(r, v)
        return r

    def div(self, a, b):
        return self.mul(a, self.inv(b))


class IntegerRing(Ring):
    zero = 0
    one = 1

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def from_int(self, n):
        return int(n)

    def inv(self, a):
        if a in (1, -1):
            return a
        raise InputError("non-unit in Z: %r" % (a,))

    def to_json(self, a):
        return a

    def from_json(self, obj):
        return int(obj)

    def tag(self):
        return "Z"

    def __repr__(self):
        return "Z"


class RationalField(Ring):
    is_field = True
    zero = Fraction(0)
    one = Fraction(1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in Q")
        return 1 / Fraction(a)

    def from_int(self, n):
        return Fraction(n)

    def to_json(self, a):
        a = Fraction(a)
        return a.numerator if a.denominator == 1 else "%d/%d" % (a.numerator, a.denominator)

    def from_json(self, obj):
        if isinstance(obj, str):
            return Fraction(obj)
        return Fraction(obj)

    def tag(self):
        return "Q"

    def __repr__(self):
        return "Q"


ZZ = IntegerRing()
QQ = RationalField()


class PrimeField(Ring):
    """F_p with values canonically reduced to [0, p)."""

    is_field = True

    def __init__(self, p):
        if not is_prime(p):
            raise InputError("p = %r is not prime" % (p,))
        self.p = p
        self.char = p
        self.zero = 0
        self.one = 1 % p

    @property
    def order(self):
        return self.p

    def add(self, a, b):
        return (a + b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in F_%d" % self.p)
        return pow(a, self.p - 2, self.p)

    def from_int(self, n):
        return n % self.p

    def elements(self):
        return range(self.p)

    def units(self):
        return range(1, self.p)

    def to_json(self, a):
        return a

    def from_json(self, obj):
        return int(obj) % self.p

    def tag(self):
        return {"p": self.p, "m": 1}

    def __repr__(self):
        return "F_%d" % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))


# -- polynomial helpers over F_p, coefficient tuples (c_0, c_1, ...) --------


def _poly_trim(c):
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def _poly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_divmod(a, b, p):
    # b monic-izable; returns (q, r) with a = q*b + r, deg r < deg b
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    ilb = pow(lb, p - 2, p)
    q = [0] * max(len(a) - db, 0)
    while len(_poly_trim(a)) - 1 >= db:
        a = list(_poly_trim(a))
        shift = len(a) - 1 - db
        coef = (a[-1] * ilb) % p
        q[shift] = coef
        for i in range(db + 1):
            a[shift + i] = (a[shift + i] - coef * b[i]) % p
    return _poly_trim(q), _poly_trim(a)


def _poly_mod(a, b, p):
    return _poly_divmod(a, b, p)[1]


def _poly_ext_gcd(a, b, p):
    # returns (g, s, t) with s*a + t*b = g
    r0, r1 = _poly_trim(a), _poly_trim(b)
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = _poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_trim([(x - y) % p for x, y in _zip_pad(s0, _poly_mul(q, s1, p))])
        t0, t1 = t1, _poly_trim([(x - y) % p for x, y in _zip_pad(t0, _poly_mul(q, t1, p))])
    return r0, s0, t0


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(tuple(a) + (0,) * (n - len(a)), tuple(b) + (0,) * (n - len(b)))


def _poly_is_irreducible(f, p):
    # trial division by every monic polynomial of degree 1 .. deg(f)//2
    deg = len(f) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for k in range(p**d):
            cs = []
            kk = k
            for _ in range(d):
                cs.append(kk % p)
                kk //= p
            g = tuple(cs) + (1,)
            if not _poly_mod(f, g, p):
                return False
    return True


def lexicographically_smallest_modulus(p, m):
    """Smallest monic irreducible of degree m over F_p, ordered by the
    coefficient word (c_{m-1}, ..., c_0)."""
    for k in range(p**m):
        cs = []
        kk = k
        for _ in range(m):
            cs.append(kk % p)
            kk //= p
        f = tuple(cs) + (1,)
        if _poly_is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found (unreachable)")


class ExtensionField(Ring):
    """F_{p^m} as F_p[x] modulo a monic irreducible of degree m.

    Values are m-tuples of ints in [0, p): coefficients of 1, x, ..., x^{m-1}.
    """

    is_field = True

    def __init__(self, p, m, modulus=None):
        if not is_prime(p):
            raise InputError("p = %r is not prime" % (p,))
        if m < 1:
            raise InputError("extension degree m must be >= 1, got %r" % (m,))
        self.p = p
        self.m = m
        self.char = p
        if modulus is None:
            modulus = lexicographically_smallest_modulus(p, m)
        else:
            modulus = tuple(c % p for c in modulus)
            if len(modulus) != m + 1 or modulus[-1] != 1:
                raise InputError("modulus must be monic of degree %d" % m)
            if not _poly_is_irreducible(modulus, p):
                raise InputError("supplied modulus is reducible over F_%d" % p)
        self.modulus = modulus
        self.zero = (0,) * m
        self.one = (1,) + (0,) * (m - 1)

    @property
    def order(self):
        return self.p**self.m

    def _pad(self, c):
        return tuple(c) + (0,) * (self.m - len(c))

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        return self._pad(_poly_mod(_poly_mul(_poly_trim(a), _poly_trim(b), self.p), self.modulus, self.p))

    def inv(self, a):
        at = _poly_trim(a)
        if not at:
            raise ZeroDivisionError("inverse of 0 in F_%d^%d" % (self.p, self.m))
        g, s, _ = _poly_ext_gcd(at, self.modulus, self.p)
        # g is a nonzero constant since the modulus is irreducible
        c = pow(g[0], self.p - 2, self.p)
        return self._pad(_poly_mod(_poly_mul(s, (c,), self.p), self.modulus, self.p))

    def from_int(self, n):
        return (n % self.p,) + (0,) * (self.m - 1)

    def gen(self):
        """The class of x."""
        if self.m == 1:
            return self.from_int(0)
        return (0, 1) + (0,) * (self.m - 2)

    def elements(self):
        def rec(k):
            if k == 0:
                yield ()
                return
            for rest in rec(k - 1):
                for c in range(self.p):
                    yield (c,) + rest
        return (t for t in rec(self.m))

    def units(self):
        return (t for t in self.elements() if any(t))

    def to_json(self, a):
        return list(a)

    def from_json(self, obj):
        return self._pad(tuple(int(c) % self.p for c in obj))

    def tag(self):
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}

    def __repr__(self):
        return "F_%d^%d" % (self.p, self.m)

    def __eq__(self, other):
        return (
            isinstance(other, ExtensionField)
            and (other.p, other.m, other.modulus) == (self.p, self.m, self.modulus)
        )

    def __hash__(self):
        return hash(("Fq", self.p, self.m, self.modulus))


def ffield_make(p, m, modulus=None):
    """Finite field handle F_{p^m}.

    Without an explicit modulus the lexicographically smallest monic
    irreducible of degree m is chosen, so repeated runs agree.  m = 1 gives
    the prime field (any supplied modulus is then ignored apart from a
    degree check).
    """
    if not is_prime(p):
        raise InputError("p = %r is not prime" % (p,))
    if m < 1:
        raise InputError("extension degree m must be >= 1, got %r" % (m,))
    if m == 1 and modulus is None:
        return PrimeField(p)
    return ExtensionField(p, m, modulus)


def ring_from_tag(tag):
    """Inverse of Ring.tag(), for deserialization."""
    if tag == "Z":
        return ZZ
    if tag == "Q":
        return QQ
    if isinstance(tag, dict):
        return ffield_make(tag["p"], tag.get("m", 1), tag.get("modulus"))
    raise InputError("unknown ring tag %r" % (tag,))


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Dense exact matrix over a ring; rows are tuples of canonical values."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, rows, ncols=None):
        self.ring = ring
        self.rows = tuple(tuple(r) for r in rows)
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
            if any(len(r) != self.ncols for r in self.rows):
                raise InputError("ragged matrix")
        else:
            self.ncols = 0 if ncols is None else ncols

    @classmethod
    def from_int_rows(cls, ring, rows, ncols=None):
        return cls(ring, [[ring.from_int(x) for x in r] for r in rows], ncols=ncols)

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, ring, nrows, ncols):
        z = ring.zero
        return cls(ring, [[z] * ncols for _ in range(nrows)], ncols=ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.ring == other.ring
            and self.rows == other.rows
            and self.ncols == other.ncols
        )

    def __hash__(self):
        return hash((self.nrows, self.ncols, self.rows))

    def key(self):
        return self.rows

    def __add__(self, other):
        add = self.ring.add
        return Matrix(
            self.ring,
            [[add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
            ncols=self.ncols,
        )

    def __sub__(self, other):
        sub = self.ring.sub
        return Matrix(
            self.ring,
            [[sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
            ncols=self.ncols,
        )

    def __neg__(self):
        neg = self.ring.neg
        return Matrix(self.ring, [[neg(a) for a in r] for r in self.rows], ncols=self.ncols)

    def scale(self, c):
        mul = self.ring.mul
        return Matrix(self.ring, [[mul(c, a) for a in r] for r in self.rows], ncols=self.ncols)

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            raise TypeError("use scale() for scalars")
        if self.ncols != other.nrows:
            raise InputError("shape mismatch %dx%d * %dx%d" % (self.nrows, self.ncols, other.nrows, other.ncols))
        R = self.ring
        add, mul, z = R.add, R.mul, R.zero
        bt = list(zip(*other.rows)) if other.rows else [()] * other.ncols
        out = []
        for row in self.rows:
            orow = []
            for col in bt:
                acc = z
                for a, b in zip(row, col):
                    if a != z and b != z:
                        acc = add(acc, mul(a, b))
                orow.append(acc)
            out.append(orow)
        return Matrix(R, out, ncols=other.ncols)

    def matvec(self, v):
        R = self.ring
        return tuple(R.sum(R.mul(a, x) for a, x in zip(row, v)) for row in self.rows)

    def transpose(self):
        return Matrix(self.ring, list(zip(*self.rows)) if self.rows else [], ncols=self.nrows)

    def pow_int(self, n):
        if n < 0:
            raise InputError("negative matrix power")
        r = Matrix.identity(self.ring, self.nrows)
        a = self
        while n:
            if n & 1:
                r = r * a
            a = a * a
            n >>= 1
        return r

    def is_zero(self):
        z = self.ring.zero
        return all(a == z for r in self.rows for a in r)

    def is_identity(self):
        z, o = self.ring.zero, self.ring.one
        return self.nrows == self.ncols and all(
            a == (o if i == j else z) for i, r in enumerate(self.rows) for j, a in enumerate(r)
        )

    def to_json(self):
        tj = self.ring.to_json
        return [[tj(a) for a in r] for r in self.rows]

    def __repr__(self):
        return "Matrix(%r, %d x %d)" % (self.ring, self.nrows, self.ncols)


def rref(M):
    """Reduced row echelon form over a field: (rref Matrix, pivot columns)."""
    R = M.ring
    if not R.is_field:
        raise InputError("rref needs a field, got %r" % (R,))
    rows = [list(r) for r in M.rows]
    nr, nc = M.nrows, M.ncols
    pivots = []
    r = 0
    for c in range(nc):
        pr = next((i for i in range(r, nr) if rows[i][c] != R.zero), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        ic = R.inv(rows[r][c])
        rows[r] = [R.mul(ic, a) for a in rows[r]]
        for i in range(nr):
            if i != r and rows[i][c] != R.zero:
                f = rows[i][c]
                rows[i] = [R.sub(a, R.mul(f, b)) for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return Matrix(R, rows, ncols=nc), pivots


def rank_kernel(M):
    """Rank and kernel basis of a matrix over a field.

    Returns (rank, [kernel vectors]); vectors are tuples of length ncols
    with M . k = 0.  Z matrices are rejected: use smith_normal_form.
    """
    R = M.ring
    if not R.is_field:
        raise InputError("rank_kernel needs a field; over Z use smith_normal_form")
    E, pivots = rref(M)
    rank = len(pivots)
    free = [c for c in range(M.ncols) if c not in pivots]
    kernel = []
    for fc in free:
        v = [R.zero] * M.ncols
        v[fc] = R.one
        for r, pc in enumerate(pivots):
            v[pc] = R.neg(E.rows[r][fc])
        kernel.append(tuple(v))
    return rank, kernel


def solve_field(A, b):
    """One solution x of A x = b over a field, or None if inconsistent."""
    R = A.ring
    aug = Matrix(R, [list(r) + [bv] for r, bv in zip(A.rows, b)], ncols=A.ncols + 1)
    E, pivots = rref(aug)
    if A.ncols in pivots:
        return None
    x = [R.zero] * A.ncols
    for r, pc in enumerate(pivots):
        x[pc] = E.rows[r][A.ncols]
    return tuple(x)


def invert_field(M):
    R = M.ring
    n = M.nrows
    aug = Matrix(R, [list(r) + list(Matrix.identity(R, n).rows[i]) for i, r in enumerate(M.rows)])
    E, pivots = rref(aug)
    if pivots != list(range(n)):
        raise InputError("matrix not invertible")
    return Matrix(R, [r[n:] for r in E.rows], ncols=n)


def det_int(rows):
    """Determinant of a square integer matrix (Bareiss, exact)."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pr = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pr is None:
                return 0
            a[k], a[pr] = a[pr], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank_int(rows, ncols=None):
    """Rank over Q of an integer matrix."""
    if not rows:
        return 0
    M = Matrix.from_int_rows(QQ, rows, ncols=ncols)
    r, _ = rank_kernel(M)
    return r


# ---------------------------------------------------------------------------
# Smith normal form


def _snf_transforms(rows, ncols):
    """Diagonalize an integer matrix by unimodular row/column ops.

    Returns (diag, rank, Q, Qinv) where Q, Qinv are ncols x ncols integer
    matrices with Q . Qinv = I, and P . A . Q = D for a suitable unimodular
    P (not returned; nobody downstream needs it).  diag is the list of
    nonzero diagonal entries, positive, each dividing the next.
    """
    A = [list(r) for r in rows]
    nr = len(A)
    nc = ncols
    Q = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    Qi = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in Q:
            r[i], r[j] = r[j], r[i]
        Qi[i], Qi[j] = Qi[j], Qi[i]

    def col_add(i, j, k):
        # col_j += k * col_i
        for r in A:
            r[j] += k * r[i]
        for r in Q:
            r[j] += k * r[i]
        Qi[i] = [a - k * b for a, b in zip(Qi[i], Qi[j])]

    def col_neg(i):
        for r in A:
            r[i] = -r[i]
        for r in Q:
            r[i] = -r[i]
        Qi[i] = [-a for a in Qi[i]]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]

    def row_add(i, j, k):
        A[j] = [a + k * b for a, b in zip(A[j], A[i])]

    t = 0
    while t < min(nr, nc):
        # locate a pivot of minimal absolute value in the remaining block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                v = abs(A[i][j])
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        _, bi, bj = best
        row_swap(t, bi)
        col_swap(t, bj)
        while True:
            # clear column t with row ops, column-row alternation
            dirty = False
            for i in range(t + 1, nr):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    row_add(t, i, -q)
                    if A[i][t]:
                        row_swap(t, i)
                        dirty = True
            for j in range(t + 1, nc):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_add(t, j, -q)
                    if A[t][j]:
                        col_swap(t, j)
                        dirty = True
            if not dirty:
                break
        # enforce pivot | remaining block
        offender = None
        for i in range(t + 1, nr):
            for j in range(t + 1, nc):
                if A[i][j] % A[t][t]:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(offender, t, 1)
            continue
        if A[t][t] < 0:
            col_neg(t)
        t += 1
    diag = [A[i][i] for i in range(t)]
    return diag, t, Q, Qi


def smith_normal_form(rows, ncols=None):
    """Elementary divisors and rank of an integer matrix.

    Accepts a Matrix over Z or a plain list of int rows.  Returns
    (divisors, rank) with each divisor positive and d_i | d_{i+1}; the
    empty matrix gives ([], 0).
    """
    if isinstance(rows, Matrix):
        if rows.ring is not ZZ:
            raise InputError("smith_normal_form expects an integer matrix")
        ncols = rows.ncols
        rows = rows.rows
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if any(not isinstance(x, int) for r in rows for x in r):
        raise InputError("smith_normal_form expects integer entries")
    diag, rank, _, _ = _snf_transforms(rows, ncols)
    return diag, rank


def snf_quotient_basis(rows, ncols):
    """Basis data for Z^ncols modulo the saturation of the row span.

    Returns (rank, coords, lifts): rank is the rank of the row span;
    coords(v) maps an integer vector to its coordinates in the free
    quotient Z^{ncols - rank}; lifts is a list of integer vectors in
    Z^ncols representing the quotient basis.
    """
    diag, rank, Q, Qi = _snf_transforms([list(r) for r in rows], ncols)
    lifts = [tuple(Qi[i]) for i in range(rank, ncols)]
    qcols = [tuple(r[rank:]) for r in Q]

    def coords(v):
        return tuple(sum(v[i] * qcols[i][j] for i in range(ncols)) for j in range(ncols - rank))

    return rank, coords, lifts


def gcd_list(xs):
    g = 0
    for x in xs:
        g = math.gcd(g, x)
    return g
