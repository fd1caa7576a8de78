"""Height-truncated Kac-Moody Lie algebras over Z, Q, and finite fields.

The positive part is constructed degree by degree as the quotient of the
free Lie algebra on e_1..e_n by the ideal generated by the classical
relation elements (ad e_i)^{1-A_ij}(e_j); the negative part mirrors it
through the sign involution e_i <-> f_i, and mixed brackets are expanded
recursively through the defining sl_2 relations.  All arithmetic is exact.

Free Lie elements are handled in two coordinate systems: as elements of
the free associative algebra (dict mapping letter tuples to coefficients)
for linear algebra, and as bracket trees (nested pairs with integer
leaves) for the mixed-bracket recursion.

Basis normalization: real root spaces are one-dimensional and their
integral generator is produced by conjugating a simple generator with the
integral reflection operators exp(ad e_i) exp(-ad f_i) exp(ad e_i); this
keeps the divided powers ad(e_a)^n / n! integral on the lattice.
Imaginary root spaces keep the saturated lattice spanned by bracket
monomials.  Brackets whose target height escapes the window are recorded
as TRUNCATED, never silently dropped.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
import math

from kmkit.errors import (
    InputError,
    WindowExceededError,
    PropertyViolationError,
    IntegralityDefect,
)
from kmkit.exactalg import Matrix, QQ, ZZ, solve_field, snf_quotient_basis
from kmkit import weyl


class _Truncated:
    __slots__ = ()

    def __repr__(self):
        return "TRUNCATED"


TRUNCATED = _Truncated()

DEFAULT_DIM_CAP = 512


# ---------------------------------------------------------------------------
# free associative / free Lie helpers


def _assoc_bracket(a, b):
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            w = wa + wb
            out[w] = out.get(w, 0) + ca * cb
            w = wb + wa
            out[w] = out.get(w, 0) - ca * cb
    return {w: c for w, c in out.items() if c}


def _tree_leaves(tree):
    if isinstance(tree, int):
        return (tree,)
    return _tree_leaves(tree[0]) + _tree_leaves(tree[1])


def _tree_expand(tree):
    if isinstance(tree, int):
        return {(tree,): 1}
    return _assoc_bracket(_tree_expand(tree[0]), _tree_expand(tree[1]))


def _is_lyndon(word):
    return len(word) > 0 and all(word < word[k:] for k in range(1, len(word)))


def _standard_tree(word):
    # standard bracketing: split at the lexicographically smallest proper suffix
    if len(word) == 1:
        return word[0]
    suffix = min(word[k:] for k in range(1, len(word)))
    k = len(word) - len(suffix)
    return (_standard_tree(word[:k]), _standard_tree(word[k:]))


def _words_of_content(content):
    letters = []
    for i, c in enumerate(content):
        letters.extend([i] * c)
    return sorted(set(permutations(letters)))


def _content_of_word(word, n):
    c = [0] * n
    for x in word:
        c[x] += 1
    return tuple(c)


# ---------------------------------------------------------------------------
# per-multidegree component of the quotient of the free Lie algebra


class _Component:
    """One multidegree of n_+: words, Lyndon basis, ideal, quotient basis."""

    __slots__ = (
        "content",
        "height",
        "words",
        "word_index",
        "lyndon_trees",
        "dim_free",
        "ideal",
        "mult",
        "lifts",
        "_proj_mat",
    )

    def __init__(self, content, dim_cap):
        self.content = content
        self.height = sum(content)
        self.words = _words_of_content(content)
        if len(self.words) > dim_cap:
            raise WindowExceededError(
                "component %r needs %d words (cap %d)" % (content, len(self.words), dim_cap)
            )
        self.word_index = {w: k for k, w in enumerate(self.words)}
        self.lyndon_trees = [_standard_tree(w) for w in self.words if _is_lyndon(w)]
        self.dim_free = len(self.lyndon_trees)
        self.ideal = []  # pruned independent spanning vectors, assoc dicts, int coeffs
        self.mult = 0
        self.lifts = []  # per basis element: list of (Fraction coeff, tree)
        self._proj_mat = None

    def vec_of_assoc(self, d):
        v = [Fraction(0)] * len(self.words)
        for w, c in d.items():
            v[self.word_index[w]] = Fraction(c)
        return v

    def finish(self, lifts):
        """Fix the quotient basis and build the projection solver."""
        self.lifts = lifts
        self.mult = len(lifts)
        cols = []
        for comb in lifts:
            d = {}
            for c, tree in comb:
                for w, x in _tree_expand(tree).items():
                    d[w] = d.get(w, Fraction(0)) + c * x
            cols.append(self.vec_of_assoc(d))
        for v in self.ideal:
            cols.append(self.vec_of_assoc(v))
        rows = list(zip(*cols)) if cols else []
        self._proj_mat = Matrix(QQ, rows, ncols=len(cols))

    def project(self, assoc):
        """Coordinates of a Lie element of this content in the chosen basis."""
        if self.mult == 0 and not self.ideal:
            return ()
        rhs = self.vec_of_assoc(assoc)
        x = solve_field(self._proj_mat, rhs)
        if x is None:
            raise PropertyViolationError("element outside Lie span at %r" % (self.content,))
        return tuple(x[: self.mult])


def _echelon_insert(echelon, vec):
    """Reduce vec against echelon rows (lists of Fractions); insert if new.

    Returns True when vec was independent.  echelon maps pivot -> row.
    """
    v = list(vec)
    for piv, row in echelon.items():
        c = v[piv]
        if c:
            v = [a - c * b for a, b in zip(v, row)]
    piv = next((k for k, a in enumerate(v) if a), None)
    if piv is None:
        return False
    inv = Fraction(1) / v[piv]
    echelon[piv] = [a * inv for a in v]
    return True


# ---------------------------------------------------------------------------
# the assembled algebra


@dataclass(frozen=True)
class NPlusSummary:
    """Graded data of the positive part: multiplicities and dimensions."""

    height: int
    multiplicities: dict  # content -> multiplicity (roots only)
    dims_by_height: tuple
    dim_nplus: int
    d: int

    @property
    def total_dim(self):
        return 2 * self.dim_nplus + self.d

    def to_json(self):
        return {
            "height": self.height,
            "multiplicities": [
                {"root": list(b), "mult": m} for b, m in sorted(self.multiplicities.items())
            ],
            "dims_by_height": list(self.dims_by_height),
            "dim_nplus": self.dim_nplus,
            "dim_g": self.total_dim,
        }


class GradedLieAlgebra:
    """Windowed g = n_- + h + n_+ with a sparse exact bracket table.

    Basis labels are ("h", k) for the Cartan part, ("e", content, t) and
    ("f", content, t) for the root spaces. brackets[(i, j)] for i < j is
    either a dict {k: coeff} or TRUNCATED when the target height escapes
    the window.
    """

    def __init__(self, datum, height, ring, basis, degrees, mult, real_positive, brackets, zform=None):
        self.datum = datum
        self.height = height
        self.ring = ring
        self.basis = tuple(basis)
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.degrees = tuple(degrees)
        self.mult = dict(mult)
        self.real_positive = tuple(real_positive)
        self.brackets = brackets
        self.zform = zform

    @property
    def dim(self):
        return len(self.basis)

    def bracket(self, i, j):
        """Bracket of basis elements i, j: a coefficient dict or TRUNCATED."""
        if i == j:
            return {}
        if i < j:
            return self.brackets.get((i, j), {})
        b = self.brackets.get((j, i), {})
        if b is TRUNCATED:
            return TRUNCATED
        return {k: self.ring.neg(c) for k, c in b.items()}

    def bracket_vec(self, u, v):
        """Bracket of two coefficient dicts; raises on truncated contact."""
        R = self.ring
        out = {}
        for i, ci in u.items():
            if R.is_zero(ci):
                continue
            for j, cj in v.items():
                if R.is_zero(cj):
                    continue
                b = self.bracket(i, j)
                if b is TRUNCATED:
                    raise WindowExceededError(
                        "bracket [%r, %r] escapes the height window" % (self.basis[i], self.basis[j])
                    )
                for k, c in b.items():
                    out[k] = R.add(out.get(k, R.zero), R.mul(R.mul(ci, cj), c))
        return {k: c for k, c in out.items() if not R.is_zero(c)}

    def ad_matrix(self, i):
        """Matrix of ad(x_i) on the windowed basis plus the set of partial
        (truncated) columns; truncated columns are left zero."""
        R = self.ring
        n = self.dim
        cols = []
        partial = set()
        for j in range(n):
            b = self.bracket(i, j)
            col = [R.zero] * n
            if b is TRUNCATED:
                partial.add(j)
            else:
                for k, c in b.items():
                    col[k] = c
            cols.append(col)
        rows = [[cols[j][k] for j in range(n)] for k in range(n)]
        return Matrix(R, rows), partial

    def graded_dims(self):
        """Dimension of each height 1..H of n_+."""
        dims = [0] * self.height
        for b, m in self.mult.items():
            dims[sum(b) - 1] += m
        return tuple(dims)

    def cartan_indices(self):
        return [i for i, b in enumerate(self.basis) if b[0] == "h"]

    def root_vector_index(self, coeffs):
        """Basis index of the generator of a one-dimensional real root space;
        coeffs may be negative (the f side)."""
        c = tuple(coeffs)
        if all(x >= 0 for x in c) and any(c):
            key = ("e", c, 0)
        elif all(x <= 0 for x in c) and any(c):
            key = ("f", tuple(-x for x in c), 0)
        else:
            raise InputError("mixed-sign exponent vector %r is not a root" % (c,))
        if key not in self.index:
            raise InputError("no root space %r in window" % (c,))
        base = key[1]
        if base not in self.real_positive:
            raise InputError("root %r is not real" % (c,))
        return self.index[key]

    def coroot_vector(self, i):
        """h_i as a coefficient dict over the Cartan basis (i 1-based)."""
        h = self.datum.coroots[i - 1]
        R = self.ring
        return {
            self.index[("h", k)]: R.from_int(x) for k, x in enumerate(h) if x
        }

    def degree_eval(self, idx, h_coeffs):
        """deg(x_idx)(h) for h given by integer coordinates in Z^d."""
        return self.datum.eval_on_coroot_vector(self.degrees[idx], h_coeffs)

    def base_change(self, ring):
        """Reduce the structure constants of a Z-form into a field."""
        if self.ring is not ZZ:
            raise InputError("base_change starts from the Z form")
        table = {}
        for ij, b in self.brackets.items():
            if b is TRUNCATED:
                table[ij] = TRUNCATED
            else:
                nb = {k: ring.from_int(c) for k, c in b.items()}
                table[ij] = {k: c for k, c in nb.items() if not ring.is_zero(c)}
        return GradedLieAlgebra(
            self.datum,
            self.height,
            ring,
            self.basis,
            self.degrees,
            self.mult,
            self.real_positive,
            table,
            zform=self,
        )

    def to_json(self):
        def label_json(b):
            if b[0] == "h":
                return {"type": "h", "index": b[1]}
            return {"type": b[0], "root": list(b[1]), "index": b[2]}

        triples = []
        for (i, j) in sorted(self.brackets):
            b = self.brackets[(i, j)]
            if b is TRUNCATED:
                triples.append([i, j, "truncated"])
            elif b:
                triples.append([i, j, [[k, self.ring.to_json(c)] for k, c in sorted(b.items())]])
        return {
            "schema": 1,
            "ring": self.ring.tag(),
            "height": self.height,
            "gcm": [list(r) for r in self.datum.gcm.entries],
            "variant": self.datum.variant,
            "d": self.datum.d,
            "basis": [label_json(b) for b in self.basis],
            "graded_dims": list(self.graded_dims()),
            "multiplicities": [{"root": list(b), "mult": m} for b, m in sorted(self.mult.items())],
            "brackets": triples,
        }

    def __repr__(self):
        return "GradedLieAlgebra(dim=%d, H=%d, ring=%r)" % (self.dim, self.height, self.ring)


# ---------------------------------------------------------------------------
# construction


class _Builder:
    def __init__(self, datum, height, dim_cap=DEFAULT_DIM_CAP, build_height=None):
        if height < 1:
            raise InputError("height window must be >= 1")
        self.datum = datum
        self.n = datum.n
        self.H = height
        if build_height is None:
            # slack so reflection conjugation can walk whole root strings
            A = datum.gcm.entries
            buf = max([3] + [1 - A[i][j] for i in range(self.n) for j in range(self.n) if i != j])
            build_height = height + buf
        self.H_build = max(height, build_height)
        self.dim_cap = dim_cap
        self.components = {}
        self._build_components()

    # -- stage A: graded pieces of n_+ --------------------------------------

    def _serre_relations(self):
        A = self.datum.gcm.entries
        rels = []
        for i in range(self.n):
            for j in range(self.n):
                if i == j:
                    continue
                power = 1 - A[i][j]
                content = tuple(
                    (power if k == i else 0) + (1 if k == j else 0) for k in range(self.n)
                )
                if sum(content) > self.H_build:
                    continue
                v = {(j,): 1}
                e_i = {(i,): 1}
                for _ in range(power):
                    v = _assoc_bracket(e_i, v)
                rels.append((content, v))
        return rels

    def _contents_of_height(self, h):
        def rec(rem, k):
            if k == self.n - 1:
                yield (rem,)
                return
            for c in range(rem + 1):
                for rest in rec(rem - c, k + 1):
                    yield (c,) + rest
        return [t for t in rec(h, 0)]

    def _build_components(self):
        rels = self._serre_relations()
        unit = tuple(tuple(1 if j == i else 0 for j in range(self.n)) for i in range(self.n))
        for h in range(1, self.H_build + 1):
            for content in self._contents_of_height(h):
                comp = _Component(content, self.dim_cap)
                echelon = {}
                candidates = []
                for i in range(self.n):
                    if content[i] == 0:
                        continue
                    lower = tuple(c - u for c, u in zip(content, unit[i]))
                    low = self.components.get(lower)
                    if low is None:
                        continue
                    e_i = {(i,): 1}
                    for v in low.ideal:
                        candidates.append(_assoc_bracket(e_i, v))
                for rc, rv in rels:
                    if rc == content:
                        candidates.append(rv)
                for v in candidates:
                    if v and _echelon_insert(echelon, comp.vec_of_assoc(v)):
                        comp.ideal.append(v)
                self.components[content] = comp
        # default (bracket-lattice) quotient basis everywhere
        for comp in self.components.values():
            self._finish_with_lattice_basis(comp)

    def _finish_with_lattice_basis(self, comp):
        f = comp.dim_free
        if f == 0:
            comp.finish([])
            return
        lyndon_mat = Matrix(
            QQ,
            list(zip(*[comp.vec_of_assoc(_tree_expand(t)) for t in comp.lyndon_trees])),
            ncols=f,
        )
        rows = []
        for v in comp.ideal:
            x = solve_field(lyndon_mat, comp.vec_of_assoc(v))
            if x is None:
                raise PropertyViolationError("ideal element outside free Lie span")
            ix = []
            for c in x:
                if c.denominator != 1:
                    raise PropertyViolationError("non-integer Lyndon coordinates in ideal")
                ix.append(c.numerator)
            rows.append(ix)
        _, _, lifts = snf_quotient_basis(rows, f)
        combs = []
        for lift in lifts:
            combs.append(
                [(Fraction(c), comp.lyndon_trees[j]) for j, c in enumerate(lift) if c]
            )
        comp.finish(combs)

    # -- stage B: bracket table ----------------------------------------------

    def assemble(self, ring=ZZ, cap=None):
        datum = self.datum
        d = datum.d
        cap = self.H if cap is None else cap
        self._cap = cap
        roots = sorted(
            (b for b, comp in self.components.items() if comp.mult and sum(b) <= cap),
            key=lambda b: (sum(b), b),
        )
        basis = [("h", k) for k in range(d)]
        for b in roots:
            basis.extend(("e", b, t) for t in range(self.components[b].mult))
        for b in roots:
            basis.extend(("f", b, t) for t in range(self.components[b].mult))
        index = {lbl: i for i, lbl in enumerate(basis)}
        zero_deg = (0,) * self.n
        degrees = []
        for lbl in basis:
            if lbl[0] == "h":
                degrees.append(zero_deg)
            elif lbl[0] == "e":
                degrees.append(lbl[1])
            else:
                degrees.append(tuple(-x for x in lbl[1]))

        real_set = {
            r.coeffs for r in weyl.enumerate_real_roots(datum, cap)
        }
        for b in real_set:
            if b in self.components and self.components[b].mult != 1:
                raise PropertyViolationError(
                    "real root %r has multiplicity %d != 1" % (b, self.components[b].mult)
                )

        self._memo_ef = {}
        self._index = index
        self._basis = basis

        table = {}
        nb = len(basis)
        for i in range(nb):
            for j in range(i + 1, nb):
                li, lj = basis[i], basis[j]
                val = self._bracket_labels(li, lj)
                if val is TRUNCATED:
                    table[(i, j)] = TRUNCATED
                elif val:
                    table[(i, j)] = val

        # the table of a Z form must be integral
        int_table = {}
        for ij, b in table.items():
            if b is TRUNCATED:
                int_table[ij] = TRUNCATED
                continue
            ib = {}
            for k, c in b.items():
                c = Fraction(c)
                if c.denominator != 1:
                    raise IntegralityDefect(
                        "non-integral structure constant %s at [%r, %r] -> %r"
                        % (c, basis[ij[0]], basis[ij[1]], basis[k])
                    )
                if c.numerator:
                    ib[k] = c.numerator
            int_table[ij] = ib
        alg = GradedLieAlgebra(
            datum,
            cap,
            ZZ,
            basis,
            degrees,
            {b: self.components[b].mult for b in roots},
            tuple(sorted(b for b in real_set if b in self.components and self.components[b].mult)),
            int_table,
        )
        if ring is not ZZ:
            return alg.base_change(ring)
        return alg

    # bracket of two basis labels; Fractions inside, TRUNCATED on escape
    def _bracket_labels(self, li, lj):
        if li[0] == "h" and lj[0] == "h":
            return {}
        if li[0] == "h":
            k = li[1]
            sign = 1 if lj[0] == "e" else -1
            val = sign * self.datum.root_covector(lj[1])[k]
            return {self._index[lj]: Fraction(val)} if val else {}
        if lj[0] == "h":
            out = self._bracket_labels(lj, li)
            return {k: -c for k, c in out.items()}
        bi, bj = li[1], lj[1]
        if li[0] == "e" and lj[0] == "e":
            target = tuple(a + b for a, b in zip(bi, bj))
            if sum(target) > self._cap:
                return TRUNCATED
            z = self._pure_plus(li, lj, target)
            comp = self.components[target]
            return {
                self._index[("e", target, u)]: c for u, c in enumerate(z) if c
            }
        if li[0] == "f" and lj[0] == "f":
            target = tuple(a + b for a, b in zip(bi, bj))
            if sum(target) > self._cap:
                return TRUNCATED
            z = self._pure_plus(("e", bi, li[2]), ("e", bj, lj[2]), target)
            return {
                self._index[("f", target, u)]: -c for u, c in enumerate(z) if c
            }
        if li[0] == "f":  # normalize to (e, f)
            out = self._bracket_labels(lj, li)
            if out is TRUNCATED:
                return TRUNCATED
            return {k: -c for k, c in out.items()}
        # e against f through the tree recursion
        out = {}
        mu = -1 if sum(bj) % 2 == 0 else 1  # (-1)^{ht+1}
        for ce, te in self.components[bi].lifts[li[2]]:
            for cf, tf in self.components[bj].lifts[lj[2]]:
                coeff = ce * cf * mu
                if not coeff:
                    continue
                for k, c in self._br_ef(te, tf).items():
                    out[k] = out.get(k, Fraction(0)) + coeff * c
        return {k: c for k, c in out.items() if c}

    def _proj_plus_tree(self, tree, scale=Fraction(1)):
        content = _content_of_word(_tree_leaves(tree), self.n)
        if sum(content) > self.H_build:
            raise WindowExceededError("mixed bracket escaped window at %r" % (content,))
        comp = self.components[content]
        if comp.mult == 0 and not comp.ideal:
            return {}
        z = comp.project(_tree_expand(tree))
        return {
            self._index[("e", content, u)]: scale * c for u, c in enumerate(z) if c
        }

    def _proj_minus_tree(self, tree, scale=Fraction(1)):
        content = _content_of_word(_tree_leaves(tree), self.n)
        if sum(content) > self.H_build:
            raise WindowExceededError("mixed bracket escaped window at %r" % (content,))
        mu = 1 if sum(content) % 2 else -1  # (-1)^{ht+1}
        comp = self.components[content]
        if comp.mult == 0 and not comp.ideal:
            return {}
        z = comp.project(_tree_expand(tree))
        return {
            self._index[("f", content, u)]: mu * scale * c for u, c in enumerate(z) if c
        }

    def _pure_plus(self, li, lj, target):
        comp = self.components[target]
        if comp.mult == 0 and not comp.ideal:
            return ()
        acc = {}
        for ci, ti in self.components[li[1]].lifts[li[2]]:
            for cj, tj in self.components[lj[1]].lifts[lj[2]]:
                c = ci * cj
                if not c:
                    continue
                for w, x in _assoc_bracket(_tree_expand(ti), _tree_expand(tj)).items():
                    acc[w] = acc.get(w, Fraction(0)) + c * x
        acc = {w: c for w, c in acc.items() if c}
        if not acc:
            return (Fraction(0),) * comp.mult
        return comp.project(acc)

    def _br_ef(self, te, tf):
        key = (te, tf)
        hit = self._memo_ef.get(key)
        if hit is not None:
            return hit
        if isinstance(te, int) and isinstance(tf, int):
            if te == tf:
                h = self.datum.coroots[te]
                out = {self._index[("h", k)]: Fraction(x) for k, x in enumerate(h) if x}
            else:
                out = {}
        elif not isinstance(te, int):
            l, r = te
            out = _vec_sub(
                self._br_ev(l, self._br_ef(r, tf)),
                self._br_ev(r, self._br_ef(l, tf)),
            )
        else:
            s1, s2 = tf
            out = _vec_sub(
                self._br_vf(self._br_ef(te, s1), s2),
                self._br_vf(self._br_ef(te, s2), s1),
            )
        self._memo_ef[key] = out
        return out

    def _br_ev(self, te, vec):
        # [tree_e, algebra vector]
        out = {}
        content_e = _content_of_word(_tree_leaves(te), self.n)
        for idx, coeff in vec.items():
            if not coeff:
                continue
            lbl = self._basis[idx]
            if lbl[0] == "h":
                val = -self.datum.root_covector(content_e)[lbl[1]]
                if val:
                    _vec_acc(out, self._proj_plus_tree(te, scale=coeff * val))
            elif lbl[0] == "e":
                for c2, t2 in self.components[lbl[1]].lifts[lbl[2]]:
                    _vec_acc(out, self._proj_plus_tree((te, t2), scale=coeff * c2))
            else:
                mu = -1 if sum(lbl[1]) % 2 == 0 else 1
                for c2, t2 in self.components[lbl[1]].lifts[lbl[2]]:
                    for k, c in self._br_ef(te, t2).items():
                        out[k] = out.get(k, Fraction(0)) + coeff * c2 * mu * c
        return {k: c for k, c in out.items() if c}

    def _br_vf(self, vec, tf):
        # [algebra vector, tree_f]
        out = {}
        content_f = _content_of_word(_tree_leaves(tf), self.n)
        for idx, coeff in vec.items():
            if not coeff:
                continue
            lbl = self._basis[idx]
            if lbl[0] == "h":
                val = -self.datum.root_covector(content_f)[lbl[1]]
                if val:
                    _vec_acc(out, self._proj_minus_tree(tf, scale=coeff * val))
            elif lbl[0] == "f":
                # e_i -> f_i is a Lie isomorphism n_+ -> n_-, so the bracket
                # of two f-side trees is the f-side image of the bracket tree
                mu = -1 if sum(lbl[1]) % 2 == 0 else 1
                for c2, t2 in self.components[lbl[1]].lifts[lbl[2]]:
                    _vec_acc(out, self._proj_minus_tree((t2, tf), scale=coeff * c2 * mu))
            else:
                for c2, t2 in self.components[lbl[1]].lifts[lbl[2]]:
                    for k, c in self._br_ef(t2, tf).items():
                        out[k] = out.get(k, Fraction(0)) + coeff * c2 * c
        return {k: c for k, c in out.items() if c}

    # -- stage C: integral generators on real root spaces --------------------

    def normalize_real_roots(self):
        """Replace the basis of each real root space in the window with the
        generator obtained by integral reflection conjugation.

        The conjugation runs in the buffered window H_build so that root
        strings through window roots can be walked to their true ends."""
        prelim = self.assemble(ZZ, cap=self.H_build)
        alg_q = prelim.base_change(QQ)
        A = self.datum.gcm.entries
        targets = [b for b in prelim.real_positive if sum(b) <= self.H]
        for root in sorted(targets, key=lambda b: (sum(b), b)):
            if sum(root) == 1:
                continue
            path = []
            gamma = root
            guard = 0
            while sum(gamma) > 1:
                guard += 1
                if guard > 10 * self.H + 10:
                    raise PropertyViolationError("no descent chain for %r" % (root,))
                for i in range(self.n):
                    pairing = sum(A[i][j] * gamma[j] for j in range(self.n))
                    if pairing <= 0:
                        continue
                    img = tuple(
                        x - (pairing if j == i else 0) for j, x in enumerate(gamma)
                    )
                    if all(x >= 0 for x in img) and sum(img) < sum(gamma):
                        path.append(i)
                        gamma = img
                        break
                else:
                    raise PropertyViolationError("descent search failed for %r" % (root,))
            j = gamma.index(1)
            vec = {alg_q.index[("e", gamma, 0)]: Fraction(1)}
            for i in reversed(path):
                vec = _reflection_conjugate(alg_q, i, vec)
            comp = self.components[root]
            coords = _coords_on_component(alg_q, comp, root, vec)
            scale = coords[0]
            if scale == 0:
                raise PropertyViolationError("reflection image vanished at %r" % (root,))
            old = comp.lifts[0]
            comb = [(scale * c, t) for c, t in old]
            comb = _canonical_sign(comp, comb)
            comp.finish([comb])
        self._memo_ef = {}
        self._refine_imaginary_lattices()

    def _refine_imaginary_lattices(self):
        """Rebuild each imaginary root space lattice as the span of brackets
        of the final bases of lower components (the subalgebra generated by
        the normalized real root vectors); heights ascending so lower
        components are final when used."""
        real = {
            r.coeffs for r in weyl.enumerate_real_roots(self.datum, self.H)
        }
        targets = sorted(
            (
                c
                for c, comp in self.components.items()
                if comp.mult and sum(c) <= self.H and c not in real
            ),
            key=lambda c: (sum(c), c),
        )
        for content in targets:
            comp = self.components[content]
            gens = []
            for gamma, cg in self.components.items():
                if not cg.mult or sum(gamma) >= sum(content):
                    continue
                delta = tuple(a - b for a, b in zip(content, gamma))
                if any(x < 0 for x in delta) or gamma > delta:
                    continue
                cd = self.components.get(delta)
                if cd is None or not cd.mult:
                    continue
                for s in range(cg.mult):
                    for t in range(cd.mult):
                        acc = {}
                        for ci, ti in cg.lifts[s]:
                            for cj, tj in cd.lifts[t]:
                                c = ci * cj
                                for w, x in _assoc_bracket(
                                    _tree_expand(ti), _tree_expand(tj)
                                ).items():
                                    acc[w] = acc.get(w, Fraction(0)) + c * x
                        acc = {w: v for w, v in acc.items() if v}
                        if acc:
                            gens.append(comp.project(acc))
            if not gens:
                raise PropertyViolationError(
                    "imaginary component %r has no bracket generators" % (content,)
                )
            den = 1
            for v in gens:
                for c in v:
                    den = den * c.denominator // math.gcd(den, c.denominator)
            rows = [[int(c * den) for c in v] for v in gens]
            from kmkit.exactalg import _snf_transforms

            diag, rank, _, Qi = _snf_transforms(rows, comp.mult)
            if rank != comp.mult:
                raise PropertyViolationError(
                    "bracket span of %r has rank %d < multiplicity %d"
                    % (content, rank, comp.mult)
                )
            old_lifts = list(comp.lifts)
            new_combs = []
            for i in range(rank):
                coords = [Fraction(diag[i] * q, den) for q in Qi[i]]
                comb = []
                for u, cu in enumerate(coords):
                    if cu:
                        comb.extend((cu * c, t) for c, t in old_lifts[u])
                new_combs.append(_canonical_sign(comp, comb))
            comp.finish(new_combs)
        self._memo_ef = {}


def _vec_acc(acc, other):
    for k, c in other.items():
        acc[k] = acc.get(k, Fraction(0)) + c


def _vec_sub(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, Fraction(0)) - c
    return {k: c for k, c in out.items() if c}


def _canonical_sign(comp, comb):
    d = {}
    for c, tree in comb:
        for w, x in _tree_expand(tree).items():
            d[w] = d.get(w, Fraction(0)) + c * x
    lead = next((d[w] for w in sorted(d) if d[w]), None)
    if lead is not None and lead < 0:
        return [(-c, t) for c, t in comb]
    return comb


def _coords_on_component(alg_q, comp, root, vec):
    coords = [Fraction(0)] * comp.mult
    for idx, c in vec.items():
        lbl = alg_q.basis[idx]
        if lbl[0] != "e" or lbl[1] != root:
            if c:
                raise PropertyViolationError(
                    "reflection image of %r not in expected root space" % (root,)
                )
            continue
        coords[lbl[2]] = Fraction(c)
    return coords


def _reflection_conjugate(alg_q, i, vec):
    """exp(ad e_i) exp(-ad f_i) exp(ad e_i) applied to a Q coefficient dict."""
    e = alg_q.index[("e", tuple(1 if k == i else 0 for k in range(alg_q.datum.n)), 0)]
    f = alg_q.index[("f", tuple(1 if k == i else 0 for k in range(alg_q.datum.n)), 0)]
    vec = _exp_ad(alg_q, e, vec, 1)
    vec = _exp_ad(alg_q, f, vec, -1)
    return _exp_ad(alg_q, e, vec, 1)


def _exp_ad(alg_q, gen_idx, vec, sign):
    out = dict(vec)
    term = vec
    k = 0
    while term:
        k += 1
        if k > 4 * alg_q.height + 8:
            raise WindowExceededError("exp(ad) did not terminate inside the window")
        gen = {gen_idx: Fraction(sign)}
        term = alg_q.bracket_vec(gen, term)
        term = {idx: Fraction(c, k) for idx, c in term.items()}
        _vec_acc(out, term)
    return {k2: c for k2, c in out.items() if c}


# ---------------------------------------------------------------------------
# public operations


def build_nplus_serre(datum, height, dim_cap=DEFAULT_DIM_CAP):
    """Multiplicities and graded dimensions of the windowed positive part."""
    b = _Builder(datum, height, dim_cap, build_height=height)
    mult = {c: comp.mult for c, comp in b.components.items() if comp.mult}
    dims = [0] * height
    for c, m in mult.items():
        dims[sum(c) - 1] += m
    return NPlusSummary(height, mult, tuple(dims), sum(dims), datum.d)


def assemble_g(datum, height, ring=ZZ, dim_cap=DEFAULT_DIM_CAP):
    """The windowed algebra with normalized integral basis over the ring."""
    b = _Builder(datum, height, dim_cap)
    try:
        b.normalize_real_roots()
    except WindowExceededError:
        # one retry with a wider internal window before giving up
        b = _Builder(datum, height, dim_cap, build_height=2 * b.H_build + 4)
        b.normalize_real_roots()
    return b.assemble(ring)


@dataclass
class AdOperator:
    """ad(e_a)^n / n! (or a plain power) on the windowed basis."""

    matrix: Matrix
    root: tuple
    power: int
    partial_columns: frozenset

    @property
    def string_complete(self):
        return not self.partial_columns


def divided_power_ad(alg, alpha, n):
    """Matrix of ad(e_alpha)^n / n! on the windowed basis.

    alpha is a real root given by its simple-root coordinates (negative
    coordinates select the f side).  Over Z the division must be exact;
    a non-integral entry raises IntegralityDefect.  Columns whose string
    escapes the window are zeroed and reported in partial_columns.
    """
    coeffs = tuple(alpha.coeffs if isinstance(alpha, weyl.Root) else alpha)
    idx = alg.root_vector_index(coeffs)
    R = alg.ring
    if R is ZZ:
        work = alg
    elif alg.zform is not None:
        work = alg.zform
    else:
        work = alg
    dim = work.dim
    cols = []
    partial = set()
    fact = math.factorial(n)
    for j in range(dim):
        v = {j: 1}
        ok = True
        for _ in range(n):
            try:
                v = work.bracket_vec({idx: work.ring.one}, v)
            except WindowExceededError:
                ok = False
                break
        if not ok:
            partial.add(j)
            cols.append({})
            continue
        cols.append(v)
    out_ring = alg.ring
    rows = [[out_ring.zero] * dim for _ in range(dim)]
    for j, v in enumerate(cols):
        for k, c in v.items():
            q = Fraction(c, fact)
            if work.ring is ZZ:
                if q.denominator != 1:
                    raise IntegralityDefect(
                        "ad(e_%r)^%d/%d! is non-integral on %r (entry %s)"
                        % (coeffs, n, n, work.basis[j], q)
                    )
                rows[k][j] = out_ring.from_int(q.numerator)
            else:
                rows[k][j] = q
    return AdOperator(Matrix(out_ring, rows), coeffs, n, frozenset(partial))


def p_operation(alg, label, p):
    """x^[p] for a basis element, as a coefficient dict.

    Cartan elements are fixed; real root vectors power to zero.  For an
    imaginary root vector the unique y with ad(y) = ad(x)^p is solved for
    inside the window; escape or ambiguity raises WindowExceededError.
    """
    from kmkit.exactalg import PrimeField, is_prime

    if not is_prime(p):
        raise InputError("p = %r is not prime" % (p,))
    if alg.ring is ZZ:
        field = PrimeField(p)
        work = alg.base_change(field)
    else:
        if alg.ring.char != p:
            raise InputError("algebra ring has characteristic %r, expected %r" % (alg.ring.char, p))
        work = alg
    idx = work.index[label]
    kind = label[0]
    if kind == "h":
        return {idx: work.ring.one}
    root = label[1]
    if root in work.real_positive:
        return {}
    target = tuple(p * x for x in root)
    if sum(target) > work.height:
        raise WindowExceededError(
            "p-th power of %r lives at height %d > window %d" % (label, sum(target), work.height)
        )
    side = kind
    unknowns = [
        i for i, b in enumerate(work.basis) if b[0] == side and b[1] == target
    ]
    R = work.ring
    # rows: for safe test elements b, ad(x)^p(b) = sum_u y_u [basis_u, b]
    rows, rhs = [], []
    for j in range(work.dim):
        try:
            v = {j: R.one}
            for _ in range(p):
                v = work.bracket_vec({idx: R.one}, v)
            cols = []
            for u in unknowns:
                bu = work.bracket(u, j)
                if bu is TRUNCATED:
                    raise WindowExceededError("test element near boundary")
                cols.append(bu)
        except WindowExceededError:
            continue
        support = set(v)
        for c in cols:
            support |= set(c)
        for k in support:
            rows.append([c.get(k, R.zero) for c in cols])
            rhs.append(v.get(k, R.zero))
    if not unknowns:
        if any(not R.is_zero(c) for c in rhs):
            raise PropertyViolationError("ad(x)^p nonzero but no candidate space for %r" % (label,))
        return {}
    M = Matrix(R, rows, ncols=len(unknowns))
    sol = solve_field(M, tuple(rhs))
    if sol is None:
        raise PropertyViolationError("no p-operation representative for %r in window" % (label,))
    from kmkit.exactalg import rank_kernel

    rank, _ = rank_kernel(M)
    if rank < len(unknowns):
        raise WindowExceededError(
            "p-operation of %r under-determined inside the window" % (label,)
        )
    return {u: c for u, c in zip(unknowns, sol) if not R.is_zero(c)}


def p_structure(alg, p):
    """The full p-operation map on basis elements; escapes become markers."""
    out = {}
    for lbl in alg.basis:
        try:
            out[lbl] = p_operation(alg, lbl, p)
        except WindowExceededError:
            out[lbl] = TRUNCATED
    return out


def base_change(alg, ring):
    """Structure constants of a Z-form reduced into a field."""
    return alg.base_change(ring)
