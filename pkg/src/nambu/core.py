"""Z2-graded algebra data model.

A HomSuperAlgebra is (graded space, n-ary structure tensor, even twist
map).  Brackets are stored only on canonical index tuples; evaluation
anywhere else goes through the straightening sign of the super-exterior
algebra.  Axioms are verified by brute force over basis tuples, which is
complete by multilinearity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    ArityMismatch,
    DimensionMismatch,
    EndomorphismCheckFailed,
    IndexOutOfRange,
    NonGradedSubspace,
    NotAnIdeal,
)
from .linalg import Matrix, Subspace, format_scalar, is_zero_vec, vzero


@dataclass(frozen=True)
class GradedSpace:
    """A Z2-graded vector space given by a parity per basis vector."""

    dim: int
    parity: tuple

    def __post_init__(self):
        if len(self.parity) != self.dim:
            raise DimensionMismatch("parity vector length must equal dim")
        if any(p not in (0, 1) for p in self.parity):
            raise ValueError("parities must be 0 or 1")

    def parity_of_indices(self, indices):
        return sum(self.parity[i] for i in indices) % 2

    def even_indices(self):
        return [i for i, p in enumerate(self.parity) if p == 0]

    def odd_indices(self):
        return [i for i, p in enumerate(self.parity) if p == 1]


def straighten(indices, parity):
    """Sort an index tuple into canonical (nondecreasing) order.

    Each adjacent transposition of slots with parities p, q contributes the
    factor -(-1)^{pq}; a repeated even index makes the wedge vanish.
    Returns (sign, canonical tuple) with sign in {-1, 0, +1}.
    """
    for i in indices:
        if not 0 <= i < len(parity):
            raise IndexOutOfRange(f"basis index {i} out of range")
    idx = list(indices)
    sign = 1
    # insertion sort; the number of adjacent swaps is what matters, not speed
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            a, b = idx[j - 1], idx[j]
            if parity[a] == 1 and parity[b] == 1:
                sign = sign  # odd-odd swap: -(-1)^{1*1} = +1
            else:
                sign = -sign
            idx[j - 1], idx[j] = b, a
            j -= 1
    for k in range(1, len(idx)):
        if idx[k] == idx[k - 1] and parity[idx[k]] == 0:
            return 0, tuple(idx)
    return sign, tuple(idx)


def is_canonical(indices, parity):
    sign, canon = straighten(indices, parity)
    return sign == 1 and canon == tuple(indices)


class StructureTensor:
    """Sparse n-ary structure constants on canonical index tuples.

    ``entries`` maps a canonical tuple to the output coordinate vector.
    ``strict`` enforces parity homogeneity of every entry; raw tensors
    (strict=False) may represent counterexamples.
    """

    def __init__(self, arity: int, space: GradedSpace, entries: dict, strict=True):
        if arity < 2:
            raise ArityMismatch("arity must be at least 2")
        self.arity = arity
        self.space = space
        clean = {}
        for key, vec in entries.items():
            key = tuple(key)
            if len(key) != arity:
                raise ArityMismatch(f"tuple {key} has wrong length for arity {arity}")
            if not is_canonical(key, space.parity):
                raise ValueError(f"tuple {key} is not canonical")
            vec = list(vec)
            if len(vec) != space.dim:
                raise DimensionMismatch("output vector length must equal dim")
            if strict:
                p_in = space.parity_of_indices(key)
                for k, c in enumerate(vec):
                    if c != 0 and space.parity[k] != p_in:
                        raise ValueError(
                            f"entry {key} -> e{k+1} violates parity homogeneity"
                        )
            if any(c != 0 for c in vec):
                clean[key] = tuple(vec)
        self.entries = clean

    def value(self, indices):
        """Bracket of basis vectors e_{i1},...,e_{in} as a coordinate vector."""
        sign, canon = straighten(indices, self.space.parity)
        if sign == 0:
            return vzero(self.space.dim)
        stored = self.entries.get(canon)
        if stored is None:
            return vzero(self.space.dim)
        if sign == 1:
            return list(stored)
        return [-c for c in stored]

    def items(self):
        return self.entries.items()

    def __eq__(self, other):
        if not isinstance(other, StructureTensor):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.space == other.space
            and self.entries == other.entries
        )


def support(vec):
    return [(i, c) for i, c in enumerate(vec) if c != 0]


class HomSuperAlgebra:
    """(g, [.,...,.], alpha): graded space, bracket tensor, even twist."""

    def __init__(self, space: GradedSpace, bracket: StructureTensor, alpha: Matrix, name=""):
        if bracket.space != space:
            raise DimensionMismatch("bracket tensor lives on a different space")
        if alpha.rows != space.dim or alpha.cols != space.dim:
            raise DimensionMismatch("alpha must be a dim x dim matrix")
        self.space = space
        self.bracket = bracket
        self.alpha = alpha
        self.name = name
        self._cache = {}

    @property
    def dim(self):
        return self.space.dim

    @property
    def arity(self):
        return self.bracket.arity

    @property
    def parity(self):
        return self.space.parity

    def alpha_is_even(self):
        p = self.parity
        return all(
            self.alpha[i, j] == 0
            for i in range(self.dim)
            for j in range(self.dim)
            if p[i] != p[j]
        )

    def bracket_basis(self, indices):
        return self.bracket.value(indices)

    def bracket_eval(self, vectors):
        """Multilinear evaluation of the bracket on coordinate vectors."""
        if len(vectors) != self.arity:
            raise ArityMismatch(f"expected {self.arity} arguments")
        for v in vectors:
            if len(v) != self.dim:
                raise DimensionMismatch("argument has wrong dimension")
        out = vzero(self.dim)
        supports = [support(v) for v in vectors]
        if any(not s for s in supports):
            return out
        for combo in itertools.product(*supports):
            coeff = 1
            for _, c in combo:
                coeff *= c
            val = self.bracket_basis(tuple(i for i, _ in combo))
            for k, c in enumerate(val):
                if c != 0:
                    out[k] += coeff * c
        return out

    def alpha_column(self, j):
        return self.alpha.col(j)

    def is_abelian(self):
        return not self.bracket.entries

    def basis_vector(self, i):
        v = vzero(self.dim)
        v[i] = 1
        return v


# ---------------------------------------------------------------------------
# reports


@dataclass
class Check:
    name: str
    passed: bool
    witness: dict | None = None


@dataclass
class Report:
    checks: list = field(default_factory=list)

    def add(self, name, passed, witness=None):
        self.checks.append(Check(name, passed, witness))

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "witness": c.witness}
                for c in self.checks
            ],
        }


def _fmt_vec(v):
    return [format_scalar(Fraction(x)) for x in v]


def _one_based(t):
    return [i + 1 for i in t]


# ---------------------------------------------------------------------------
# axiom verification


def verify_algebra(a: HomSuperAlgebra) -> Report:
    """Check parity homogeneity, super skew-symmetry, the twisted
    fundamental identity, and multiplicativity of the twist."""
    report = Report()
    report.add("alpha-even", a.alpha_is_even())

    witness = None
    p = a.parity
    for key, vec in a.bracket.items():
        p_in = a.space.parity_of_indices(key)
        for k, c in enumerate(vec):
            if c != 0 and p[k] != p_in:
                witness = {"args": _one_based(key), "output_index": k + 1}
                break
        if witness:
            break
    report.add("homogeneity", witness is None, witness)

    witness = None
    n = a.arity
    for t in itertools.product(range(a.dim), repeat=n):
        base = a.bracket_basis(t)
        for pos in range(n - 1):
            s = list(t)
            s[pos], s[pos + 1] = s[pos + 1], s[pos]
            swapped = a.bracket_basis(tuple(s))
            sgn = 1 if (p[t[pos]] == 1 and p[t[pos + 1]] == 1) else -1
            if any(x != sgn * y for x, y in zip(base, swapped)):
                witness = {"args": _one_based(t), "swap_at": pos + 1}
                break
        if witness:
            break
    report.add("super-skew-symmetry", witness is None, witness)

    report.add("fundamental-identity", *(_check_fundamental_identity(a)))
    report.add("multiplicativity", *(_check_multiplicativity(a)))
    return report


def _check_fundamental_identity(a: HomSuperAlgebra):
    n = a.arity
    p = a.parity
    alpha_cols = [a.alpha_column(j) for j in range(a.dim)]
    for xs in itertools.product(range(a.dim), repeat=n - 1):
        px = sum(p[i] for i in xs) % 2
        for ys in itertools.product(range(a.dim), repeat=n):
            inner = a.bracket_basis(ys)
            lhs = a.bracket_eval([alpha_cols[i] for i in xs] + [inner])
            rhs = vzero(a.dim)
            prefix = 0
            for i in range(n):
                sign = -1 if (px == 1 and prefix == 1) else 1
                mid = a.bracket_basis(xs + (ys[i],))
                args = [alpha_cols[ys[k]] for k in range(i)] + [mid] + [
                    alpha_cols[ys[k]] for k in range(i + 1, n)
                ]
                term = a.bracket_eval(args)
                for k, c in enumerate(term):
                    if c != 0:
                        rhs[k] += sign * c
                prefix = (prefix + p[ys[i]]) % 2
            if lhs != rhs:
                witness = {
                    "x": _one_based(xs),
                    "y": _one_based(ys),
                    "lhs": _fmt_vec(lhs),
                    "rhs": _fmt_vec(rhs),
                }
                return False, witness
    return True, None


def _check_multiplicativity(a: HomSuperAlgebra):
    alpha_cols = [a.alpha_column(j) for j in range(a.dim)]
    for key in _canonical_tuples(a.space, a.arity):
        lhs = a.alpha.apply(a.bracket_basis(key))
        rhs = a.bracket_eval([alpha_cols[i] for i in key])
        if lhs != rhs:
            return False, {"args": _one_based(key), "lhs": _fmt_vec(lhs), "rhs": _fmt_vec(rhs)}
    return True, None


def _canonical_tuples(space: GradedSpace, length: int):
    """All canonical tuples: nondecreasing, even indices never repeated."""

    def rec(start, remaining, prefix):
        if remaining == 0:
            yield tuple(prefix)
            return
        for i in range(start, space.dim):
            nxt = i + 1 if space.parity[i] == 0 else i
            prefix.append(i)
            yield from rec(nxt, remaining - 1, prefix)
            prefix.pop()

    yield from rec(0, length, [])


def canonical_tuples(space: GradedSpace, length: int):
    return list(_canonical_tuples(space, length))


def verify_morphism(f: Matrix, a: HomSuperAlgebra, b: HomSuperAlgebra) -> Report:
    """f[x1,...,xn] = [f(x1),...,f(xn)]' and f . alpha = alpha' . f."""
    if a.arity != b.arity:
        raise ArityMismatch("arities differ")
    if f.rows != b.dim or f.cols != a.dim:
        raise DimensionMismatch(f"morphism must be {b.dim}x{a.dim}")
    report = Report()

    even = all(
        f[i, j] == 0
        for i in range(b.dim)
        for j in range(a.dim)
        if b.parity[i] != a.parity[j]
    )
    report.add("even", even)

    witness = None
    f_cols = [f.col(j) for j in range(a.dim)]
    for key in _canonical_tuples(a.space, a.arity):
        lhs = f.apply(a.bracket_basis(key))
        rhs = b.bracket_eval([f_cols[i] for i in key])
        if lhs != rhs:
            witness = {"args": _one_based(key), "lhs": _fmt_vec(lhs), "rhs": _fmt_vec(rhs)}
            break
    report.add("bracket", witness is None, witness)

    inter = f * a.alpha == b.alpha * f
    report.add("twist-intertwines", inter)
    return report


def twist_by_endomorphism(a: HomSuperAlgebra, rho: Matrix) -> HomSuperAlgebra:
    """Yoneda-style twisting: from (g, [.], id) and a self-morphism rho build
    (g, rho o [.], rho).  The result is verified to satisfy all axioms."""
    if not a.alpha.is_identity():
        raise EndomorphismCheckFailed("twisting requires an untwisted algebra (alpha = id)")
    base_report = verify_algebra(a)
    if not base_report.ok:
        raise EndomorphismCheckFailed("base algebra fails its axioms")
    rho_report = verify_morphism(rho, a, a)
    if not rho_report.ok:
        raise EndomorphismCheckFailed("rho is not a self-morphism")
    entries = {}
    for key, vec in a.bracket.items():
        entries[key] = rho.apply(list(vec))
    twisted = HomSuperAlgebra(
        a.space,
        StructureTensor(a.arity, a.space, entries),
        rho,
        name=(a.name + "~twisted") if a.name else "twisted",
    )
    post = verify_algebra(twisted)
    if not post.ok:
        raise EndomorphismCheckFailed("twisted algebra failed verification (internal error)")
    return twisted


# ---------------------------------------------------------------------------
# graded subspaces, ideals, series


def split_graded(h: Subspace, space: GradedSpace):
    """Split a subspace into (even part, odd part); error if not graded."""
    even_axes = Subspace.from_vectors(
        space.dim, [_unit(space.dim, i) for i in space.even_indices()]
    )
    odd_axes = Subspace.from_vectors(
        space.dim, [_unit(space.dim, i) for i in space.odd_indices()]
    )
    he = h.intersect(even_axes)
    ho = h.intersect(odd_axes)
    if he.dim + ho.dim != h.dim:
        raise NonGradedSubspace("subspace is not spanned by parity-homogeneous vectors")
    return he, ho


def _unit(n, i):
    v = [0] * n
    v[i] = 1
    return v


def is_graded(h: Subspace, space: GradedSpace):
    try:
        split_graded(h, space)
        return True
    except NonGradedSubspace:
        return False


def _alpha_stable(h: Subspace, a: HomSuperAlgebra):
    return all(h.contains_vector(a.alpha.apply(v)) for v in h.basis_vectors())


def is_hom_subalgebra(h: Subspace, a: HomSuperAlgebra) -> bool:
    split_graded(h, a.space)  # raises NonGradedSubspace
    if not _alpha_stable(h, a):
        return False
    rows = h.basis_vectors()
    for combo in itertools.product(rows, repeat=a.arity):
        if not h.contains_vector(a.bracket_eval(list(combo))):
            return False
    return True


def is_hom_ideal(h: Subspace, a: HomSuperAlgebra) -> bool:
    """alpha(H) in H and [H, g, ..., g] in H.

    Checking the first slot only is enough: super skew-symmetry moves H
    into any slot at the cost of a sign.
    """
    split_graded(h, a.space)
    if not _alpha_stable(h, a):
        return False
    basis = [a.basis_vector(i) for i in range(a.dim)]
    for v in h.basis_vectors():
        for rest in itertools.product(range(a.dim), repeat=a.arity - 1):
            args = [v] + [basis[i] for i in rest]
            if not h.contains_vector(a.bracket_eval(args)):
                return False
    return True


@dataclass
class SeriesResult:
    kind: str
    terms: list  # Subspaces, terms[0] = g
    length: int | None  # first index with zero term; None if stabilized nonzero
    stabilized_nonzero: bool

    @property
    def is_finite(self):
        return self.length is not None


def series(a: HomSuperAlgebra, kind: str) -> SeriesResult:
    """Derived or lower-central series computed on spanning sets.

    terms[0] = g; derived: next = [S, S, ..., S]; lower_central:
    next = [S, g, ..., g].  The length is the first index whose term is 0.
    """
    if kind not in ("derived", "lower_central"):
        raise ValueError("kind must be 'derived' or 'lower_central'")
    full = Subspace.full(a.dim)
    terms = [full]
    basis_g = [a.basis_vector(i) for i in range(a.dim)]
    while True:
        current = terms[-1]
        if current.dim == 0:
            break
        rows = current.basis_vectors()
        spanned = []
        if kind == "derived":
            for combo in itertools.product(rows, repeat=a.arity):
                vec = a.bracket_eval(list(combo))
                if not is_zero_vec(vec):
                    spanned.append(vec)
        else:
            for v in rows:
                for rest in itertools.product(range(a.dim), repeat=a.arity - 1):
                    vec = a.bracket_eval([v] + [basis_g[i] for i in rest])
                    if not is_zero_vec(vec):
                        spanned.append(vec)
        nxt = Subspace.from_vectors(a.dim, spanned)
        if nxt == current:
            return SeriesResult(kind, terms, None, True)
        terms.append(nxt)
    return SeriesResult(kind, terms, len(terms) - 1, False)


def solvable_length(a: HomSuperAlgebra):
    return series(a, "derived").length


def nilpotent_length(a: HomSuperAlgebra):
    return series(a, "lower_central").length


def direct_sum(a: HomSuperAlgebra, b: HomSuperAlgebra) -> HomSuperAlgebra:
    if a.arity != b.arity:
        raise ArityMismatch("direct sum needs equal arities")
    da, db = a.dim, b.dim
    space = GradedSpace(da + db, tuple(a.parity) + tuple(b.parity))
    entries = {}
    for key, vec in a.bracket.items():
        entries[key] = list(vec) + [0] * db
    for key, vec in b.bracket.items():
        entries[tuple(i + da for i in key)] = [0] * da + list(vec)
    alpha_rows = []
    for i in range(da):
        alpha_rows.append(a.alpha.row(i) + [0] * db)
    for i in range(db):
        alpha_rows.append([0] * da + b.alpha.row(i))
    out = HomSuperAlgebra(
        space,
        StructureTensor(a.arity, space, entries),
        Matrix.from_rows(alpha_rows),
        name=f"{a.name}+{b.name}" if (a.name or b.name) else "",
    )
    left = Subspace.from_vectors(da + db, [_unit(da + db, i) for i in range(da)])
    right = Subspace.from_vectors(da + db, [_unit(da + db, da + i) for i in range(db)])
    assert is_hom_ideal(left, out) and is_hom_ideal(right, out)
    return out


def lex_complement_indices(i: Subspace):
    """Lexicographically first subset of standard basis vectors completing
    a basis of the ambient space over the given subspace."""
    chosen = []
    current = i
    for j in range(i.ambient_dim):
        if current.dim == i.ambient_dim:
            break
        cand = _unit(i.ambient_dim, j)
        if not current.contains_vector(cand):
            chosen.append(j)
            current = current.sum(Subspace.from_vectors(i.ambient_dim, [cand]))
    return chosen


def quotient(a: HomSuperAlgebra, i: Subspace):
    """Quotient algebra g/I with the induced bracket and twist.

    Returns (quotient algebra, projection matrix).  The complement basis is
    the deterministic lex-first choice, so results are reproducible.
    """
    if not is_hom_ideal(i, a):
        raise NotAnIdeal("quotient requires a Hom-ideal")
    comp = lex_complement_indices(i)
    q_dim = len(comp)
    q_parity = tuple(a.parity[j] for j in comp)
    q_space = GradedSpace(q_dim, q_parity)

    # projection: solve x = (I-part) + sum c_k e_{comp_k}; pi(x) = (c_k)
    cols = [list(r) for r in i.basis_vectors()] + [_unit(a.dim, j) for j in comp]
    basis_matrix = Matrix.from_rows(cols, cols=a.dim).transpose()
    # basis_matrix * coords = x ; invert by solving for each standard basis vector
    inv_cols = []
    from .linalg import solve_affine

    for j in range(a.dim):
        sol, _ = solve_affine(basis_matrix, _unit(a.dim, j))
        assert sol is not None
        inv_cols.append(sol)
    inv = Matrix.from_rows(inv_cols, cols=a.dim).transpose()
    pi_rows = [inv.row(i.dim + k) for k in range(q_dim)]
    pi = Matrix.from_rows(pi_rows, cols=a.dim) if q_dim else Matrix(0, a.dim, [])

    lift_cols = [_unit(a.dim, j) for j in comp]
    entries = {}
    for key in _canonical_tuples(q_space, a.arity):
        vec = a.bracket_eval([lift_cols[t] for t in key])
        pvec = pi.apply(vec)
        if not is_zero_vec(pvec):
            entries[key] = pvec
    alpha_q_cols = [pi.apply(a.alpha.apply(lift_cols[t])) for t in range(q_dim)]
    alpha_q = Matrix.from_rows(alpha_q_cols, cols=q_dim).transpose() if q_dim else Matrix(0, 0, [])
    q = HomSuperAlgebra(
        q_space,
        StructureTensor(a.arity, q_space, entries),
        alpha_q,
        name=(a.name + "/I") if a.name else "quotient",
    )
    assert verify_morphism(pi, a, q).ok
    return q, pi


# ---------------------------------------------------------------------------
# bilinear forms


@dataclass
class BilinearForm:
    gram: Matrix

    def pairing(self, u, v):
        return pairing(self.gram, u, v)


def pairing(gram: Matrix, u, v):
    gv = gram.apply(list(v))
    s = 0
    for x, y in zip(u, gv):
        if x != 0 and y != 0:
            s += x * y
    return s


def verify_metric(a: HomSuperAlgebra, form: BilinearForm) -> Report:
    """Consistency, supersymmetry, invariance, nondegeneracy, alpha-symmetry."""
    g = form.gram
    if g.rows != a.dim or g.cols != a.dim:
        raise DimensionMismatch("gram matrix has wrong shape")
    p = a.parity
    report = Report()

    witness = None
    for i in range(a.dim):
        for j in range(a.dim):
            if p[i] != p[j] and g[i, j] != 0:
                witness = {"i": i + 1, "j": j + 1}
                break
        if witness:
            break
    report.add("consistent", witness is None, witness)

    witness = None
    for i in range(a.dim):
        for j in range(a.dim):
            sgn = -1 if (p[i] == 1 and p[j] == 1) else 1
            if g[i, j] != sgn * g[j, i]:
                witness = {"i": i + 1, "j": j + 1}
                break
        if witness:
            break
    report.add("supersymmetric", witness is None, witness)

    # invariance: <[x_1..x_{n-1}, y], z> = -(-1)^{|x||y|} <y, [x_1..x_{n-1}, z]>
    witness = None
    n = a.arity
    basis = [a.basis_vector(k) for k in range(a.dim)]
    for xs in _canonical_tuples(a.space, n - 1):
        px = a.space.parity_of_indices(xs)
        for y in range(a.dim):
            by = a.bracket_basis(xs + (y,))
            sgn = -1 if (px == 1 and p[y] == 1) else 1
            for z in range(a.dim):
                lhs = pairing(g, by, basis[z])
                rhs = -sgn * pairing(g, basis[y], a.bracket_basis(xs + (z,)))
                if lhs != rhs:
                    witness = {
                        "x": _one_based(xs),
                        "y": y + 1,
                        "z": z + 1,
                        "lhs": format_scalar(Fraction(lhs)),
                        "rhs": format_scalar(Fraction(rhs)),
                    }
                    break
            if witness:
                break
        if witness:
            break
    report.add("invariant", witness is None, witness)

    from .linalg import rank as _rank

    report.add("nondegenerate", _rank(g) == a.dim)

    # self-adjointness <alpha u, v> = <u, alpha v>; on the even part this is
    # the same as <alpha x, y> = <alpha y, x>, and it is what T*-forms satisfy
    # on the odd part (the literal even-part formula picks up a supersign)
    report.add("alpha-symmetric", a.alpha.transpose() * g == g * a.alpha)
    return report
