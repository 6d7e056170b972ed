"""Exact algebra for structured certificate polynomials.

The polynomials manipulated throughout this package have a rigid shape:
they are affine in a list of scalar symbols (function values such as
``f_k``) and quadratic in a list of vector symbols (iterates and
gradients such as ``x_k``, ``g_k``), with the quadratic part expressed
through inner products ``<u, v>``.  That shape is closed under linear
combination and under affine substitution of vector symbols, and it is
dimension-free: the same object represents the polynomial for every
ambient dimension n >= 1.

All coefficients are `fractions.Fraction`; nothing in this module ever
rounds.  Floating point appears only at the SDP solver boundary
(see `certsearch`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class CatalogError(ValueError):
    """Raised when symbols or catalogs do not line up."""


def as_fraction(x) -> Fraction:
    """Coerce ints, strings like '2/11' or '0.19', and floats exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        # exact binary value; prefer passing strings for decimal inputs
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class VarCatalog:
    """Ordered symbol table: scalar symbols and vector symbols.

    The construction order is canonical; every matrix or serialized
    artifact downstream indexes symbols in this order.
    """

    scalars: tuple[str, ...]
    vectors: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "scalars", tuple(self.scalars))
        object.__setattr__(self, "vectors", tuple(self.vectors))
        seen = set()
        for name in self.scalars + self.vectors:
            if name in seen:
                raise CatalogError(f"duplicate symbol {name!r} in catalog")
            seen.add(name)

    def without(self, *names: str) -> "VarCatalog":
        """Catalog with the given vector symbols removed."""
        for name in names:
            if name not in self.vectors:
                raise CatalogError(f"{name!r} is not a vector symbol of this catalog")
        drop = set(names)
        return VarCatalog(self.scalars, tuple(v for v in self.vectors if v not in drop))

    def has(self, name: str) -> bool:
        return name in self.scalars or name in self.vectors


@dataclass(frozen=True)
class CoefficientKey:
    """Canonical address of one coefficient: constant, scalar, or symbol pair.

    Pair keys keep the lexicographically smaller symbol first.
    """

    kind: str  # "constant" | "scalar" | "pair"
    symbols: tuple[str, ...] = ()

    @staticmethod
    def constant() -> "CoefficientKey":
        return CoefficientKey("constant")

    @staticmethod
    def scalar(name: str) -> "CoefficientKey":
        return CoefficientKey("scalar", (name,))

    @staticmethod
    def pair(u: str, v: str) -> "CoefficientKey":
        return CoefficientKey("pair", (u, v) if u <= v else (v, u))

    def __str__(self) -> str:
        return self.kind if not self.symbols else f"{self.kind} " + " ".join(self.symbols)


def _pair(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class StructuredPolynomial:
    """constant + sum_s linear[s]*s + sum_{u<=v} gram[(u,v)]*<u,v>.

    ``gram[(u, v)]`` stores the *total* coefficient of the inner product
    ``<u, v>``; the symmetric-matrix view (`gram_matrix`) splits it
    evenly across the two off-diagonal slots.  Instances are immutable:
    every operation returns a fresh polynomial.
    """

    __slots__ = ("catalog", "constant", "linear", "gram")

    def __init__(self, catalog: VarCatalog, constant=0, linear=None, gram=None):
        self.catalog = catalog
        self.constant = as_fraction(constant)
        lin: dict[str, Fraction] = {}
        for name, coef in (linear or {}).items():
            if name not in catalog.scalars:
                raise CatalogError(f"{name!r} is not a scalar symbol of this catalog")
            c = as_fraction(coef)
            if c:
                lin[name] = c
        grm: dict[tuple[str, str], Fraction] = {}
        for key, coef in (gram or {}).items():
            u, v = key
            if u not in catalog.vectors or v not in catalog.vectors:
                raise CatalogError(f"pair {key!r} uses symbols outside the catalog")
            c = as_fraction(coef)
            if c:
                k = _pair(u, v)
                grm[k] = grm.get(k, Fraction(0)) + c
                if not grm[k]:
                    del grm[k]
        self.linear = lin
        self.gram = grm

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def zero(catalog: VarCatalog) -> "StructuredPolynomial":
        return StructuredPolynomial(catalog)

    @staticmethod
    def scalar(catalog: VarCatalog, name: str, coef=1) -> "StructuredPolynomial":
        return StructuredPolynomial(catalog, linear={name: coef})

    @staticmethod
    def inner(catalog: VarCatalog, left: Mapping[str, object], right: Mapping[str, object]) -> "StructuredPolynomial":
        """<sum_u left[u]*u, sum_v right[v]*v> as a polynomial."""
        gram: dict[tuple[str, str], Fraction] = {}
        for u, a in left.items():
            af = as_fraction(a)
            if not af:
                continue
            for v, b in right.items():
                bf = as_fraction(b)
                if not bf:
                    continue
                k = _pair(u, v)
                gram[k] = gram.get(k, Fraction(0)) + af * bf
        return StructuredPolynomial(catalog, gram=gram)

    @staticmethod
    def sq_norm(catalog: VarCatalog, combo: Mapping[str, object]) -> "StructuredPolynomial":
        """||sum_u combo[u]*u||^2."""
        return StructuredPolynomial.inner(catalog, combo, combo)

    # -- arithmetic ------------------------------------------------------------

    def _require_same_catalog(self, other: "StructuredPolynomial"):
        if self.catalog != other.catalog:
            raise CatalogError(
                "catalog mismatch: "
                f"{self.catalog.scalars}/{self.catalog.vectors} vs "
                f"{other.catalog.scalars}/{other.catalog.vectors}"
            )

    def __add__(self, other: "StructuredPolynomial") -> "StructuredPolynomial":
        self._require_same_catalog(other)
        lin = dict(self.linear)
        for k, c in other.linear.items():
            lin[k] = lin.get(k, Fraction(0)) + c
        grm = dict(self.gram)
        for k, c in other.gram.items():
            grm[k] = grm.get(k, Fraction(0)) + c
        return StructuredPolynomial(self.catalog, self.constant + other.constant, lin, grm)

    def __sub__(self, other: "StructuredPolynomial") -> "StructuredPolynomial":
        return self + (-other)

    def __neg__(self) -> "StructuredPolynomial":
        return self * Fraction(-1)

    def __mul__(self, weight) -> "StructuredPolynomial":
        w = as_fraction(weight)
        return StructuredPolynomial(
            self.catalog,
            self.constant * w,
            {k: c * w for k, c in self.linear.items()},
            {k: c * w for k, c in self.gram.items()},
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructuredPolynomial):
            return NotImplemented
        return (
            self.catalog == other.catalog
            and self.constant == other.constant
            and self.linear == other.linear
            and self.gram == other.gram
        )

    def is_zero(self) -> bool:
        return not self.constant and not self.linear and not self.gram

    def __repr__(self) -> str:
        return f"StructuredPolynomial({self.coefficients()!r})"

    # -- views -----------------------------------------------------------------

    def coefficients(self) -> dict[CoefficientKey, Fraction]:
        """All nonzero coefficients keyed canonically."""
        out: dict[CoefficientKey, Fraction] = {}
        if self.constant:
            out[CoefficientKey.constant()] = self.constant
        for name, c in self.linear.items():
            out[CoefficientKey.scalar(name)] = c
        for (u, v), c in self.gram.items():
            out[CoefficientKey.pair(u, v)] = c
        return out

    def gram_matrix(self) -> list[list[Fraction]]:
        """Symmetric matrix M over catalog.vectors with p's quadratic part
        equal to sum_{i,j} M[i][j]*<v_i, v_j> (off-diagonal split in half)."""
        vecs = self.catalog.vectors
        n = len(vecs)
        m = [[Fraction(0)] * n for _ in range(n)]
        idx = {v: i for i, v in enumerate(vecs)}
        for (u, v), c in self.gram.items():
            i, j = idx[u], idx[v]
            if i == j:
                m[i][i] = c
            else:
                m[i][j] = m[j][i] = c / 2
        return m


def from_gram_matrix(catalog: VarCatalog, matrix: Sequence[Sequence]) -> StructuredPolynomial:
    """Inverse of `gram_matrix`: symmetric matrix -> quadratic polynomial."""
    vecs = catalog.vectors
    n = len(vecs)
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise CatalogError(f"matrix must be {n}x{n} to match the catalog's vector symbols")
    gram: dict[tuple[str, str], Fraction] = {}
    for i in range(n):
        for j in range(i, n):
            a = as_fraction(matrix[i][j])
            b = as_fraction(matrix[j][i])
            if a != b:
                raise CatalogError(f"matrix not symmetric at ({i},{j})")
            if a:
                gram[_pair(vecs[i], vecs[j])] = a if i == j else 2 * a
    return StructuredPolynomial(catalog, gram=gram)


def combine(terms: Iterable[tuple[object, StructuredPolynomial]]) -> StructuredPolynomial:
    """Exact linear combination sum_i w_i * p_i.

    All terms must share one catalog; an empty combination is rejected
    because it has no catalog to live on.
    """
    terms = list(terms)
    if not terms:
        raise CatalogError("combine needs at least one term")
    acc = StructuredPolynomial.zero(terms[0][1].catalog)
    for weight, poly in terms:
        acc = acc + poly * as_fraction(weight)
    return acc


def substitute_vector(
    p: StructuredPolynomial, target: str, replacement: Mapping[str, object]
) -> StructuredPolynomial:
    """Replace the vector symbol `target` by an affine combination of the
    remaining vector symbols (an empty mapping substitutes the zero vector).

    The returned polynomial lives on ``p.catalog.without(target)``.
    """
    if target not in p.catalog.vectors:
        raise CatalogError(f"{target!r} is not a vector symbol of this catalog")
    if target in replacement:
        raise CatalogError(f"replacement for {target!r} must not reference itself")
    repl = {k: as_fraction(v) for k, v in replacement.items() if as_fraction(v)}
    new_catalog = p.catalog.without(target)
    for name in repl:
        if name not in new_catalog.vectors:
            raise CatalogError(f"replacement symbol {name!r} is not in the remaining catalog")
    gram: dict[tuple[str, str], Fraction] = {}

    def add(u: str, v: str, c: Fraction):
        k = _pair(u, v)
        gram[k] = gram.get(k, Fraction(0)) + c

    for (u, v), c in p.gram.items():
        if u != target and v != target:
            add(u, v, c)
        elif u == target and v == target:
            names = list(repl)
            for a_i, u2 in enumerate(names):
                for v2 in names[a_i:]:
                    if u2 == v2:
                        add(u2, u2, c * repl[u2] * repl[u2])
                    else:
                        add(u2, v2, 2 * c * repl[u2] * repl[v2])
        else:
            other = v if u == target else u
            for u2, w in repl.items():
                add(u2, other, c * w)
    return StructuredPolynomial(new_catalog, p.constant, dict(p.linear), gram)


def expand_univariate(p: StructuredPolynomial) -> dict[tuple[str, ...], Fraction]:
    """Monomial map of p at ambient dimension n = 1.

    Keys: () for the constant, (s,) for a scalar symbol, and a sorted
    pair (u, v) for the product of the two vector coordinates.  This is
    the coefficient-matching view used as an independent cross-check of
    the structured route.
    """
    out: dict[tuple[str, ...], Fraction] = {}
    if p.constant:
        out[()] = p.constant
    for name, c in p.linear.items():
        out[(name,)] = c
    for (u, v), c in p.gram.items():
        out[(u, v)] = c
    return out


def evaluate(
    p: StructuredPolynomial,
    scalars: Mapping[str, object],
    vectors: Mapping[str, Sequence],
):
    """Evaluate p at a concrete assignment.

    Every catalog symbol must be covered and all vectors must share one
    dimension.  With Fraction inputs the result is exact; float inputs
    work too and yield floats.
    """
    missing = [s for s in p.catalog.scalars if s not in scalars]
    missing += [v for v in p.catalog.vectors if v not in vectors]
    if missing:
        raise CatalogError(f"assignment missing symbols: {missing}")
    dims = {len(vectors[v]) for v in p.catalog.vectors}
    if len(dims) > 1:
        raise CatalogError(f"vectors have mismatched dimensions: {sorted(dims)}")
    total = p.constant
    for name, c in p.linear.items():
        total = total + c * scalars[name]
    for (u, v), c in p.gram.items():
        uu, vv = vectors[u], vectors[v]
        dot = sum(a * b for a, b in zip(uu, vv))
        total = total + c * dot
    return total


# -- plain-text serialization (golden-file friendly) ---------------------------


def to_text(p: StructuredPolynomial) -> str:
    """One nonzero coefficient per line: ``kind key num/den``.

    Deterministic order: constant, then scalars in catalog order, then
    pairs sorted lexicographically.
    """
    lines = []
    if p.constant:
        lines.append(f"constant {p.constant.numerator}/{p.constant.denominator}")
    for name in p.catalog.scalars:
        if name in p.linear:
            c = p.linear[name]
            lines.append(f"scalar {name} {c.numerator}/{c.denominator}")
    for (u, v) in sorted(p.gram):
        c = p.gram[(u, v)]
        lines.append(f"pair {u} {v} {c.numerator}/{c.denominator}")
    return "\n".join(lines)


def from_text(catalog: VarCatalog, text: str) -> StructuredPolynomial:
    constant = Fraction(0)
    linear: dict[str, Fraction] = {}
    gram: dict[tuple[str, str], Fraction] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "constant" and len(parts) == 2:
            constant = Fraction(parts[1])
        elif parts[0] == "scalar" and len(parts) == 3:
            linear[parts[1]] = Fraction(parts[2])
        elif parts[0] == "pair" and len(parts) == 4:
            gram[(parts[1], parts[2])] = Fraction(parts[3])
        else:
            raise CatalogError(f"unparseable coefficient line: {raw!r}")
    return StructuredPolynomial(catalog, constant, linear, gram)
