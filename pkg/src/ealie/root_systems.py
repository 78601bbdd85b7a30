"""Finite root systems, semilattices, and extended affine root systems.

Roots of an extended affine root system (EARS) are pairs
``(finite, iso)``: integer coordinates over the simple roots of the finite
quotient system, plus integer coordinates over a basis of the isotropic
(null) directions.  The nonisotropic roots are ``short + S`` and
``long + L`` where S and L are semilattices; the isotropic roots are S+S.

Everything here is exact integer/rational combinatorics.  Infinite sets are
only ever touched through explicit coordinate windows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ealie.errors import (
    DuplicateCoset,
    InteractionViolated,
    IsotropicMirror,
    LatticeRequired,
    MissingDecomposition,
    NotAffine,
    NotClosed,
    NotGenerating,
    RankOne,
    UnsupportedType,
)

Vec = tuple[int, ...]
Root = tuple[Vec, Vec]  # (finite part, isotropic part)


def _zero(n: int) -> Vec:
    return (0,) * n


def _add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def _neg(a: Vec) -> Vec:
    return tuple(-x for x in a)


def _scale(c: int, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def root_add(a: Root, b: Root) -> Root:
    return (_add(a[0], b[0]), _add(a[1], b[1]))


def root_sub(a: Root, b: Root) -> Root:
    return (_sub(a[0], b[0]), _sub(a[1], b[1]))


def root_neg(a: Root) -> Root:
    return (_neg(a[0]), _neg(a[1]))


def root_scale(c: int, a: Root) -> Root:
    return (_scale(c, a[0]), _scale(c, a[1]))


# ---------------------------------------------------------------------------
# finite root systems

_EDGE_SETS = {
    "A": lambda r: [(i, i + 1) for i in range(1, r)],
    "B": lambda r: [(i, i + 1) for i in range(1, r)],
    "C": lambda r: [(i, i + 1) for i in range(1, r)],
    "D": lambda r: [(i, i + 1) for i in range(1, r - 1)] + [(r - 2, r)],
    "E": lambda r: [(1, 3)] + [(i, i + 1) for i in range(3, r)] + [(2, 4)],
    "F": lambda r: [(1, 2), (2, 3), (3, 4)],
    "G": lambda r: [(1, 2)],
}


def _norm_halves(letter: str, rank: int) -> list[int]:
    """d_i = (alpha_i, alpha_i)/2 per simple root, short roots normalized to 2."""
    if letter in ("A", "D", "E"):
        return [1] * rank
    if letter == "B":
        return [2] * (rank - 1) + [1]
    if letter == "C":
        return [1] * (rank - 1) + [2]
    if letter == "F":
        return [2, 2, 1, 1]
    if letter == "G":
        return [1, 3]
    raise UnsupportedType(letter)


class FiniteRootSystem:
    """An irreducible reduced finite root system in simple-root coordinates."""

    def __init__(self, letter: str, rank: int) -> None:
        self.letter = letter
        self.rank = rank
        d = _norm_halves(letter, rank)
        edges = set()
        for i, j in _EDGE_SETS[letter](rank):
            edges.add((i - 1, j - 1))
            edges.add((j - 1, i - 1))
        gram = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            gram[i][i] = 2 * d[i]
            for j in range(rank):
                if (i, j) in edges:
                    gram[i][j] = -max(d[i], d[j])
        self.gram = tuple(tuple(row) for row in gram)
        self.k = max(d)
        self.simple: tuple[Vec, ...] = tuple(
            tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)
        )
        self.roots = self._enumerate()
        self.positive = frozenset(r for r in self.roots if self._is_positive(r))
        norms = {r: self.norm(r) for r in self.roots}
        if self.k == 1:
            self.short = frozenset(self.roots)
            self.long = frozenset(self.roots)
        else:
            self.short = frozenset(r for r in self.roots if norms[r] == 2)
            self.long = frozenset(r for r in self.roots if norms[r] == 2 * self.k)
        self.theta_short = self._highest(self.short)
        self.theta_long = self._highest(self.long)

    def pairing(self, a: Vec, b: Vec) -> int:
        return sum(
            a[i] * b[j] * self.gram[i][j]
            for i in range(self.rank)
            for j in range(self.rank)
            if a[i] and b[j]
        )

    def norm(self, a: Vec) -> int:
        return self.pairing(a, a)

    def cartan_integer(self, beta: Vec, alpha: Vec) -> int:
        """<beta, alpha^vee> = 2(beta,alpha)/(alpha,alpha)."""
        num = 2 * self.pairing(beta, alpha)
        den = self.norm(alpha)
        q, r = divmod(num, den)
        if r:
            raise AssertionError("noncrystallographic pairing")
        return q

    def reflect(self, beta: Vec, alpha: Vec) -> Vec:
        return _sub(beta, _scale(self.cartan_integer(beta, alpha), alpha))

    def _enumerate(self) -> frozenset[Vec]:
        roots = set(self.simple) | {_neg(a) for a in self.simple}
        frontier = list(roots)
        while frontier:
            nxt = []
            for beta in frontier:
                for alpha in self.simple:
                    img = self.reflect(beta, alpha)
                    if img not in roots:
                        roots.add(img)
                        nxt.append(img)
            frontier = nxt
        return frozenset(roots)

    def _is_positive(self, r: Vec) -> bool:
        for c in r:
            if c > 0:
                return True
            if c < 0:
                return False
        return False

    def height(self, r: Vec) -> int:
        return sum(r)

    def _highest(self, subset: frozenset[Vec]) -> Vec:
        best = max(subset, key=lambda r: (self.height(r), r))
        # the highest root of each length class is unique
        ties = [r for r in subset if self.height(r) == self.height(best)]
        if len(ties) != 1:
            raise AssertionError("highest root not unique")
        return best

    def coroot_coords(self, alpha: Vec) -> Vec:
        """alpha^vee in the basis of simple coroots (integer coordinates)."""
        # alpha^vee = 2 t_alpha/(alpha,alpha); in coroot coordinates this is
        # (alpha_i-coefficients of alpha) * (alpha_i,alpha_i)/(alpha,alpha)
        n = self.norm(alpha)
        out = []
        for i, c in enumerate(alpha):
            num = c * self.gram[i][i]
            q, r = divmod(num, n)
            if r:
                raise AssertionError("coroot not integral")
            out.append(q)
        return tuple(out)

    def __repr__(self) -> str:
        return f"FiniteRootSystem({self.letter}{self.rank})"


_RANK_GATES = {
    "A": lambda r: r >= 1,
    "B": lambda r: r >= 2,
    "C": lambda r: r >= 3,
    "D": lambda r: r >= 4,
    "E": lambda r: r in (6, 7, 8),
    "F": lambda r: r == 4,
    "G": lambda r: r == 2,
}

_FINITE_CACHE: dict[tuple[str, int], FiniteRootSystem] = {}


def build_finite(letter: str, rank: int) -> FiniteRootSystem:
    """Finite system of the given type; duplicate presentations are rejected."""
    letter = letter.upper()
    gate = _RANK_GATES.get(letter)
    if gate is None or not gate(rank):
        hint = {
            ("C", 2): "use B2",
            ("D", 2): "use A1 x A1 (reducible, unsupported)",
            ("D", 3): "use A3",
        }.get((letter, rank))
        msg = f"no irreducible type {letter}{rank} in the catalogue"
        if hint:
            msg += f" ({hint})"
        raise UnsupportedType(msg)
    key = (letter, rank)
    if key not in _FINITE_CACHE:
        _FINITE_CACHE[key] = FiniteRootSystem(letter, rank)
    return _FINITE_CACHE[key]


def parse_type(name: str) -> tuple[str, int]:
    """Parse 'G2', 'B3', 'E7' into (letter, rank)."""
    name = name.strip()
    if not name or not name[0].isalpha():
        raise UnsupportedType(f"bad type name {name!r}")
    letter = name[0].upper()
    try:
        rank = int(name[1:])
    except ValueError as exc:
        raise UnsupportedType(f"bad type name {name!r}") from exc
    return letter, rank


# ---------------------------------------------------------------------------
# semilattices


def _f2_rank(vectors: list[Vec]) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    used: list[int] = []
    for col in range(ncols):
        pivot = None
        for r in range(len(rows)):
            if r not in used and rows[r][col] % 2:
                pivot = r
                break
        if pivot is None:
            continue
        used.append(pivot)
        rank += 1
        for r in range(len(rows)):
            if r != pivot and rows[r][col] % 2:
                rows[r] = [(a + b) % 2 for a, b in zip(rows[r], rows[pivot])]
    return rank


def _xor(a: Vec, b: Vec) -> Vec:
    return tuple((x + y) % 2 for x, y in zip(a, b))


@dataclass(frozen=True)
class Semilattice:
    """A union of cosets of 2*Lambda inside a (possibly axis-scaled) lattice.

    The point set is ``{diag(scale) @ (c + 2*v) : c in cosets, v integer}``.
    ``scale`` is the identity for the short-root support; the long-root
    support of a twisted system scales the twisted axes by k.
    """

    nu: int
    cosets: frozenset[Vec]
    scale: Vec

    @property
    def index(self) -> int:
        return len(self.cosets)

    def is_lattice(self) -> bool:
        for a in self.cosets:
            for b in self.cosets:
                if _xor(a, b) not in self.cosets:
                    return False
        return True

    def contains(self, v: Vec) -> bool:
        inner = []
        for x, d in zip(v, self.scale):
            q, r = divmod(x, d)
            if r:
                return False
            inner.append(q % 2)
        return tuple(inner) in self.cosets

    def points_in_window(self, radius: int) -> list[Vec]:
        out = []
        for v in itertools.product(range(-radius, radius + 1), repeat=self.nu):
            if self.contains(v):
                out.append(v)
        return out

    def coset_of(self, v: Vec) -> Vec | None:
        inner = []
        for x, d in zip(v, self.scale):
            q, r = divmod(x, d)
            if r:
                return None
            inner.append(q % 2)
        t = tuple(inner)
        return t if t in self.cosets else None

    def to_json(self) -> dict:
        full = len(self.cosets) == 2**self.nu
        cosets = [[0] * self.nu] if full else sorted(list(c) for c in self.cosets)
        out: dict = {"cosets": cosets}
        if any(d != 1 for d in self.scale):
            out["scale"] = (
                self.scale[0] if len(set(self.scale)) == 1 else list(self.scale)
            )
        return out


def build_semilattice(
    nu: int, reps: list[Vec] | list[list[int]], scale: int | Vec | None = None
) -> Semilattice:
    """Validate and normalize semilattice data.

    ``reps`` lists coset representatives mod 2.  As a reserved shorthand, a
    rep list containing only the zero vector denotes the full lattice (the
    bare coset 2*Lambda alone is never a valid semilattice, so the shorthand
    is unambiguous).  ``scale`` broadcasts an integer across all axes or
    gives one factor per axis.
    """
    if nu < 1:
        raise NotGenerating("ambient lattice must have positive rank")
    if scale is None:
        scale_vec: Vec = (1,) * nu
    elif isinstance(scale, int):
        scale_vec = (scale,) * nu
    else:
        scale_vec = tuple(int(d) for d in scale)
    if len(scale_vec) != nu or any(d < 1 for d in scale_vec):
        raise InteractionViolated(f"bad scale {scale!r} for nullity {nu}")
    norm = [tuple(int(c) % 2 for c in r) for r in reps]
    if any(len(r) != nu for r in norm):
        raise DuplicateCoset(f"coset rep of wrong length for nullity {nu}")
    if len(set(norm)) != len(norm):
        raise DuplicateCoset("coset representatives repeat mod 2")
    cosets = set(norm)
    if cosets == {_zero(nu)}:
        cosets = set(itertools.product((0, 1), repeat=nu))
    if _zero(nu) not in cosets:
        raise NotClosed("the zero coset is required")
    if _f2_rank(sorted(cosets)) != nu:
        raise NotGenerating("coset representatives do not span the lattice")
    return Semilattice(nu=nu, cosets=frozenset(cosets), scale=scale_vec)


def semilattice_from_json(nu: int, data: dict) -> Semilattice:
    reps = [tuple(int(c) for c in row) for row in data["cosets"]]
    return build_semilattice(nu, reps, data.get("scale"))


# ---------------------------------------------------------------------------
# extended affine root systems


@dataclass(frozen=True)
class Decomposition:
    """Adapted splitting of (S, L): twisted axes T carry S1, the rest S2."""

    twisted_axes: tuple[int, ...]
    s1_cosets: frozenset[Vec]  # over the twisted axes
    s2_cosets: frozenset[Vec]  # over the untwisted axes

    @property
    def ind_s1(self) -> int:
        return len(self.s1_cosets)

    @property
    def ind_s2(self) -> int:
        return len(self.s2_cosets)


@dataclass(frozen=True)
class FiniteChoice:
    """Simple-root preimages lifting the finite quotient into R.

    ``word`` is the simple-reflection word used to steer the pairing root
    onto the simple root at position ``index`` (None for the identity
    choice); ``preimages[j]`` is the chosen lift of the j-th simple root.
    """

    word: tuple[int, ...]
    index: int | None
    preimages: tuple[Root, ...]


@dataclass(frozen=True)
class ReflectReport:
    covered: bool
    missing: tuple[Root, ...]
    minimal: bool
    redundant: tuple[Root, ...]
    reached: int

    @property
    def ok(self) -> bool:
        return self.covered and self.minimal


class EARS:
    """A reduced extended affine root system with semilattice data."""

    def __init__(
        self,
        frs: FiniteRootSystem,
        nu: int,
        s_lat: Semilattice,
        l_lat: Semilattice,
        twist: int,
        decomposition: Decomposition | None,
    ) -> None:
        self.frs = frs
        self.nu = nu
        self.S = s_lat
        self.L = l_lat
        self.twist = twist
        self.decomposition = decomposition
        self.k = frs.k
        self.rank = frs.rank
        self._r0_cosets = frozenset(
            _xor(a, b) for a in s_lat.cosets for b in s_lat.cosets
        )

    # membership -----------------------------------------------------------

    def classify(self, root: Root) -> str | None:
        """'short', 'long', 'isotropic', or None when not a root.

        Simply-laced systems report every nonisotropic root as 'short'.
        """
        fin, iso = root
        if len(iso) != self.nu or len(fin) != self.rank:
            return None
        if fin == _zero(self.rank):
            reduced = tuple(c % 2 for c in iso)
            return "isotropic" if reduced in self._r0_cosets else None
        if fin in self.frs.short and self.S.contains(iso):
            return "short"
        if self.k > 1 and fin in self.frs.long and self.L.contains(iso):
            return "long"
        return None

    def contains(self, root: Root) -> bool:
        return self.classify(root) is not None

    def is_nonisotropic(self, root: Root) -> bool:
        return self.classify(root) in ("short", "long")

    def norm(self, root: Root) -> int:
        return self.frs.norm(root[0])

    def nonisotropic_in_window(self, radius: int) -> list[Root]:
        out = []
        for fin in sorted(self.frs.roots):
            lat = self.S if fin in self.frs.short else self.L
            for iso in lat.points_in_window(radius):
                out.append((fin, iso))
        return out

    def isotropic_in_window(self, radius: int, include_zero: bool = False) -> list[Root]:
        out = []
        zero_f = _zero(self.rank)
        for iso in itertools.product(range(-radius, radius + 1), repeat=self.nu):
            if not include_zero and iso == _zero(self.nu):
                continue
            if tuple(c % 2 for c in iso) in self._r0_cosets:
                out.append((zero_f, iso))
        return out

    # reflections ----------------------------------------------------------

    def cartan_integer(self, beta: Root, alpha: Root) -> int:
        return self.frs.cartan_integer(beta[0], alpha[0])

    def reflect(self, beta: Root, alpha: Root) -> Root:
        """w_alpha(beta); alpha must be nonisotropic."""
        if alpha[0] == _zero(self.rank):
            raise IsotropicMirror("cannot reflect in an isotropic root")
        c = self.cartan_integer(beta, alpha)
        return root_sub(beta, root_scale(c, alpha))

    def root_string(self, beta: Root, alpha: Root) -> tuple[int, int]:
        """(d, u): maximal run of nonisotropic roots beta + i*alpha, -d<=i<=u.

        Only nonisotropic members count; the run stops at the first missing
        or isotropic point in either direction.
        """
        if not self.is_nonisotropic(alpha):
            raise IsotropicMirror("string direction must be nonisotropic")
        d = 0
        cur = root_sub(beta, alpha)
        while self.is_nonisotropic(cur) and d < 8:
            d += 1
            cur = root_sub(cur, alpha)
        u = 0
        cur = root_add(beta, alpha)
        while self.is_nonisotropic(cur) and u < 8:
            u += 1
            cur = root_add(cur, alpha)
        if d >= 8 or u >= 8:
            raise AssertionError("root string failed to terminate")
        return (d, u)

    # reflectable bases ------------------------------------------------------

    def _iso_unit(self, i: int) -> Vec:
        return tuple(1 if j == i else 0 for j in range(self.nu))

    def _embed_twisted(self, coords: Vec) -> Vec:
        assert self.decomposition is not None
        out = [0] * self.nu
        for c, axis in zip(coords, self.decomposition.twisted_axes):
            out[axis] = c
        return tuple(out)

    def _embed_untwisted(self, coords: Vec) -> Vec:
        assert self.decomposition is not None
        rest = [i for i in range(self.nu) if i not in self.decomposition.twisted_axes]
        out = [0] * self.nu
        for c, axis in zip(coords, rest):
            out[axis] = c
        return tuple(out)

    def table1_base(self) -> tuple[Root, ...]:
        """The minimal reflectable base for this system's type row.

        Simple roots, then one corrected generator per isotropic direction:
        sigma_i - theta with theta the highest short or long root depending
        on whether the axis supports short or long translations, and for
        proper semilattices one generator per nonzero coset representative.
        """
        dec = self.decomposition
        if dec is None:
            raise MissingDecomposition(
                "no adapted (S1, S2) decomposition in the given coordinates"
            )
        frs = self.frs
        zero_f = _zero(self.rank)
        base: list[Root] = [(a, _zero(self.nu)) for a in frs.simple]
        neg_ts = _neg(frs.theta_short)
        neg_tl = _neg(frs.theta_long)
        t_axes = dec.twisted_axes
        u_axes = tuple(i for i in range(self.nu) if i not in t_axes)
        letter = frs.letter

        def short_gens_from_s1() -> list[Root]:
            gens = []
            for rep in sorted(dec.s1_cosets):
                if any(rep):
                    gens.append((neg_ts, self._embed_twisted(rep)))
            return gens

        def long_gens_from_s2() -> list[Root]:
            gens = []
            for rep in sorted(dec.s2_cosets):
                if any(rep):
                    iso = self._embed_untwisted(rep)
                    gens.append((neg_tl, iso))
            return gens

        if self.k == 1:
            for i in range(self.nu):
                base.append((neg_ts, self._iso_unit(i)))
        elif letter in ("F", "G"):
            for i in t_axes:
                base.append((neg_ts, self._iso_unit(i)))
            for i in u_axes:
                base.append((neg_tl, self._iso_unit(i)))
        elif letter == "B" and self.rank == 2:
            base.extend(short_gens_from_s1())
            base.extend(long_gens_from_s2())
        elif letter == "B":
            base.extend(short_gens_from_s1())
            for i in u_axes:
                base.append((neg_tl, self._iso_unit(i)))
        elif letter == "C":
            for i in t_axes:
                base.append((neg_ts, self._iso_unit(i)))
            base.extend(long_gens_from_s2())
        else:
            raise UnsupportedType(letter)
        # sanity: every generator must be a root
        for b in base:
            if not self.is_nonisotropic(b):
                raise AssertionError(f"table base element {b} is not a root")
        return tuple(base)

    def verify_reflectable(
        self, base: tuple[Root, ...] | list[Root], window: int, ambient: int
    ) -> ReflectReport:
        """Reflection-closure coverage and minimality on coordinate windows."""
        if ambient < window:
            raise ValueError("ambient box must contain the assertion box")
        for b in base:
            if not self.is_nonisotropic(b):
                raise ValueError(f"base element {b} is not a nonisotropic root")
        target = set(self.nonisotropic_in_window(window))

        def closure(gens: tuple[Root, ...]) -> set[Root]:
            reached = set(gens)
            frontier = list(gens)
            while frontier:
                nxt = []
                for gamma in frontier:
                    for beta in gens:
                        img = self.reflect(gamma, beta)
                        if img in reached:
                            continue
                        if any(abs(c) > ambient for c in img[1]):
                            continue
                        reached.add(img)
                        nxt.append(img)
                frontier = nxt
            return reached

        base = tuple(base)
        reached = closure(base)
        missing = tuple(sorted(target - reached))
        covered = not missing
        redundant: list[Root] = []
        if covered:
            for i in range(len(base)):
                trimmed = base[:i] + base[i + 1 :]
                if target <= closure(trimmed):
                    redundant.append(base[i])
        return ReflectReport(
            covered=covered,
            missing=missing,
            minimal=covered and not redundant,
            redundant=tuple(redundant),
            reached=len(reached),
        )

    # isotropic dimension tables --------------------------------------------

    def _require_isotropic(self, delta: Root) -> Vec:
        fin, iso = delta
        if fin != _zero(self.rank) or self.classify(delta) != "isotropic":
            raise ValueError(f"{delta} is not an isotropic root here")
        if iso == _zero(self.nu):
            raise ValueError("delta must be nonzero")
        return iso

    def isotropic_dim_bound(self, delta: Root) -> int:
        """Upper bound for the core's isotropic multiplicity at delta."""
        iso = self._require_isotropic(delta)
        if self.rank == 1:
            raise RankOne("dimension table needs rank at least 2")
        ell, nu_, t = self.rank, self.nu, self.twist
        letter = self.frs.letter
        if self.k == 1:
            return ell + nu_
        dec = self.decomposition
        if dec is None:
            raise MissingDecomposition("dimension table needs the (S1,S2) split")
        in_l = self.L.contains(iso)
        if letter == "G":
            return 2 + nu_ if in_l else 1 + t
        if letter == "F":
            return 4 + nu_ if in_l else 2 + t
        if letter == "C":
            return ell + t + 1 if in_l else ell + t + dec.ind_s2 - 2
        if letter == "B" and ell >= 3:
            return ell + dec.ind_s1 + (nu_ - t) if in_l else 2
        # B2: three-way split
        if in_l:
            return ell + dec.ind_s1 + (nu_ - t)
        lam1 = tuple(iso[i] for i in dec.twisted_axes)
        rest = [i for i in range(self.nu) if i not in dec.twisted_axes]
        lam2 = tuple(iso[i] % 2 for i in rest)
        if all(c % 2 == 0 for c in lam1):
            pair_sums = {
                _xor(a, b)
                for a in dec.s2_cosets
                for b in dec.s2_cosets
                if a != b
            }
            if lam2 in pair_sums:
                return 4
        return 2

    def affine_isotropic_dim(self, delta: Root) -> int:
        """Exact core multiplicity of a nonzero isotropic root when nu = 1."""
        if self.nu != 1:
            raise NotAffine("exact multiplicities need nullity 1")
        iso = self._require_isotropic(delta)
        if self.rank == 1:
            raise RankOne("dimension table needs rank at least 2")
        ell = self.rank
        letter = self.frs.letter
        if self.k == 1:
            return ell
        in_l = self.L.contains(iso)
        if letter == "B":
            return ell if in_l else 1
        if letter == "C":
            return ell if in_l else ell - 1
        if letter == "F":
            return 4 if in_l else 2
        if letter == "G":
            return 2 if in_l else 1
        raise UnsupportedType(letter)

    # adapted finite choices --------------------------------------------------

    def adapt_finite_to(self, sigma: Root) -> "FiniteChoice":
        """Choose simple-root preimages so that sigma pairs with the copy.

        The finite quotient system lifts into R through a choice of one
        preimage per simple root.  With the standard (zero translation)
        choice, some preimage r already has r + sigma in R exactly when
        sigma lies in S (or in L, through a long simple root).  Otherwise a
        nonisotropic root alpha with alpha + sigma in R exists, and
        reflecting its finite part onto a simple root by the shortest (then
        lexicographically smallest) word in the simple reflections hands
        that simple root the translation it needs.
        """
        if self.classify(sigma) != "isotropic":
            raise ValueError(f"{sigma} is not an isotropic root here")
        standard = tuple((a, _zero(self.nu)) for a in self.frs.simple)
        for r in standard:
            if self.contains(root_add(r, sigma)):
                return FiniteChoice(word=(), index=None, preimages=standard)
        alpha = None
        for cand in self.nonisotropic_in_window(1):
            if self.contains(root_add(cand, sigma)):
                alpha = cand
                break
        if alpha is None:
            raise AssertionError("no pairing root found in the unit window")
        word, target = self._word_to_simple(alpha[0])
        i0 = self.frs.simple.index(target)
        preimages = list(standard)
        preimages[i0] = (target, alpha[1])
        return FiniteChoice(word=word, index=i0, preimages=tuple(preimages))

    def _word_to_simple(self, fin: Vec) -> tuple[tuple[int, ...], Vec]:
        """Shortest lex-smallest simple-reflection word conjugating fin to a simple."""
        if fin in self.frs.simple:
            return ((), fin)
        frontier: list[tuple[tuple[int, ...], Vec]] = [((), fin)]
        seen = {fin}
        while frontier:
            nxt = []
            for word, vec in frontier:
                for j in range(self.rank):
                    img = self.frs.reflect(vec, self.frs.simple[j])
                    if img in seen:
                        continue
                    seen.add(img)
                    new_word = word + (j,)
                    if img in self.frs.simple:
                        return (new_word, img)
                    nxt.append((new_word, img))
            frontier = sorted(nxt)
        raise AssertionError("finite Weyl orbit search failed")

    # serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "type": f"{self.frs.letter}{self.rank}",
            "rank": self.rank,
            "nullity": self.nu,
            "S": self.S.to_json(),
            "L": self.L.to_json(),
        }

    def __repr__(self) -> str:
        return (
            f"EARS({self.frs.letter}{self.rank}, nu={self.nu}, "
            f"ind(S)={self.S.index}, ind(L)={self.L.index}, t={self.twist})"
        )


def _mask(v: Vec, keep: list[bool]) -> Vec:
    return tuple(c if k else 0 for c, k in zip(v, keep))


def build_ears(
    letter: str,
    rank: int,
    s_lat: Semilattice,
    l_lat: Semilattice | None = None,
) -> EARS:
    """Assemble and validate an extended affine root system.

    S carries the short-root translations (scale 1); L carries the long-root
    translations and may scale twisted axes by k.  Validation enforces the
    type-dependent lattice requirements and the interaction laws
    S + L <= S and k*S + L <= L.
    """
    letter = letter.upper()
    if (letter, rank) in (("A", 1),):
        raise UnsupportedType("rank-one extended systems are out of scope")
    frs = build_finite(letter, rank)
    nu = s_lat.nu
    if any(d != 1 for d in s_lat.scale):
        raise InteractionViolated("short-root support must be unscaled")
    k = frs.k
    if k == 1:
        if l_lat is None:
            l_lat = s_lat
        if l_lat.scale != s_lat.scale or l_lat.cosets != s_lat.cosets:
            raise InteractionViolated("simply-laced systems need L = S")
    else:
        if l_lat is None:
            raise InteractionViolated("long-root support is required here")
        if l_lat.nu != nu:
            raise InteractionViolated("S and L must share the ambient lattice")
        if any(d not in (1, k) for d in l_lat.scale):
            raise InteractionViolated(f"L may scale axes only by 1 or k={k}")

    # lattice requirements per type
    full = 2**nu
    simply_laced = k == 1
    if simply_laced and rank >= 2 and s_lat.index != full:
        raise LatticeRequired("simply-laced types need S a full lattice")
    if letter == "B" and rank >= 3 and l_lat.index != full:
        raise LatticeRequired("B types of rank >= 3 need L a lattice")
    if letter == "C" and s_lat.index != full:
        raise LatticeRequired("C types need S a lattice")
    if letter in ("F", "G"):
        if s_lat.index != full or l_lat.index != full:
            raise LatticeRequired(f"{letter} types need both supports lattices")

    # interaction laws on coset data
    if not simply_laced:
        keep_if_odd = k % 2 == 1
        l_mod2 = {
            _mask(c, [d == 1 or keep_if_odd for d in l_lat.scale]) for c in l_lat.cosets
        }
        for a in s_lat.cosets:
            for b in l_mod2:
                if _xor(a, b) not in s_lat.cosets:
                    raise InteractionViolated("S + L escapes S")
        s_masked = {
            _mask(c, [d == k or keep_if_odd for d in l_lat.scale]) for c in s_lat.cosets
        }
        for a in s_masked:
            for b in l_lat.cosets:
                if _xor(a, b) not in l_lat.cosets:
                    raise InteractionViolated(f"{k}*S + L escapes L")

    twisted = tuple(i for i, d in enumerate(l_lat.scale) if d == k and k > 1)
    twist = len(twisted)

    decomposition = _find_decomposition(s_lat, l_lat, twisted)
    return EARS(frs, nu, s_lat, l_lat, twist, decomposition)


def _find_decomposition(
    s_lat: Semilattice, l_lat: Semilattice, twisted: tuple[int, ...]
) -> Decomposition | None:
    nu = s_lat.nu
    rest = [i for i in range(nu) if i not in twisted]

    def proj(v: Vec, axes: list[int] | tuple[int, ...]) -> Vec:
        return tuple(v[i] for i in axes)

    s1 = {proj(c, twisted) for c in s_lat.cosets}
    if len(s_lat.cosets) != len(s1) * 2 ** len(rest):
        return None
    s2 = {proj(c, rest) for c in l_lat.cosets}
    if len(l_lat.cosets) != len(s2) * 2 ** len(twisted):
        return None
    return Decomposition(
        twisted_axes=twisted,
        s1_cosets=frozenset(s1),
        s2_cosets=frozenset(s2),
    )


def ears_from_json(data: dict) -> EARS:
    letter, rank = parse_type(data["type"])
    if "rank" in data and int(data["rank"]) != rank:
        raise UnsupportedType("rank field disagrees with type name")
    nu = int(data["nullity"])
    s_lat = semilattice_from_json(nu, data["S"])
    l_lat = semilattice_from_json(nu, data["L"]) if "L" in data else None
    return build_ears(letter, rank, s_lat, l_lat)
