"""Noncrossing combinatorics, states, and products of states.

A *state* here is a unital linear functional given by its moments on words
over an opaque symbol alphabet.  Families of states are combined into a
state on words of ``(factor, symbol)`` letters by one of three products:

* ``tensor``  - factors commute; a moment is the product of the marginal
  moments of the per-factor subwords (order kept within each factor);
* ``boolean`` - a moment factorises across maximal same-factor runs;
* ``free``    - defined by the centering recursion: alternating products of
  mean-zero blocks have zero expectation.

The free product has two independent implementations: the centering
recursion itself, and a first-block expansion through noncrossing cumulants
which is fast on long words.  Both are exposed (``method=``) and must agree.

Moment-cumulant transforms sum over noncrossing partitions; cumulants of
products of consecutive letters sum over partitions whose join with the
grouping is full, which is equivalent to the first-block expansion used in
:func:`cumulants_of_products`'s brute-force companion in the test suite.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb

__all__ = [
    "NC_MAX",
    "NC_MATCHING_MAX",
    "enumerate_nc",
    "enumerate_nc_matchings",
    "is_noncrossing",
    "catalan",
    "CumulantTable",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "cumulants_of_products",
    "State",
    "DictState",
    "haar_unitary_state",
    "semicircle_state",
    "product_state",
    "ProductState",
    "ConjugationCumulantReport",
    "joint_cumulants_check_conjugation",
]

NC_MAX = 12
NC_MATCHING_MAX = 16


def catalan(n):
    return comb(2 * n, n) // (n + 1)


def enumerate_nc(k):
    """All noncrossing partitions of ``{0..k-1}`` (blocks sorted by minimum)."""
    if k < 0 or k > NC_MAX:
        raise ValueError(f"noncrossing enumeration supports 0 <= k <= {NC_MAX}, got {k}")

    def rec(elems):
        if not elems:
            yield ()
            return
        first, rest = elems[0], elems[1:]
        for r in range(len(rest) + 1):
            for others in combinations(rest, r):
                block = (first,) + others
                # remaining elements fall into the gaps between consecutive
                # block members; each gap is partitioned independently
                bounds = list(block) + [None]
                gaps = []
                for a, b in zip(bounds, bounds[1:]):
                    gaps.append(
                        tuple(x for x in rest if x not in others and x > a and (b is None or x < b))
                    )

                def expand(i, acc):
                    if i == len(gaps):
                        yield acc
                        return
                    for sub in rec(gaps[i]):
                        yield from expand(i + 1, acc + list(sub))

                for tail in expand(0, []):
                    yield (block,) + tuple(sorted(tail, key=lambda b2: b2[0]))

    return list(rec(tuple(range(k))))


def enumerate_nc_matchings(k):
    """All noncrossing pair partitions of ``{0..k-1}`` (empty unless k is even)."""
    if k < 0 or k > NC_MATCHING_MAX:
        raise ValueError(
            f"noncrossing matching enumeration supports 0 <= k <= {NC_MATCHING_MAX}, got {k}"
        )

    def rec(elems):
        if not elems:
            yield ()
            return
        first = elems[0]
        for idx in range(1, len(elems), 2):
            mate = elems[idx]
            inside = elems[1:idx]
            outside = elems[idx + 1 :]
            for left in rec(inside):
                for right in rec(outside):
                    yield ((first, mate),) + left + right

    if k % 2:
        return []
    return [tuple(sorted(m, key=lambda b: b[0])) for m in rec(tuple(range(k)))]


def is_noncrossing(partition):
    """True iff no two blocks interleave as a < b < c < d with a,c and b,d paired."""
    blocks = [set(b) for b in partition]
    for b1 in range(len(blocks)):
        for b2 in range(b1 + 1, len(blocks)):
            for a in blocks[b1]:
                for c in blocks[b1]:
                    for b in blocks[b2]:
                        for d in blocks[b2]:
                            if a < b < c < d:
                                return False
    return True


class CumulantTable:
    """A word-indexed table of numbers (joint cumulants or moments)."""

    def __init__(self, entries=None):
        self.entries = dict(entries) if entries else {}

    def __getitem__(self, word):
        return self.entries[tuple(word)]

    def __setitem__(self, word, value):
        self.entries[tuple(word)] = value

    def get(self, word, default=0):
        return self.entries.get(tuple(word), default)

    def __contains__(self, word):
        return tuple(word) in self.entries

    def __eq__(self, other):
        return isinstance(other, CumulantTable) and self.entries == other.entries

    def dump(self):
        """One sorted line per word: ``word : value``."""
        lines = []
        for w in sorted(self.entries, key=lambda w: (len(w), tuple(map(str, w)))):
            body = " ".join(str(x) for x in w) if w else "1"
            lines.append(f"{body} : {self.entries[w]}")
        return "\n".join(lines)

    def __repr__(self):
        return f"CumulantTable({len(self.entries)} entries)"


def _as_fn(table):
    if callable(table):
        return table
    return lambda w: table[w]


def moments_from_cumulants(word, cumulants):
    """Sum over noncrossing partitions of products of cumulants of subwords."""
    word = tuple(word)
    kap = _as_fn(cumulants)
    total = 0
    for pi in enumerate_nc(len(word)):
        prod = 1
        for block in pi:
            prod *= kap(tuple(word[i] for i in block))
            if prod == 0:
                break
        total += prod
    return total


def cumulants_from_moments(word, moments, _memo=None):
    """Invert the moment formula by first-block expansion.

    ``kappa(w) = m(w) - sum over proper subsets V containing position 0 of
    kappa(w|V) times the moments of the gap subwords``; equivalent to
    subtracting every noncrossing partition except the one-block one.
    """
    word = tuple(word)
    mom = _as_fn(moments)
    memo = {} if _memo is None else _memo

    def kappa(w):
        if w in memo:
            return memo[w]
        m = len(w)
        if m == 0:
            raise ValueError("cumulant of the empty word is undefined")
        if m == 1:
            memo[w] = mom(w)
            return memo[w]
        val = mom(w)
        rest = list(range(1, m))
        for r in range(m - 1):
            for others in combinations(rest, r):
                V = (0,) + others
                sub = kappa(tuple(w[i] for i in V))
                if sub == 0:
                    continue
                prod = sub
                bounds = list(V) + [m]
                for a, b in zip(bounds, bounds[1:]):
                    gap = tuple(w[i] for i in range(a + 1, b))
                    if gap:
                        prod *= mom(gap)
                val -= prod
        memo[w] = val
        return val

    return kappa(word)


def _join_is_full(pi, grouping, k):
    """Union-find join of a partition with the grouping's interval partition."""
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for block in pi:
        for a, b in zip(block, block[1:]):
            union(a, b)
    for block in grouping:
        for a, b in zip(block, block[1:]):
            union(a, b)
    return len({find(x) for x in range(k)}) == 1


def cumulants_of_products(word, group_sizes, cumulants):
    """Joint cumulant of consecutive products of letters.

    ``group_sizes`` partitions the word into consecutive products; the
    result sums, over noncrossing partitions of the letter positions whose
    join with that interval grouping connects everything, the products of
    letter cumulants.
    """
    word = tuple(word)
    k = len(word)
    if sum(group_sizes) != k:
        raise ValueError("group sizes must sum to the word length")
    if any(s < 1 for s in group_sizes):
        raise ValueError("group sizes must be positive")
    kap = _as_fn(cumulants)
    grouping = []
    start = 0
    for s in group_sizes:
        grouping.append(tuple(range(start, start + s)))
        start += s
    total = 0
    for pi in enumerate_nc(k):
        if not _join_is_full(pi, grouping, k):
            continue
        prod = 1
        for block in pi:
            prod *= kap(tuple(word[i] for i in block))
            if prod == 0:
                break
        total += prod
    return total


class State:
    """A unital linear functional given by moments of words over symbols."""

    def __init__(self, moment_fn, name="state", tracial=True):
        self._moment_fn = moment_fn
        self.name = name
        self.tracial = tracial
        self._moments = {}
        self._cumulants = {}

    def moment(self, word):
        word = tuple(word)
        if not word:
            return 1
        if word not in self._moments:
            self._moments[word] = self._moment_fn(word)
        return self._moments[word]

    def joint_cumulant(self, words):
        """Free cumulant of a tuple of this state's own words (memoised)."""
        words = tuple(tuple(w) for w in words)
        memo = self._cumulants
        if words in memo:
            return memo[words]
        m = len(words)
        if m == 1:
            val = self.moment(words[0])
        else:
            val = self.moment(sum(words, ()))
            rest = list(range(1, m))
            for r in range(m - 1):
                for others in combinations(rest, r):
                    V = (0,) + others
                    sub = self.joint_cumulant(tuple(words[i] for i in V))
                    if sub == 0:
                        continue
                    prod = sub
                    bounds = list(V) + [m]
                    for a, b in zip(bounds, bounds[1:]):
                        gap = sum(words[a + 1 : b], ())
                        if gap:
                            prod *= self.moment(gap)
                    val -= prod
        memo[words] = val
        return val

    def __repr__(self):
        return f"State({self.name})"


class DictState(State):
    """A state with explicitly tabulated moments (missing words are errors)."""

    def __init__(self, table, name="dict", tracial=False):
        super().__init__(lambda w: table[w], name=name, tracial=tracial)


def haar_unitary_state():
    """Moments of a Haar unitary: words over exponents +-1, mean net power."""

    def mom(word):
        return 1 if sum(word) == 0 else 0

    return State(mom, name="haar_unitary", tracial=True)


def semicircle_state():
    """Standard semicircular element: symbol ``"s"``, Catalan even moments."""

    def mom(word):
        if any(s != "s" for s in word):
            raise ValueError("semicircle words use the single symbol 's'")
        n = len(word)
        return catalan(n // 2) if n % 2 == 0 else 0

    return State(mom, name="semicircle", tracial=True)


def _runs(word):
    """Maximal same-factor runs of a ``(factor, symbol)`` word."""
    runs = []
    for f, s in word:
        if runs and runs[-1][0] == f:
            runs[-1] = (f, runs[-1][1] + (s,))
        else:
            runs.append((f, (s,)))
    return runs


def _cyclic_canonical(blocks):
    blocks = list(blocks)
    while len(blocks) >= 2 and blocks[0][0] == blocks[-1][0]:
        f, syms = blocks.pop()
        blocks[0] = (f, syms + blocks[0][1])
    if len(blocks) <= 1:
        return tuple(blocks)
    rots = [tuple(blocks[i:] + blocks[:i]) for i in range(len(blocks))]
    return min(rots)


class ProductState(State):
    """Tensor, boolean, or free product of marginal states.

    Words use ``(factor_index, symbol)`` letters.  For the free product,
    ``method`` picks the evaluation route: ``"centering"`` is the defining
    recursion, ``"cumulant"`` the first-block noncrossing expansion,
    ``"auto"`` switches to the latter on long words.  When every marginal is
    tracial, words are canonicalised up to cyclic rotation before memo
    lookup.
    """

    CENTERING_MAX_BLOCKS = 8

    def __init__(self, factors, kind, method="auto"):
        if kind not in ("free", "boolean", "tensor"):
            raise ValueError(f"unknown product kind {kind!r}")
        if method not in ("auto", "centering", "cumulant"):
            raise ValueError(f"unknown free-product method {method!r}")
        self.factors = list(factors)
        self.kind = kind
        self.method = method
        self.tracial_all = all(s.tracial for s in self.factors)
        self._free_memo = {}
        super().__init__(
            self._moment_of_word,
            name=f"{kind}({', '.join(s.name for s in self.factors)})",
            tracial=(kind != "boolean") and self.tracial_all,
        )

    def _marginal(self, f):
        if not 0 <= f < len(self.factors):
            raise ValueError(f"factor index {f} out of range")
        return self.factors[f]

    def _moment_of_word(self, word):
        blocks = _runs(word)
        for f, _ in blocks:
            self._marginal(f)
        if self.kind == "tensor":
            out = 1
            per = {}
            for f, syms in word:
                per.setdefault(f, []).append(syms)
            for f, syms in per.items():
                out *= self.factors[f].moment(tuple(syms))
            return out
        if self.kind == "boolean":
            out = 1
            for f, syms in blocks:
                out *= self.factors[f].moment(syms)
            return out
        return self._free_moment(tuple(blocks))

    # -- free product ------------------------------------------------------

    def _free_moment(self, blocks):
        if not blocks:
            return 1
        key = _cyclic_canonical(blocks) if self.tracial_all else tuple(blocks)
        if key in self._free_memo:
            return self._free_memo[key]
        blocks = key
        if len(blocks) == 1:
            f, syms = blocks[0]
            val = self.factors[f].moment(syms)
        elif self.method == "centering" or (
            self.method == "auto" and len(blocks) <= self.CENTERING_MAX_BLOCKS
        ):
            val = self._free_centering(blocks)
        else:
            val = self._free_cumulant_dp(blocks)
        self._free_memo[key] = val
        return val

    def _free_centering(self, blocks):
        """Defining recursion: alternating centred blocks have zero mean."""
        p = len(blocks)
        means = [self.factors[f].moment(syms) for f, syms in blocks]
        total = 0
        for mask in range(1, 1 << p):
            coeff = 1
            kept = []
            for i in range(p):
                if mask >> i & 1:
                    if means[i] == 0:
                        coeff = 0
                        break
                    coeff *= -means[i]
                else:
                    kept.append(blocks[i])
            if coeff == 0:
                continue
            merged = []
            for f, syms in kept:
                if merged and merged[-1][0] == f:
                    merged[-1] = (f, merged[-1][1] + syms)
                else:
                    merged.append((f, syms))
            total += -coeff * self._free_moment(tuple(merged))
        return total

    def _free_cumulant_dp(self, blocks):
        """First-block expansion over same-factor cumulants, gap by gap."""
        p = len(blocks)
        memo = {}

        def seg(i, j):
            if i == j:
                return 1
            if j - i == 1:
                f, syms = blocks[i]
                return self.factors[f].moment(syms)
            if (i, j) in memo:
                return memo[(i, j)]
            f0 = blocks[i][0]
            others = [q for q in range(i + 1, j) if blocks[q][0] == f0]
            total = 0
            for r in range(len(others) + 1):
                for chosen in combinations(others, r):
                    V = (i,) + chosen
                    kap = self.factors[f0].joint_cumulant(
                        tuple(blocks[q][1] for q in V)
                    )
                    if kap == 0:
                        continue
                    prod = kap
                    bounds = list(V) + [j]
                    for a, b in zip(bounds, bounds[1:]):
                        if prod == 0:
                            break
                        if b > a + 1:
                            prod *= seg(a + 1, b)
                    total += prod
            memo[(i, j)] = total
            return total

        return seg(0, p)


def product_state(factors, kind, method="auto"):
    """Combine marginal states into one by the named product."""
    return ProductState(factors, kind, method)


class ConjugationCumulantReport:
    """Cumulants of a variable before and after free unitary conjugation."""

    def __init__(self, order, original, conjugated):
        self.order = order
        self.original = original
        self.conjugated = conjugated

    @property
    def equal(self):
        return self.original.entries == self.conjugated.entries

    def dump(self):
        lines = [f"order {self.order}: {'EQUAL' if self.equal else 'DIFFERENT'}"]
        for m in range(1, self.order + 1):
            w = ("w",) * m
            lines.append(
                f"kappa_{m}: original {self.original[w]} conjugated {self.conjugated[w]}"
            )
        return "\n".join(lines)


def joint_cumulants_check_conjugation(order=6):
    """Cumulants of ``v w v*`` versus ``w`` for ``v`` Haar, ``w`` semicircular, free.

    Everything is exact rational arithmetic: moments of the conjugated
    variable come from the free product of the Haar and semicircle states,
    and both cumulant tables are produced by the same transform.
    """
    if order < 1 or order > NC_MAX:
        raise ValueError(f"order must be between 1 and {NC_MAX}")
    v = haar_unitary_state()
    w = semicircle_state()
    ps = product_state([v, w], "free")
    one = Fraction(1)

    def conj_moment(m):
        word = []
        for _ in range(m):
            word += [(0, 1), (1, "s"), (0, -1)]
        return one * ps.moment(tuple(word))

    def orig_moment(m):
        return one * w.moment(("s",) * m)

    memo_c, memo_o = {}, {}
    conj = CumulantTable()
    orig = CumulantTable()
    for m in range(1, order + 1):
        word = ("w",) * m
        conj[word] = cumulants_from_moments(
            word, lambda u: conj_moment(len(u)), _memo=memo_c
        )
        orig[word] = cumulants_from_moments(
            word, lambda u: orig_moment(len(u)), _memo=memo_o
        )
    return ConjugationCumulantReport(order, orig, conj)
