"""Lattice loops on Z^2, their drawings, and lasso decompositions.

A loop is a closed walk on the integer lattice based at the origin, written
as a word in the four unit steps ``N``, ``E``, ``S``, ``W``.  Words are
identified up to backtrack erasure (``N`` followed by ``S`` cancels, and so
on), which makes loops a group under concatenation.

The drawing of a finite family of loops is a planar graph whose bounded
faces are unions of unit cells.  Every bounded face yields a *lasso*: run
out along a spanning tree to a vertex on the face boundary, go once
anticlockwise around the face, and come back the same way.  The lassos
freely generate the group of loops drawn on the graph, and :func:`decompose`
rewrites any such loop as a reduced word in them.

Braids act on tuples of loops (or of abstract lasso words) by the usual
conjugation substitution; see :func:`braid_act`.
"""

from __future__ import annotations

from collections import deque

__all__ = [
    "STEPS",
    "DELTA",
    "OPPOSITE",
    "reduce_word",
    "invert_word",
    "loop_group_op",
    "Loop",
    "Face",
    "PlanarGraph",
    "build_graph",
    "SpanningTree",
    "Lasso",
    "LassoBasis",
    "LassoWord",
    "lasso_basis",
    "decompose",
    "winding",
    "winding_profile",
    "braid_act",
    "braid_permutation",
    "random_loop",
]

STEPS = "NESW"
DELTA = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}

# Outgoing directions around a vertex in anticlockwise rotation order.
_ROT = "ENWS"
_ROTI = {s: i for i, s in enumerate(_ROT)}


def _check_steps(word):
    bad = sorted(set(word) - set(STEPS))
    if bad:
        raise ValueError(f"invalid step(s) {bad}: steps must be one of N, E, S, W")


def reduce_word(word):
    """Erase backtracks (adjacent mutually inverse steps) until none remain."""
    out = []
    for s in word:
        if out and out[-1] == OPPOSITE[s]:
            out.pop()
        else:
            out.append(s)
    return "".join(out)


def invert_word(word):
    """The reverse walk: word read backwards with every step flipped."""
    return "".join(OPPOSITE[s] for s in reversed(word))


def step_end(v, s):
    dx, dy = DELTA[s]
    return (v[0] + dx, v[1] + dy)


def walk_vertices(word, start=(0, 0)):
    """All vertices visited by a step word, in order (start included)."""
    out = [start]
    for s in word:
        out.append(step_end(out[-1], s))
    return out


class Loop:
    """A closed lattice walk based at the origin, stored as a reduced word.

    Two loops are equal iff their reduced words agree.  Multiplication is
    concatenation followed by backtrack erasure, which makes loops drawn on
    any fixed graph a free group.
    """

    __slots__ = ("word",)

    def __init__(self, word=""):
        _check_steps(word)
        word = reduce_word(word)
        x = word.count("E") - word.count("W")
        y = word.count("N") - word.count("S")
        if (x, y) != (0, 0):
            raise ValueError(f"word {word!r} is not closed: it ends at ({x}, {y})")
        self.word = word

    def __mul__(self, other):
        return Loop(self.word + other.word)

    def inverse(self):
        return Loop(invert_word(self.word))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = Loop("")
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Loop) and self.word == other.word

    def __hash__(self):
        return hash(("Loop", self.word))

    def __len__(self):
        return len(self.word)

    def __bool__(self):
        return bool(self.word)

    def __repr__(self):
        return f"Loop({self.word!r})"

    def is_trivial(self):
        return not self.word

    def vertices(self):
        return walk_vertices(self.word)


def loop_group_op(a, b):
    """Group operation on loops: concatenate, then erase backtracks."""
    return a * b


def _canon_edge(v, s):
    """Canonical undirected edge for the step ``s`` out of ``v``.

    Returns ``(edge, sign)`` where ``edge`` is ``(vertex, 'N' or 'E')`` and
    ``sign`` is +1 if the step traverses the edge in canonical direction.
    """
    if s in ("N", "E"):
        return (v, s), 1
    return (step_end(v, s), OPPOSITE[s]), -1


def _left_cell(v, s):
    """The unit cell on the left of the directed edge ``(v, s)`` (lower-left corner)."""
    x, y = v
    if s == "N":
        return (x - 1, y)
    if s == "E":
        return (x, y)
    if s == "S":
        return (x, y - 1)
    return (x - 1, y - 1)


def _walk_area2(walk):
    """Twice the signed shoelace area of a closed half-edge walk."""
    a2 = 0
    for (x, y), s in walk:
        dx, dy = DELTA[s]
        a2 += x * dy - y * dx
    return a2


class Face:
    """A bounded face of a drawing: a union of unit cells with area > 0.

    ``walk`` is the boundary traversed with the face on the left (hence
    anticlockwise), as a tuple of half-edges ``(vertex, step)``; ``word`` is
    the same walk as a step word; ``cell`` is the lexicographically smallest
    unit cell inside the face (used as a marked interior point).
    """

    __slots__ = ("id", "walk", "word", "area", "cell")

    def __init__(self, fid, walk):
        self.id = fid
        self.walk = tuple(walk)
        self.word = "".join(s for _, s in walk)
        a2 = _walk_area2(walk)
        if a2 <= 0 or a2 % 2:
            raise ValueError(f"face walk has invalid signed area {a2}/2")
        self.area = a2 // 2
        self.cell = min(_left_cell(v, s) for v, s in walk)

    def boundary_vertices(self):
        return [v for v, _ in self.walk]

    def __repr__(self):
        return f"Face(id={self.id}, area={self.area}, word={self.word!r})"


class PlanarGraph:
    """The drawing of a family of loops: vertices, edges, and traced faces.

    Faces are traced through the rotation system at each vertex; bounded
    faces come out anticlockwise (face on the left) and are numbered in
    lexicographic order of their marked interior cell.  The single unbounded
    face walk is kept separately as ``outer_walk``.
    """

    def __init__(self, loops):
        if isinstance(loops, Loop):
            loops = [loops]
        self.loops = tuple(loops)
        self.adj = {(0, 0): set()}
        self.edges = set()
        for lp in self.loops:
            pos = (0, 0)
            for s in lp.word:
                nxt = step_end(pos, s)
                self.adj.setdefault(pos, set()).add(s)
                self.adj.setdefault(nxt, set()).add(OPPOSITE[s])
                self.edges.add(_canon_edge(pos, s)[0])
                pos = nxt
        self._trace_faces()

    # -- face tracing ------------------------------------------------------

    def _next_half_edge(self, he):
        v, s = he
        w = step_end(v, s)
        back = OPPOSITE[s]
        i = _ROTI[back]
        for k in range(1, 4):
            cand = _ROT[(i - k) % 4]
            if cand in self.adj[w]:
                return (w, cand)
        return (w, back)  # dead end: turn around

    def _trace_faces(self):
        half_edges = sorted(
            ((v, s) for v, steps in self.adj.items() for s in steps),
            key=lambda he: (he[0], _ROTI[he[1]]),
        )
        seen = set()
        bounded = []
        outer = None
        for start in half_edges:
            if start in seen:
                continue
            orbit = []
            cur = start
            while True:
                orbit.append(cur)
                seen.add(cur)
                cur = self._next_half_edge(cur)
                if cur == start:
                    break
            j = min(range(len(orbit)), key=lambda i: (orbit[i][0], _ROTI[orbit[i][1]]))
            orbit = orbit[j:] + orbit[:j]
            a2 = _walk_area2(orbit)
            if a2 > 0:
                bounded.append(orbit)
            else:
                if outer is not None:
                    raise RuntimeError("drawing is not connected through the origin")
                outer = orbit
        bounded.sort(key=lambda orbit: min(_left_cell(v, s) for v, s in orbit))
        self.faces = [Face(i, orbit) for i, orbit in enumerate(bounded)]
        self.outer_walk = tuple(outer) if outer is not None else ()
        self.total_area = sum(f.area for f in self.faces)
        # Which face is on the left of each half-edge (None for the unbounded face).
        self._face_of = {}
        for f in self.faces:
            for he in f.walk:
                self._face_of[he] = f.id
        for he in self.outer_walk:
            self._face_of[he] = None

    # -- queries -----------------------------------------------------------

    def has_edge(self, v, s):
        return _canon_edge(v, s)[0] in self.edges

    def face_areas(self):
        return [f.area for f in self.faces]

    def side_faces(self, edge):
        """The face ids left and right of a canonical edge (None = unbounded)."""
        v, s = edge
        return (self._face_of[(v, s)], self._face_of[(step_end(v, s), OPPOSITE[s])])

    def euler_characteristic(self):
        return len(self.adj) - len(self.edges) + len(self.faces) + 1

    def dump(self):
        """One line per bounded face: ``face <id> area <a> boundary <word>``."""
        return "\n".join(
            f"face {f.id} area {f.area} boundary {f.word}" for f in self.faces
        )

    def __repr__(self):
        return (
            f"PlanarGraph({len(self.adj)} vertices, {len(self.edges)} edges, "
            f"{len(self.faces)} bounded faces)"
        )


def build_graph(loops):
    """Draw a loop or a family of loops; returns the resulting :class:`PlanarGraph`."""
    return PlanarGraph(loops)


class SpanningTree:
    """Breadth-first spanning tree of a drawing, rooted at the origin.

    ``priority`` orders the neighbours tried at each vertex and is the only
    tie-break: different priorities give different trees (hence different
    lasso bases), which downstream results must not depend on.
    """

    def __init__(self, graph, priority="NESW"):
        if sorted(priority) != sorted(STEPS):
            raise ValueError(f"priority {priority!r} must be a permutation of NESW")
        self.graph = graph
        self.priority = priority
        self.parent = {}
        self.step_from_parent = {}
        self.depth = {(0, 0): 0}
        self.order = [(0, 0)]
        q = deque([(0, 0)])
        while q:
            v = q.popleft()
            for s in priority:
                if s not in graph.adj.get(v, ()):
                    continue
                w = step_end(v, s)
                if w in self.depth:
                    continue
                self.depth[w] = self.depth[v] + 1
                self.parent[w] = v
                self.step_from_parent[w] = s
                self.order.append(w)
                q.append(w)
        if len(self.depth) != len(graph.adj):
            raise RuntimeError("drawing is not connected through the origin")
        self.tree_edges = {
            _canon_edge(self.parent[w], self.step_from_parent[w])[0]
            for w in self.parent
        }
        self._words = {(0, 0): ""}

    def word_to(self, v):
        """Step word of the tree path origin -> v (memoised)."""
        if v in self._words:
            return self._words[v]
        chain = []
        u = v
        while u not in self._words:
            chain.append(u)
            u = self.parent[u]
        w = self._words[u]
        for u2 in reversed(chain):
            w = w + self.step_from_parent[u2]
            self._words[u2] = w
        return w

    def nontree_edges(self):
        return sorted(self.graph.edges - self.tree_edges)


class Lasso:
    """``tail . bulk . tail^-1``: out along the tree, once round a face, back.

    The bulk runs anticlockwise, so the lasso has winding +1 around its own
    face and 0 around every other bounded face.
    """

    __slots__ = ("face", "tail", "bulk")

    def __init__(self, face, tail, bulk):
        self.face = face
        self.tail = tail
        self.bulk = bulk

    @property
    def word(self):
        return reduce_word(self.tail + self.bulk + invert_word(self.tail))

    def loop(self):
        return Loop(self.tail + self.bulk + invert_word(self.tail))

    def __repr__(self):
        return f"Lasso(face={self.face.id}, tail={self.tail!r}, bulk={self.bulk!r})"


def _make_lasso(face, tree):
    """Pick an anchor on the face boundary and build the lasso.

    Anchors are tried by increasing tree depth (then position); among the
    rotations of the boundary walk starting at an anchor we prefer one whose
    seams with the tail do not cancel, falling back to the first candidate.
    """
    occurrences = {}
    for j, (v, _) in enumerate(face.walk):
        occurrences.setdefault(v, []).append(j)
    fallback = None
    for v in sorted(occurrences, key=lambda u: (tree.depth[u], u)):
        tail = tree.word_to(v)
        for j in occurrences[v]:
            rotated = face.walk[j:] + face.walk[:j]
            bulk = "".join(s for _, s in rotated)
            if fallback is None:
                fallback = Lasso(face, tail, bulk)
            if tail == "" or (
                bulk[0] != OPPOSITE[tail[-1]] and bulk[-1] != tail[-1]
            ):
                return Lasso(face, tail, bulk)
    return fallback


class LassoWord:
    """A freely reduced word in the lasso generators (one per bounded face).

    Letters are ``(face_id, sign)`` pairs; multiplication concatenates and
    erases adjacent inverse pairs.
    """

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        out = []
        for g, s in letters:
            if s not in (1, -1):
                raise ValueError(f"letter sign must be +-1, got {s}")
            if out and out[-1][0] == g and out[-1][1] == -s:
                out.pop()
            else:
                out.append((g, s))
        self.letters = tuple(out)

    def __mul__(self, other):
        return LassoWord(self.letters + other.letters)

    def inverse(self):
        return LassoWord([(g, -s) for g, s in reversed(self.letters)])

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = LassoWord()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, LassoWord) and self.letters == other.letters

    def __hash__(self):
        return hash(("LassoWord", self.letters))

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def exponent_sum(self, fid):
        return sum(s for g, s in self.letters if g == fid)

    def substitute(self, mapping, unit=None):
        """Replace each generator via ``mapping[face_id]`` and multiply out.

        Values need ``*`` and ``.inverse()``; ``unit`` is the empty product
        (defaults to the trivial :class:`Loop`).
        """
        out = Loop("") if unit is None else unit
        for g, s in self.letters:
            x = mapping[g]
            out = out * (x if s == 1 else x.inverse())
        return out

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(f"F{g}" if s == 1 else f"F{g}^-1" for g, s in self.letters)

    def __repr__(self):
        return f"LassoWord({self.letters!r})"


class LassoBasis:
    """The lassos of a drawing for one spanning tree, plus decomposition data."""

    def __init__(self, graph, tree, lassos):
        self.graph = graph
        self.tree = tree
        self.lassos = lassos
        self._solved = None  # canonical non-tree edge -> LassoWord

    def lasso_for(self, fid):
        return self.lassos[fid]

    def loops(self):
        return tuple(l.loop() for l in self.lassos)

    def __repr__(self):
        return f"LassoBasis({len(self.lassos)} lassos)"


def lasso_basis(graph, priority="NESW"):
    """Choose a spanning tree (by neighbour priority) and build one lasso per face."""
    tree = SpanningTree(graph, priority)
    return LassoBasis(graph, tree, [_make_lasso(f, tree) for f in graph.faces])


def _edge_letters(word, tree, start=(0, 0)):
    """Signed non-tree edges met along a step word, freely reduced.

    Raises if the word leaves the drawing; tree edges are dropped, so the
    result represents the walk's class in the free group on non-tree edges.
    """
    graph = tree.graph
    out = []
    pos = start
    for s in word:
        edge, sign = _canon_edge(pos, s)
        if edge not in graph.edges:
            raise ValueError(
                f"loop not drawn on graph: step {s} at {pos} uses a missing edge"
            )
        if edge not in tree.tree_edges:
            if out and out[-1][0] == edge and out[-1][1] == -sign:
                out.pop()
            else:
                out.append((edge, sign))
        pos = step_end(pos, s)
    return out


def _solve_basis(basis):
    """Express each non-tree edge generator as a word in the lassos.

    Faces are peeled from the unbounded face inwards: at each step some
    remaining face has exactly one non-tree boundary edge whose far side is
    already peeled (the drawing's non-tree edges form a tree on the faces),
    and that pivot edge is solved from the face's bulk by back-substitution.
    """
    graph, tree = basis.graph, basis.tree
    bulk_letters = {}
    boundary_nontree = {}
    for lasso in basis.lassos:
        fid = lasso.face.id
        start = _walk_start_of_bulk(lasso)
        letters = _edge_letters(lasso.bulk, tree, start)
        bulk_letters[fid] = letters
        boundary_nontree[fid] = sorted({e for e, _ in letters})
    alive = {f.id for f in graph.faces}
    order = []
    pivot = {}
    while alive:
        chosen = None
        for fid in sorted(alive):
            for e in boundary_nontree[fid]:
                left, right = graph.side_faces(e)
                other = right if left == fid else left
                if other is None or other not in alive:
                    chosen = (fid, e)
                    break
            if chosen:
                break
        if chosen is None:
            raise RuntimeError("face peeling stalled; drawing inconsistent")
        fid, e = chosen
        alive.remove(fid)
        order.append(fid)
        pivot[fid] = e
    solved = {}

    def as_lassoword(letters):
        out = LassoWord()
        for e, s in letters:
            x = solved[e]
            out = out * (x if s == 1 else x.inverse())
        return out

    for fid in reversed(order):
        e = pivot[fid]
        letters = bulk_letters[fid]
        hits = [i for i, (e2, _) in enumerate(letters) if e2 == e]
        if len(hits) != 1:
            raise RuntimeError(f"pivot edge appears {len(hits)} times on face {fid}")
        i = hits[0]
        sign = letters[i][1]
        alpha = as_lassoword(letters[:i])
        beta = as_lassoword(letters[i + 1 :])
        core = alpha.inverse() * LassoWord([(fid, 1)]) * beta.inverse()
        solved[e] = core if sign == 1 else core.inverse()
    if set(solved) != set(tree.nontree_edges()):
        raise RuntimeError("peeling did not reach every non-tree edge")
    basis._solved = solved


def _walk_start_of_bulk(lasso):
    """The vertex the bulk starts from (the anchor)."""
    v = (0, 0)
    for s in lasso.tail:
        v = step_end(v, s)
    return v


def decompose(loop, basis):
    """Rewrite a loop drawn on the basis's graph as a reduced lasso word.

    Substituting each generator's lasso loop back in recovers the loop, and
    the exponent sum at a face equals the loop's winding number around it.
    """
    word = loop.word if isinstance(loop, Loop) else reduce_word(loop)
    letters = _edge_letters(word, basis.tree)
    if basis._solved is None:
        _solve_basis(basis)
    out = LassoWord()
    for e, s in letters:
        x = basis._solved[e]
        out = out * (x if s == 1 else x.inverse())
    return out


def winding(loop, around):
    """Exact winding number of a loop around a face's marked cell.

    ``around`` may be a :class:`Face` or a unit cell ``(x, y)`` (lower-left
    corner); the winding is taken about the cell centre, counted by signed
    crossings of the eastward ray.
    """
    cell = around.cell if isinstance(around, Face) else tuple(around)
    cx, cy = cell
    word = loop.word if isinstance(loop, Loop) else loop
    w = 0
    x = y = 0
    for s in word:
        if s == "N":
            if y == cy and x >= cx + 1:
                w += 1
        elif s == "S":
            if y - 1 == cy and x >= cx + 1:
                w -= 1
        dx, dy = DELTA[s]
        x += dx
        y += dy
    return w


def winding_profile(loop, graph):
    """Winding numbers of a loop around each bounded face, by face id."""
    return tuple(winding(loop, f) for f in graph.faces)


def braid_act(braid, elements):
    """Apply a braid word to a tuple of group elements.

    Generators are nonzero signed integers: ``+i`` (1-based) maps
    ``(.., x_i, x_{i+1}, ..)`` to ``(.., x_{i+1}, x_{i+1} x_i x_{i+1}^-1, ..)``
    and ``-i`` is its inverse.  The rightmost generator acts first, so the
    action composes like substitution: ``act(a + b, xs) == act(a, act(b, xs))``.
    Elements need ``*`` and ``.inverse()``.
    """
    xs = list(elements)
    n = len(xs)
    for g in reversed(list(braid)):
        i = abs(g) - 1
        if g == 0 or not 0 <= i < n - 1:
            raise ValueError(f"braid generator {g} out of range for {n} strands")
        p, q = xs[i], xs[i + 1]
        if g > 0:
            xs[i], xs[i + 1] = q, q * p * q.inverse()
        else:
            xs[i], xs[i + 1] = p.inverse() * q * p, p
    return tuple(xs)


def braid_permutation(braid, n):
    """Where each strand's content comes from: ``out[j]`` is the original slot
    whose (conjugated) element ends up at slot ``j`` under :func:`braid_act`."""
    src = list(range(n))
    for g in reversed(list(braid)):
        i = abs(g) - 1
        if g == 0 or not 0 <= i < n - 1:
            raise ValueError(f"braid generator {g} out of range for {n} strands")
        src[i], src[i + 1] = src[i + 1], src[i]
    return tuple(src)


def random_loop(rng, max_len=24, max_tries=2000):
    """A uniform-ish random nontrivial reduced loop of length <= max_len.

    Draws random step words of random even length and keeps the first whose
    reduction is a nontrivial closed loop; used by tests and the CLI demo
    corpus generator.
    """
    for _ in range(max_tries):
        n = 2 * int(rng.integers(2, max_len // 2 + 1))
        word = "".join(STEPS[int(k)] for k in rng.integers(0, 4, size=n))
        x = word.count("E") - word.count("W")
        y = word.count("N") - word.count("S")
        if (x, y) != (0, 0):
            continue
        red = reduce_word(word)
        if red:
            return Loop(red)
    raise RuntimeError("failed to sample a closed loop")
