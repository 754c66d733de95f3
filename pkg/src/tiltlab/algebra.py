"""Path algebras with relations, their modules, and structural tests.

Everything here is a right module described as a quiver representation:
a dimension per vertex and one matrix per arrow, acting on row vectors.
Composition of paths reads left to right, so the path "ab" means a then
b, and arrows carry elements of e_source * Lambda * e_target.

The quotient is taken by the relation ideal together with all paths of
length >= nilpotency_bound.  For acyclic quivers the default bound is
one more than the longest path, which changes nothing; for quivers with
cycles the bound is part of the input and we certify (when cheap) that
raising it would not change the algebra.
"""

from __future__ import annotations

import random

from .linalg import Field, Mat

PATH_CAP = 200_000


class AlgebraError(ValueError):
    pass


class LocalStructureError(AlgebraError):
    """A piece assumed local with split residue field turned out not to be."""


class Quiver:
    def __init__(self, num_vertices, arrows):
        """arrows: list of (label, source, target), vertices 0-based."""
        self.n = int(num_vertices)
        if self.n < 1:
            raise AlgebraError("quiver needs at least one vertex")
        self.arrows = []
        self.by_label = {}
        for label, s, t in arrows:
            label = str(label)
            s, t = int(s), int(t)
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise AlgebraError(f"arrow {label} has vertex out of range")
            if label in self.by_label:
                raise AlgebraError(f"duplicate arrow label {label}")
            self.by_label[label] = len(self.arrows)
            self.arrows.append((label, s, t))

    def source(self, a):
        return self.arrows[a][1]

    def target(self, a):
        return self.arrows[a][2]

    def label(self, a):
        return self.arrows[a][0]

    def is_acyclic(self):
        return self.longest_path_length() is not None

    def longest_path_length(self):
        """Length of the longest path, or None when a cycle exists."""
        adj = [[] for _ in range(self.n)]
        for _, s, t in self.arrows:
            adj[s].append(t)
        WHITE, GRAY, BLACK = 0, 1, 2
        color = [WHITE] * self.n
        depth = [0] * self.n
        cyclic = False

        def visit(v):
            nonlocal cyclic
            color[v] = GRAY
            best = 0
            for w in adj[v]:
                if color[w] == GRAY:
                    cyclic = True
                    return 0
                if color[w] == WHITE:
                    visit(w)
                if cyclic:
                    return 0
                best = max(best, 1 + depth[w])
            depth[v] = best
            color[v] = BLACK
            return best

        for v in range(self.n):
            if color[v] == WHITE:
                visit(v)
            if cyclic:
                return None
        return max(depth) if self.n else 0

    def reversed(self):
        return Quiver(self.n, [(lab, t, s) for lab, s, t in self.arrows])


def quiver_from_dict(d):
    arrows = [(a["label"], int(a["from"]) - 1, int(a["to"]) - 1) for a in d.get("arrows", [])]
    return Quiver(int(d["vertices"]), arrows)


class Algebra:
    """Finite-dimensional quotient of a path algebra.

    relations: list of lists of (coeff, [arrow labels]); every term must
    have length >= 2 so the ideal is admissible.
    """

    def __init__(self, field: Field, quiver: Quiver, relations, nilpotency_bound=None,
                 certify_bound=True):
        self.field = field
        self.quiver = quiver
        self.relations_raw = [
            [(field.of(c) if not isinstance(c, str) else field.parse(c), list(p))
             for c, p in rel]
            for rel in relations
        ]
        for rel in self.relations_raw:
            for _, p in rel:
                if len(p) < 2:
                    raise AlgebraError("relation terms must have path length >= 2")

        if nilpotency_bound is None:
            L = quiver.longest_path_length()
            if L is None:
                raise AlgebraError("quiver has a cycle: nilpotency_bound is required")
            nilpotency_bound = L + 1
        self.bound = int(nilpotency_bound)
        if self.bound < 1:
            raise AlgebraError("nilpotency_bound must be positive")

        self.paths, self.path_index = self._enumerate_paths(self.bound)
        self._reduction = self._build_reduction(self.bound, self.paths, self.path_index)
        red_rows, pivot_cols = self._reduction
        pivset = set(pivot_cols)
        self.basis = [k for k in range(len(self.paths)) if k not in pivset]
        self.basis_index = {k: i for i, k in enumerate(self.basis)}
        self.dim = len(self.basis)

        self._mult = None
        self._op = None
        self._proj = {}
        self._inj = {}
        self._simple = {}
        self.bound_certified = None
        if certify_bound:
            self.bound_certified = self._certify_bound()

    # ---- construction internals ----

    def _enumerate_paths(self, bound):
        """All paths of length < bound as (source, arrow tuple)."""
        q = self.quiver
        out_arrows = [[] for _ in range(q.n)]
        for a, (_, s, _) in enumerate(q.arrows):
            out_arrows[s].append(a)
        paths = [(v, ()) for v in range(q.n)]
        frontier = list(paths)
        for _ in range(1, bound):
            nxt = []
            for (src, arrs) in frontier:
                end = q.target(arrs[-1]) if arrs else src
                for a in out_arrows[end]:
                    nxt.append((src, arrs + (a,)))
            paths.extend(nxt)
            frontier = nxt
            if len(paths) > PATH_CAP:
                raise AlgebraError("path count exceeds cap; algebra too large")
            if not frontier:
                break
        index = {p: i for i, p in enumerate(paths)}
        return paths, index

    def path_target(self, p):
        src, arrs = p
        return self.quiver.target(arrs[-1]) if arrs else src

    def _build_reduction(self, bound, paths, path_index):
        """Row-reduce the span of {p * rel * q} inside the path space."""
        f = self.field
        z = f.zero()
        npaths = len(paths)
        rows = []
        for rel in self.relations_raw:
            # split into (source, target) components so each row is graded
            comps = {}
            for c, labs in rel:
                arrs = tuple(self.quiver.by_label[l] for l in labs)
                for x, y in zip(arrs, arrs[1:]):
                    if self.quiver.target(x) != self.quiver.source(y):
                        raise AlgebraError("relation path is not composable")
                key = (self.quiver.source(arrs[0]), self.quiver.target(arrs[-1]))
                comps.setdefault(key, []).append((c, arrs))
            for (rs, rt), terms in comps.items():
                for p in paths:
                    if self.path_target(p) != rs:
                        continue
                    for q in paths:
                        if q[0] != rt:
                            continue
                        vec = [z] * npaths
                        nonzero = False
                        for c, arrs in terms:
                            full = p[1] + arrs + q[1]
                            if len(full) >= bound:
                                continue
                            k = path_index[(p[0], full)]
                            vec[k] = f.add(vec[k], c)
                            nonzero = True
                        if nonzero and any(x != z for x in vec):
                            rows.append(vec)
        if not rows:
            return [], ()
        R, pivots = Mat(f, rows).rref()
        red_rows = [R.data[i] for i in range(len(pivots))]
        return list(zip(pivots, red_rows)), pivots

    def _reduce_path_vector(self, vec):
        """Coordinates over self.basis of a vector in the path space."""
        f = self.field
        z = f.zero()
        vec = list(vec)
        for pc, row in self._reduction[0]:
            c = vec[pc]
            if c != z:
                vec = [f.sub(x, f.mul(c, y)) for x, y in zip(vec, row)]
        return tuple(vec[k] for k in self.basis)

    def _certify_bound(self):
        """True when raising the bound by one leaves the dimension fixed."""
        try:
            bigger = Algebra(self.field, self.quiver, self.relations_raw,
                             nilpotency_bound=self.bound + 1, certify_bound=False)
        except AlgebraError:
            return None
        return bigger.dim == self.dim

    # ---- elements ----

    def zero_elem(self):
        return tuple(self.field.zero() for _ in range(self.dim))

    def idempotent(self, v):
        z = self.field.zero()
        vec = [z] * self.dim
        vec[self.basis_index[self.path_index[(v, ())]]] = self.field.one()
        return tuple(vec)

    def one(self):
        f = self.field
        vec = [f.zero()] * self.dim
        for v in range(self.quiver.n):
            vec[self.basis_index[self.path_index[(v, ())]]] = f.one()
        return tuple(vec)

    def arrow_elem(self, label):
        a = self.quiver.by_label[label]
        s = self.quiver.source(a)
        k = self.path_index[(s, (a,))]
        z = self.field.zero()
        vec = [z] * len(self.paths)
        vec[k] = self.field.one()
        return self._reduce_path_vector(vec)

    def elem_from_terms(self, terms):
        """terms: list of (coeff, [arrow labels]); [] means sum of idempotents not allowed here."""
        f = self.field
        z = f.zero()
        vec = [z] * len(self.paths)
        for c, labs in terms:
            c = f.parse(c) if isinstance(c, str) else f.of(c)
            if not labs:
                raise AlgebraError("empty path in element; use idempotent(v)")
            arrs = tuple(self.quiver.by_label[l] for l in labs)
            src = self.quiver.source(arrs[0])
            full = (src, arrs)
            if len(arrs) >= self.bound:
                continue
            if full not in self.path_index:
                raise AlgebraError("element path not composable")
            vec[self.path_index[full]] = f.add(vec[self.path_index[full]], c)
        return self._reduce_path_vector(vec)

    def _concat_reduce(self, pu, pv):
        """Reduction of the concatenation of two stored paths, or None."""
        if self.path_target(pu) != pv[0]:
            return None
        arrs = pu[1] + pv[1]
        if len(arrs) >= self.bound:
            return None
        z = self.field.zero()
        vec = [z] * len(self.paths)
        vec[self.path_index[(pu[0], arrs)]] = self.field.one()
        return self._reduce_path_vector(vec)

    def mult_table(self):
        if self._mult is None:
            zero = self.zero_elem()
            table = []
            for u in self.basis:
                row = []
                pu = self.paths[u]
                for v in self.basis:
                    r = self._concat_reduce(pu, self.paths[v])
                    row.append(zero if r is None else r)
                table.append(tuple(row))
            self._mult = tuple(table)
        return self._mult

    def mult(self, x, y):
        f = self.field
        z = f.zero()
        table = self.mult_table()
        acc = [z] * self.dim
        for i, xc in enumerate(x):
            if xc == z:
                continue
            for j, yc in enumerate(y):
                if yc == z:
                    continue
                c = f.mul(xc, yc)
                for k, t in enumerate(table[i][j]):
                    if t != z:
                        acc[k] = f.add(acc[k], f.mul(c, t))
        return tuple(acc)

    def basis_source(self, i):
        return self.paths[self.basis[i]][0]

    def basis_target(self, i):
        return self.path_target(self.paths[self.basis[i]])

    def basis_name(self, i):
        src, arrs = self.paths[self.basis[i]]
        if not arrs:
            return f"e{src + 1}"
        return "*".join(self.quiver.label(a) for a in arrs)

    def elem_name(self, x):
        f = self.field
        z = f.zero()
        parts = []
        for i, c in enumerate(x):
            if c == z:
                continue
            cs = f.to_str(c)
            parts.append(self.basis_name(i) if cs == "1" else f"({cs})*{self.basis_name(i)}")
        return " + ".join(parts) if parts else "0"

    def peirce_component(self, x, u, v):
        """The (u, v) graded part of an element (paths u -> v)."""
        z = self.field.zero()
        return tuple(
            c if (self.basis_source(i) == u and self.basis_target(i) == v) else z
            for i, c in enumerate(x)
        )

    def cartan_matrix(self):
        """C[i][j] = dim e_i A e_j, as plain ints."""
        n = self.quiver.n
        C = [[0] * n for _ in range(n)]
        for i in range(self.dim):
            C[self.basis_source(i)][self.basis_target(i)] += 1
        return C

    # ---- opposite and duality ----

    def op(self):
        if self._op is None:
            rels = []
            for rel in self.relations_raw:
                rels.append([(c, list(reversed(labs))) for c, labs in rel])
            opp = Algebra(self.field, self.quiver.reversed(), rels,
                          nilpotency_bound=self.bound, certify_bound=False)
            opp._op = self
            self._op = opp
        return self._op

    def to_op(self, x):
        """Image of an element under the anti-isomorphism onto the opposite."""
        opp = self.op()
        f = self.field
        z = f.zero()
        vec = [z] * len(opp.paths)
        for i, c in enumerate(x):
            if c == z:
                continue
            src, arrs = self.paths[self.basis[i]]
            rsrc = self.path_target(self.paths[self.basis[i]])
            rev = (rsrc, tuple(reversed(arrs)))
            vec[opp.path_index[rev]] = f.add(vec[opp.path_index[rev]], c)
        return opp._reduce_path_vector(vec)

    # ---- canonical modules ----

    def projective(self, v):
        if v not in self._proj:
            self._proj[v] = self._build_projective(v)
        return self._proj[v]

    def _build_projective(self, v):
        idx = [i for i in range(self.dim) if self.basis_source(i) == v]
        by_vertex = [[i for i in idx if self.basis_target(i) == t]
                     for t in range(self.quiver.n)]
        dims = tuple(len(b) for b in by_vertex)
        pos = {}
        for t, blist in enumerate(by_vertex):
            for r, i in enumerate(blist):
                pos[i] = (t, r)
        f = self.field
        mats = {}
        for a, (lab, s, t) in enumerate(self.quiver.arrows):
            elem = self.arrow_elem(lab)
            rows = []
            for i in by_vertex[s]:
                img = self.mult(self._unit_coord(i), elem)
                row = [f.zero()] * dims[t]
                for k, c in enumerate(img):
                    if c != f.zero():
                        tt, rr = pos[k]
                        if tt != t:
                            raise AlgebraError("projective action left its grade")
                        row[rr] = c
                rows.append(row)
            mats[a] = Mat(f, rows) if rows else Mat.zeros(f, 0, dims[t])
        M = Module(self, dims, mats)
        M._proj_basis = by_vertex
        return M

    def _unit_coord(self, i):
        z = self.field.zero()
        vec = [z] * self.dim
        vec[i] = self.field.one()
        return tuple(vec)

    def simple(self, v):
        if v not in self._simple:
            dims = tuple(1 if u == v else 0 for u in range(self.quiver.n))
            f = self.field
            mats = {a: Mat.zeros(f, dims[s], dims[t])
                    for a, (_, s, t) in enumerate(self.quiver.arrows)}
            self._simple[v] = Module(self, dims, mats)
        return self._simple[v]

    def injective(self, v):
        if v not in self._inj:
            self._inj[v] = dual_module(self.op().projective(v), self)
        return self._inj[v]

    def regular_module(self):
        return direct_sum_modules(self, [self.projective(v) for v in range(self.quiver.n)])[0]

    def dimension_vector(self, module):
        return module.dims


class Module:
    """Right module: dims per vertex, one matrix per arrow, row action."""

    def __init__(self, algebra: Algebra, dims, arrow_mats, check=False):
        self.algebra = algebra
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != algebra.quiver.n:
            raise AlgebraError("dimension vector length mismatch")
        self.mats = dict(arrow_mats)
        for a, (_, s, t) in enumerate(algebra.quiver.arrows):
            m = self.mats.get(a)
            if m is None:
                m = Mat.zeros(algebra.field, self.dims[s], self.dims[t])
                self.mats[a] = m
            if (m.nrows, m.ncols) != (self.dims[s], self.dims[t]):
                raise AlgebraError("arrow matrix shape mismatch")
        self.offsets = []
        off = 0
        for d in self.dims:
            self.offsets.append(off)
            off += d
        self.total = off
        if check:
            self.validate()

    def __eq__(self, other):
        return (
            isinstance(other, Module)
            and other.algebra is self.algebra
            and other.dims == self.dims
            and other.mats == self.mats
        )

    def __repr__(self):
        return f"Module(dims={self.dims})"

    def is_zero(self):
        return self.total == 0

    def path_action(self, src, arrs):
        """Matrix of the path action, block from src to its target."""
        f = self.algebra.field
        m = Mat.identity(f, self.dims[src])
        for a in arrs:
            m = m.mul(self.mats[a])
        return m

    def act_full(self, elem):
        """Square matrix of a general element on the flattened space."""
        A = self.algebra
        f = A.field
        z = f.zero()
        rows = [[z] * self.total for _ in range(self.total)]
        for i, c in enumerate(elem):
            if c == z:
                continue
            src, arrs = A.paths[A.basis[i]]
            tgt = A.path_target(A.paths[A.basis[i]])
            blk = self.path_action(src, arrs)
            ro, co = self.offsets[src], self.offsets[tgt]
            for r in range(blk.nrows):
                for s in range(blk.ncols):
                    x = blk[r, s]
                    if x != z:
                        rows[ro + r][co + s] = f.add(rows[ro + r][co + s], f.mul(c, x))
        return Mat(f, rows)

    def validate(self):
        """Action factors through the algebra: checked on basis pairs."""
        A = self.algebra
        for i in range(A.dim):
            pi = A.paths[A.basis[i]]
            for j in range(A.dim):
                pj = A.paths[A.basis[j]]
                if A.path_target(pi) != pj[0]:
                    continue
                left = self.path_action(pi[0], pi[1]).mul(self.path_action(pj[0], pj[1]))
                prod = A.mult(A._unit_coord(i), A._unit_coord(j))
                right = self._partial_act(pi[0], A.path_target(pj), prod)
                if left != right:
                    raise AlgebraError(
                        f"module does not satisfy the relations at basis pair "
                        f"({A.basis_name(i)}, {A.basis_name(j)})"
                    )
        return True

    def _partial_act(self, src, tgt, elem):
        A = self.algebra
        f = A.field
        z = f.zero()
        acc = Mat.zeros(f, self.dims[src], self.dims[tgt])
        for k, c in enumerate(elem):
            if c == z:
                continue
            ps, parrs = A.paths[A.basis[k]]
            if ps != src or A.path_target(A.paths[A.basis[k]]) != tgt:
                continue
            acc = acc.add(self.path_action(ps, parrs).scale(c))
        return acc


class ModuleMap:
    """Vertex-blockwise linear map; f(x) = x @ F with F assembled from blocks."""

    def __init__(self, source: Module, target: Module, blocks, check=True):
        self.source = source
        self.target = target
        self.blocks = list(blocks)
        f = source.algebra.field
        for v, b in enumerate(self.blocks):
            if (b.nrows, b.ncols) != (source.dims[v], target.dims[v]):
                raise AlgebraError("module map block shape mismatch")
        if check and not self.commutes():
            raise AlgebraError("not a module map: arrow actions do not commute")

    def commutes(self):
        A = self.source.algebra
        for a, (_, s, t) in enumerate(A.quiver.arrows):
            lhs = self.source.mats[a].mul(self.blocks[t])
            rhs = self.blocks[s].mul(self.target.mats[a])
            if lhs != rhs:
                return False
        return True

    def full(self):
        f = self.source.algebra.field
        z = f.zero()
        rows = [[z] * self.target.total for _ in range(self.source.total)]
        for v, b in enumerate(self.blocks):
            ro, co = self.source.offsets[v], self.target.offsets[v]
            for r in range(b.nrows):
                for c in range(b.ncols):
                    rows[ro + r][co + c] = b[r, c]
        return Mat(f, rows, ncols=self.target.total)

    def then(self, other):
        if other.source is not self.target and other.source != self.target:
            raise AlgebraError("composition mismatch")
        return ModuleMap(self.source, other.target,
                         [a.mul(b) for a, b in zip(self.blocks, other.blocks)],
                         check=False)

    def add(self, other):
        return ModuleMap(self.source, self.target,
                         [a.add(b) for a, b in zip(self.blocks, other.blocks)], check=False)

    def scale(self, c):
        return ModuleMap(self.source, self.target,
                         [b.scale(c) for b in self.blocks], check=False)

    def __eq__(self, other):
        return (
            isinstance(other, ModuleMap)
            and other.source == self.source
            and other.target == self.target
            and other.blocks == self.blocks
        )

    def is_iso(self):
        return all(b.is_invertible() for b in self.blocks)

    def is_zero(self):
        return all(b.is_zero() for b in self.blocks)

    def inverse(self):
        return ModuleMap(self.target, self.source,
                         [b.inverse() for b in self.blocks], check=False)

    @classmethod
    def zero(cls, source, target):
        f = source.algebra.field
        return cls(source, target,
                   [Mat.zeros(f, source.dims[v], target.dims[v])
                    for v in range(source.algebra.quiver.n)], check=False)

    @classmethod
    def identity(cls, module):
        f = module.algebra.field
        return cls(module, module,
                   [Mat.identity(f, d) for d in module.dims], check=False)


def hom_basis(M: Module, N: Module):
    """Basis of the space of module maps M -> N."""
    A = M.algebra
    f = A.field
    z = f.zero()
    n = A.quiver.n
    offs = []
    total = 0
    for v in range(n):
        offs.append(total)
        total += M.dims[v] * N.dims[v]
    if total == 0:
        return []

    def uidx(v, p, q):
        return offs[v] + p * N.dims[v] + q

    rows = []
    for a, (_, s, t) in enumerate(A.quiver.arrows):
        AM, AN = M.mats[a], N.mats[a]
        for p in range(M.dims[s]):
            for q in range(N.dims[t]):
                row = [z] * total
                # sum_k AM[p][k] F_t[k][q] - sum_l F_s[p][l] AN[l][q] = 0
                for k in range(M.dims[t]):
                    if AM[p, k] != z:
                        row[uidx(t, k, q)] = f.add(row[uidx(t, k, q)], AM[p, k])
                for l in range(N.dims[s]):
                    if AN[l, q] != z:
                        row[uidx(s, p, l)] = f.sub(row[uidx(s, p, l)], AN[l, q])
                if any(x != z for x in row):
                    rows.append(row)
    if rows:
        K = Mat(f, rows).kernel_basis()
        vecs = [tuple(K[i, j] for i in range(total)) for j in range(K.ncols)]
    else:
        eye = Mat.identity(f, total)
        vecs = [tuple(eye[i, j] for i in range(total)) for j in range(total)]
    out = []
    for vec in vecs:
        blocks = []
        for v in range(n):
            rows_v = [[vec[uidx(v, p, q)] for q in range(N.dims[v])]
                      for p in range(M.dims[v])]
            blocks.append(Mat(f, rows_v) if rows_v else Mat.zeros(f, 0, N.dims[v]))
        out.append(ModuleMap(M, N, blocks, check=False))
    return out


def direct_sum_modules(algebra, mods):
    """Returns (sum module, list of (inclusion, projection) maps)."""
    f = algebra.field
    n = algebra.quiver.n
    if len(mods) == 1:
        ident = ModuleMap.identity(mods[0])
        return mods[0], [(ident, ident)]
    dims = tuple(sum(m.dims[v] for m in mods) for v in range(n))
    mats = {}
    for a, (_, s, t) in enumerate(algebra.quiver.arrows):
        # block diagonal assembly
        big = [[f.zero()] * dims[t] for _ in range(dims[s])]
        ro = co = 0
        for m in mods:
            blk = m.mats[a]
            for r in range(blk.nrows):
                for c in range(blk.ncols):
                    big[ro + r][co + c] = blk[r, c]
            ro += m.dims[s]
            co += m.dims[t]
        mats[a] = Mat(f, big, ncols=dims[t])
    total = Module(algebra, dims, mats)
    maps = []
    offs = [0] * n
    for m in mods:
        inc_blocks = []
        proj_blocks = []
        for v in range(n):
            inc = Mat.zeros(f, m.dims[v], dims[v]).data
            inc = [list(r) for r in inc]
            for r in range(m.dims[v]):
                inc[r][offs[v] + r] = f.one()
            incm = Mat(f, inc) if m.dims[v] else Mat.zeros(f, 0, dims[v])
            inc_blocks.append(incm)
            proj_blocks.append(incm.transpose())
        maps.append((ModuleMap(m, total, inc_blocks, check=False),
                     ModuleMap(total, m, proj_blocks, check=False)))
        for v in range(n):
            offs[v] += m.dims[v]
    return total, maps


def dual_module(M: Module, target_algebra: Algebra):
    """K-dual, a module over the opposite algebra (same arrow labels)."""
    src_alg = M.algebra
    if target_algebra.quiver.n != src_alg.quiver.n:
        raise AlgebraError("dual: vertex count mismatch")
    mats = {}
    for a, (lab, s, t) in enumerate(target_algebra.quiver.arrows):
        a_src = src_alg.quiver.by_label[lab]
        ss, tt = src_alg.quiver.source(a_src), src_alg.quiver.target(a_src)
        if (ss, tt) != (t, s):
            raise AlgebraError("dual: arrow orientation mismatch")
        mats[a] = M.mats[a_src].transpose()
    return Module(target_algebra, M.dims, mats)


def dual_map(f: ModuleMap, Mdual: Module, Ndual: Module):
    """Dual of f: M -> N, as a map N* -> M* (blocks transposed)."""
    return ModuleMap(Ndual, Mdual, [b.transpose() for b in f.blocks], check=False)


# ---- submodules, quotients, homology ----

def _row_space(mat):
    return mat.row_space_basis()


def sub_module(M: Module, span_rows):
    """Submodule spanned per vertex by the given row matrices.

    span_rows: list per vertex of Mat (k_v x M.dims[v]); rows must span a
    subspace closed under the arrow action.  Returns (S, inclusion).
    """
    A = M.algebra
    f = A.field
    basis = [_row_space(span_rows[v]) for v in range(A.quiver.n)]
    dims = tuple(b.nrows for b in basis)
    mats = {}
    for a, (_, s, t) in enumerate(A.quiver.arrows):
        if dims[s] == 0:
            mats[a] = Mat.zeros(f, 0, dims[t])
            continue
        img = basis[s].mul(M.mats[a])
        # solve X @ basis[t] = img row by row
        sol = basis[t].transpose().solve(img.transpose())
        if sol is None:
            raise AlgebraError("sub_module: span not closed under action")
        mats[a] = sol.transpose()
    S = Module(A, dims, mats)
    inc = ModuleMap(S, M, basis, check=False)
    return S, inc


def quotient_module(M: Module, span_rows):
    """Quotient by the span; returns (Q, projection ModuleMap)."""
    A = M.algebra
    f = A.field
    n = A.quiver.n
    reps = []
    projs = []
    for v in range(n):
        R, pivots = span_rows[v].rref() if span_rows[v].nrows else (span_rows[v], ())
        pivset = set(pivots)
        free = [j for j in range(M.dims[v]) if j not in pivset]
        reps.append(free)
        # projection of an arbitrary row vector to coords over the free set
        # x mod U: subtract pivot rows, read free coords
        rows = []
        for j in range(M.dims[v]):
            e = [f.zero()] * M.dims[v]
            e[j] = f.one()
            for (pc, row) in zip(pivots, R.data):
                c = e[pc]
                if c != f.zero():
                    e = [f.sub(x, f.mul(c, y)) for x, y in zip(e, row)]
            rows.append([e[k] for k in free])
        projs.append(Mat(f, rows) if rows else Mat.zeros(f, 0, len(free)))
    dims = tuple(len(r) for r in reps)
    mats = {}
    for a, (_, s, t) in enumerate(A.quiver.arrows):
        if dims[s] == 0:
            mats[a] = Mat.zeros(f, 0, dims[t])
            continue
        rows = []
        for j in reps[s]:
            e = [f.zero()] * M.dims[s]
            e[j] = f.one()
            img = Mat(f, [e]).mul(M.mats[a])
            red = img.mul(projs[t])
            rows.append(list(red.data[0]) if red.nrows else [])
        mats[a] = Mat(f, rows)
    Q = Module(A, dims, mats)
    proj = ModuleMap(M, Q, projs, check=False)
    return Q, proj


def kernel_module(f: ModuleMap):
    """Kernel with induced action; returns (K, inclusion)."""
    A = f.source.algebra
    span = []
    for v in range(A.quiver.n):
        k = f.blocks[v].transpose().kernel_basis().transpose()
        span.append(k if k.nrows else Mat.zeros(A.field, 0, f.source.dims[v]))
    return sub_module(f.source, span)


def image_rows(f: ModuleMap):
    return [f.blocks[v].row_space_basis() if f.source.dims[v] else
            Mat.zeros(f.source.algebra.field, 0, f.target.dims[v])
            for v in range(f.source.algebra.quiver.n)]


def homology_module(f: ModuleMap, g: ModuleMap):
    """ker(g) / im(f) for composable maps with f then g = 0."""
    if f.target is not g.source:
        raise AlgebraError("homology: maps not composable")
    A = f.source.algebra
    K, inc = kernel_module(g)
    # rewrite im(f) in kernel coordinates
    span = []
    for v in range(A.quiver.n):
        img = f.blocks[v]
        if K.dims[v] == 0:
            span.append(Mat.zeros(A.field, 0, 0))
            continue
        sol = inc.blocks[v].transpose().solve(img.transpose())
        if sol is None:
            raise AlgebraError("homology: image not inside kernel")
        span.append(sol.transpose())
    Q, _ = quotient_module(K, span)
    return Q


# ---- covers, tops, iso tests ----

def top_data(M: Module):
    """Per vertex: coset representatives of M_v / (sum of incoming arrow images)."""
    A = M.algebra
    f = A.field
    out = []
    for v in range(A.quiver.n):
        rows = []
        for a, (_, s, t) in enumerate(A.quiver.arrows):
            if t == v and M.dims[s]:
                rows.extend(list(r) for r in M.mats[a].data)
        if rows:
            R, pivots = Mat(f, rows).rref()
            pivset = set(pivots)
        else:
            pivset = set()
        reps = [j for j in range(M.dims[v]) if j not in pivset]
        out.append(reps)
    return out


def projective_cover(M: Module):
    """Returns (vertices, P, cover map) with P the sum of A.projective(v)."""
    A = M.algebra
    f = A.field
    tops = top_data(M)
    verts = []
    gens = []
    for v in range(A.quiver.n):
        for j in tops[v]:
            verts.append(v)
            e = [f.zero()] * M.dims[v]
            e[j] = f.one()
            gens.append((v, tuple(e)))
    P, incs = direct_sum_modules(A, [A.projective(v) for v in verts])
    blocks = [[] for _ in range(A.quiver.n)]
    # map each projective summand by acting on its generator
    summand_maps = []
    for (v, gvec) in gens:
        Pv = A.projective(v)
        bl = []
        for t in range(A.quiver.n):
            rows = []
            for i in Pv._proj_basis[t]:
                src, arrs = A.paths[A.basis[i]]
                img = Mat(f, [list(gvec)]).mul(M.path_action(src, arrs))
                rows.append(list(img.data[0]))
            bl.append(Mat(f, rows) if rows else Mat.zeros(f, 0, M.dims[t]))
        summand_maps.append(ModuleMap(Pv, M, bl, check=False))
    # assemble through inclusions
    cover = ModuleMap.zero(P, M)
    for (inc, proj), sm in zip(incs, summand_maps):
        cover = cover.add(proj.then(sm))
    return verts, P, cover


def module_iso_search(M: Module, N: Module, tries=200, seed=0):
    """Invertible module map M -> N, or None.  Sufficient certificate only."""
    if M.dims != N.dims:
        return None
    if M.total == 0:
        return ModuleMap.zero(M, N)
    basis = hom_basis(M, N)
    if not basis:
        return None
    for h in basis:
        if h.is_iso():
            return h
    f = M.algebra.field
    rng = random.Random(seed)
    if isinstance(getattr(f, "p", None), int):
        pool = list(range(f.p))
    else:
        pool = list(range(-3, 4))
    for _ in range(tries):
        cand = ModuleMap.zero(M, N)
        for h in basis:
            c = f.of(rng.choice(pool))
            cand = cand.add(h.scale(c))
        if cand.is_iso():
            return cand
    return None


def indec_iso(M: Module, N: Module):
    """Decisive iso test for indecomposable inputs.

    Indecomposables are isomorphic exactly when some composite of hom
    basis elements through the other module is invertible.
    """
    if M.dims != N.dims:
        return False
    if M.total == 0:
        return True
    fwd = hom_basis(M, N)
    bwd = hom_basis(N, M)
    for f_ in fwd:
        for g_ in bwd:
            if f_.then(g_).is_iso():
                return True
    return False


def nakayama_permutation(A: Algebra):
    """P_v matched to injectives: returns perm with P_v iso I_perm[v], or None."""
    n = A.quiver.n
    perm = []
    for v in range(n):
        found = None
        for w in range(n):
            if indec_iso(A.projective(v), A.injective(w)):
                found = w
                break
        if found is None:
            return None
        perm.append(found)
    if sorted(perm) != list(range(n)):
        return None
    return perm


def is_self_injective(A: Algebra):
    return nakayama_permutation(A) is not None


def symmetric_form(A: Algebra, tries=64, seed=0):
    """A linear form with phi(ab) = phi(ba) and nondegenerate Gram, or None."""
    f = A.field
    z = f.zero()
    d = A.dim
    table = A.mult_table()
    rows = []
    for u in range(d):
        for v in range(u + 1, d):
            row = [f.sub(a, b) for a, b in zip(table[u][v], table[v][u])]
            if any(x != z for x in row):
                rows.append(row)
    if rows:
        K = Mat(f, rows).kernel_basis()
        cands = [tuple(K[i, j] for i in range(d)) for j in range(K.ncols)]
    else:
        eye = Mat.identity(f, d)
        cands = [tuple(eye[i, j] for i in range(d)) for j in range(d)]
    if not cands:
        return None

    def gram(phi):
        return Mat(f, [[_dot(f, table[u][v], phi) for v in range(d)] for u in range(d)])

    for phi in cands:
        if gram(phi).rank() == d:
            return phi
    rng = random.Random(seed)
    pool = list(range(f.p)) if isinstance(getattr(f, "p", None), int) else list(range(-3, 4))
    for _ in range(tries):
        phi = tuple(f.zero() for _ in range(d))
        acc = [f.zero()] * d
        for c in cands:
            s = f.of(rng.choice(pool))
            acc = [f.add(x, f.mul(s, y)) for x, y in zip(acc, c)]
        phi = tuple(acc)
        if gram(phi).rank() == d:
            return phi
    return None


def is_symmetric_algebra(A: Algebra):
    return symmetric_form(A) is not None


def _dot(f, xs, ys):
    acc = f.zero()
    for x, y in zip(xs, ys):
        acc = f.add(acc, f.mul(x, y))
    return acc


# ---- abstract finite-dimensional algebras (for endomorphism rings) ----

class FiniteAlgebra:
    """Algebra given by structure constants plus an orthogonal idempotent list."""

    def __init__(self, field, table, unit, idempotents, verify=True):
        self.field = field
        self.table = tuple(tuple(tuple(c) for c in row) for row in table)
        self.dim = len(self.table)
        self.unit = tuple(unit)
        self.idempotents = [tuple(e) for e in idempotents]
        if verify:
            self.verify_structure()

    def mult(self, x, y):
        f = self.field
        z = f.zero()
        acc = [z] * self.dim
        for i, xc in enumerate(x):
            if xc == z:
                continue
            for j, yc in enumerate(y):
                if yc == z:
                    continue
                c = f.mul(xc, yc)
                row = self.table[i][j]
                for k, t in enumerate(row):
                    if t != z:
                        acc[k] = f.add(acc[k], f.mul(c, t))
        return tuple(acc)

    def basis_elem(self, i):
        z = self.field.zero()
        v = [z] * self.dim
        v[i] = self.field.one()
        return tuple(v)

    def verify_structure(self):
        f = self.field
        d = self.dim
        for i in range(d):
            bi = self.basis_elem(i)
            if self.mult(self.unit, bi) != bi or self.mult(bi, self.unit) != bi:
                raise AlgebraError("unit fails on basis element")
        for i in range(d):
            for j in range(d):
                xij = self.mult(self.basis_elem(i), self.basis_elem(j))
                for k in range(d):
                    lhs = self.mult(xij, self.basis_elem(k))
                    rhs = self.mult(self.basis_elem(i),
                                    self.mult(self.basis_elem(j), self.basis_elem(k)))
                    if lhs != rhs:
                        raise AlgebraError("associativity fails on basis triple")
        acc = [f.zero()] * d
        for e in self.idempotents:
            if self.mult(e, e) != tuple(e):
                raise AlgebraError("idempotent is not idempotent")
            acc = [f.add(a, b) for a, b in zip(acc, e)]
        for e in self.idempotents:
            for e2 in self.idempotents:
                if e is not e2 and any(c != f.zero() for c in self.mult(e, e2)):
                    raise AlgebraError("idempotents not orthogonal")
        if tuple(acc) != self.unit:
            raise AlgebraError("idempotents do not sum to the unit")

    def peirce_basis(self, i, j):
        """Row basis of e_i A e_j inside the whole space."""
        f = self.field
        ei, ej = self.idempotents[i], self.idempotents[j]
        rows = [self.mult(self.mult(ei, self.basis_elem(k)), ej) for k in range(self.dim)]
        M = Mat(f, rows)
        return M.row_space_basis()

    def cartan_matrix(self):
        n = len(self.idempotents)
        return [[self.peirce_basis(i, j).nrows for j in range(n)] for i in range(n)]

    def left_mult_matrix_on(self, x, space_rows):
        """Matrix of y -> x*y on the span of space_rows, in those coordinates."""
        f = self.field
        imgs = [self.mult(x, tuple(r)) for r in space_rows.data]
        sol = space_rows.transpose().solve(Mat(f, imgs).transpose())
        if sol is None:
            raise AlgebraError("left multiplication leaves the subspace")
        return sol.transpose()

    def local_residue_functional(self, i):
        """Scalars lambda(b) for b in a basis of e_i A e_i, with b - lambda split off.

        Requires the corner to be local with residue field equal to the
        ground field; raises LocalStructureError otherwise.
        """
        f = self.field
        corner = self.peirce_basis(i, i)
        d = corner.nrows
        lambdas = []
        for r in range(d):
            b = tuple(corner.data[r])
            L = self.left_mult_matrix_on(b, corner)
            cp = L.charpoly()
            lam = _split_eigenvalue(f, cp, d)
            if lam is None:
                raise LocalStructureError("corner residue is not split over the field")
            # verify b - lam*e_i is nilpotent on the corner
            shifted = [f.sub(x, f.mul(lam, e)) for x, e in zip(b, self.idempotents[i])]
            Ls = self.left_mult_matrix_on(tuple(shifted), corner)
            cps = Ls.charpoly()
            if any(c != f.zero() for c in cps[:-1]):
                raise LocalStructureError("corner element is not scalar plus nilpotent")
            lambdas.append(lam)
        return corner, lambdas

    def radical_rows(self):
        """Row basis of the radical; verified nilpotent two-sided of codim r."""
        f = self.field
        z = f.zero()
        n = len(self.idempotents)
        rows = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    rows.extend(list(r) for r in self.peirce_basis(i, j).data)
        for i in range(n):
            corner, lambdas = self.local_residue_functional(i)
            # kernel of the residue functional on the corner
            for r in range(corner.nrows):
                b = list(corner.data[r])
                lam = lambdas[r]
                shifted = [f.sub(x, f.mul(lam, e)) for x, e in zip(b, self.idempotents[i])]
                rows.append(shifted)
        J = Mat(f, rows).row_space_basis() if rows else Mat.zeros(f, 0, self.dim)
        self._verify_radical(J)
        return J

    def _verify_radical(self, J):
        f = self.field
        if J.nrows != self.dim - len(self.idempotents):
            raise AlgebraError("radical has wrong codimension")
        # two-sided ideal
        for r in range(J.nrows):
            x = tuple(J.data[r])
            for k in range(self.dim):
                b = self.basis_elem(k)
                for y in (self.mult(x, b), self.mult(b, x)):
                    if Mat(f, list(J.data) + [list(y)]).rank() != J.nrows:
                        raise AlgebraError("radical candidate is not an ideal")
        # nilpotent
        cur = J
        for _ in range(self.dim + 1):
            if cur.nrows == 0:
                return
            nxt_rows = []
            for r in range(cur.nrows):
                for s in range(J.nrows):
                    nxt_rows.append(list(self.mult(tuple(cur.data[r]), tuple(J.data[s]))))
            cur = Mat(f, nxt_rows).row_space_basis() if nxt_rows else Mat.zeros(f, 0, self.dim)
        raise AlgebraError("radical candidate is not nilpotent")

    def quiver_arrow_counts(self):
        """dim of e_i (J/J^2) e_j for each pair, from the verified radical."""
        f = self.field
        J = self.radical_rows()
        J2_rows = []
        for r in range(J.nrows):
            for s in range(J.nrows):
                J2_rows.append(list(self.mult(tuple(J.data[r]), tuple(J.data[s]))))
        J2 = Mat(f, J2_rows).row_space_basis() if J2_rows else Mat.zeros(f, 0, self.dim)
        n = len(self.idempotents)
        out = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                ei, ej = self.idempotents[i], self.idempotents[j]
                part = []
                for r in range(J.nrows):
                    part.append(list(self.mult(self.mult(ei, tuple(J.data[r])), ej)))
                partJ2 = []
                for r in range(J2.nrows):
                    partJ2.append(list(self.mult(self.mult(ei, tuple(J2.data[r])), ej)))
                dim_part = Mat(f, part).rank() if part else 0
                dim_j2 = Mat(f, partJ2).rank() if partJ2 else 0
                out[i][j] = dim_part - dim_j2
        return out


def _split_eigenvalue(field, charpoly_coeffs, d):
    """The unique lambda with charpoly (t - lambda)^d, if the shape allows one."""
    f = field
    if d == 0:
        return None
    p = getattr(f, "p", None)
    if p is None:
        # c_{d-1} = -d * lambda
        return f.div(f.neg(charpoly_coeffs[d - 1]), f.of(d))
    a, m = 0, d
    while m % p == 0:
        m //= p
        a += 1
    idx = (p ** a) * (m - 1)
    c = charpoly_coeffs[idx]
    # c = -m * lambda^{p^a} and Frobenius fixes the prime field
    return f.div(f.neg(c), f.of(m))


def algebra_from_dict(d):
    """Build an Algebra from parsed JSON."""
    from .linalg import field_from_spec

    field = field_from_spec(d["field"])
    quiver = quiver_from_dict(d["quiver"])
    rels = []
    for rel in d.get("relations", []):
        rels.append([(t.get("coeff", "1"), list(t["path"])) for t in rel["terms"]])
    bound = d.get("nilpotency_bound")
    return Algebra(field, quiver, rels, nilpotency_bound=bound)
