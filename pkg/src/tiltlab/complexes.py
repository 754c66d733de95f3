"""Bounded complexes of modules, tagged by indecomposable summand.

Every complex in the pipeline is a direct sum of projectives, injectives
and simples in each degree, and remembers which.  Differentials are kept
as block matrices of module maps between those summands, which is what
makes Gaussian minimization and the blockwise functor transport work.

A complex may carry approx_above = t, meaning: the stored complex is the
brutal truncation to degrees <= t of an object that truly continues
higher (a cut coresolution).  Stored components are genuine; what is
missing is everything above, so homology at the cut edge cannot be
trusted.  approx_below = b is the mirror marker for cut resolutions.
Operations propagate the markers and re-cut so the convention holds.
"""

from __future__ import annotations

from collections import namedtuple

from .algebra import (
    Algebra,
    AlgebraError,
    Module,
    ModuleMap,
    direct_sum_modules,
    hom_basis,
    homology_module,
)
from .linalg import Mat

Summand = namedtuple("Summand", ["kind", "vertex"])  # kind: "P" | "I" | "S"


def tag_module(algebra: Algebra, tag: Summand) -> Module:
    if tag.kind == "P":
        return algebra.projective(tag.vertex)
    if tag.kind == "I":
        return algebra.injective(tag.vertex)
    if tag.kind == "S":
        return algebra.simple(tag.vertex)
    raise AlgebraError(f"unknown summand kind {tag.kind!r}")


def zero_module(algebra: Algebra) -> Module:
    return Module(algebra, (0,) * algebra.quiver.n, {})


def _combine_approx(*vals):
    finite = [v for v in vals if v is not None]
    return min(finite) if finite else None


def _combine_below(*vals):
    finite = [v for v in vals if v is not None]
    return max(finite) if finite else None


class Complex:
    """parts: {degree: tuple of Summand}; blocks: {degree: block matrix}.

    blocks[n][k][l] is the component from summand k of degree n to
    summand l of degree n+1, stored as a ModuleMap or None for zero.
    """

    def __init__(self, algebra, parts, blocks, approx_above=None,
                 approx_below=None, validate=True):
        self.algebra = algebra
        self.parts = {int(n): tuple(p) for n, p in parts.items() if p}
        self.blocks = {}
        for n, grid in blocks.items():
            n = int(n)
            if n in self.parts and (n + 1) in self.parts:
                self.blocks[n] = tuple(tuple(row) for row in grid)
        self.approx_above = approx_above
        self.approx_below = approx_below
        self._module = {}
        self._maps = {}
        self._dfull = {}
        if validate:
            self.validate()

    # ---- structure access ----

    def support(self):
        return sorted(self.parts)

    def min_deg(self):
        return min(self.parts) if self.parts else 0

    def max_deg(self):
        return max(self.parts) if self.parts else 0

    def is_zero(self):
        return not self.parts

    def part_modules(self, n):
        return [tag_module(self.algebra, t) for t in self.parts.get(n, ())]

    def module(self, n):
        if n not in self._module:
            mods = self.part_modules(n)
            if mods:
                total, maps = direct_sum_modules(self.algebra, mods)
            else:
                total, maps = zero_module(self.algebra), []
            self._module[n] = total
            self._maps[n] = maps
        return self._module[n]

    def summand_maps(self, n):
        self.module(n)
        return self._maps[n]

    def block(self, n, k, l):
        grid = self.blocks.get(n)
        if grid is None:
            return None
        return grid[k][l]

    def d_full(self, n):
        """Differential as one ModuleMap; zero map when a side is absent."""
        if n in self._dfull:
            return self._dfull[n]
        src, tgt = self.module(n), self.module(n + 1)
        acc = ModuleMap.zero(src, tgt)
        grid = self.blocks.get(n)
        if grid is not None:
            smaps, tmaps = self.summand_maps(n), self.summand_maps(n + 1)
            for k, row in enumerate(grid):
                for l, blk in enumerate(row):
                    if blk is None:
                        continue
                    inc = smaps[k][1]  # projection from total to part k
                    proj = tmaps[l][0]  # inclusion of part l
                    acc = acc.add(inc.then(blk).then(proj))
        self._dfull[n] = acc
        return acc

    def dims_at(self, n):
        return self.module(n).dims

    def total_dim(self):
        return sum(self.module(n).total for n in self.parts)

    def validate(self):
        for n, grid in self.blocks.items():
            src_tags = self.parts[n]
            tgt_tags = self.parts[n + 1]
            if len(grid) != len(src_tags):
                raise AlgebraError("block grid row count mismatch")
            for k, row in enumerate(grid):
                if len(row) != len(tgt_tags):
                    raise AlgebraError("block grid column count mismatch")
                for l, blk in enumerate(row):
                    if blk is None:
                        continue
                    sm = tag_module(self.algebra, src_tags[k])
                    tm = tag_module(self.algebra, tgt_tags[l])
                    if blk.source.dims != sm.dims or blk.target.dims != tm.dims:
                        raise AlgebraError("block shape does not match its tags")
                    if not blk.commutes():
                        raise AlgebraError("differential block is not a module map")
        for n in self.parts:
            if (n + 1) in self.parts and (n + 2) in self.parts:
                comp = self.d_full(n).then(self.d_full(n + 1))
                if not comp.is_zero():
                    raise AlgebraError(f"d^2 != 0 at degree {n}")
        return True

    def __eq__(self, other):
        return (
            isinstance(other, Complex)
            and other.algebra is self.algebra
            and other.parts == self.parts
            and {n: g for n, g in other.blocks.items()} == self.blocks
            and other.approx_above == self.approx_above
            and other.approx_below == self.approx_below
        )

    def describe(self):
        out = []
        for n in self.support():
            tags = ",".join(f"{t.kind}{t.vertex + 1}" for t in self.parts[n])
            out.append(f"[{n}: {tags}]")
        return " ".join(out) if out else "[0]"

    # ---- operations ----

    def shift(self, m):
        """Degree shift: result at n is this complex at n + m."""
        if m == 0:
            return self
        parts = {n - m: p for n, p in self.parts.items()}
        sign = self.algebra.field.of((-1) ** (m % 2))
        blocks = {}
        for n, grid in self.blocks.items():
            blocks[n - m] = tuple(
                tuple(b.scale(sign) if (b is not None and m % 2) else b for b in row)
                for row in grid
            )
        above = None if self.approx_above is None else self.approx_above - m
        below = None if self.approx_below is None else self.approx_below - m
        return Complex(self.algebra, parts, blocks, approx_above=above,
                       approx_below=below, validate=False)

    def cut_above(self, t):
        """Drop degrees above t and record the cut."""
        if t is None:
            return self
        parts = {n: p for n, p in self.parts.items() if n <= t}
        blocks = {n: g for n, g in self.blocks.items() if n + 1 <= t}
        above = _combine_approx(self.approx_above, t)
        return Complex(self.algebra, parts, blocks, approx_above=above,
                       approx_below=self.approx_below, validate=False)

    def cut_below(self, b):
        if b is None:
            return self
        parts = {n: p for n, p in self.parts.items() if n >= b}
        blocks = {n: g for n, g in self.blocks.items() if n >= b}
        below = _combine_below(self.approx_below, b)
        return Complex(self.algebra, parts, blocks, approx_above=self.approx_above,
                       approx_below=below, validate=False)

    def homology(self, n):
        """H^n as a Module (untrustworthy outside (approx_below, approx_above))."""
        f = self.d_full(n - 1)
        g = self.d_full(n)
        return homology_module(f, g)

    def homology_dims(self):
        out = {}
        for n in self.support():
            H = self.homology(n)
            if H.total:
                out[n] = H.dims
        return out


def stalk_complex(algebra, tag, degree=0, approx_above=None):
    return Complex(algebra, {degree: (tag,)}, {}, approx_above=approx_above,
                   validate=False)


def zero_complex(algebra):
    return Complex(algebra, {}, {}, validate=False)


def direct_sum_complexes(complexes):
    if not complexes:
        raise AlgebraError("empty direct sum")
    algebra = complexes[0].algebra
    parts = {}
    for X in complexes:
        for n, p in X.parts.items():
            parts.setdefault(n, []).extend(p)
    blocks = {}
    degrees = sorted(parts)
    for n in degrees:
        if (n + 1) not in parts:
            continue
        grid = []
        for X in complexes:
            xp = X.parts.get(n, ())
            xq = X.parts.get(n + 1, ())
            for k in range(len(xp)):
                row = []
                for Y in complexes:
                    yq = Y.parts.get(n + 1, ())
                    if Y is X:
                        row.extend(X.block(n, k, l) for l in range(len(xq)))
                    else:
                        row.extend([None] * len(yq))
                grid.append(row)
        if grid:
            blocks[n] = grid
    above = _combine_approx(*[X.approx_above for X in complexes])
    below = _combine_below(*[X.approx_below for X in complexes])
    S = Complex(algebra, {n: tuple(p) for n, p in parts.items()},
                blocks, approx_above=above, approx_below=below, validate=False)
    return S.cut_above(above).cut_below(below)


class ChainMap:
    """Degreewise module maps commuting with the differentials."""

    def __init__(self, source: Complex, target: Complex, comps, check=True):
        self.source = source
        self.target = target
        self.comps = {int(n): c for n, c in comps.items()}
        if check and not self.commutes():
            raise AlgebraError("not a chain map")

    def comp(self, n):
        c = self.comps.get(n)
        if c is None:
            return ModuleMap.zero(self.source.module(n), self.target.module(n))
        return c

    def commutes(self):
        degrees = set(self.source.parts) | set(self.target.parts)
        for n in degrees:
            lhs = self.comp(n).then(self.target.d_full(n))
            rhs = self.source.d_full(n).then(self.comp(n + 1))
            if lhs.full() != rhs.full():
                return False
        return True

    def block(self, n, k, l):
        smaps = self.source.summand_maps(n)
        tmaps = self.target.summand_maps(n)
        return smaps[k][0].then(self.comp(n)).then(tmaps[l][1])

    def then(self, other):
        if other.source is not self.target:
            raise AlgebraError("chain map composition mismatch")
        degrees = set(self.comps) | set(other.comps)
        comps = {n: self.comp(n).then(other.comp(n)) for n in degrees}
        return ChainMap(self.source, other.target, comps, check=False)

    def add(self, other):
        degrees = set(self.comps) | set(other.comps)
        return ChainMap(self.source, self.target,
                        {n: self.comp(n).add(other.comp(n)) for n in degrees},
                        check=False)

    def scale(self, c):
        return ChainMap(self.source, self.target,
                        {n: m.scale(c) for n, m in self.comps.items()}, check=False)

    def is_zero(self):
        return all(c.is_zero() for c in self.comps.values())

    def is_degreewise_iso(self):
        degrees = set(self.source.parts) | set(self.target.parts)
        for n in degrees:
            if self.source.dims_at(n) != self.target.dims_at(n):
                return False
            if not self.comp(n).is_iso():
                return False
        return True

    @classmethod
    def zero(cls, source, target):
        return cls(source, target, {}, check=False)

    @classmethod
    def identity(cls, X):
        return cls(X, X, {n: ModuleMap.identity(X.module(n)) for n in X.parts},
                   check=False)


def cone(f: ChainMap):
    """Mapping cone with the triangle maps.

    Returns (C, include_target, project_shift_source): Y -> C and
    C -> source shifted by one.
    """
    X, Y = f.source, f.target
    algebra = X.algebra
    above = _combine_approx(
        None if X.approx_above is None else X.approx_above - 1,
        Y.approx_above,
    )
    below = _combine_below(
        None if X.approx_below is None else X.approx_below - 1,
        Y.approx_below,
    )
    parts = {}
    degrees = set()
    for n in X.parts:
        degrees.add(n - 1)
    degrees |= set(Y.parts)
    for n in sorted(degrees):
        if above is not None and n > above:
            continue
        if below is not None and n < below:
            continue
        p = tuple(X.parts.get(n + 1, ())) + tuple(Y.parts.get(n, ()))
        if p:
            parts[n] = p
    blocks = {}
    minus_one = algebra.field.of(-1)
    for n in sorted(parts):
        if (n + 1) not in parts:
            continue
        xp = X.parts.get(n + 1, ())
        yp = Y.parts.get(n, ())
        xq = X.parts.get(n + 2, ())
        yq = Y.parts.get(n + 1, ())
        grid = []
        for k in range(len(xp)):
            row = []
            for l in range(len(xq)):
                b = X.block(n + 1, k, l)
                row.append(None if b is None else b.scale(minus_one))
            for l in range(len(yq)):
                row.append(f.block(n + 1, k, l))
            grid.append(row)
        for k in range(len(yp)):
            row = [None] * len(xq)
            for l in range(len(yq)):
                row.append(Y.block(n, k, l))
            grid.append(row)
        blocks[n] = grid
    C = Complex(algebra, parts, blocks, approx_above=above,
                approx_below=below, validate=False)

    inc_comps = {}
    for n in Y.parts:
        if n not in C.parts:
            continue
        src = Y.module(n)
        tgt = C.module(n)
        xoff = [sum(tag_module(algebra, t).dims[v] for t in X.parts.get(n + 1, ()))
                for v in range(algebra.quiver.n)]
        blocks_inc = []
        for v in range(algebra.quiver.n):
            m = Mat.zeros(algebra.field, src.dims[v], tgt.dims[v]).data
            m = [list(r) for r in m]
            for r in range(src.dims[v]):
                m[r][xoff[v] + r] = algebra.field.one()
            blocks_inc.append(Mat(algebra.field, m, ncols=tgt.dims[v]))
        inc_comps[n] = ModuleMap(src, tgt, blocks_inc, check=False)
    inc = ChainMap(Y, C, inc_comps, check=False)

    SX = X.shift(1)
    proj_comps = {}
    for n in C.parts:
        src = C.module(n)
        tgt = SX.module(n)
        blocks_pr = []
        for v in range(algebra.quiver.n):
            # the shifted-source block sits first in the cone ordering
            m = [[algebra.field.zero()] * tgt.dims[v] for _ in range(src.dims[v])]
            for r in range(tgt.dims[v]):
                m[r][r] = algebra.field.one()
            blocks_pr.append(Mat(algebra.field, m, ncols=tgt.dims[v]))
        proj_comps[n] = ModuleMap(src, tgt, blocks_pr, check=False)
    proj = ChainMap(C, SX, proj_comps, check=False)
    return C, inc, proj


# ---- minimization ----

MinimizeResult = namedtuple("MinimizeResult", ["complex", "to_min", "from_min", "homotopy"])


def _find_cancellable(X: Complex):
    for n in sorted(X.blocks):
        grid = X.blocks[n]
        for k, row in enumerate(grid):
            for l, blk in enumerate(row):
                if blk is None:
                    continue
                if blk.source.dims == blk.target.dims and blk.is_iso():
                    return n, k, l
    return None


def _drop_index(parts, idx):
    return tuple(p for i, p in enumerate(parts) if i != idx)


def _cancel_step(X: Complex, n, k, l):
    """Cancel summand k of degree n against summand l of degree n+1."""
    algebra = X.algebra
    f = algebra.field
    phi = X.block(n, k, l)
    phi_inv = phi.inverse()

    new_parts = dict(X.parts)
    new_parts[n] = _drop_index(X.parts[n], k)
    new_parts[n + 1] = _drop_index(X.parts[n + 1], l)
    new_parts = {m: p for m, p in new_parts.items() if p}

    def blk(m, a, b):
        return X.block(m, a, b)

    new_blocks = {}
    for m in X.blocks:
        src = X.parts[m]
        tgt = X.parts[m + 1]
        if m == n:
            rows = []
            for a in range(len(src)):
                if a == k:
                    continue
                row = []
                for b in range(len(tgt)):
                    if b == l:
                        continue
                    delta = blk(m, a, b)
                    gamma = blk(m, a, l)
                    beta = blk(m, k, b)
                    if gamma is not None and beta is not None:
                        corr = gamma.then(phi_inv).then(beta)
                        delta = corr.scale(f.of(-1)) if delta is None else delta.add(corr.scale(f.of(-1)))
                    row.append(delta)
                rows.append(row)
            new_blocks[m] = rows
        elif m == n - 1:
            rows = []
            for a in range(len(src)):
                rows.append([blk(m, a, b) for b in range(len(tgt)) if b != k])
            new_blocks[m] = rows
        elif m == n + 1:
            rows = []
            for a in range(len(src)):
                if a == l:
                    continue
                rows.append([blk(m, a, b) for b in range(len(tgt))])
            new_blocks[m] = rows
        else:
            new_blocks[m] = [list(r) for r in X.blocks[m]]
    # the constructor drops grids whose degrees lost all summands
    Y = Complex(algebra, new_parts, new_blocks, approx_above=X.approx_above,
                approx_below=X.approx_below, validate=False)

    # witnesses: g: X -> Y, fm: Y -> X, h: X -> X[-1]
    g_comps = {}
    f_comps = {}
    for m in set(X.parts):
        Xm = X.module(m)
        Ym = Y.module(m)
        if m not in (n, n + 1):
            ident = ModuleMap.identity(Xm)
            g_comps[m] = ident
            f_comps[m] = ident
            continue
        smaps_X = X.summand_maps(m)
        drop = k if m == n else l
        keep = [i for i in range(len(X.parts[m])) if i != drop]
        smaps_Y = Y.summand_maps(m) if m in Y.parts else []
        # projection then inclusion, identity on kept parts
        gm = ModuleMap.zero(Xm, Ym)
        fm = ModuleMap.zero(Ym, Xm)
        for newpos, oldpos in enumerate(keep):
            gm = gm.add(smaps_X[oldpos][1].then(smaps_Y[newpos][0]))
            fm = fm.add(smaps_Y[newpos][1].then(smaps_X[oldpos][0]))
        g_comps[m] = gm
        f_comps[m] = fm
    # corrections
    smaps_n = X.summand_maps(n)
    smaps_n1 = X.summand_maps(n + 1)
    if (n + 1) in Y.parts:
        # g at degree n+1: v-part maps by -phi_inv @ beta into kept summands
        gm = g_comps[n + 1]
        for b in range(len(X.parts[n + 1])):
            if b == l:
                continue
            beta = X.block(n, k, b)
            if beta is None:
                continue
            newpos = b if b < l else b - 1
            corr = (smaps_n1[l][1].then(phi_inv).then(beta)
                    .then(Y.summand_maps(n + 1)[newpos][0]))
            gm = gm.add(corr.scale(f.of(-1)))
        g_comps[n + 1] = gm
    if n in Y.parts:
        # f at degree n: kept summand a gains -gamma @ phi_inv into the u-part
        fm = f_comps[n]
        for a in range(len(X.parts[n])):
            if a == k:
                continue
            gamma = X.block(n, a, l)
            if gamma is None:
                continue
            newpos = a if a < k else a - 1
            corr = (Y.summand_maps(n)[newpos][1].then(gamma).then(phi_inv)
                    .then(smaps_n[k][0]))
            fm = fm.add(corr.scale(f.of(-1)))
        f_comps[n] = fm
    h_comps = {n + 1: smaps_n1[l][1].then(phi_inv).then(smaps_n[k][0])}

    g = ChainMap(X, Y, g_comps, check=False)
    fmap = ChainMap(Y, X, f_comps, check=False)
    return Y, g, fmap, h_comps


def minimize(X: Complex, verify=True) -> MinimizeResult:
    """Strip all cancellable summand pairs; returns witnesses.

    to_min: X -> Xmin, from_min: Xmin -> X with to_min after from_min the
    identity, and identity minus (from_min then to_min) equal to dh + hd.
    """
    cur = X
    g_total = ChainMap.identity(X)
    f_total = ChainMap.identity(X)
    h_total = {}
    while True:
        found = _find_cancellable(cur)
        if found is None:
            break
        n, k, l = found
        nxt, g, fm, h = _cancel_step(cur, n, k, l)
        # h_total = h_total + g_total h f_total (as maps on X)
        new_h = dict(h_total)
        for m, hm in h.items():
            term = g_total.comp(m).then(hm).then(f_total.comp(m - 1))
            if m in new_h:
                new_h[m] = new_h[m].add(term)
            else:
                new_h[m] = term
        h_total = new_h
        g_total = g_total.then(g)
        f_total = fm.then(f_total)
        cur = nxt
    if verify:
        _verify_minimize(X, cur, g_total, f_total, h_total)
    return MinimizeResult(cur, g_total, f_total, h_total)


def _verify_minimize(X, Y, g, fm, h):
    if not g.commutes() or not fm.commutes():
        raise AlgebraError("minimize witnesses are not chain maps")
    for n in Y.parts:
        comp = fm.comp(n).then(g.comp(n))
        if comp.full() != ModuleMap.identity(Y.module(n)).full():
            raise AlgebraError("minimize: g f != id on the minimal complex")
    degrees = set(X.parts)
    for n in degrees:
        lhs = ModuleMap.identity(X.module(n)).full().sub(
            g.comp(n).then(fm.comp(n)).full())
        rhs = ModuleMap.zero(X.module(n), X.module(n)).full()
        hn = h.get(n)
        hn1 = h.get(n + 1)
        if hn is not None:
            rhs = rhs.add(hn.then(X.d_full(n - 1)).full())
        if hn1 is not None:
            rhs = rhs.add(X.d_full(n).then(hn1).full())
        if lhs != rhs:
            raise AlgebraError("minimize: homotopy witness fails")


# ---- complexes of plain vector spaces ----

class VectComplex:
    """Cochain complex of finite-dimensional vector spaces over a field."""

    def __init__(self, field, dims, diffs, check=True):
        self.field = field
        self.dims = {int(n): int(d) for n, d in dims.items() if d}
        self.diffs = {}
        for n, m in diffs.items():
            n = int(n)
            if self.dims.get(n, 0) and self.dims.get(n + 1, 0):
                self.diffs[n] = m
        if check:
            self.validate()

    def validate(self):
        for n, m in self.diffs.items():
            if (m.nrows, m.ncols) != (self.dims[n], self.dims[n + 1]):
                raise AlgebraError(f"vect diff shape mismatch at {n}")
            nxt = self.diffs.get(n + 1)
            if nxt is not None and not m.mul(nxt).is_zero():
                raise AlgebraError(f"vect d^2 != 0 at {n}")

    def diff(self, n):
        m = self.diffs.get(n)
        if m is not None:
            return m
        return Mat.zeros(self.field, self.dims.get(n, 0), self.dims.get(n + 1, 0))

    def cycles(self, n):
        """Rows spanning ker(d^n)."""
        d = self.diff(n)
        if self.dims.get(n, 0) == 0:
            return Mat.zeros(self.field, 0, 0)
        if d.ncols == 0:
            return Mat.identity(self.field, self.dims[n])
        return d.left_kernel_basis()

    def boundaries(self, n):
        """Rows spanning im(d^{n-1}) inside degree n."""
        d = self.diffs.get(n - 1)
        if d is None:
            return Mat.zeros(self.field, 0, self.dims.get(n, 0))
        return d.row_space_basis()

    def homology_dim(self, n):
        return self.cycles(n).nrows - self.boundaries(n).nrows

    def homology_reps(self, n):
        """(reps, boundaries): rows of representatives and the boundary space."""
        Z = self.cycles(n)
        B = self.boundaries(n)
        f = self.field
        rows = [list(r) for r in B.data]
        base_rank = B.rank()
        reps = []
        cur = rows[:]
        cur_rank = base_rank
        for i in range(Z.nrows):
            cand = cur + [list(Z.data[i])]
            r = Mat(f, cand, ncols=self.dims.get(n, 0)).rank()
            if r > cur_rank:
                reps.append(list(Z.data[i]))
                cur = cand
                cur_rank = r
        return Mat(f, reps, ncols=self.dims.get(n, 0)), B

    def class_coords(self, n, vec, reps, B):
        """Coordinates of a cycle's class over the chosen reps; None if not a cycle."""
        f = self.field
        if reps.nrows == 0 and B.nrows == 0:
            return tuple()
        stacked = Mat(f, list(reps.data) + list(B.data), ncols=vec.ncols)
        sol = stacked.transpose().solve(vec.transpose())
        if sol is None:
            return None
        return tuple(sol[i, 0] for i in range(reps.nrows))


# ---- hom complexes ----

class HomComplex:
    """Total hom complex of two tagged complexes, with basis bookkeeping.

    Degree n is the direct sum over k of module homs X^k -> Y^{k+n}; the
    differential sends f to (f then d_Y) - (-1)^n (d_X then f).
    """

    def __init__(self, X: Complex, Y: Complex):
        self.X = X
        self.Y = Y
        self.field = X.algebra.field
        self.bases = {}
        lo = min((m - k for k in X.parts for m in Y.parts), default=0)
        hi = max((m - k for k in X.parts for m in Y.parts), default=-1)
        for n in range(lo, hi + 1):
            entries = []
            for k in sorted(X.parts):
                if (k + n) not in Y.parts:
                    continue
                for h in hom_basis(X.module(k), Y.module(k + n)):
                    entries.append((k, h))
            if entries:
                self.bases[n] = entries
        dims = {n: len(e) for n, e in self.bases.items()}
        diffs = {}
        for n in self.bases:
            if (n + 1) not in self.bases:
                continue
            rows = []
            for (k, h) in self.bases[n]:
                img = {}
                t1 = h.then(self.Y.d_full(k + n))
                if not t1.is_zero():
                    img[k] = t1
                t2 = self.X.d_full(k - 1).then(h)
                if not t2.is_zero():
                    sign = self.field.of(-((-1) ** (n % 2)))
                    t2 = t2.scale(sign)
                    img[k - 1] = img[k - 1].add(t2) if (k - 1) in img else t2
                rows.append(self._coords(n + 1, img))
            diffs[n] = Mat(self.field, rows, ncols=dims.get(n + 1, 0))
        self.vect = VectComplex(self.field, dims, diffs, check=True)

    def _coords(self, n, img):
        """Coordinates of {k: ModuleMap} over the degree-n basis."""
        f = self.field
        entries = self.bases.get(n, [])
        out = [f.zero()] * len(entries)
        by_k = {}
        for i, (k, h) in enumerate(entries):
            by_k.setdefault(k, []).append((i, h))
        for k, m in img.items():
            if m.is_zero():
                continue
            cols = by_k.get(k)
            if cols is None:
                raise AlgebraError("hom complex: image outside basis support")
            vec = _flatten_map(m)
            basis_rows = Mat(f, [_flatten_map(h) for _, h in cols],
                             ncols=len(vec))
            sol = basis_rows.transpose().solve(
                Mat(f, [vec], ncols=len(vec)).transpose())
            if sol is None:
                raise AlgebraError("hom complex: map not in hom basis span")
            for (i, _), r in zip(cols, range(sol.nrows)):
                out[i] = sol[r, 0]
        return out

    def element(self, n, coords):
        """Rebuild {k: ModuleMap} from coordinates at degree n."""
        f = self.field
        entries = self.bases.get(n, [])
        acc = {}
        for c, (k, h) in zip(coords, entries):
            if c == f.zero():
                continue
            term = h.scale(c)
            acc[k] = acc[k].add(term) if k in acc else term
        return acc

    def valid_range(self):
        """(lo, hi) bounds on hom degrees n whose H^n is trustworthy.

        Each cut marker on a factor contributes one bound, read off the
        long exact sequence of the truncation triangle: the error term
        Hom(discarded part, Y) or Hom(X, discarded part) is concentrated
        in hom degrees computable from the supports.  None = unbounded.
        """
        lo, hi = None, None
        if self.X.parts and self.Y.parts:
            xlo, xhi = min(self.X.parts), max(self.X.parts)
            ylo, yhi = min(self.Y.parts), max(self.Y.parts)
            ty = self.Y.approx_above
            if ty is not None:
                v = ty - xhi - 1
                hi = v if hi is None else min(hi, v)
            bx = self.X.approx_below
            if bx is not None:
                v = ylo - bx - 1
                hi = v if hi is None else min(hi, v)
            tx = self.X.approx_above
            if tx is not None:
                v = yhi - tx + 1
                lo = v if lo is None else max(lo, v)
            by = self.Y.approx_below
            if by is not None:
                v = by - xlo + 1
                lo = v if lo is None else max(lo, v)
        return lo, hi

    def valid_hi(self):
        """Highest trustworthy hom degree (None = no upper obstruction)."""
        return self.valid_range()[1]

    def is_valid_degree(self, n):
        lo, hi = self.valid_range()
        return (lo is None or n >= lo) and (hi is None or n <= hi)

    def h_dim(self, n):
        return self.vect.homology_dim(n)

    def chain_classes(self, n=0):
        """Representative cycles at degree n as {k: ModuleMap} dicts."""
        reps, B = self.vect.homology_reps(n)
        out = []
        for i in range(reps.nrows):
            out.append(self.element(n, list(reps.data[i])))
        return out, (reps, B)


def _flatten_map(m: ModuleMap):
    out = []
    for b in m.blocks:
        for row in b.data:
            out.extend(row)
    return out


def chain_map_from_component_dict(X, Y, comps, shift=0):
    """Wrap {k: ModuleMap X^k -> Y^{k+shift}} as a ChainMap X -> Y[shift]."""
    if shift != 0:
        Y = Y.shift(shift)
    return ChainMap(X, Y, comps, check=False)


def h0_chain_maps(X: Complex, Y: Complex):
    """Chain maps X -> Y, one per homotopy class; plus the hom complex."""
    hc = HomComplex(X, Y)
    classes, _ = hc.chain_classes(0)
    out = []
    for cls in classes:
        out.append(ChainMap(X, Y, cls, check=False))
    return out, hc


def complex_iso_search(X: Complex, Y: Complex, tries=200, seed=0):
    """Invertible chain map X -> Y, or None.  Sufficient certificate."""
    import random as _random

    if {n: X.dims_at(n) for n in X.parts} != {n: Y.dims_at(n) for n in Y.parts}:
        return None
    if X.is_zero():
        return ChainMap.zero(X, Y)
    hc = HomComplex(X, Y)
    Z = hc.vect.cycles(0)
    cands = [ChainMap(X, Y, hc.element(0, list(Z.data[i])), check=False)
             for i in range(Z.nrows)]
    for c in cands:
        if c.is_degreewise_iso():
            return c
    f = X.algebra.field
    rng = _random.Random(seed)
    pool = list(range(f.p)) if hasattr(f, "p") else list(range(-3, 4))
    for _ in range(tries):
        acc = ChainMap.zero(X, Y)
        for c in cands:
            acc = acc.add(c.scale(f.of(rng.choice(pool))))
        if acc.is_degreewise_iso():
            return acc
    return None


def complexes_indec_iso(X: Complex, Y: Complex):
    """Decisive for minimal complexes that are indecomposable up to homotopy."""
    if {n: X.dims_at(n) for n in X.parts} != {n: Y.dims_at(n) for n in Y.parts}:
        return False
    if X.is_zero():
        return True
    hcf = HomComplex(X, Y)
    hcb = HomComplex(Y, X)
    Zf = hcf.vect.cycles(0)
    Zb = hcb.vect.cycles(0)
    fwd = [ChainMap(X, Y, hcf.element(0, list(Zf.data[i])), check=False)
           for i in range(Zf.nrows)]
    bwd = [ChainMap(Y, X, hcb.element(0, list(Zb.data[i])), check=False)
           for i in range(Zb.nrows)]
    for u in fwd:
        for v in bwd:
            if u.then(v).is_degreewise_iso():
                return True
    return False
