"""Builder that lowers named-variable LMI programs to SdpProblem form.

Callers declare symmetric or rectangular matrix variables, combine them into
affine matrix expressions (constant matrices on either side of ``@``, sums,
transposes, block assembly), then post PSD constraints, elementwise matrix
equalities, and a linear trace objective. ``build`` produces the standard
form: one PSD slack block per LMI, every named scalar entry as a free
variable, and one equality row per slack entry tying the two together.

The reverse direction is kept testable: ``VarMap.embed`` maps an assignment
of the named variables to a standard-form point, and ``VarMap.extract``
reads named values back out of an SdpSolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotSymmetric, UnknownVariable
from .sdp import SdpProblem, SdpSolution
from .kernels import svec_indices, tri


@dataclass(frozen=True)
class _VarDecl:
    name: str
    kind: str          # "sym" | "rect"
    rows: int
    cols: int
    offset: int        # slot offset at build time (assigned in declaration order)

    @property
    def n_slots(self) -> int:
        return tri(self.rows) if self.kind == "sym" else self.rows * self.cols


class MatExpr:
    """Affine matrix-valued expression: const + sum_v coeff[v] . slots(v)."""

    __array_priority__ = 100  # keep ndarray @ MatExpr routed to __rmatmul__

    def __init__(self, builder, shape, const=None, coeff=None):
        self.builder = builder
        self.shape = tuple(shape)
        self.const = np.zeros(self.shape) if const is None else np.asarray(const, dtype=float)
        self.coeff: dict[str, np.ndarray] = coeff or {}

    def _wrap(self, other) -> "MatExpr":
        if isinstance(other, MatExpr):
            if other.builder is not None and self.builder is not None \
                    and other.builder is not self.builder:
                raise UnknownVariable("expressions come from different builders")
            return other
        arr = np.asarray(other, dtype=float)
        if arr.ndim == 0:
            if self.shape[0] != self.shape[1]:
                raise DimensionMismatch("scalar shift requires a square expression")
            arr = float(arr) * np.eye(self.shape[0])
        return MatExpr(None, arr.shape, arr)

    def __add__(self, other):
        o = self._wrap(other)
        if o.shape != self.shape:
            raise DimensionMismatch(f"cannot add shapes {self.shape} and {o.shape}")
        coeff = dict(self.coeff)
        for k, v in o.coeff.items():
            coeff[k] = coeff[k] + v if k in coeff else v
        return MatExpr(self.builder or o.builder, self.shape, self.const + o.const, coeff)

    __radd__ = __add__

    def __neg__(self):
        return MatExpr(self.builder, self.shape, -self.const,
                       {k: -v for k, v in self.coeff.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) + (-self)

    def __mul__(self, alpha):
        alpha = float(alpha)
        return MatExpr(self.builder, self.shape, alpha * self.const,
                       {k: alpha * v for k, v in self.coeff.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MatExpr):
            raise DimensionMismatch("products of two variable expressions are not affine")
        c = np.asarray(other, dtype=float)
        if c.shape[0] != self.shape[1]:
            raise DimensionMismatch(f"matmul shapes {self.shape} x {c.shape}")
        coeff = {k: np.einsum("abv,bc->acv", v, c) for k, v in self.coeff.items()}
        return MatExpr(self.builder, (self.shape[0], c.shape[1]), self.const @ c, coeff)

    def __rmatmul__(self, other):
        c = np.asarray(other, dtype=float)
        if c.shape[1] != self.shape[0]:
            raise DimensionMismatch(f"matmul shapes {c.shape} x {self.shape}")
        coeff = {k: np.einsum("ab,bcv->acv", c, v) for k, v in self.coeff.items()}
        return MatExpr(self.builder, (c.shape[0], self.shape[1]), c @ self.const, coeff)

    @property
    def T(self) -> "MatExpr":
        return MatExpr(self.builder, (self.shape[1], self.shape[0]), self.const.T,
                       {k: v.transpose(1, 0, 2) for k, v in self.coeff.items()})

    def trace(self) -> "LinExpr":
        if self.shape[0] != self.shape[1]:
            raise DimensionMismatch("trace requires a square expression")
        return LinExpr(self.builder, float(np.trace(self.const)),
                       {k: np.einsum("aav->v", v) for k, v in self.coeff.items()})


class LinExpr:
    """Affine scalar expression used for objectives."""

    def __init__(self, builder, const=0.0, coeff=None):
        self.builder = builder
        self.const = float(const)
        self.coeff: dict[str, np.ndarray] = coeff or {}

    def __add__(self, other):
        if not isinstance(other, LinExpr):
            return LinExpr(self.builder, self.const + float(other), dict(self.coeff))
        coeff = dict(self.coeff)
        for k, v in other.coeff.items():
            coeff[k] = coeff[k] + v if k in coeff else v
        return LinExpr(self.builder or other.builder, self.const + other.const, coeff)

    __radd__ = __add__

    def __mul__(self, alpha):
        alpha = float(alpha)
        return LinExpr(self.builder, alpha * self.const,
                       {k: alpha * v for k, v in self.coeff.items()})

    __rmul__ = __mul__


def blockmat(rows: list[list]) -> MatExpr:
    """Assembles a block matrix of MatExpr / ndarray entries."""
    exprs = [[e if isinstance(e, MatExpr) else MatExpr(None, np.asarray(e, dtype=float).shape,
                                                       np.asarray(e, dtype=float))
              for e in row] for row in rows]
    builder = next((e.builder for row in exprs for e in row if e.builder is not None), None)
    row_h = [row[0].shape[0] for row in exprs]
    col_w = [e.shape[1] for e in exprs[0]]
    for row in exprs:
        if [e.shape[1] for e in row] != col_w:
            raise DimensionMismatch("inconsistent block column widths")
        if any(e.shape[0] != row[0].shape[0] for e in row):
            raise DimensionMismatch("inconsistent block row heights")
    total = (sum(row_h), sum(col_w))
    const = np.zeros(total)
    coeff: dict[str, np.ndarray] = {}
    r0 = 0
    for row, h in zip(exprs, row_h):
        c0 = 0
        for e, w in zip(row, col_w):
            const[r0:r0 + h, c0:c0 + w] = e.const
            for k, v in e.coeff.items():
                if k not in coeff:
                    coeff[k] = np.zeros((total[0], total[1], v.shape[2]))
                coeff[k][r0:r0 + h, c0:c0 + w, :] += v
            c0 += w
        r0 += h
    return MatExpr(builder, total, const, coeff)


@dataclass
class VarMap:
    decls: dict[str, _VarDecl]
    n_free: int

    def extract(self, sol: SdpSolution) -> dict[str, np.ndarray]:
        return {name: self.value_from_free(name, sol.free) for name in self.decls}

    def value_from_free(self, name: str, f: np.ndarray) -> np.ndarray:
        d = self.decls[name]
        slots = f[d.offset:d.offset + d.n_slots]
        if d.kind == "rect":
            return slots.reshape(d.rows, d.cols)
        out = np.zeros((d.rows, d.rows))
        ii, jj, _ = svec_indices(d.rows)
        out[ii, jj] = slots
        out[jj, ii] = slots
        return out

    def free_from_values(self, values: dict[str, np.ndarray]) -> np.ndarray:
        f = np.zeros(self.n_free)
        for name, d in self.decls.items():
            val = np.asarray(values[name], dtype=float)
            if d.kind == "rect":
                f[d.offset:d.offset + d.n_slots] = val.reshape(-1)
            else:
                ii, jj, _ = svec_indices(d.rows)
                f[d.offset:d.offset + d.n_slots] = val[ii, jj]
        return f


class LmiBuilder:
    """Collects variables, constraints and objective; lowers via build()."""

    def __init__(self):
        self._decls: dict[str, _VarDecl] = {}
        self._psd: list[MatExpr] = []
        self._eq: list[MatExpr] = []
        self._objective: LinExpr | None = None
        self._offset = 0

    def sym_var(self, name: str, n: int) -> MatExpr:
        return self._declare(name, "sym", n, n)

    def rect_var(self, name: str, rows: int, cols: int) -> MatExpr:
        return self._declare(name, "rect", rows, cols)

    def _declare(self, name, kind, rows, cols):
        if name in self._decls:
            raise UnknownVariable(f"variable {name!r} already declared")
        decl = _VarDecl(name, kind, rows, cols, self._offset)
        self._decls[name] = decl
        self._offset += decl.n_slots
        tensor = np.zeros((rows, cols, decl.n_slots))
        if kind == "rect":
            for i in range(rows):
                for j in range(cols):
                    tensor[i, j, i * cols + j] = 1.0
        else:
            ii, jj, _ = svec_indices(rows)
            for slot, (i, j) in enumerate(zip(ii, jj)):
                tensor[i, j, slot] = 1.0
                tensor[j, i, slot] = 1.0
        return MatExpr(self, (rows, cols), coeff={name: tensor})

    def _check_owned(self, expr: MatExpr):
        if expr.builder is not None and expr.builder is not self:
            raise UnknownVariable("expression belongs to a different builder")
        for name in expr.coeff:
            if name not in self._decls:
                raise UnknownVariable(f"unknown variable {name!r}")

    def add_psd(self, expr: MatExpr):
        """Posts expr >= 0 (PSD); expr must be symmetric to 1e-12 scale."""
        self._check_owned(expr)
        if expr.shape[0] != expr.shape[1]:
            raise DimensionMismatch("PSD constraint requires a square expression")
        scale = max(1.0, float(np.abs(expr.const).max(initial=0.0)),
                    *(float(np.abs(v).max(initial=0.0)) for v in expr.coeff.values()))
        asym = float(np.abs(expr.const - expr.const.T).max(initial=0.0))
        for v in expr.coeff.values():
            asym = max(asym, float(np.abs(v - v.transpose(1, 0, 2)).max(initial=0.0)))
        if asym > 1e-12 * scale:
            raise NotSymmetric(f"LMI block asymmetry {asym:.2e} exceeds tolerance")
        sym = MatExpr(self, expr.shape, 0.5 * (expr.const + expr.const.T),
                      {k: 0.5 * (v + v.transpose(1, 0, 2)) for k, v in expr.coeff.items()})
        self._psd.append(sym)

    def add_eq(self, expr: MatExpr):
        """Posts expr == 0 elementwise."""
        self._check_owned(expr)
        self._eq.append(expr)

    def minimize(self, objective: LinExpr):
        if not isinstance(objective, LinExpr):
            raise DimensionMismatch("objective must be a scalar LinExpr (use .trace())")
        if objective.builder is not None and objective.builder is not self:
            raise UnknownVariable("objective belongs to a different builder")
        self._objective = objective

    def _coeff_rows(self, expr: MatExpr) -> np.ndarray:
        """(r*c, n_free) stacked coefficient matrix in C order over entries."""
        out = np.zeros((expr.shape[0] * expr.shape[1], self._offset))
        for name, v in expr.coeff.items():
            d = self._decls[name]
            out[:, d.offset:d.offset + d.n_slots] = v.reshape(-1, v.shape[2])
        return out

    def build(self) -> tuple[SdpProblem, VarMap]:
        if self._objective is None:
            self._objective = LinExpr(self)
        if not self._psd:
            raise DimensionMismatch("at least one PSD constraint is required")
        nf = self._offset
        c_free = np.zeros(nf)
        for name, v in self._objective.coeff.items():
            if name not in self._decls:
                raise UnknownVariable(f"objective references unknown variable {name!r}")
            d = self._decls[name]
            c_free[d.offset:d.offset + d.n_slots] = v

        dims = [e.shape[0] for e in self._psd]
        tri_total = sum(tri(d) for d in dims)
        rows_psd, rows_free, rhs = [], [], []

        blk_off = 0
        for expr, d in zip(self._psd, dims):
            ii, jj, scale = svec_indices(d)
            coeffs = self._coeff_rows(expr).reshape(d, d, nf)
            for slot, (i, j) in enumerate(zip(ii, jj)):
                arow = np.zeros(tri_total)
                arow[blk_off + slot] = 1.0 / scale[slot]
                rows_psd.append(arow)
                rows_free.append(-coeffs[i, j])
                rhs.append(expr.const[i, j])
            blk_off += tri(d)

        for expr in self._eq:
            coeffs = self._coeff_rows(expr)
            flat_const = expr.const.reshape(-1)
            for idx in range(coeffs.shape[0]):
                rows_psd.append(np.zeros(tri_total))
                rows_free.append(coeffs[idx])
                rhs.append(-flat_const[idx])

        a_psd = np.array(rows_psd).reshape(len(rhs), tri_total)
        a_free = np.array(rows_free).reshape(len(rhs), nf)
        b = np.array(rhs)

        # drop exactly duplicated equality rows (symmetric user equalities)
        stacked = np.hstack([a_psd, a_free, b[:, None]])
        _, keep = np.unique(stacked, axis=0, return_index=True)
        keep = np.sort(keep)
        a_psd, a_free, b = a_psd[keep], a_free[keep], b[keep]

        prob = SdpProblem(dims, nf, [np.zeros((d, d)) for d in dims], c_free,
                          a_psd, a_free, b, obj_offset=self._objective.const)
        return prob, VarMap(dict(self._decls), nf)

    def embed(self, values: dict[str, np.ndarray]) -> tuple[list[np.ndarray], np.ndarray]:
        """Maps named values to (slack blocks, free vector) of the standard form."""
        varmap = VarMap(dict(self._decls), self._offset)
        f = varmap.free_from_values(values)
        blocks = []
        for expr in self._psd:
            val = expr.const.copy()
            for name, v in expr.coeff.items():
                d = self._decls[name]
                val = val + v @ f[d.offset:d.offset + d.n_slots]
            blocks.append(val)
        return blocks, f


def assemble_lmi(builder: LmiBuilder) -> tuple[SdpProblem, VarMap]:
    """Lowers a populated builder to standard form (same as builder.build())."""
    return builder.build()
