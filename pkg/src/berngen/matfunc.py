"""Matrix-argument actions q(tau, A) f through banded shifted solves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acceleration import _correction_parts, build_triangle
from .bernoulli import eval_bernoulli, shared_table
from .fourier import TWO_PI, ApproxParams, parity_signs
from .summation import kahan_add

#: 1-norm bound under which the degree-13 diagonal Pade approximant of the
#: exponential is accurate to machine precision
PADE_THETA = 5.371920351148152

#: dense oracles (matrix exponential, reference solve) refuse above this
DENSE_CAP = 1024


class BandedOperator:
    """Real square operator stored as tridiagonal bands or a dense matrix.

    Immutable after construction; matvec and factorization routines never
    write back, so instances are safe to share across threads.
    """

    __slots__ = ("dimension", "sub", "diag", "sup", "_dense", "symmetric")

    def __init__(self, *, dimension: int, sub=None, diag=None, sup=None,
                 dense=None, symmetric: bool = False):
        self.dimension = dimension
        self.sub = sub
        self.diag = diag
        self.sup = sup
        self._dense = dense
        self.symmetric = symmetric

    @classmethod
    def tridiagonal(cls, sub, diag, sup) -> "BandedOperator":
        """Operator from sub-, main and super-diagonals (lengths s-1, s, s-1)."""
        sub = np.asarray(sub, dtype=float)
        diag = np.asarray(diag, dtype=float)
        sup = np.asarray(sup, dtype=float)
        s = diag.shape[0]
        if s < 1:
            raise ValueError("empty diagonal")
        if sub.shape != (s - 1,) or sup.shape != (s - 1,):
            raise ValueError("off-diagonals must have length s - 1")
        return cls(dimension=s, sub=sub, diag=diag, sup=sup,
                   symmetric=bool(np.array_equal(sub, sup)))

    @classmethod
    def diagonal(cls, d) -> "BandedOperator":
        d = np.asarray(d, dtype=float)
        zeros = np.zeros(max(d.shape[0] - 1, 0))
        return cls.tridiagonal(zeros, d, zeros.copy())

    @classmethod
    def dense(cls, matrix) -> "BandedOperator":
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("dense operator must be a square matrix")
        return cls(dimension=matrix.shape[0], dense=matrix,
                   symmetric=bool(np.array_equal(matrix, matrix.T)))

    @property
    def is_tridiagonal(self) -> bool:
        return self._dense is None

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self._dense is not None:
            return self._dense @ v
        y = self.diag * v
        if self.dimension > 1:
            y[1:] += self.sub * v[:-1]
            y[:-1] += self.sup * v[1:]
        return y

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense.copy()
        s = self.dimension
        M = np.zeros((s, s))
        M[np.arange(s), np.arange(s)] = self.diag
        if s > 1:
            M[np.arange(1, s), np.arange(s - 1)] = self.sub
            M[np.arange(s - 1), np.arange(1, s)] = self.sup
        return M

    def norm1(self) -> float:
        """Maximum absolute column sum."""
        if self._dense is not None:
            return float(np.abs(self._dense).sum(axis=0).max())
        s = self.dimension
        col = np.abs(self.diag).astype(float)
        if s > 1:
            col[:-1] += np.abs(self.sub)
            col[1:] += np.abs(self.sup)
        return float(col.max())


def _gbtrf(ab: np.ndarray, kl: int, ku: int) -> np.ndarray:
    """In-place banded LU with partial pivoting.

    ab has 2*kl + ku + 1 rows; matrix entry (i, j) lives at
    ab[kl + ku + i - j, j], with rows 0..kl-1 reserved for pivoting
    fill-in.  Returns the pivot index array.
    """
    n = ab.shape[1]
    d = kl + ku
    ipiv = np.arange(n)
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        col = ab[d:d + km + 1, j]
        jp = int(np.argmax(np.abs(col)))
        if col[jp] == 0.0:
            raise np.linalg.LinAlgError(
                f"shifted system is singular at column {j}")
        ipiv[j] = j + jp
        ju = max(ju, min(j + ku + jp, n - 1))
        if jp:
            cols = np.arange(j, ju + 1)
            r1 = d + jp - (cols - j)
            r2 = d - (cols - j)
            swap = ab[r1, cols].copy()
            ab[r1, cols] = ab[r2, cols]
            ab[r2, cols] = swap
        if km:
            ab[d + 1:d + km + 1, j] /= ab[d, j]
            mult = ab[d + 1:d + km + 1, j]
            for jj in range(j + 1, ju + 1):
                r0 = d + j - jj
                u = ab[r0, jj]
                if u != 0.0:
                    ab[r0 + 1:r0 + km + 1, jj] -= mult * u
    return ipiv


def _gbtrs(ab: np.ndarray, kl: int, ku: int, ipiv: np.ndarray,
           b: np.ndarray) -> np.ndarray:
    """Solve with factors from _gbtrf (single right-hand side)."""
    n = ab.shape[1]
    d = kl + ku
    x = np.array(b, dtype=float)
    for j in range(n - 1):
        jp = ipiv[j]
        if jp != j:
            x[j], x[jp] = x[jp], x[j]
        km = min(kl, n - 1 - j)
        if km:
            x[j + 1:j + km + 1] -= ab[d + 1:d + km + 1, j] * x[j]
    for j in range(n - 1, -1, -1):
        x[j] /= ab[d, j]
        i0 = max(0, j - (kl + ku))
        if i0 < j:
            x[i0:j] -= ab[d + i0 - j:d, j] * x[j]
    return x


def _shifted_pentadiagonal(A: BandedOperator, shift: float) -> np.ndarray:
    """Factorization storage (7 rows) of A^2 + shift*I for tridiagonal A."""
    s = A.dimension
    a = np.zeros(s)
    c = np.zeros(s)
    if s > 1:
        a[1:] = A.sub   # a[i] = A[i, i-1]
        c[:-1] = A.sup  # c[i] = A[i, i+1]
    b = A.diag
    ab = np.zeros((7, s))
    if s > 2:
        ab[2, 2:] = c[:-2] * c[1:-1]
        ab[6, :-2] = a[2:] * a[1:-1]
    if s > 1:
        ab[3, 1:] = c[:-1] * (b[:-1] + b[1:])
        ab[5, :-1] = a[1:] * (b[:-1] + b[1:])
    d0 = b * b + shift
    if s > 1:
        d0[1:] += a[1:] * c[:-1]
        d0[:-1] += c[:-1] * a[1:]
    ab[4, :] = d0
    return ab


class ShiftedFactorization:
    """Reusable factorization of the shifted system A^2 + (2 pi k)^2 I.

    Tridiagonal operators get a pentadiagonal banded LU with partial
    pivoting; everything else falls back to a dense solve.
    """

    def __init__(self, A: BandedOperator, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.shift = (TWO_PI * k) ** 2
        self._A = A
        if A.is_tridiagonal:
            ab = _shifted_pentadiagonal(A, self.shift)
            self._ipiv = _gbtrf(ab, 2, 2)
            self._ab = ab
            self._dense = None
        else:
            M = A.to_dense()
            self._dense = M @ M + self.shift * np.eye(A.dimension)
            self._ab = None
            self._ipiv = None

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._ab is not None:
            return _gbtrs(self._ab, 2, 2, self._ipiv, b)
        return np.linalg.solve(self._dense, b)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """The shifted operator applied to x (for residual checks)."""
        return self._A.matvec(self._A.matvec(x)) + self.shift * x


def shifted_solve(A: BandedOperator, k: int, b) -> np.ndarray:
    """One-off solve of (A^2 + (2 pi k)^2 I) x = b."""
    return ShiftedFactorization(A, k).solve(np.asarray(b, dtype=float))


def h_action(A: BandedOperator, p: int, tau: float, f) -> np.ndarray:
    """Horner evaluation of the polynomial part on a vector.

    Uses only matrix-vector products: sum_{k<p} B_k(tau) A^k / k! applied
    to f.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    table = shared_table(p - 1)
    f = np.asarray(f, dtype=float)
    v = (eval_bernoulli(table, p - 1, tau) / math.factorial(p - 1)) * f
    for k in range(p - 2, -1, -1):
        v = A.matvec(v) + (eval_bernoulli(table, k, tau)
                           / math.factorial(k)) * f
    return v


@dataclass(frozen=True)
class VectorSequence:
    """Base mode vectors for k = start .. start + 2*ell.

    gamma[i] and delta[i] are the cosine- and sine-family vectors of mode
    start + i; the delta entry costs one extra matrix-vector product on
    top of the gamma entry's solve.
    """

    start: int
    gamma: tuple
    delta: tuple


def _family_vectors(p: int, tk: float, u: np.ndarray, v: np.ndarray):
    """Split (A^p x, A^{p+1} x) into the (gamma, delta) family vectors."""
    if p % 2 == 0:
        return u / tk ** (p - 2), v / tk ** (p - 1)
    return v / tk ** (p - 1), u / tk ** (p - 2)


class ActionPlan:
    """tau-independent mode data for evaluating q(tau, A) f.

    One construction performs exactly N + 2*ell shifted solves; evaluate()
    may then be called for any number of tau values without further
    solves.

    scheme 'direct' mirrors the classical construction (solve, then apply
    the full w-power); its noise grows like ||A||^p and it is kept as the
    baseline whose blow-up the error tables document.  scheme 'stabilized'
    rebuilds A^2 x_k as f - (2 pi k)^2 x_k so every mode vector stays
    O(1); it is the default and the one the accelerated evaluation uses.
    """

    def __init__(self, A: BandedOperator, p: int, N: int, ell: int, f,
                 scheme: str = "stabilized"):
        if p < 1:
            raise ValueError("p must be >= 1")
        if N < 1:
            raise ValueError("N must be >= 1")
        if ell < 0:
            raise ValueError("ell must be >= 0")
        if scheme not in ("stabilized", "direct"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.A = A
        self.p, self.N, self.ell = p, N, ell
        self.f = np.asarray(f, dtype=float)
        self.scheme = scheme
        self.solve_count = 0
        sc, ss = parity_signs(p)
        self._signs = (sc, ss)
        cvecs = []
        svecs = []
        gseq = []
        dseq = []
        for k in range(1, N + 2 * ell + 1):
            fact = ShiftedFactorization(A, k)
            x = fact.solve(self.f)
            self.solve_count += 1
            tk = TWO_PI * k
            if scheme == "direct":
                u = x
                for _ in range(p):
                    u = A.matvec(u)
                gv, dv = _family_vectors(p, tk, u, A.matvec(u))
            elif p == 1:
                gv = self.f - fact.shift * x
                dv = tk * A.matvec(x)
            else:
                u = self.f - fact.shift * x  # A^2 x_k, kept O(1)
                for _ in range(p - 2):
                    u = A.matvec(u)
                gv, dv = _family_vectors(p, tk, u, A.matvec(u))
            if k <= N:
                cvecs.append(sc * gv)
                svecs.append(ss * dv)
            if k >= N:
                gseq.append(gv)
                dseq.append(dv)
        self._cvecs = cvecs
        self._svecs = svecs
        if ell:
            self.sequence = VectorSequence(start=N, gamma=tuple(gseq),
                                           delta=tuple(dseq))
            self._gamma_tri = build_triangle(gseq, ell)
            self._delta_tri = build_triangle(dseq, ell)
        else:
            self.sequence = None

    def evaluate(self, tau: float) -> np.ndarray:
        """q(tau, A) f from the precomputed mode vectors (no solves)."""
        acc = h_action(self.A, self.p, tau, self.f)
        comp = np.zeros_like(acc)
        for k in range(1, self.N + 1):
            term = 2.0 * (math.cos(TWO_PI * k * tau) * self._cvecs[k - 1]
                          + math.sin(TWO_PI * k * tau) * self._svecs[k - 1])
            acc, comp = kahan_add(acc, comp, term)
        if self.ell:
            sc, ss = self._signs
            gamma_part, delta_part = _correction_parts(
                self._gamma_tri, self._delta_tri, self.N, self.ell, tau)
            acc = acc + 2.0 * (sc * gamma_part + ss * delta_part)
        return acc


def g_action(A: BandedOperator, params: ApproxParams, f) -> np.ndarray:
    """Classical truncated mode sum applied to f.

    Kept on the 'direct' scheme deliberately: its ||A||^p noise growth is
    the instability the error tables document.
    """
    plan = ActionPlan(A, params.p, params.N, 0, f, scheme="direct")
    return plan.evaluate(params.tau)


def G_action(A: BandedOperator, params: ApproxParams, f) -> np.ndarray:
    """Accelerated action; ell = 0 falls back to g_action bit-for-bit."""
    if params.ell == 0:
        return g_action(A, params, f)
    plan = ActionPlan(A, params.p, params.N, params.ell, f)
    return plan.evaluate(params.tau)


_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)


def _expm_dense(M: np.ndarray) -> np.ndarray:
    """Degree-13 diagonal Pade approximant with scaling and squaring."""
    n = M.shape[0]
    norm = float(np.abs(M).sum(axis=0).max()) if n else 0.0
    squarings = 0
    if norm > PADE_THETA:
        squarings = max(0, math.ceil(math.log2(norm / PADE_THETA)))
    Ms = M / 2.0 ** squarings
    b = _PADE13
    eye = np.eye(n)
    M2 = Ms @ Ms
    M4 = M2 @ M2
    M6 = M2 @ M4
    U = Ms @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
              + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * eye)
    V = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * eye)
    F = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        F = F @ F
    return F


def expm_action(A: BandedOperator, t: float, f) -> np.ndarray:
    """e^{tA} f as a dense computation (dimension capped at DENSE_CAP)."""
    if A.dimension > DENSE_CAP:
        raise ValueError(
            f"dense exponential capped at dimension {DENSE_CAP}")
    f = np.asarray(f, dtype=float)
    return _expm_dense(t * A.to_dense()) @ f


def _phi1_dense(M: np.ndarray) -> np.ndarray:
    """phi_1(M) = sum_k M^k / (k+1)!, read off the augmented exponential.

    exp([[M, I], [0, 0]]) carries phi_1(M) in its upper-right block, which
    avoids forming e^M - I as a difference of nearly equal matrices.
    """
    n = M.shape[0]
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = M
    B[:n, n:] = np.eye(n)
    return _expm_dense(B)[:n, n:]


def reference_solution(A: BandedOperator, tau: float, f) -> np.ndarray:
    """z = (e^A - I)^{-1} e^{tau A} A f, the oracle behind every error table.

    Evaluated as phi_1(A)^{-1} e^{tau A} f, which is the same function of A
    but stays accurate (and defined) when the spectrum clusters at the
    removable singularity, where e^A - I cancels catastrophically.
    """
    if A.dimension > DENSE_CAP:
        raise ValueError(
            f"dense reference capped at dimension {DENSE_CAP}")
    f = np.asarray(f, dtype=float)
    M = A.to_dense()
    rhs = _expm_dense(tau * M) @ f
    return np.linalg.solve(_phi1_dense(M), rhs)


def load_matrix_market(path) -> BandedOperator:
    """Read a coordinate-format matrix (real/integer, general/symmetric)."""
    with open(path) as fh:
        header = fh.readline()
        parts = header.lower().split()
        if (len(parts) < 5 or not parts[0].startswith("%%matrixmarket")
                or parts[1] != "matrix" or parts[2] != "coordinate"):
            raise ValueError(f"{path}: unsupported header {header.strip()!r}")
        field, symmetry = parts[3], parts[4]
        if field not in ("real", "integer"):
            raise ValueError(f"{path}: unsupported field type {field!r}")
        if symmetry not in ("general", "symmetric"):
            raise ValueError(f"{path}: unsupported symmetry {symmetry!r}")
        line = fh.readline()
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
        try:
            rows, cols, nnz = (int(t) for t in line.split())
        except ValueError as exc:
            raise ValueError(f"{path}: malformed size line") from exc
        if rows != cols:
            raise ValueError(f"{path}: only square matrices are supported")
        M = np.zeros((rows, cols))
        seen = 0
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            i_s, j_s, v_s = line.split()[:3]
            i, j, v = int(i_s) - 1, int(j_s) - 1, float(v_s)
            M[i, j] = v
            if symmetry == "symmetric" and i != j:
                M[j, i] = v
            seen += 1
        if seen != nnz:
            raise ValueError(f"{path}: expected {nnz} entries, found {seen}")
    return BandedOperator.dense(M)


def load_tridiagonal(path) -> BandedOperator:
    """Read the compact three-column (sub, diag, super) text format.

    One row per matrix row; the unused first sub and last super entries
    are ignored.
    """
    data = np.loadtxt(path, ndmin=2)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: expected exactly three columns")
    return BandedOperator.tridiagonal(data[1:, 0], data[:, 1], data[:-1, 2])
