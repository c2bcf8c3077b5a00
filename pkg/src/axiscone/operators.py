"""Dense real symmetric operators: spectra, heat semigroups, complexification.

Everything lives at finite dimension with the Euclidean inner product, so all
operators are bounded and the spectrum is the eigenvalue set.  Spectral data
is computed once per operator and cached; all returned arrays are read-only.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorrespondenceViolation,
    DegenerateTop,
    NegativeTime,
    NonConvergence,
)
from .seeding import rng_for

TAU_SYM = 1e-12          # relative symmetry defect admitted on input matrices
TAU_GAP = 1e-9           # relative eigenvalue-gap tolerance for simplicity
RECON_TOL = 1e-10        # relative Frobenius reconstruction tolerance
CORRESPONDENCE_TOL = 1e-9


def as_vector(entries):
    """Validate and return a finite 1-D float vector."""
    v = np.asarray(entries, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-D real vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite (no NaN/Inf)")
    return v


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_dim: int

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self):
        return float(self.eigenvalues[-1])

    @property
    def operator_norm(self):
        return float(np.max(np.abs(self.eigenvalues)))

    def reconstruct(self):
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


class SymmetricOperator:
    """Dense real symmetric matrix with cached spectral data.

    The stored matrix is the symmetrization (M + M^T)/2; inputs whose
    asymmetry exceeds TAU_SYM relative to the largest entry are rejected.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("expected a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        defect = float(np.max(np.abs(m - m.T))) if m.size else 0.0
        if defect > TAU_SYM * scale:
            raise ValueError(
                f"matrix asymmetry {defect:.3e} exceeds {TAU_SYM:.0e} * {scale:.3e}"
            )
        m = (m + m.T) / 2.0
        m.setflags(write=False)
        self._matrix = m
        self._decomposition = None

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @property
    def decomposition(self):
        if self._decomposition is None:
            self._decomposition = spectral_decompose(self)
        return self._decomposition

    @property
    def norm(self):
        """Operator 2-norm, max |eigenvalue|."""
        return self.decomposition.operator_norm

    def apply(self, v):
        return self._matrix @ v

    def __add__(self, other):
        if isinstance(other, SymmetricOperator):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return SymmetricOperator(self._matrix + other._matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SymmetricOperator):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return SymmetricOperator(self._matrix - other._matrix)
        return NotImplemented

    def __mul__(self, scalar):
        return SymmetricOperator(self._matrix * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SymmetricOperator(dim={self.dim})"

    @staticmethod
    def identity(dim):
        return SymmetricOperator(np.eye(dim))


@dataclass(frozen=True)
class ComplexOperator:
    """Complex square matrix split into real and imaginary parts.

    With imag_part = 0 and real_part symmetric this is the canonical
    extension of a real symmetric operator to the complexified space.
    """

    real_part: np.ndarray
    imag_part: np.ndarray

    @staticmethod
    def from_matrix(matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("expected a square matrix")
        re = np.array(m.real, dtype=float)
        im = np.array(m.imag, dtype=float)
        re.setflags(write=False)
        im.setflags(write=False)
        return ComplexOperator(re, im)

    @property
    def matrix(self):
        return self.real_part + 1j * self.imag_part

    @property
    def dim(self):
        return self.real_part.shape[0]

    def apply(self, v):
        return self.matrix @ np.asarray(v, dtype=complex)

    def is_hermitian(self, tol=1e-12):
        m = self.matrix
        scale = max(1.0, float(np.max(np.abs(m))))
        return float(np.max(np.abs(m - m.conj().T))) <= tol * scale


def spectral_decompose(A):
    """Full eigendecomposition of a symmetric operator.

    Returns eigenvalues ascending with orthonormal eigenvector columns;
    reconstruction and orthonormality are accurate to RECON_TOL relative.
    """
    try:
        w, q = np.linalg.eigh(A.matrix)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigh failed: {exc}") from exc
    w.setflags(write=False)
    q.setflags(write=False)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=q, source_dim=A.dim)


def _fix_sign(u):
    """Deterministic sign: first coordinate of meaningful magnitude is positive."""
    scale = np.max(np.abs(u))
    if scale == 0.0:
        return u
    idx = int(np.argmax(np.abs(u) > 1e-12 * scale))
    return -u if u[idx] < 0 else u


def top_eigen(A, tau_gap=TAU_GAP, require_simple=False):
    """Largest eigenvalue, its unit eigenvector, and a simplicity flag.

    simple is True iff the gap to the second-largest eigenvalue exceeds
    tau_gap * max(1, |lambda_max|).  The eigenvector sign is fixed so the
    first nonzero coordinate is positive; repeated calls are bit-identical.
    """
    dec = A.decomposition
    lam = dec.max_eigenvalue
    if A.dim == 1:
        simple = True
    else:
        gap = lam - float(dec.eigenvalues[-2])
        simple = gap > tau_gap * max(1.0, abs(lam))
    if require_simple and not simple:
        raise DegenerateTop(
            f"top eigenvalue {lam:.6g} is degenerate within tau_gap={tau_gap:.1e}"
        )
    u0 = _fix_sign(np.array(dec.eigenvectors[:, -1]))
    u0 /= np.linalg.norm(u0)
    u0.setflags(write=False)
    return lam, u0, simple


def bottom_eigen(A, tau_gap=TAU_GAP, require_simple=False):
    """Smallest eigenvalue, its unit eigenvector, and a simplicity flag."""
    from .errors import DegenerateBottom

    dec = A.decomposition
    mu = dec.min_eigenvalue
    if A.dim == 1:
        simple = True
    else:
        gap = float(dec.eigenvalues[1]) - mu
        simple = gap > tau_gap * max(1.0, abs(mu))
    if require_simple and not simple:
        raise DegenerateBottom(
            f"bottom eigenvalue {mu:.6g} is degenerate within tau_gap={tau_gap:.1e}"
        )
    u = _fix_sign(np.array(dec.eigenvectors[:, 0]))
    u /= np.linalg.norm(u)
    u.setflags(write=False)
    return mu, u, simple


def perp_basis(u0):
    """Orthonormal basis of the orthogonal complement of a unit vector.

    Columns 2..n of the Householder reflection mapping e1 onto -sign(u0[0])*u0
    span u0-perp exactly; the construction is deterministic.
    """
    u0 = as_vector(u0)
    n = u0.size
    if n == 1:
        return np.zeros((1, 0))
    e1 = np.zeros(n)
    e1[0] = 1.0
    sign = 1.0 if u0[0] >= 0 else -1.0
    w = u0 + sign * e1
    h = np.eye(n) - 2.0 * np.outer(w, w) / float(w @ w)
    return h[:, 1:]


def restricted_top(A, u0):
    """Largest eigenvalue of A restricted to the complement of u0.

    Returns None in dimension 1 (the complement is empty).
    """
    basis = perp_basis(u0)
    if basis.shape[1] == 0:
        return None
    block = basis.T @ A.matrix @ basis
    return float(np.max(np.linalg.eigvalsh((block + block.T) / 2.0)))


def heat_semigroup(T, s):
    """exp(-s T) through the spectral decomposition; symmetric positive definite."""
    if s < 0:
        raise NegativeTime(f"semigroup time s={s} must be nonnegative")
    if s == 0:
        return SymmetricOperator.identity(T.dim)
    dec = T.decomposition
    q = dec.eigenvectors
    return SymmetricOperator((q * np.exp(-s * dec.eigenvalues)) @ q.T)


def complexify(T):
    """Canonical extension of T to the complexified space: (u + iv) -> Tu + iTv."""
    return ComplexOperator.from_matrix(np.asarray(T.matrix, dtype=complex))


def _realify(m):
    """Complex n x n matrix as the real 2n x 2n matrix [[Re,-Im],[Im,Re]]."""
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


@dataclass(frozen=True)
class CorrespondenceReport:
    """Outcome of the real/complex correspondence clauses (iii)-(v), (vii)."""

    clauses: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(passed for passed, _ in self.clauses.values())


def correspondence_check(T, seed=0, n_samples=32, tol=CORRESPONDENCE_TOL):
    """Numerically verify that T and its complex extension agree.

    Checked clauses:
      (iii) smallest singular values coincide (injectivity agreement),
      (iv)  eigenvalue sets coincide and each complex eigenspace has twice
            the real dimension of its real counterpart,
      (v)   operator norms coincide,
      (vii) sampled Rayleigh quotients of the extension are bounded below by
            gamma exactly when the least eigenvalue is >= gamma.

    The complex-side quantities are computed on the realified 2n x 2n matrix,
    so the two routes stay independent.  Raises CorrespondenceViolation on
    the first failing clause; these statements are theorems, so a failure
    means a linear-algebra bug.
    """
    m = T.matrix
    n = T.dim
    scale = max(1.0, T.norm)
    mc = _realify(np.asarray(m, dtype=complex))
    sv_real = np.linalg.svd(m, compute_uv=False)
    sv_cplx = np.linalg.svd(mc, compute_uv=False)
    clauses = {}

    gap_iii = abs(float(sv_real[-1]) - float(sv_cplx[-1]))
    clauses["iii"] = (gap_iii <= tol * scale, gap_iii)

    dec = T.decomposition
    w_real = dec.eigenvalues
    w_cplx = np.sort(np.linalg.eigvalsh(mc))
    pair_gap = float(np.max(np.abs(np.repeat(w_real, 2) - w_cplx)))
    # cluster real eigenvalues by gaps; each cluster must appear on the
    # complex side with exactly twice the real multiplicity
    mult_ok = True
    cluster_tol = max(tol * scale, 1e-12)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and w_real[j + 1] - w_real[j] <= cluster_tol:
            j += 1
        k_real = j - i + 1
        lo = w_real[i] - cluster_tol / 2
        hi = w_real[j] + cluster_tol / 2
        k_cplx = int(np.sum((w_cplx >= lo) & (w_cplx <= hi)))
        if k_cplx != 2 * k_real:
            mult_ok = False
        i = j + 1
    clauses["iv"] = (pair_gap <= tol * scale and mult_ok, pair_gap)

    gap_v = abs(dec.operator_norm - float(sv_cplx[0]))
    clauses["v"] = (gap_v <= tol * scale, gap_v)

    gamma = dec.min_eigenvalue
    rng = rng_for(seed, 0)
    xs = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    bottom = np.asarray(dec.eigenvectors[:, 0], dtype=complex)
    xs = np.vstack([xs, bottom[None, :], 1j * bottom[None, :]])
    tm = np.asarray(m, dtype=complex)
    quad = np.real(np.einsum("si,ij,sj->s", xs.conj(), tm, xs))
    norms = np.real(np.einsum("si,si->s", xs.conj(), xs))
    lower_ok = bool(np.all(quad >= gamma * norms - tol * scale * norms))
    # gamma' strictly above the least eigenvalue must be violated by the
    # bottom eigenvector, which is among the samples
    gamma_above = gamma + max(tol * scale * 10, 0.1 * scale)
    violated_above = bool(np.any(quad < gamma_above * norms - tol * scale * norms))
    margin_vii = float(np.min(quad - gamma * norms))
    clauses["vii"] = (lower_ok and violated_above, margin_vii)

    report = CorrespondenceReport(clauses=clauses)
    for name, (passed, margin) in clauses.items():
        if not passed:
            raise CorrespondenceViolation(name, f"margin {margin:.3e} (tol {tol:.0e})")
    return report


def write_matrix(A, path):
    """Plain-text matrix format: 'dim n' then n rows, 17 significant digits."""
    m = A.matrix if isinstance(A, SymmetricOperator) else np.asarray(A, dtype=float)
    lines = [f"dim {m.shape[0]}"]
    for row in m:
        lines.append(" ".join(format(x, ".17g") for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2 or tokens[0] != "dim":
        raise ValueError("matrix file must start with 'dim n'")
    n = int(tokens[1])
    values = [float(t) for t in tokens[2:]]
    if len(values) != n * n:
        raise ValueError(f"expected {n * n} entries, found {len(values)}")
    return SymmetricOperator(np.array(values).reshape(n, n))
