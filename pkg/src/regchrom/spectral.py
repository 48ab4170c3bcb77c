"""Eigenbasis construction and verification for the tensor-square matrices.

The Gaussian steps of the pair-coefficient asymptotics rest on three
linear-algebra facts, each checked here numerically rather than assumed:

  * a specific orthonormal basis {f(p) x f(q)} simultaneously
    diagonalises (J-I)^(x2) + (k-1)^2 I and (J+I)^(x2), with integer
    eigenvalues and multiplicities that sum to k^2 (verify_evec2);
  * vectors vec(A) of zero-row-sum, zero-column-sum matrices are
    orthogonal to the basis vectors involving f(k), their squared
    coordinates on the rest reproduce sum a_ij^2, and the same quantity
    equals the (J+I)^(x2) quadratic form of the cropped matrix
    (evec3_identities);
  * det(r^2 (11^T + (k-2) I)) = r^(2k) (2k-2) (k-2)^(k-1), the constant
    behind the k-dimensional Gaussian integral (gaussian_det_check).

Verification is per claimed eigenpair (residual of B f - lambda f) with
multiplicities established by the rank of B - lambda I via pivoted QR;
no general-purpose eigensolver is consulted, so the checks certify the
claims as stated instead of trusting a solver's eigenvalue clustering.

vec() stacks columns (Fortran order), under which
(vec A)^T (u x v) = v^T A u.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InputError

RESIDUAL_TOL = 1e-9
ORTHONORMALITY_TOL = 1e-12


def base_vectors(k):
    """The k orthonormal vectors f(1..k): for p < k,
    f(p) = sqrt(p/(p+1)) * (-(1/p) * (e_1+..+e_p) + e_{p+1}); f(k) = 1/sqrt(k)."""
    if k < 2:
        raise InputError("need k >= 2")
    vecs = np.zeros((k, k))
    for p in range(1, k):
        v = np.zeros(k)
        v[:p] = -1.0 / p
        v[p] = 1.0
        vecs[p - 1] = np.sqrt(p / (p + 1.0)) * v
    vecs[k - 1] = np.ones(k) / np.sqrt(k)
    return vecs


_BASIS_CACHE = {}


def basis_f(k):
    """All k^2 Kronecker products f(p) x f(q) as a read-only array
    F[p-1, q-1, :]."""
    if k not in _BASIS_CACHE:
        base = base_vectors(k)
        out = np.zeros((k, k, k * k))
        for p in range(k):
            for q in range(k):
                out[p, q] = np.kron(base[p], base[q])
        out.setflags(write=False)
        _BASIS_CACHE[k] = out
        if len(_BASIS_CACHE) > 16:
            _BASIS_CACHE.pop(next(iter(_BASIS_CACHE)))
    return _BASIS_CACHE[k]


def orthonormality_defect(k):
    """max |<f(p,q), f(r,s)> - delta| over all pairs of basis vectors."""
    flat = basis_f(k).reshape(k * k, k * k)
    gram = flat @ flat.T
    return float(np.max(np.abs(gram - np.eye(k * k))))


@dataclass
class EigReport:
    label: str
    spectrum: list = field(default_factory=list)  # (eigenvalue, claimed, computed)
    max_residual: float = 0.0
    orthonormality_defect: float = 0.0
    smallest_eigenvalue: float = 0.0
    passed: bool = True

    def as_dict(self):
        return {
            "label": self.label,
            "spectrum": [
                {"eigenvalue": ev, "claimed_multiplicity": cm, "computed_multiplicity": xm}
                for ev, cm, xm in self.spectrum
            ],
            "max_residual": self.max_residual,
            "orthonormality_defect": self.orthonormality_defect,
            "smallest_eigenvalue": self.smallest_eigenvalue,
            "passed": self.passed,
        }


def _rank_by_qr(mat, tol):
    r = scipy.linalg.qr(mat, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    return int(np.sum(diag > tol))


def _check_matrix(label, B, claims, basis, eig_of):
    """Residual + multiplicity verification of the claimed spectrum."""
    k2 = B.shape[0]
    report = EigReport(label=label)
    max_res = 0.0
    for p in range(basis.shape[0]):
        for q in range(basis.shape[1]):
            f = basis[p, q]
            lam = eig_of(p + 1, q + 1)
            res = float(np.max(np.abs(B @ f - lam * f)))
            max_res = max(max_res, res)
    report.max_residual = max_res
    scale = float(np.max(np.abs(B)))
    for lam, claimed in sorted(claims.items()):
        rank = _rank_by_qr(B - lam * np.eye(k2), tol=1e-6 * scale)
        report.spectrum.append((float(lam), claimed, k2 - rank))
    report.smallest_eigenvalue = min(claims)
    report.orthonormality_defect = orthonormality_defect(int(np.sqrt(k2)))
    report.passed = (
        max_res <= RESIDUAL_TOL
        and report.orthonormality_defect <= ORTHONORMALITY_TOL
        and all(cm == xm for _, cm, xm in report.spectrum)
        and sum(cm for _, cm, _ in report.spectrum) == k2
    )
    return report


def verify_evec2(k):
    """Verify both tensor-square spectra for a given k; returns the two
    reports as a dict with an overall 'passed'."""
    if k < 3:
        raise InputError("need k >= 3")
    basis = basis_f(k)
    J = np.ones((k, k))
    I = np.eye(k)

    B1 = np.kron(J - I, J - I) + (k - 1) ** 2 * np.eye(k * k)
    claims1 = {
        k * k - 2 * k + 2: (k - 1) ** 2,
        (k - 1) * (k - 2): 2 * (k - 1),
        2 * (k - 1) ** 2: 1,
    }

    def eig1(p, q):
        if p < k and q < k:
            return k * k - 2 * k + 2
        if p == k and q == k:
            return 2 * (k - 1) ** 2
        return (k - 1) * (k - 2)

    B2 = np.kron(J + I, J + I)
    claims2 = {1: (k - 1) ** 2, k + 1: 2 * (k - 1), (k + 1) ** 2: 1}

    def eig2(p, q):
        if p < k and q < k:
            return 1
        if p == k and q == k:
            return (k + 1) ** 2
        return k + 1

    shifted = _check_matrix("(J-I)^x2 + (k-1)^2 I", B1, claims1, basis, eig1)
    plain = _check_matrix("(J+I)^x2", B2, claims2, basis, eig2)
    return {
        "k": k,
        "shifted": shifted,
        "plain": plain,
        "passed": shifted.passed and plain.passed,
    }


@dataclass
class ZeroSumIdentityReport:
    squared_sum: float
    coordinate_sum: float
    cropped_form: float
    residual_projection: float
    residual_coordinates: float
    residual_cropped_form: float
    passed: bool

    def max_residual(self):
        return max(
            self.residual_projection,
            self.residual_coordinates,
            self.residual_cropped_form,
        )


def evec3_identities(A, tol=RESIDUAL_TOL):
    """Check the three zero-sum-matrix identities for a k-by-k matrix A
    whose rows and columns each sum to 0 (within 1e-12)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("A must be square")
    k = A.shape[0]
    if k < 2:
        raise InputError("need k >= 2")
    worst = max(np.max(np.abs(A.sum(axis=0))), np.max(np.abs(A.sum(axis=1))))
    if worst > 1e-12:
        raise InputError(f"rows/columns must sum to 0; worst sum {worst:.3e}")

    basis = basis_f(k)
    vec_a = A.flatten(order="F")
    sq = float(np.sum(A * A))

    res_a = 0.0
    for i in range(k):
        res_a = max(res_a, abs(float(vec_a @ basis[i, k - 1])))
        res_a = max(res_a, abs(float(vec_a @ basis[k - 1, i])))

    coords = sum(
        float(vec_a @ basis[i, j]) ** 2 for i in range(k - 1) for j in range(k - 1)
    )
    res_b = abs(coords - sq)

    cropped = A[: k - 1, : k - 1]
    vec_c = cropped.flatten(order="F")
    JI = np.ones((k - 1, k - 1)) + np.eye(k - 1)
    form = float(vec_c @ np.kron(JI, JI) @ vec_c)
    res_c = abs(form - sq)

    return ZeroSumIdentityReport(
        squared_sum=sq,
        coordinate_sum=coords,
        cropped_form=form,
        residual_projection=res_a,
        residual_coordinates=res_b,
        residual_cropped_form=res_c,
        passed=max(res_a, res_b, res_c) <= tol,
    )


def gaussian_integral_quadrature_check(A, rel_tol=1e-6, points=400):
    """Tensor-grid quadrature of int exp(-theta^T A theta / 2) d theta
    against (2 pi)^(dim/2) det(A)^(-1/2); dims 1..3 only."""
    A = np.asarray(A, dtype=float)
    dim = A.shape[0]
    if dim > 3:
        raise InputError("quadrature oracle supports dimension <= 3")
    eigs = np.linalg.eigvalsh(A)
    if eigs[0] <= 0:
        raise InputError("matrix must be positive definite")
    # 7 sigma truncation and ~0.2 sigma spacing: both trapezoid error terms
    # for a Gaussian are then far below the relative tolerance
    half_width = 7.0 / np.sqrt(eigs[0])
    n_pts = points if dim < 3 else 96
    axis = np.linspace(-half_width, half_width, n_pts)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    theta = np.stack([g.ravel() for g in grids], axis=1)
    vals = np.exp(-0.5 * np.einsum("ni,ij,nj->n", theta, A, theta))
    integral = vals.reshape([n_pts] * dim)
    for _ in range(dim):
        integral = np.trapezoid(integral, axis, axis=-1)
    exact = (2 * np.pi) ** (dim / 2) / np.sqrt(np.linalg.det(A))
    return bool(abs(float(integral) - exact) <= rel_tol * exact)


def gaussian_det_check(k, r, rel_tol=RESIDUAL_TOL):
    """Check det(r^2 (11^T + (k-2) I_k)) against r^(2k) (2k-2) (k-2)^(k-1)
    numerically; for k = 3 additionally cross-checks the Gaussian
    integral identity by tensor-grid quadrature."""
    if k < 3:
        raise InputError("need k >= 3")
    if r <= 0:
        raise InputError("need r > 0")
    A = r**2 * (np.ones((k, k)) + (k - 2) * np.eye(k))
    numeric = float(np.linalg.det(A))
    formula = float(r ** (2 * k) * (2 * k - 2) * (k - 2) ** (k - 1))
    ok = abs(numeric - formula) <= rel_tol * abs(formula)
    if k <= 3:
        ok = ok and gaussian_integral_quadrature_check(A)
    return ok
