"""Variational machinery over the Birkhoff polytope.

phi(M) is the exponential growth rate of a colour-overlap term in the
second moment of the balanced-colouring count:

    phi(M) = -(1/k) sum m_pq log m_pq
             + (d/2) log(1 - 2/k + (1/k^2) sum m_pq^2),

over doubly stochastic k-by-k matrices M, with 0 log 0 = 0. Below the
threshold d_{k-1} = 2(k-1) ln(k-1) the centre J/k is the unique
maximiser, quantified by the entropy-gap inequality

    phi(M) <= phi(J/k) - (d_{k-1} - d)/(4(k-1)^2) * (sum m_pq^2 - 1),

whose slack is an_bound_gap (never negative). maximize_phi verifies the
maximiser numerically by projected gradient ascent with Dykstra
projection onto the polytope.

The flow-table bound: for nonnegative ell_{pqrs} (p != r, q != s,
symmetric in the two index pairs) with marginals
sum_{r != p, s != q} ell_{pqrs} = d*m_pq,

    psi(L) = prod m_pq^(d m_pq) / prod ell^ell
           <= ((sum_{p!=r,q!=s} m_pq m_rs) / (dk))^(dk/2),

with equality at ell*_{pqrs} proportional to m_pq*m_rs. psi is
evaluated through the equivalent pairwise form
prod (m_pq m_rs / ell)^ell, which agrees with the product formula on
the feasible set and extends it continuously to the relaxed polytope
(fixed total mass dk/2) where ell* always lives; ell* additionally
satisfies the per-entry marginals at special M such as J/k and
permutation matrices.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

DS_TOL = 1e-10


def threshold_degree(k):
    """d_{k-1} = 2(k-1) ln(k-1), the uniqueness threshold for phi."""
    return 2.0 * (k - 1) * math.log(k - 1)


def validate_doubly_stochastic(M, tol=DS_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("M must be a square matrix")
    if np.any(M < 0):
        raise InputError(f"M has a negative entry (min {M.min():.3e})")
    row = np.max(np.abs(M.sum(axis=1) - 1))
    col = np.max(np.abs(M.sum(axis=0) - 1))
    if max(row, col) > tol:
        raise InputError(
            f"M is not doubly stochastic within {tol:g}"
            f" (row defect {row:.3e}, column defect {col:.3e})"
        )
    return M


def _entropy_sum(M):
    pos = M[M > 0]
    return float(np.sum(pos * np.log(pos)))


def phi(M, d, tol=DS_TOL):
    """The growth-rate functional; M must be doubly stochastic."""
    M = validate_doubly_stochastic(M, tol)
    k = M.shape[0]
    quad = 1.0 - 2.0 / k + float(np.sum(M * M)) / k**2
    return -_entropy_sum(M) / k + d / 2.0 * math.log(quad)


def phi_center(d, k):
    """phi at the centre J/k: log k + d log(1 - 1/k)."""
    return math.log(k) + d * math.log(1.0 - 1.0 / k)


def an_bound_gap(M, d, k=None, tol=DS_TOL):
    """Slack of the entropy-gap inequality at M; contract: >= -1e-9 for
    every doubly stochastic M when d < d_{k-1}."""
    M = validate_doubly_stochastic(M, tol)
    k = M.shape[0] if k is None else k
    dk1 = threshold_degree(k)
    if d >= dk1:
        raise InputError(f"requires d < 2(k-1)ln(k-1) = {dk1:.6f}, got d = {d}")
    sq = float(np.sum(M * M))
    return phi_center(d, k) - phi(M, d, tol) - (dk1 - d) / (4.0 * (k - 1) ** 2) * (sq - 1.0)


def random_doubly_stochastic(k, rng, iterations=200, defect=1e-12):
    """Sinkhorn normalisation of i.i.d. positive entries."""
    M = rng.standard_exponential((k, k)) + 1e-12
    for _ in range(iterations):
        M /= M.sum(axis=1, keepdims=True)
        M /= M.sum(axis=0, keepdims=True)
        worst = max(
            float(np.max(np.abs(M.sum(axis=1) - 1))),
            float(np.max(np.abs(M.sum(axis=0) - 1))),
        )
        if worst < defect:
            break
    return M


def _project_affine(X):
    """Euclidean projection onto {M : all row sums and column sums are 1}."""
    k = X.shape[0]
    a = X.sum(axis=1) - 1.0
    b = X.sum(axis=0) - 1.0
    t = -a.sum() / (2.0 * k)
    u = -(a + t) / k
    v = -(b + t) / k
    return X + u[:, None] + v[None, :]


def project_birkhoff(X, iterations=400, tol=1e-13):
    """Dykstra's alternating projections onto the row/column affine set
    and the nonnegative orthant; converges to the Euclidean projection
    onto the Birkhoff polytope."""
    X = np.asarray(X, dtype=float)
    p = np.zeros_like(X)
    q = np.zeros_like(X)
    Y = X
    for _ in range(iterations):
        Z = _project_affine(Y + p)
        p = Y + p - Z
        Y_new = np.maximum(Z + q, 0.0)
        q = Z + q - Y_new
        if np.max(np.abs(Y_new - Y)) < tol:
            Y = Y_new
            break
        Y = Y_new
    return Y


def _phi_gradient(M, d, k, floor=1e-12):
    quad = 1.0 - 2.0 / k + float(np.sum(M * M)) / k**2
    safe = np.maximum(M, floor)
    return -(1.0 + np.log(safe)) / k + d * M / (k**2 * quad)


@dataclass
class AscentRecord:
    start: str
    iterations: int
    phi_final: float
    converged: bool


@dataclass
class PhiMaximum:
    M: np.ndarray
    phi: float
    converged: bool
    within_uniqueness_range: bool
    distance_to_center: float
    trace: list = field(default_factory=list)


def maximize_phi(d, k, restarts=50, seed=0, tol=1e-12, max_iter=2000):
    """Projected gradient ascent on the Birkhoff polytope with
    backtracking line search (step halved from 1.0) and multistart.

    Starts: the centre, every restart-budgeted permutation matrix, and
    Sinkhorn-random interior points. Result carries a non-convergence
    flag instead of failing silently; below d_{k-1} the contract is
    M* = J/k and phi* = phi(J/k)."""
    if k < 3:
        raise InputError("need k >= 3")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(17,)))
    within = d < threshold_degree(k)

    starts = [("center", np.full((k, k), 1.0 / k))]
    perm = np.eye(k)
    starts.append(("permutation", perm.copy()))
    while len(starts) < restarts:
        starts.append((f"sinkhorn-{len(starts)}", random_doubly_stochastic(k, rng)))
    starts = starts[:restarts]

    best = None
    trace = []
    all_converged = True
    for name, M in starts:
        M = project_birkhoff(M)
        val = phi(np.maximum(M, 0.0), d)
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            grad = _phi_gradient(M, d, k)
            step = 1.0
            improved = False
            while step > 1e-16:
                cand = project_birkhoff(M + step * grad)
                cand = np.maximum(cand, 0.0)
                cand_val = phi(cand, d)
                if cand_val > val + 1e-15:
                    M, val = cand, cand_val
                    improved = True
                    break
                step /= 2.0
            if not improved:
                converged = True
                break
        if not converged:
            all_converged = False
        trace.append(AscentRecord(start=name, iterations=it, phi_final=val, converged=converged))
        key = (val, tuple(-M.ravel()))
        if best is None or key > best[0]:
            best = (key, M, val)

    _, M_star, phi_star = best
    center = np.full((k, k), 1.0 / k)
    dist = float(np.max(np.abs(M_star - center)))
    return PhiMaximum(
        M=M_star,
        phi=phi_star,
        converged=all_converged,
        within_uniqueness_range=within,
        distance_to_center=dist,
        trace=trace,
    )


def _pair_mass(M):
    """sum over ordered (p,q),(r,s) with p != r, q != s of m_pq m_rs."""
    k = M.shape[0]
    return float(k * k - 2 * k + np.sum(M * M))


def flow_maximizer(M, d):
    """The closed-form optimum ell*_{pqrs} = d k m_pq m_rs / S on the
    relaxed polytope, as a (k,k,k,k) array zeroed on invalid indices."""
    M = validate_doubly_stochastic(M)
    k = M.shape[0]
    S = _pair_mass(M)
    L = d * k * np.einsum("pq,rs->pqrs", M, M) / S
    return _zero_invalid(L)


def _zero_invalid(L):
    k = L.shape[0]
    for i in range(k):
        L[i, :, i, :] = 0.0
        L[:, i, :, i] = 0.0
    return L


def flow_marginal_defects(L, M, d):
    """Worst violations of symmetry and of the marginal constraints
    sum_{r!=p,s!=q} ell_pqrs = d m_pq; returns (name, value) of the worst."""
    k = M.shape[0]
    sym = float(np.max(np.abs(L - np.transpose(L, (2, 3, 0, 1)))))
    marg = L.sum(axis=(2, 3)) - d * np.asarray(M, dtype=float)
    worst_idx = np.unravel_index(np.argmax(np.abs(marg)), marg.shape)
    defects = [
        ("symmetry ell[pqrs] != ell[rspq]", sym),
        (f"marginal at (p,q)=({worst_idx[0]},{worst_idx[1]})", float(np.abs(marg).max())),
    ]
    invalid = _zero_invalid(L.copy())
    stray = float(np.max(np.abs(L - invalid)))
    defects.append(("nonzero entry at p==r or q==s", stray))
    neg = float(max(0.0, -L.min()))
    defects.append(("negative entry", neg))
    return max(defects, key=lambda kv: kv[1])


def psi_value(L, M):
    """log-domain evaluation of the pairwise form
    prod over unordered pairs of (m_pq m_rs / ell)^ell, returned as psi."""
    M = np.asarray(M, dtype=float)
    prod_mm = np.einsum("pq,rs->pqrs", M, M)
    mask = L > 0
    if np.any(prod_mm[mask] == 0):
        return 0.0
    terms = L[mask] * (np.log(prod_mm[mask]) - np.log(L[mask]))
    return math.exp(0.5 * float(np.sum(terms)))


@dataclass
class FlowBoundReport:
    bound: float
    l_star: np.ndarray
    psi_at_l_star: float
    psi: float | None

    def attains(self, rel=1e-9):
        return abs(self.psi_at_l_star - self.bound) <= rel * self.bound


def psi_bound_check(M, d, k=None, L=None, tol=DS_TOL):
    """Evaluate the flow bound at M: the bound ((S)/(dk))^(dk/2), the
    closed-form maximiser L*, psi(L*), and psi(L) for a user-supplied
    feasible L (validated against symmetry and the marginals, naming the
    worst-violated constraint on failure)."""
    M = validate_doubly_stochastic(M, tol)
    k = M.shape[0] if k is None else k
    S = _pair_mass(M)
    bound = math.exp(d * k / 2.0 * math.log(S / (d * k)))
    l_star = flow_maximizer(M, d)
    report = FlowBoundReport(
        bound=bound,
        l_star=l_star,
        psi_at_l_star=psi_value(l_star, M),
        psi=None,
    )
    if L is not None:
        L = np.asarray(L, dtype=float)
        if L.shape != (k, k, k, k):
            raise InputError(f"flow table must have shape {(k, k, k, k)}")
        name, worst = flow_marginal_defects(L, M, d)
        if worst > tol:
            raise InputError(f"flow table infeasible: {name} violated by {worst:.3e}")
        report.psi = psi_value(L, M)
    return report


def perturb_flow_nullspace(L, rng, scale=0.05, moves=None):
    """Random perturbation of a flow table inside the marginal null space:
    signed 4-cycle swaps +e at (a,b),(e,c) and -e at (a,c),(e,b) over
    compatible label pairs, symmetrised, scaled to keep entries >= 0."""
    k = L.shape[0]
    moves = moves if moves is not None else 4 * k
    eta = np.zeros_like(L)

    def compatible(x, y):
        return x[0] != y[0] and x[1] != y[1]

    labels = [(p, q) for p in range(k) for q in range(k)]
    done = 0
    attempts = 0
    while done < moves and attempts < 1000 * moves:
        attempts += 1
        a, e, b, c = (labels[rng.integers(len(labels))] for _ in range(4))
        if len({a, e, b, c}) < 4:
            continue
        if not (
            compatible(a, b) and compatible(a, c) and compatible(e, b) and compatible(e, c)
        ):
            continue
        eps = rng.standard_normal()
        for (x, y), s in (((a, b), eps), ((a, c), -eps), ((e, b), -eps), ((e, c), eps)):
            eta[x[0], x[1], y[0], y[1]] += s
            eta[y[0], y[1], x[0], x[1]] += s
        done += 1
    norm = float(np.max(np.abs(eta)))
    if norm == 0:
        return L.copy()
    # keep the perturbed table nonnegative: limit by the smallest headroom
    room = L[np.abs(eta) > 0]
    cap = float(room.min()) if room.size else 0.0
    eta *= min(scale, 0.9 * cap / norm if cap > 0 else 0.0) / norm
    return L + eta
