"""Bogoliubov Hamiltonian assembly, symplectic diagonalization, and quasi-free
expectation machinery (Wick's rule, sigma and nu).

Conventions. The quadratic Hamiltonian on the excitation modes is
H0 = sum A_ij ad_i a_j + (1/2) sum P_ij (ad_i ad_j + a_i a_j) with
A = q(h+K)q and P = qKq restricted to an orthonormal basis of {phi}^perp.
The diagonalizing transformation is fixed in the gauge where D is diagonal
in quasi-particle coordinates: U0 and V0 map perp coordinates to the
quasi-particle index, the quasi-particle modes are the coordinate vectors of
that index, and U a(f) U* = a(U0 f) + ad(conj(V0 f)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DiagonalizationError, LengthGuardError
from .onebody import HartreeSolution, HermitianOperator, ModelSpec

WICK_MAX_OPS = 12


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Blocks of H0 on {phi}^perp: A (number conserving) and P (pairing)."""

    A: np.ndarray
    P: np.ndarray
    basis_perp: np.ndarray  # columns: orthonormal perp modes in value space

    def __post_init__(self):
        A, P = np.asarray(self.A), np.asarray(self.P)
        scale = max(np.max(np.abs(A)), 1e-300)
        if np.max(np.abs(A - A.conj().T)) > 1e-10 * scale:
            raise ValueError("A block must be Hermitian")
        if np.max(np.abs(P - P.T)) > 1e-10 * max(np.max(np.abs(P)), 1e-300):
            raise ValueError("P block must be symmetric")

    @property
    def n_modes(self) -> int:
        return self.A.shape[0]


def pair_kernel(sol: HartreeSolution, spec: ModelSpec) -> np.ndarray:
    """Operator K with kernel v(x-y) phi(x) phi(y) as a value-space matrix."""
    phi = sol.phi
    return spec.v * np.outer(phi, phi) * sol.basis.dx


def assemble_quadratic(sol: HartreeSolution, spec: ModelSpec) -> QuadraticHamiltonian:
    """Restrict h + K and the pairing K to the perp basis.

    Requires a converged Hartree solution (residual <= 1e-8); signals a
    gapless or degenerate minimizer when A - P has an eigenvalue <= 1e-10.
    """
    if sol.residual > 1e-8:
        raise ValueError(f"Hartree residual {sol.residual:.2e} too large to expand around")
    K = pair_kernel(sol, spec)
    A = sol.perp_matrix(sol.h.matrix + K)
    P = sol.perp_matrix(K)
    gap = np.linalg.eigvalsh((A + A.conj().T) / 2 - (P + P.T) / 2).min()
    if gap <= 1e-10:
        raise DiagonalizationError(
            f"A - P has eigenvalue {gap:.3e} <= 1e-10: gapless or degenerate minimizer")
    return QuadraticHamiltonian(A, P, sol.perp_basis())


@dataclass(frozen=True)
class BogoliubovSolution:
    """Blocks U0, V0, quasi-particle energies D (ascending), and the ground
    energy shift inf spec(H0) = (sum D - tr A)/2."""

    U0: np.ndarray
    V0: np.ndarray
    D: np.ndarray
    xi: np.ndarray  # quasi-particle modes as columns (coordinate vectors in this gauge)
    ground_energy_shift: float

    @property
    def n_modes(self) -> int:
        return self.D.size

    def depletion(self) -> float:
        """Expected excitation number of the quasi-free ground state, ||V0||_HS^2."""
        return float(np.sum(np.abs(self.V0) ** 2))

    def symplectic_defects(self) -> tuple[float, float]:
        """Max deviations of U0*U0 - V0*V0 = 1 and symmetry of U0^T V0."""
        one = self.U0.conj().T @ self.U0 - self.V0.conj().T @ self.V0 - np.eye(self.n_modes)
        sym = self.U0.T @ self.V0 - (self.U0.T @ self.V0).T
        return float(np.max(np.abs(one))), float(np.max(np.abs(sym)))

    def quasiparticle_coefficients(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mode vectors (u, v) such that sum_j c_j b_j^dag = ad(u) - a(v)."""
        return self.U0.T @ c, self.V0.T @ c

    def to_json(self) -> str:
        return json.dumps({
            "U0": self.U0.tolist(),
            "V0": self.V0.tolist(),
            "D": self.D.tolist(),
            "xi": self.xi.tolist(),
            "ground_energy_shift": self.ground_energy_shift,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BogoliubovSolution":
        doc = json.loads(text)
        return cls(np.asarray(doc["U0"]), np.asarray(doc["V0"]), np.asarray(doc["D"]),
                   np.asarray(doc["xi"]), float(doc["ground_energy_shift"]))


def diagonalize(qh: QuadraticHamiltonian) -> BogoliubovSolution:
    """Square-root method for real symmetric blocks with A - P > 0.

    S = (A-P)^{1/2}; the eigendecomposition S(A+P)S = W D^2 W^T yields the
    quasi-particle energies, and U0, V0 are reconstructed from the normal-mode
    matrices S^{+-1} W D^{-+1/2}. W columns are sign-fixed (largest entry
    positive) so the output is reproducible run to run.
    """
    A = np.real((qh.A + qh.A.conj().T) / 2)
    P = np.real((qh.P + qh.P.T) / 2)
    diff_w, diff_v = np.linalg.eigh(A - P)
    if diff_w.min() <= 1e-12:
        raise DiagonalizationError(f"A - P not positive definite (min eig {diff_w.min():.3e})")
    S = diff_v @ np.diag(np.sqrt(diff_w)) @ diff_v.T
    Sinv = diff_v @ np.diag(1.0 / np.sqrt(diff_w)) @ diff_v.T
    w2, W = np.linalg.eigh(S @ (A + P) @ S)
    if w2.min() <= 0:
        raise DiagonalizationError("S(A+P)S not positive definite")
    D = np.sqrt(w2)  # eigh returns ascending order
    for j in range(D.size):
        k = np.argmax(np.abs(W[:, j]))
        if W[k, j] < 0:
            W[:, j] = -W[:, j]
    Eh = np.diag(np.sqrt(D))
    Ehi = np.diag(1.0 / np.sqrt(D))
    U0 = 0.5 * (Eh @ W.T @ Sinv + Ehi @ W.T @ S)
    V0 = 0.5 * (Ehi @ W.T @ S - Eh @ W.T @ Sinv)
    shift = 0.5 * (D.sum() - np.trace(A))
    return BogoliubovSolution(U0, V0, D, np.eye(D.size), float(shift))


# -- quasi-free states ------------------------------------------------------


@dataclass(frozen=True)
class TwoPointFunctions:
    """gamma_ij = <ad_j a_i> and alpha_ij = <a_i a_j> of a quasi-free state."""

    gamma: np.ndarray
    alpha: np.ndarray

    def consistency_defect(self) -> float:
        """Most negative eigenvalue of gamma(1+gamma) - alpha conj(alpha)^T
        (should be >= 0 for a physical quasi-free state), sign-flipped."""
        g, a = self.gamma, self.alpha
        mat = g @ (np.eye(g.shape[0]) + g) - a @ a.conj().T
        return float(max(0.0, -np.linalg.eigvalsh((mat + mat.conj().T) / 2).min()))


def quasifree_two_point(bog: BogoliubovSolution) -> TwoPointFunctions:
    """Two-point functions of the Bogoliubov vacuum U* |Omega>."""
    gamma = bog.V0.conj().T @ bog.V0
    alpha = bog.U0.conj().T @ bog.V0.conj()
    return TwoPointFunctions(gamma, alpha.conj() if np.iscomplexobj(alpha) else alpha)


def pair_partitions(n: int) -> list[list[tuple[int, int]]]:
    """All (n-1)!! pairings of {0..n-1}, first unpaired index paired with each later one."""
    if n % 2:
        return []

    def rec(rest):
        if not rest:
            yield []
            return
        head = rest[0]
        for k in range(1, len(rest)):
            partner = rest[k]
            remainder = rest[1:k] + rest[k + 1:]
            for tail in rec(remainder):
                yield [(head, partner)] + tail

    return list(rec(list(range(n))))


def _pair_value(tp: TwoPointFunctions, op1, op2) -> complex:
    """Ordered two-point value <op1 op2> for ops of the form (dagger, f)."""
    d1, f1 = op1
    d2, f2 = op2
    g, a = tp.gamma, tp.alpha
    if d1 and d2:
        # <ad(f1) ad(f2)> = sum f1_i f2_j conj(alpha_ji)
        return f2 @ a.conj() @ f1
    if d1 and not d2:
        # <ad(f1) a(f2)> = sum f1_i conj(f2_j) gamma_ji
        return np.conj(f2) @ g @ f1
    if not d1 and d2:
        # <a(f1) ad(f2)> = <f1,f2> + <ad(f2) a(f1)>
        return np.vdot(f1, f2) + np.conj(f1) @ g @ f2
    # <a(f1) a(f2)>
    return np.conj(f1) @ a @ np.conj(f2)


def wick_expectation(tp: TwoPointFunctions, ops) -> complex:
    """Quasi-free expectation of an ordered product of a/ad operators.

    ``ops`` is a list of (dagger: bool, f: vector in perp coordinates). Odd
    lengths give 0; even lengths sum the (2n-1)!! pairings of ordered
    two-point values. Guarded at 12 operators.
    """
    ops = list(ops)
    if len(ops) > WICK_MAX_OPS:
        raise LengthGuardError(f"{len(ops)} operators exceeds the guard of {WICK_MAX_OPS}")
    if len(ops) % 2:
        return 0.0
    total = 0.0
    for pairing in pair_partitions(len(ops)):
        prod = 1.0
        for i, j in pairing:
            prod = prod * _pair_value(tp, ops[i], ops[j])
        total += prod
    return total


# -- sigma and nu -----------------------------------------------------------


@dataclass(frozen=True)
class NuSigma:
    """nu = U0 q B phi + conj(V0 q B phi) in quasi-particle coordinates."""

    nu: np.ndarray
    sigma: float
    sigma_iid: float
    degenerate: bool


def nu_sigma(bog: BogoliubovSolution, B: HermitianOperator, sol: HartreeSolution) -> NuSigma:
    """Limiting standard deviation sigma = ||nu|| of the ground-state CLT.

    Flags (never raises) sigma_degenerate when sigma < 1e-10, i.e. phi is an
    eigenstate of B and the CLT hypothesis fails.
    """
    f = sol.perp_coords(B.matrix @ sol.phi)
    nu = bog.U0 @ f + np.conj(bog.V0 @ f)
    sigma = float(np.linalg.norm(nu))
    return NuSigma(nu, sigma, float(np.linalg.norm(f)), sigma < 1e-10)
