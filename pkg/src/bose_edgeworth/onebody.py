"""Discretized one-body space, model operators, and the Hartree ground-state solver.

The one-body Hilbert space is an M-site lattice with inner product
<f,g> = sum_i conj(f_i) g_i dx. All operators are stored as plain M x M
matrices acting on value vectors; with uniform spacing the weighted adjoint
coincides with the ordinary conjugate transpose, so Hermiticity checks are
plain matrix checks. Matrix elements between delta-normalized site modes
equal the raw matrix entries, which is what the many-body modules consume.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import MultipleMinimaWarning, NonConvergenceError

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class ModeBasis:
    """Lattice discretization of the one-body space (d = 1)."""

    positions: np.ndarray
    boundary: str = "dirichlet"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if pos.size < 2:
            raise ValueError("need at least 2 lattice sites")
        steps = np.diff(pos)
        if np.any(steps <= 0):
            raise ValueError("positions must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-10, atol=0):
            raise ValueError("only uniform lattices are supported")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def M(self) -> int:
        return self.positions.size

    @property
    def dx(self) -> float:
        return float(self.positions[1] - self.positions[0])

    def inner(self, f, g) -> complex:
        return np.vdot(f, g) * self.dx

    def norm(self, f) -> float:
        return float(np.sqrt(self.inner(f, f).real))

    @classmethod
    def grid(cls, M: int, x_min: float, x_max: float, boundary: str = "dirichlet") -> "ModeBasis":
        return cls(np.linspace(x_min, x_max, M), boundary)


@dataclass(frozen=True)
class HermitianOperator:
    """A matrix together with the basis it acts on; Hermiticity is checked once."""

    matrix: np.ndarray
    basis: ModeBasis

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        object.__setattr__(self, "matrix", mat)
        if mat.shape != (self.basis.M, self.basis.M):
            raise ValueError("operator shape does not match basis")
        scale = max(np.max(np.abs(mat)), 1e-300)
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_RTOL * scale:
            raise ValueError("matrix is not Hermitian within tolerance")

    def __call__(self, f):
        return self.matrix @ f

    def expectation(self, f) -> float:
        return float(self.basis.inner(f, self.matrix @ f).real)


def build_laplacian(basis: ModeBasis) -> HermitianOperator:
    """Second-order finite-difference -Laplacian on the lattice."""
    M, dx = basis.M, basis.dx
    lap = np.zeros((M, M))
    np.fill_diagonal(lap, 2.0)
    idx = np.arange(M - 1)
    lap[idx, idx + 1] = -1.0
    lap[idx + 1, idx] = -1.0
    if basis.boundary == "periodic":
        lap[0, -1] = -1.0
        lap[-1, 0] = -1.0
    return HermitianOperator(lap / dx**2, basis)


@dataclass(frozen=True)
class ModelSpec:
    """Trap, interaction kernel, and coupling defining one model instance.

    ``kernel`` stores v(x_i - x_j) unscaled; the coupling g multiplies it
    wherever the interaction enters (property ``v``). The kernel must be
    symmetric and positive semidefinite (discrete stand-in for a non-negative
    Fourier transform) and the trap non-negative.
    """

    basis: ModeBasis
    trap: np.ndarray
    kernel: np.ndarray
    coupling: float
    kernel_meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        trap = np.asarray(self.trap, dtype=float)
        kern = np.asarray(self.kernel, dtype=float)
        object.__setattr__(self, "trap", trap)
        object.__setattr__(self, "kernel", kern)
        M = self.basis.M
        if trap.shape != (M,):
            raise ValueError("trap length does not match basis")
        if np.any(trap < 0):
            raise ValueError("trap entries must be non-negative")
        if kern.shape != (M, M) or not np.allclose(kern, kern.T, rtol=1e-12, atol=1e-14):
            raise ValueError("interaction kernel must be a symmetric M x M matrix")
        if self.coupling < 0:
            raise ValueError("coupling must be non-negative")
        if np.linalg.eigvalsh(kern).min() < -1e-10:
            raise ValueError("interaction kernel is not positive semidefinite")

    @property
    def v(self) -> np.ndarray:
        """Scaled interaction matrix g * v(x_i - x_j)."""
        return self.coupling * self.kernel

    def h0(self) -> HermitianOperator:
        """Non-interacting one-body operator -Laplacian + V."""
        lap = build_laplacian(self.basis).matrix
        return HermitianOperator(lap + np.diag(self.trap), self.basis)

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        doc = {
            "M": self.basis.M,
            "x_min": float(self.basis.positions[0]),
            "x_max": float(self.basis.positions[-1]),
            "boundary": self.basis.boundary,
            "coupling": float(self.coupling),
        }
        x = self.basis.positions
        if np.allclose(self.trap, x**2, rtol=0, atol=1e-14):
            doc["trap"] = "harmonic"
        else:
            doc["trap"] = [float(t) for t in self.trap]
        if self.kernel_meta.get("type") == "gaussian":
            doc["kernel"] = {"type": "gaussian", "width": self.kernel_meta["width"]}
        else:
            doc["kernel"] = {"type": "explicit", "matrix": [[float(a) for a in row] for row in self.kernel]}
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelSpec":
        basis = ModeBasis.grid(int(doc["M"]), float(doc["x_min"]), float(doc["x_max"]),
                               doc.get("boundary", "dirichlet"))
        x = basis.positions
        trap = x**2 if doc["trap"] == "harmonic" else np.asarray(doc["trap"], dtype=float)
        kdoc = doc["kernel"]
        meta = {}
        if kdoc.get("type") == "gaussian":
            w = float(kdoc["width"])
            kernel = gaussian_kernel(basis, w)
            meta = {"type": "gaussian", "width": w}
        else:
            kernel = np.asarray(kdoc["matrix"], dtype=float)
        return cls(basis, trap, kernel, float(doc["coupling"]), meta)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_json_dict(json.loads(text))


def gaussian_kernel(basis: ModeBasis, width: float) -> np.ndarray:
    x = basis.positions
    return np.exp(-0.5 * ((x[:, None] - x[None, :]) / width) ** 2)


def tilted_trap(x: np.ndarray, scale: float = 1.0, tilt: float = 0.25) -> np.ndarray:
    """Anharmonic trap scale*(x^2 + tilt*x^3); the cubic term breaks parity so
    that odd cumulants of position-like observables do not vanish identically."""
    trap = scale * (x**2 + tilt * x**3)
    if np.any(trap < -1e-12):
        raise ValueError("tilted trap is negative on this grid")
    return np.clip(trap, 0.0, None)


def default_model(M: int = 16) -> ModelSpec:
    """House default: [-4,4] grid, tilted trap, Gaussian kernel of width 1, g = 0.5."""
    basis = ModeBasis.grid(M, -4.0, 4.0)
    return ModelSpec(basis, tilted_trap(basis.positions), gaussian_kernel(basis, 1.0), 0.5,
                     {"type": "gaussian", "width": 1.0})


def sweep_model(M: int = 3) -> ModelSpec:
    """Default instance for exact-diagonalization sweeps over N.

    Narrow window and soft trap keep the condensate spread over the lattice so
    that the sigma of the limiting Gaussian exceeds the spacing of the discrete
    dGamma(B) spectrum; the wide kernel makes the Bogoliubov corrections visible.
    """
    basis = ModeBasis.grid(M, -2.0, 2.0)
    return ModelSpec(basis, tilted_trap(basis.positions, scale=0.25),
                     gaussian_kernel(basis, 2.0), 0.5, {"type": "gaussian", "width": 2.0})


def bops_model(M: int = 3) -> ModelSpec:
    """Strongly coupled variant used by the operator-expansion scaling study."""
    basis = ModeBasis.grid(M, -2.0, 2.0)
    return ModelSpec(basis, tilted_trap(basis.positions, scale=0.25),
                     gaussian_kernel(basis, 2.0), 2.0, {"type": "gaussian", "width": 2.0})


# -- Hartree ---------------------------------------------------------------


def hartree_energy(spec: ModelSpec, phi: np.ndarray) -> float:
    """Energy functional <phi,(-Lap+V)phi> + (1/2) <phi^2, g v phi^2>."""
    basis = spec.basis
    if abs(basis.norm(phi) - 1.0) > 1e-8:
        raise ValueError("phi must be normalized to 1 within 1e-8")
    dens = np.abs(phi) ** 2 * basis.dx
    kinetic = basis.inner(phi, spec.h0().matrix @ phi).real
    return float(kinetic + 0.5 * dens @ spec.v @ dens)


def _mean_field(spec: ModelSpec, phi: np.ndarray) -> np.ndarray:
    """Diagonal of the convolution term (v * phi^2)(x_i)."""
    return spec.v @ (np.abs(phi) ** 2 * spec.basis.dx)


@dataclass
class HartreeSolution:
    """Converged minimizer: condensate phi, chemical potential, energy, and h."""

    spec: ModelSpec
    phi: np.ndarray
    mu_H: float
    e_H: float
    h: HermitianOperator
    residual: float
    iterations: int
    energy_history: np.ndarray

    _perp: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def basis(self) -> ModeBasis:
        return self.spec.basis

    def perp_basis(self) -> np.ndarray:
        """Columns form a deterministic orthonormal basis of {phi}^perp.

        Gram-Schmidt of the delta-normalized site modes against phi, kept in
        site order, dropping the one mode that becomes linearly dependent.
        """
        if self._perp is None:
            basis = self.basis
            cols = [self.phi.astype(float)]
            for i in range(basis.M):
                e = np.zeros(basis.M)
                e[i] = 1.0 / np.sqrt(basis.dx)
                w = e.copy()
                for c in cols:
                    w = w - c * basis.inner(c, w).real
                n = basis.norm(w)
                if n > 1e-8:
                    cols.append(w / n)
                if len(cols) == basis.M:
                    break
            self._perp = np.column_stack(cols[1:])
        return self._perp

    def adapted_modes(self) -> np.ndarray:
        """Columns [phi | perp basis]: orthonormal modes with mode 0 = phi."""
        return np.column_stack([self.phi, self.perp_basis()])

    def perp_coords(self, f: np.ndarray) -> np.ndarray:
        """Coordinates of the {phi}^perp component of a value vector f."""
        Q = self.perp_basis()
        return (Q.conj().T * self.basis.dx) @ f

    def perp_matrix(self, op: np.ndarray) -> np.ndarray:
        """Restriction q op q expressed in the perp basis."""
        Q = self.perp_basis()
        return (Q.conj().T * self.basis.dx) @ op @ Q


def _descend(spec: ModelSpec, phi0: np.ndarray, tol: float, max_iter: int):
    """Normalized gradient descent with step halving on energy increase."""
    basis = spec.basis
    h0m = spec.h0().matrix
    phi = phi0 / basis.norm(phi0)
    energy = hartree_energy(spec, phi)
    history = [energy]
    tau = 0.1
    residual = np.inf
    for it in range(max_iter):
        hfull = h0m + np.diag(_mean_field(spec, phi))
        mu = basis.inner(phi, hfull @ phi).real
        grad = hfull @ phi - mu * phi
        residual = basis.norm(grad)
        if residual <= tol:
            return phi, energy, residual, it, np.array(history)
        while True:
            cand = phi - tau * grad
            cand = cand / basis.norm(cand)
            cand_energy = hartree_energy(spec, cand)
            if cand_energy <= energy + 1e-15:
                break
            tau *= 0.5
            if tau < 1e-18:
                raise NonConvergenceError(
                    f"step size underflow at residual {residual:.3e}", residual)
        # accepted steps never increase the energy
        assert cand_energy <= energy + 1e-15
        phi, energy = cand, cand_energy
        history.append(energy)
        tau *= 1.05
    raise NonConvergenceError(
        f"no convergence after {max_iter} iterations, best residual {residual:.3e}", residual)


def solve_hartree(spec: ModelSpec, tol: float = 1e-11, max_iter: int = 50_000,
                  restarts: int = 2, seed: int = 0, phi0: np.ndarray | None = None) -> HartreeSolution:
    """Minimize the Hartree functional; gauge-fixed to real phi with positive sum.

    Starts from the non-interacting ground state; ``restarts`` extra runs from
    random initial vectors raise MultipleMinimaWarning when their energies
    disagree with the main run by more than 10*tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    basis = spec.basis
    if phi0 is None:
        _, vecs = np.linalg.eigh(spec.h0().matrix)
        phi0 = vecs[:, 0]
    phi, energy, residual, iterations, history = _descend(spec, np.real(phi0), tol, max_iter)

    phi = np.real(phi)
    if phi.sum() < 0:
        phi = -phi

    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        alt0 = rng.normal(size=basis.M)
        try:
            _, alt_energy, _, _, _ = _descend(spec, alt0, tol, max_iter)
        except NonConvergenceError:
            continue
        if abs(alt_energy - energy) > 10 * tol:
            warnings.warn(
                f"random restart found energy {alt_energy:.12g} vs {energy:.12g}; "
                "possible multiple Hartree minima", MultipleMinimaWarning)

    hfull = spec.h0().matrix + np.diag(_mean_field(spec, phi))
    mu_H = basis.inner(phi, hfull @ phi).real
    h = HermitianOperator(hfull - mu_H * np.eye(basis.M), basis)
    return HartreeSolution(spec, phi, float(mu_H), float(energy), h,
                           float(residual), iterations, history)


def projectors(sol: HartreeSolution) -> tuple[HermitianOperator, HermitianOperator]:
    """Rank-1 condensate projector p = |phi><phi| and its complement q = 1 - p."""
    basis = sol.basis
    p = np.outer(sol.phi, sol.phi.conj()) * basis.dx
    q = np.eye(basis.M) - p
    return HermitianOperator(p, basis), HermitianOperator(q, basis)
