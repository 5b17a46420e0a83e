"""Dense complex linear algebra and time-ordered evolution.

Hamiltonians handed to this module are matrices of angular frequencies in
rad/ns; times are in ns.  The integrator is a midpoint-sampled product of
piecewise-constant exponentials, so every returned propagator is unitary by
construction (each step is exp(-i H dt) of a Hermitian H).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-9


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dims multiply, block structure a_ij * b."""
    return np.kron(np.asarray(a), np.asarray(b))


def hermiticity_defect(h: np.ndarray) -> float:
    """Max absolute asymmetry |h - h^dagger|."""
    return float(np.abs(h - h.conj().T).max()) if h.size else 0.0


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U^dagger U - I."""
    d = u.shape[0]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(d)))


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h (rad/ns) over t (ns), via eigendecomposition.

    Raises ValueError for non-Hermitian input, reporting the max asymmetry.
    """
    h = np.asarray(h)
    defect = hermiticity_defect(h)
    if defect > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian: max |h - h^dagger| = {defect:.3e}")
    if np.abs(h.imag).max(initial=0.0) == 0.0:
        w, v = np.linalg.eigh(h.real)
        return (v * np.exp(-1j * w * t)) @ v.T
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


@dataclass(frozen=True)
class Propagator:
    """Unitary time-evolution matrix with its basis labels and time window."""

    matrix: np.ndarray
    basis: tuple[str, ...]
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.matrix.shape != (len(self.basis), len(self.basis)):
            raise ValueError("propagator shape does not match basis size")
        defect = unitarity_defect(self.matrix)
        if defect > UNITARY_TOL:
            raise ValueError(f"propagator is not unitary: |U^dag U - I|_F = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, label: str) -> int:
        return self.basis.index(label)

    def amplitude(self, final: str, initial: str) -> complex:
        """<final|U|initial> by basis label."""
        return complex(self.matrix[self.index(final), self.index(initial)])


def _batch_step_unitaries(hs: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices (k, d, d)."""
    if np.abs(hs.imag).max(initial=0.0) == 0.0:
        w, v = np.linalg.eigh(hs.real)
        phases = np.exp(-1j * w * dt)
        return np.matmul(v * phases[:, None, :], v.transpose(0, 2, 1).astype(complex))
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-1j * w * dt)
    return np.matmul(v * phases[:, None, :], v.conj().transpose(0, 2, 1))


def _fold_steps(hs: np.ndarray, dt: float, u: np.ndarray) -> np.ndarray:
    """Apply the time-ordered product of per-step exponentials to u.

    Runs of consecutive identical Hamiltonians (pulse plateaus) commute
    trivially, so each run is folded with a single matrix power instead of
    step-by-step multiplication.
    """
    n = hs.shape[0]
    new_run = np.ones(n, dtype=bool)
    if n > 1:
        new_run[1:] = np.any(hs[1:] != hs[:-1], axis=(1, 2))
    starts = np.nonzero(new_run)[0]
    ends = np.append(starts[1:], n)
    steps = _batch_step_unitaries(hs[starts], dt)
    for step, run in zip(steps, ends - starts):
        u = (step if run == 1 else np.linalg.matrix_power(step, int(run))) @ u
    return u


def evolve_affine(
    d: np.ndarray,
    w: np.ndarray,
    scale_of_t,
    t_span: tuple[float, float],
    dt: float,
    basis: tuple[str, ...] | None = None,
) -> Propagator:
    """Evolution under h(t) = d + c(t) w with Hermitian d, w and real c(t).

    Same midpoint integrator as evolve(), but exponentials are computed once
    per distinct sampled c value; a pulse plateau then costs one
    eigendecomposition instead of one per step.  scale_of_t must accept an
    array of times.
    """
    for name, m in (("d", d), ("w", w)):
        defect = hermiticity_defect(np.asarray(m))
        if defect > HERMITIAN_TOL:
            raise ValueError(f"{name} is not Hermitian: max asymmetry {defect:.3e}")
    t0, t1 = t_span
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    dim = d.shape[0]
    if basis is None:
        basis = tuple(str(i) for i in range(dim))
    u = np.eye(dim, dtype=complex)
    if t1 == t0:
        return Propagator(u, basis, t0, t1)
    n_steps = max(1, int(round((t1 - t0) / dt)))
    dt_eff = (t1 - t0) / n_steps
    mids = t0 + (np.arange(n_steps) + 0.5) * dt_eff
    c = np.asarray(scale_of_t(mids), dtype=float)
    if c.shape != mids.shape:
        raise ValueError("scale_of_t must return one value per time")

    real = np.abs(d.imag).max(initial=0.0) == 0.0 and np.abs(w.imag).max(initial=0.0) == 0.0
    d_w = (d.real, w.real) if real else (d, w)
    cu, inv = np.unique(c, return_inverse=True)
    steps = np.empty((len(cu), dim, dim), dtype=complex)
    chunk = max(16, 64_000_000 // (dim * dim * 16))
    for lo in range(0, len(cu), chunk):
        sub = cu[lo : lo + chunk]
        hs = d_w[0][None, :, :] + sub[:, None, None] * d_w[1][None, :, :]
        steps[lo : lo + len(sub)] = _batch_step_unitaries(hs, dt_eff)

    i = 0
    while i < n_steps:
        j = i
        while j + 1 < n_steps and inv[j + 1] == inv[i]:
            j += 1
        run = j - i + 1
        step = steps[inv[i]]
        u = (step if run == 1 else np.linalg.matrix_power(step, run)) @ u
        i = j + 1
    return Propagator(u, basis, t0, t1)


def evolve(
    h_of_t,
    t_span: tuple[float, float],
    dt: float,
    basis: tuple[str, ...] | None = None,
    vectorized: bool = False,
    chunk_bytes: int = 48_000_000,
) -> Propagator:
    """Time-ordered evolution under a time-dependent Hermitian h(t).

    h_of_t maps a time in ns to a Hamiltonian in rad/ns; with vectorized=True
    it must accept an array of times and return a (k, d, d) stack.  Steps are
    midpoint-sampled: U = prod_k exp(-i h(t_k + dt/2) dt), earliest step
    applied first.  Non-Hermitian samples are rejected with the max asymmetry.
    """
    t0, t1 = t_span
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    n_steps = max(1, int(round((t1 - t0) / dt))) if t1 > t0 else 0
    probe = np.asarray(h_of_t(np.array([t0])) if vectorized else h_of_t(t0))
    dim = probe.shape[-1]
    if basis is None:
        basis = tuple(str(i) for i in range(dim))
    u = np.eye(dim, dtype=complex)
    if n_steps == 0:
        return Propagator(u, basis, t0, t1)
    dt_eff = (t1 - t0) / n_steps
    mids = t0 + (np.arange(n_steps) + 0.5) * dt_eff

    chunk = max(16, chunk_bytes // (dim * dim * 16))
    for lo in range(0, n_steps, chunk):
        ts = mids[lo : lo + chunk]
        if vectorized:
            hs = np.asarray(h_of_t(ts), dtype=complex)
        else:
            hs = np.stack([np.asarray(h_of_t(t), dtype=complex) for t in ts])
        defects = np.abs(hs - hs.conj().transpose(0, 2, 1)).reshape(len(ts), -1).max(axis=1)
        worst = int(np.argmax(defects))
        if defects[worst] > HERMITIAN_TOL:
            raise ValueError(
                f"h(t) is not Hermitian at t = {ts[worst]:.6f} ns: "
                f"max |h - h^dagger| = {defects[worst]:.3e}"
            )
        u = _fold_steps(hs, dt_eff, u)
    return Propagator(u, basis, t0, t1)
