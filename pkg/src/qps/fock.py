"""Truncated ladder algebra and number states anchored on a joint state.

The lowering operator on the grid is built from the covariance factors, not
from hard-coded oscillator formulas, so the construction works for every
saturating covariance: with a = sqrt(eta X) (principal branch),

    ladder_mu = (1/hbar) sum_nu a[mu,nu] (z_nu - <z_nu>)

obeys [ladder_mu, ladder_nu^dagger] = delta_mu_nu and annihilates the
anchoring joint state; repeated adjoints generate the orthonormal number
family.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, InvalidInputError, UnsupportedError
from .grids import CoordinateGrid, GridWavefunction, inner_product
from .metric import decompose_covariance
from .states import JointStateSpec, apply_z, apply_z_dagger, coordinate_wavefunction


@dataclass(frozen=True, eq=False)
class TruncatedBasis:
    """Per-axis cutoffs for the number-state family of a reference state."""

    n_max: tuple
    reference: JointStateSpec
    budget: int = 4096

    def __post_init__(self):
        n_max = tuple(int(n) for n in (
            (self.n_max,) if np.isscalar(self.n_max) else self.n_max
        ))
        if len(n_max) != self.reference.dim:
            raise InvalidInputError("n_max needs one cutoff per axis")
        if any(n < 2 for n in n_max):
            raise InvalidInputError("each n_max must be at least 2")
        if int(np.prod(n_max)) > self.budget:
            raise InvalidInputError(
                f"truncated dimension {int(np.prod(n_max))} exceeds budget {self.budget}"
            )
        object.__setattr__(self, "n_max", n_max)

    @property
    def dim(self) -> int:
        return int(np.prod(self.n_max))

    @property
    def naxes(self) -> int:
        return len(self.n_max)

    def indices(self):
        """Multi-indices in row-major order, matching the flat coefficient layout."""
        return list(np.ndindex(*self.n_max))

    def flat_index(self, n) -> int:
        n = (n,) if np.isscalar(n) else tuple(n)
        return int(np.ravel_multi_index(n, self.n_max))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Complex amplitudes over the truncated number basis."""

    basis: TruncatedBasis
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != self.basis.dim:
            raise InvalidInputError("coefficient count does not match basis dimension")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> "FockVector":
        return FockVector(self.basis, self.coeffs / self.norm())

    @classmethod
    def unit(cls, basis: TruncatedBasis, n) -> "FockVector":
        c = np.zeros(basis.dim, dtype=complex)
        c[basis.flat_index(n)] = 1.0
        return cls(basis, c)


@dataclass(frozen=True, eq=False)
class LadderMatrices:
    """Per-axis lowering/raising matrices plus the total number operator."""

    lowering: tuple
    raising: tuple
    number: np.ndarray


def build_ladder(basis: TruncatedBasis) -> LadderMatrices:
    """Truncated matrices with sqrt(n) subdiagonals, Kronecker across axes."""
    singles = [np.diag(np.sqrt(np.arange(1, n)), k=1) for n in basis.n_max]
    eyes = [np.eye(n) for n in basis.n_max]
    lowering = []
    for mu in range(basis.naxes):
        parts = [singles[nu] if nu == mu else eyes[nu] for nu in range(basis.naxes)]
        full = parts[0]
        for part in parts[1:]:
            full = np.kron(full, part)
        lowering.append(full.astype(complex))
    raising = [m.conj().T for m in lowering]
    number = sum(r @ l for r, l in zip(raising, lowering))
    number.setflags(write=False)
    return LadderMatrices(lowering=tuple(lowering), raising=tuple(raising), number=number)


def _check_fock_coverage(spec: JointStateSpec, grid: CoordinateGrid, n):
    """Coverage must extend past the classical turning point plus 6 sigma."""
    for mu, ax in enumerate(grid.axes):
        X = spec.moments.X[mu, mu]
        reach = np.sqrt((2 * n[mu] + 1) * 2.0 * X) + 6.0 * np.sqrt(X)
        lo = spec.moments.mean_x[mu] - reach
        hi = spec.moments.mean_x[mu] + reach
        if ax.x_min > lo or ax.x_max < hi:
            raise CoverageError(
                f"grid axis {mu} too narrow for n={n[mu]}: needs [{lo:.3g}, {hi:.3g}]"
            )


class _GridLadder:
    """Cached grid realization of the lowering/raising operators of a basis.

    Every state in the truncated family is band-limited to the classical
    momentum reach of the top rung, far below the grid Nyquist.  Repeated
    spectral derivative applications would otherwise amplify round-off noise
    by the Nyquist wavenumber per rung, so each application is followed by a
    dealiasing mask at that (generous) physical band edge.
    """

    def __init__(self, basis: TruncatedBasis, grid: CoordinateGrid):
        self.basis = basis
        spec = basis.reference
        factors = decompose_covariance(spec.moments, spec.signature, spec.hbar)
        self.a = factors.a
        self.masks = []
        for mu, ax in enumerate(grid.axes):
            sigma_p = np.sqrt(spec.moments.P[mu, mu])
            p_keep = np.sqrt(2.0 * (2 * basis.n_max[mu] + 3)) * sigma_p + 8.0 * sigma_p
            p_keep += abs(spec.moments.mean_p[mu])
            k = 2.0 * np.pi * np.fft.fftfreq(ax.n_points, d=ax.spacing)
            self.masks.append(np.abs(spec.hbar * k) <= p_keep)

    def _dealias(self, psi: GridWavefunction) -> GridWavefunction:
        values = psi.values
        for axis, mask in enumerate(self.masks):
            shape = [1] * values.ndim
            shape[axis] = -1
            ft = np.fft.fft(values, axis=axis)
            values = np.fft.ifft(ft * mask.reshape(shape), axis=axis)
        return psi.with_values(values)

    def raise_axis(self, spec, psi: GridWavefunction, mu: int) -> GridWavefunction:
        out = np.zeros_like(psi.values)
        for nu in range(spec.dim):
            coeff = np.conj(self.a[mu, nu]) / spec.hbar
            if coeff == 0.0:
                continue
            zd = apply_z_dagger(spec, psi, nu).values
            out += coeff * (zd - np.conj(spec.mean_z[nu]) * psi.values)
        return self._dealias(psi.with_values(out))

    def lower_axis(self, spec, psi: GridWavefunction, mu: int) -> GridWavefunction:
        out = np.zeros_like(psi.values)
        for nu in range(spec.dim):
            coeff = self.a[mu, nu] / spec.hbar
            if coeff == 0.0:
                continue
            z = apply_z(spec, psi, nu).values
            out += coeff * (z - spec.mean_z[nu] * psi.values)
        return self._dealias(psi.with_values(out))


def number_state(n, basis: TruncatedBasis, grid: CoordinateGrid) -> GridWavefunction:
    """Grid realization of the number state |n, <z>> (unit norm within 1e-8).

    Applies the raising operator n_mu times per axis to the anchoring
    Gaussian, renormalizing by sqrt(k) at step k (equivalent to the
    sqrt(n!) factor, with no overflow at large n).
    """
    n = (n,) if np.isscalar(n) else tuple(int(v) for v in n)
    if len(n) != basis.naxes:
        raise InvalidInputError("multi-index length does not match basis")
    if any(v < 0 or v >= m for v, m in zip(n, basis.n_max)):
        raise InvalidInputError(f"multi-index {n} outside cutoff {basis.n_max}")
    spec = basis.reference
    _check_fock_coverage(spec, grid, n)
    ladder = _GridLadder(basis, grid)
    psi = coordinate_wavefunction(spec, grid)
    for mu, reps in enumerate(n):
        for k in range(1, reps + 1):
            psi = ladder.raise_axis(spec, psi, mu)
            psi = psi.with_values(psi.values / np.sqrt(k))
    return psi


def grid_number_states(basis: TruncatedBasis, grid: CoordinateGrid) -> list:
    """All basis states on the grid, built incrementally (row-major order)."""
    if any(m > 16 for m in basis.n_max):
        raise UnsupportedError("grid work is limited to n_max <= 16 per axis")
    spec = basis.reference
    top = tuple(m - 1 for m in basis.n_max)
    _check_fock_coverage(spec, grid, top)
    ladder = _GridLadder(basis, grid)
    ground = coordinate_wavefunction(spec, grid)
    # build the full family by raising from the ground state along each axis
    states = {(0,) * basis.naxes: ground}
    for idx in basis.indices():
        if idx in states:
            continue
        # find the axis to step down along
        mu = next(k for k in range(basis.naxes) if idx[k] > 0)
        prev = list(idx)
        prev[mu] -= 1
        prev = tuple(prev)
        stepped = ladder.raise_axis(spec, states[prev], mu)
        states[idx] = stepped.with_values(stepped.values / np.sqrt(idx[mu]))
    return [states[idx] for idx in basis.indices()]


def orthonormality_check(basis: TruncatedBasis, grid: CoordinateGrid) -> float:
    """Max-norm deviation of the grid Gram matrix from the identity."""
    states = grid_number_states(basis, grid)
    dim = len(states)
    gram = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(i, dim):
            gram[i, j] = inner_product(states[i], states[j])
            gram[j, i] = np.conj(gram[i, j])
    return float(np.abs(gram - np.eye(dim)).max())


def operator_matrix(op, basis: TruncatedBasis, grid: CoordinateGrid) -> np.ndarray:
    """Matrix elements <n|A|n'> of a grid operator in the number basis."""
    states = grid_number_states(basis, grid)
    images = [op(s) for s in states]
    dim = len(states)
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out[i, j] = inner_product(states[i], images[j])
    return out


@dataclass(frozen=True)
class RobertsonCheck:
    lhs: float
    rhs: float
    holds: bool


def robertson_check(A: np.ndarray, B: np.ndarray, state: FockVector,
                    tol: float = 1e-8) -> RobertsonCheck:
    """sigma_A sigma_B >= |<[A, B]>|/2 for a normalized basis vector."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise InvalidInputError("operator matrices must be square and same-size")
    if A.shape[0] != state.basis.dim:
        raise InvalidInputError("operator dimension does not match the state")
    for name, M in (("A", A), ("B", B)):
        if np.abs(M - M.conj().T).max() > 1e-10 * max(1.0, np.abs(M).max()):
            raise InvalidInputError(f"{name} must be Hermitian")
    v = state.coeffs
    if not state.is_normalized(1e-9):
        raise InvalidInputError("state must be normalized")

    def _sigma(M):
        mean = np.real(np.vdot(v, M @ v))
        second = np.real(np.vdot(M @ v, M @ v))
        return np.sqrt(max(second - mean**2, 0.0)), mean

    sa, _ = _sigma(A)
    sb, _ = _sigma(B)
    comm = A @ B - B @ A
    rhs = 0.5 * abs(np.vdot(v, comm @ v))
    lhs = float(sa * sb)
    return RobertsonCheck(lhs=lhs, rhs=float(rhs), holds=lhs >= rhs - tol)


def position_matrix(basis: TruncatedBasis, axis: int = 0) -> np.ndarray:
    """Closed-form x matrix: <x> I + sqrt(X) (lower + raise) for rho = 0 axes."""
    spec = basis.reference
    if np.abs(spec.moments.rho).max() != 0.0:
        raise UnsupportedError("closed-form quadrature matrices need rho = 0")
    lad = build_ladder(basis)
    root = np.sqrt(spec.moments.X[axis, axis])
    eye = np.eye(basis.dim)
    return spec.moments.mean_x[axis] * eye + root * (lad.lowering[axis] + lad.raising[axis])


def momentum_matrix(basis: TruncatedBasis, axis: int = 0) -> np.ndarray:
    """Closed-form p matrix: <p> I + i hbar (raise - lower) / (2 sqrt(X))."""
    spec = basis.reference
    if np.abs(spec.moments.rho).max() != 0.0:
        raise UnsupportedError("closed-form quadrature matrices need rho = 0")
    lad = build_ladder(basis)
    root = np.sqrt(spec.moments.X[axis, axis])
    eye = np.eye(basis.dim)
    return spec.moments.mean_p[axis] * eye + 1j * spec.hbar / (2.0 * root) * (
        lad.raising[axis] - lad.lowering[axis]
    )


def write_matrix(matrix: np.ndarray, csv_path, json_path=None, meta: dict | None = None):
    """Matrix export as CSV rows (row, col, re, im) with a JSON sidecar."""
    matrix = np.asarray(matrix, dtype=complex)
    rows, cols = np.indices(matrix.shape)
    table = np.column_stack([
        rows.reshape(-1), cols.reshape(-1),
        matrix.real.reshape(-1), matrix.imag.reshape(-1),
    ])
    tmp = f"{csv_path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        np.savetxt(fh, table, fmt=("%d", "%d", "%.12g", "%.12g"), delimiter=",",
                   header="row,col,re,im", comments="")
    os.replace(tmp, csv_path)
    if json_path or meta:
        payload = {"schema": 1, "shape": list(matrix.shape)}
        payload.update(meta or {})
        target = json_path or f"{csv_path}.json"
        tmp = f"{target}.tmp.{os.getpid()}"
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, target)


def read_matrix(csv_path) -> np.ndarray:
    """Re-import a matrix written by :func:`write_matrix`."""
    try:
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        nr = int(data[:, 0].max()) + 1
        nc = int(data[:, 1].max()) + 1
        out = np.zeros((nr, nc), dtype=complex)
        out[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
    except (OSError, ValueError, IndexError) as exc:
        raise InvalidInputError(f"cannot read matrix: {exc}") from exc
    return out
