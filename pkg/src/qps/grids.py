"""Discretized coordinate-representation wavefunctions: the brute-force oracle.

Wavefunctions are sampled on uniform endpoint-exclusive grids in the physical
(covariant) coordinates.  The momentum operator on an axis with metric sign
``s`` is ``p = i hbar s d/dx`` (the ordinary ``-i hbar d/dx`` for a spatial,
s = -1, axis) and is applied spectrally, so 1e-8-level tolerances are
reachable on 1024-point grids.  The dual-grid transform uses the kernel
exp(+(i/hbar) s p x) / sqrt(2 pi hbar) per axis and is exactly unitary on the
grid (discrete Parseval).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, InvalidInputError
from .metric import StatMoments


@dataclass(frozen=True)
class GridAxis:
    """One uniform axis: points x_min + k dx, k = 0 .. n_points-1."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidInputError("axis needs x_max > x_min")
        n = self.n_points
        if n < 2 or (n & (n - 1)) != 0:
            raise InvalidInputError(f"n_points must be a power of two, got {n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)


@dataclass(frozen=True)
class CoordinateGrid:
    """Cartesian product of up to two uniform axes (cost grows as n^D)."""

    axes: tuple
    budget: int = 2**24

    def __post_init__(self):
        axes = tuple(
            ax if isinstance(ax, GridAxis) else GridAxis(*ax) for ax in self.axes
        )
        if not 1 <= len(axes) <= 2:
            raise InvalidInputError("grid oracle supports D = 1 or 2 axes")
        total = int(np.prod([ax.n_points for ax in axes]))
        if total > self.budget:
            raise InvalidInputError(f"grid has {total} points, budget is {self.budget}")
        object.__setattr__(self, "axes", axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(ax.n_points for ax in self.axes)

    @property
    def spacings(self) -> tuple:
        return tuple(ax.spacing for ax in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def axis_points(self, axis: int) -> np.ndarray:
        return self.axes[axis].points()

    def meshgrid(self) -> tuple:
        return np.meshgrid(*(ax.points() for ax in self.axes), indexing="ij")

    @classmethod
    def line(cls, x_min: float = -12.0, x_max: float = 12.0, n: int = 1024):
        return cls(axes=(GridAxis(x_min, x_max, n),))

    @classmethod
    def square(cls, x_min: float = -12.0, x_max: float = 12.0, n: int = 256):
        ax = GridAxis(x_min, x_max, n)
        return cls(axes=(ax, ax))

    def dual(self, hbar: float = 1.0) -> "CoordinateGrid":
        """Momentum grid reached by the fast transform: symmetric, same counts."""
        duals = []
        for ax in self.axes:
            p_max = np.pi * hbar / ax.spacing
            duals.append(GridAxis(-p_max, p_max, ax.n_points))
        return CoordinateGrid(axes=tuple(duals), budget=self.budget)


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    """Complex samples psi(x) on a grid, with hbar and per-axis metric signs."""

    grid: CoordinateGrid
    values: np.ndarray
    hbar: float = 1.0
    signs: tuple = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InvalidInputError(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("non-finite wavefunction samples")
        if self.hbar <= 0.0:
            raise InvalidInputError("hbar must be positive")
        signs = self.signs
        if signs is None:
            signs = (-1.0,) * self.grid.ndim
        signs = tuple(float(s) for s in signs)
        if len(signs) != self.grid.ndim or any(s not in (-1.0, 1.0) for s in signs):
            raise InvalidInputError("signs must be +-1 per axis")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "signs", signs)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def with_values(self, values) -> "GridWavefunction":
        return GridWavefunction(self.grid, values, self.hbar, self.signs)


def inner_product(psi: GridWavefunction, phi: GridWavefunction) -> complex:
    """<psi|phi> by the grid Riemann sum; conjugate-linear in psi."""
    if psi.grid != phi.grid or psi.signs != phi.signs or psi.hbar != phi.hbar:
        raise InvalidInputError("wavefunctions live on different grids")
    return complex(np.sum(np.conj(psi.values) * phi.values) * psi.grid.cell_volume)


def _wavenumbers(ax: GridAxis) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(ax.n_points, d=ax.spacing)


def apply_position(psi: GridWavefunction, axis: int = 0) -> GridWavefunction:
    """Pointwise multiplication by the coordinate of the given axis."""
    if not 0 <= axis < psi.grid.ndim:
        raise InvalidInputError(f"axis {axis} out of range")
    x = psi.grid.axis_points(axis)
    shape = [1] * psi.grid.ndim
    shape[axis] = -1
    return psi.with_values(psi.values * x.reshape(shape))


def apply_momentum(psi: GridWavefunction, axis: int = 0) -> GridWavefunction:
    """Spectral application of p = i hbar s d/dx along the given axis."""
    if not 0 <= axis < psi.grid.ndim:
        raise InvalidInputError(f"axis {axis} out of range")
    k = _wavenumbers(psi.grid.axes[axis])
    shape = [1] * psi.grid.ndim
    shape[axis] = -1
    ft = np.fft.fft(psi.values, axis=axis)
    dpsi = np.fft.ifft(1j * k.reshape(shape) * ft, axis=axis)
    return psi.with_values(1j * psi.hbar * psi.signs[axis] * dpsi)


def momentum_transform(psi: GridWavefunction) -> GridWavefunction:
    """Map to the momentum representation on the dual grid.

    Implements psi~(p) = (2 pi hbar)^(-D/2) integral exp((i/hbar) s p x)
    psi(x) dx per axis; unitary on the grid, so the output norm equals the
    input norm to machine precision.  Rejects grids whose Nyquist momentum
    does not cover the transform by 6 sigma.
    """
    values = psi.values
    hbar = psi.hbar
    for axis, ax in enumerate(psi.grid.axes):
        k = _wavenumbers(ax)
        shape = [1] * psi.grid.ndim
        shape[axis] = -1
        if psi.signs[axis] < 0:
            ft = np.fft.fft(values, axis=axis)
            phase = np.exp(-1j * (k * ax.x_min)).reshape(shape)
        else:
            ft = np.fft.ifft(values, axis=axis) * ax.n_points
            phase = np.exp(+1j * (k * ax.x_min)).reshape(shape)
        values = ft * phase * ax.spacing / np.sqrt(2.0 * np.pi * hbar)
        values = np.fft.fftshift(values, axes=axis)
    out = GridWavefunction(psi.grid.dual(hbar), values, hbar, psi.signs)
    _check_momentum_coverage(out)
    return out


def inverse_momentum_transform(phi: GridWavefunction, grid: CoordinateGrid) -> GridWavefunction:
    """Invert :func:`momentum_transform` back onto the original grid."""
    if grid.shape != phi.grid.shape:
        raise InvalidInputError("target grid shape does not match")
    expected = grid.dual(phi.hbar)
    for got, want in zip(phi.grid.axes, expected.axes):
        if abs(got.x_min - want.x_min) > 1e-9 or abs(got.spacing - want.spacing) > 1e-12:
            raise InvalidInputError("input does not live on the dual of the target grid")
    values = phi.values
    for axis, ax in enumerate(grid.axes):
        k = _wavenumbers(ax)
        shape = [1] * grid.ndim
        shape[axis] = -1
        v = np.fft.ifftshift(values, axes=axis)
        if phi.signs[axis] < 0:
            v = v * np.exp(+1j * (k * ax.x_min)).reshape(shape)
            v = np.fft.ifft(v, axis=axis)
        else:
            v = v * np.exp(-1j * (k * ax.x_min)).reshape(shape)
            v = np.fft.fft(v, axis=axis) / ax.n_points
        values = v * np.sqrt(2.0 * np.pi * phi.hbar) / ax.spacing
    return GridWavefunction(grid, values, phi.hbar, phi.signs)


def _axis_mean_std(values: np.ndarray, grid: CoordinateGrid, axis: int):
    prob = np.abs(values) ** 2 * grid.cell_volume
    mass = prob.sum()
    x = grid.axis_points(axis)
    shape = [1] * grid.ndim
    shape[axis] = -1
    xg = x.reshape(shape)
    mean = float((xg * prob).sum() / mass)
    var = float(((xg - mean) ** 2 * prob).sum() / mass)
    return mean, np.sqrt(max(var, 0.0))


def _check_momentum_coverage(phi: GridWavefunction):
    for axis, ax in enumerate(phi.grid.axes):
        mean, std = _axis_mean_std(phi.values, phi.grid, axis)
        nyquist = ax.x_max
        if nyquist < abs(mean) + 6.0 * std:
            raise CoverageError(
                f"momentum axis {axis} too coarse: Nyquist {nyquist:.3g} < "
                f"|mean| + 6 sigma = {abs(mean) + 6 * std:.3g}"
            )


def moments(psi: GridWavefunction) -> StatMoments:
    """Measure means and the covariance blocks by quadrature.

    rho uses the symmetrized combination Re <(p - <p>) psi | (x - <x>) psi>.
    """
    if not psi.is_normalized(1e-9):
        raise InvalidInputError(f"moments need a normalized state, norm^2 off by "
                                f"{psi.norm()**2 - 1.0:.2e}")
    d = psi.grid.ndim
    dvol = psi.grid.cell_volume
    prob = np.abs(psi.values) ** 2 * dvol

    mean_x = np.zeros(d)
    for mu in range(d):
        x = psi.grid.axis_points(mu)
        shape = [1] * d
        shape[mu] = -1
        mean_x[mu] = float((x.reshape(shape) * prob).sum())

    centered_x = []
    for mu in range(d):
        x = psi.grid.axis_points(mu)
        shape = [1] * d
        shape[mu] = -1
        centered_x.append((x.reshape(shape) - mean_x[mu]) * psi.values)

    p_psi = [apply_momentum(psi, mu).values for mu in range(d)]
    mean_p = np.array(
        [float(np.real(np.sum(np.conj(psi.values) * p_psi[mu]) * dvol)) for mu in range(d)]
    )
    centered_p = [p_psi[mu] - mean_p[mu] * psi.values for mu in range(d)]

    X = np.zeros((d, d))
    P = np.zeros((d, d))
    rho = np.zeros((d, d))
    for mu in range(d):
        for nu in range(d):
            X[mu, nu] = float(np.real(np.sum(np.conj(centered_x[mu]) * centered_x[nu]) * dvol))
            P[mu, nu] = float(np.real(np.sum(np.conj(centered_p[mu]) * centered_p[nu]) * dvol))
            rho[mu, nu] = float(np.real(np.sum(np.conj(centered_p[mu]) * centered_x[nu]) * dvol))
    X = 0.5 * (X + X.T)
    P = 0.5 * (P + P.T)
    return StatMoments(mean_p=mean_p, mean_x=mean_x, P=P, X=X, rho=rho)


def _atomic_write(path, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_wavefunction(psi: GridWavefunction, csv_path, json_path=None):
    """Export samples as CSV (coordinates, re, im) plus a JSON grid header."""
    json_path = json_path or f"{csv_path}.json"
    mesh = psi.grid.meshgrid()
    flat = psi.values.reshape(-1)
    columns = [m.reshape(-1) for m in mesh] + [flat.real, flat.imag]
    header = [f"x{i + 1}" for i in range(psi.grid.ndim)] + ["re", "im"]
    tmp = f"{csv_path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        np.savetxt(fh, np.column_stack(columns), fmt="%.12g", delimiter=",",
                   header=",".join(header), comments="")
    os.replace(tmp, csv_path)
    meta = {
        "schema": 1,
        "hbar": psi.hbar,
        "signs": list(psi.signs),
        "axes": [
            {"x_min": ax.x_min, "x_max": ax.x_max, "n_points": ax.n_points}
            for ax in psi.grid.axes
        ],
    }
    _atomic_write(json_path, json.dumps(meta, indent=2) + "\n")


def read_wavefunction(csv_path, json_path=None) -> GridWavefunction:
    """Re-import a wavefunction written by :func:`write_wavefunction`."""
    json_path = json_path or f"{csv_path}.json"
    try:
        with open(json_path) as fh:
            meta = json.load(fh)
        axes = tuple(
            GridAxis(a["x_min"], a["x_max"], a["n_points"]) for a in meta["axes"]
        )
        grid = CoordinateGrid(axes=axes)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read wavefunction: {exc}") from exc
    values = (data[:, -2] + 1j * data[:, -1]).reshape(grid.shape)
    return GridWavefunction(grid, values, float(meta["hbar"]), tuple(meta["signs"]))
