"""Phase-space wavefunctions, positive distributions and the hypervolume law.

The phase-space wavefunction of a state against an analyzing joint-state
family is psi~(q, y) = <family state at (q, y) | psi>.  Its squared modulus
is a positive density over the plane of means; integrated with the measure
dq dy / h per pair it carries unit mass, and without the 1/h factors it
measures exactly h^D for every normalized state - the elementary microstate
hypervolume.

A standard Wigner transform (one pair only) is included as a contrast
fixture: it shares the same measure convention but may go negative.

Phase grids are midpoint grids: samples sit at cell centers, so plain sums
times the cell area implement the midpoint rule.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CoverageError, InvalidInputError, UnsupportedError
from .grids import CoordinateGrid, GridWavefunction, moments
from .states import JointStateSpec


@dataclass(frozen=True)
class PhasePair:
    """Midpoint grid over one momentum-coordinate pair of the phase plane."""

    p_min: float
    p_max: float
    n_p: int
    x_min: float
    x_max: float
    n_x: int

    def __post_init__(self):
        if not (self.p_max > self.p_min and self.x_max > self.x_min):
            raise InvalidInputError("phase ranges must be increasing")
        if self.n_p < 32 or self.n_x < 32:
            raise InvalidInputError("phase grids need at least 32 points per axis")

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.n_p

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    def p_points(self) -> np.ndarray:
        return self.p_min + self.dp * (np.arange(self.n_p) + 0.5)

    def x_points(self) -> np.ndarray:
        return self.x_min + self.dx * (np.arange(self.n_x) + 0.5)

    def refined(self, factor: int = 2) -> "PhasePair":
        return PhasePair(self.p_min, self.p_max, self.n_p * factor,
                         self.x_min, self.x_max, self.n_x * factor)


@dataclass(frozen=True)
class PhaseGrid:
    """One PhasePair per momentum-coordinate pair; values use axis order
    (p1, x1, p2, x2, ...)."""

    pairs: tuple
    budget: int = 2**24

    def __post_init__(self):
        pairs = tuple(
            p if isinstance(p, PhasePair) else PhasePair(*p) for p in self.pairs
        )
        if not 1 <= len(pairs) <= 2:
            raise InvalidInputError("phase grids support 1 or 2 pairs")
        total = int(np.prod([p.n_p * p.n_x for p in pairs]))
        if total > self.budget:
            raise InvalidInputError(
                f"phase grid has {total} samples, budget is {self.budget}"
            )
        object.__setattr__(self, "pairs", pairs)

    @property
    def npairs(self) -> int:
        return len(self.pairs)

    @property
    def shape(self) -> tuple:
        out = []
        for pair in self.pairs:
            out += [pair.n_p, pair.n_x]
        return tuple(out)

    @property
    def cell(self) -> float:
        """Plain cell area Prod dp dx, with no 1/h factors."""
        return float(np.prod([p.dp * p.dx for p in self.pairs]))

    def measure(self, hbar: float) -> float:
        """Midpoint weight per sample against the dq dy / h measure."""
        return self.cell / (2.0 * np.pi * hbar) ** self.npairs

    def refined(self, factor: int = 2) -> "PhaseGrid":
        return PhaseGrid(tuple(p.refined(factor) for p in self.pairs))

    @classmethod
    def symmetric(cls, extent: float = 8.0, n: int = 128, npairs: int = 1):
        pair = PhasePair(-extent, extent, n, -extent, extent, n)
        return cls((pair,) * npairs)


@dataclass(frozen=True, eq=False)
class PhaseWavefunction:
    """Complex psi~ samples over a phase grid, tagged by the analyzing family."""

    grid: PhaseGrid
    values: np.ndarray
    family: JointStateSpec

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InvalidInputError("phase values shape does not match grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def hbar(self) -> float:
        return self.family.hbar

    def norm_squared(self) -> float:
        """Mass against the dq dy / h measure (1 for a normalized source)."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.measure(self.hbar))

    def with_values(self, values) -> "PhaseWavefunction":
        return PhaseWavefunction(self.grid, values, self.family)


@dataclass(frozen=True, eq=False)
class PhaseDistribution:
    """Real phase-space density against the dq dy / h measure."""

    grid: PhaseGrid
    values: np.ndarray
    kind: str
    hbar: float

    def __post_init__(self):
        if self.kind not in ("husimi_like", "wigner"):
            raise InvalidInputError(f"unknown distribution kind {self.kind!r}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise InvalidInputError("distribution shape does not match grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.measure(self.hbar))

    def minimum(self) -> float:
        return float(self.values.min())

    def maximum(self) -> float:
        return float(self.values.max())

    def argmax_point(self) -> tuple:
        """(p, x, ...) coordinates of the largest sample."""
        idx = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        coords = []
        for k, pair in enumerate(self.grid.pairs):
            coords.append(float(pair.p_points()[idx[2 * k]]))
            coords.append(float(pair.x_points()[idx[2 * k + 1]]))
        return tuple(coords)


class PhaseAnalyzer:
    """Precomputed contraction tables mapping grid samples to psi~ samples.

    For each pair the family state factorizes into a Gaussian window around
    y and a momentum phase in q, so psi~ is a windowed Fourier sum; both the
    transform and its adjoint (synthesis) are plain matrix contractions.
    Requires the family shape matrix to be diagonal when there are two pairs.
    """

    def __init__(self, family: JointStateSpec, pgrid: PhaseGrid, grid: CoordinateGrid):
        if family.dim != pgrid.npairs or grid.ndim != family.dim:
            raise InvalidInputError("family, phase grid and grid dimensions differ")
        expo = family.shape.exponent
        if family.dim > 1 and np.abs(expo - np.diag(np.diag(expo))).max() > 0.0:
            raise UnsupportedError(
                "two-pair analysis needs an axis-factorized analyzing family"
            )
        self.family = family
        self.pgrid = pgrid
        self.grid = grid
        hbar = family.hbar
        signs = family.signature.signs
        self.norm = ((2.0 * np.pi) ** family.dim
                     * abs(np.linalg.det(family.moments.X))) ** -0.25
        self.windows = []   # W[m, k] = exp(-conj(bp)(x_m - y_k)^2 / hbar^2)
        self.kernels = []   # E[j, m] = exp((i/hbar) s q_j x_m) dx
        self.kphases = []   # K(q_j, y_k) per pair
        for mu, pair in enumerate(pgrid.pairs):
            x = grid.axis_points(mu)
            y = pair.x_points()
            q = pair.p_points()
            bp = expo[mu, mu]
            self.windows.append(np.exp(-np.conj(bp) / hbar**2
                                       * (x[:, None] - y[None, :]) ** 2))
            self.kernels.append(
                np.exp(1j / hbar * signs[mu] * q[:, None] * x[None, :])
                * grid.axes[mu].spacing
            )
            self.kphases.append(
                family.gauge.phase(q[:, None], y[None, :], signs[mu], hbar)
            )

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Grid samples -> psi~ samples, axis order (p1, x1[, p2, x2])."""
        if self.family.dim == 1:
            E, W, K = self.kernels[0], self.windows[0], self.kphases[0]
            out = E @ (values[:, None] * W)
            return self.norm * np.exp(-1j * K) * out
        E1, W1, K1 = self.kernels[0], self.windows[0], self.kphases[0]
        E2, W2, K2 = self.kernels[1], self.windows[1], self.kphases[1]
        # contract x1 then x2: A1[j1, k1, m1] = E1[j1, m1] W1[m1, k1]
        A1 = E1[:, None, :] * W1.T[None, :, :]
        T = np.tensordot(A1, values, axes=([2], [0]))          # (j1, k1, m2)
        A2 = E2[:, None, :] * W2.T[None, :, :]
        out = np.tensordot(T, A2, axes=([2], [2]))             # (j1, k1, j2, k2)
        phase = np.exp(-1j * (K1[:, :, None, None] + K2[None, None, :, :]))
        return self.norm * phase * out

    def synthesize(self, pw_values: np.ndarray) -> np.ndarray:
        """Adjoint map: sum_z psi~(z) (family state at z) dq dy / h."""
        hbar = self.family.hbar
        if self.family.dim == 1:
            E, W, K = self.kernels[0], self.windows[0], self.kphases[0]
            dx = self.grid.axes[0].spacing
            weighted = np.exp(1j * K) * pw_values
            # family state at (q, y): norm conj(W[:, k]) conj(E[j, :])/dx e^{iK}
            acc = np.conj(E.T) @ weighted / dx                 # (m, k)
            out = self.norm * np.sum(np.conj(W) * acc, axis=1)
            return out * self.pgrid.measure(hbar)
        E1, W1, K1 = self.kernels[0], self.windows[0], self.kphases[0]
        E2, W2, K2 = self.kernels[1], self.windows[1], self.kphases[1]
        dx1 = self.grid.axes[0].spacing
        dx2 = self.grid.axes[1].spacing
        phase = np.exp(1j * (K1[:, :, None, None] + K2[None, None, :, :]))
        weighted = phase * pw_values
        B1 = np.conj(E1[:, None, :] * W1.T[None, :, :]) / dx1  # (j1, k1, m1)
        B2 = np.conj(E2[:, None, :] * W2.T[None, :, :]) / dx2  # (j2, k2, m2)
        T = np.tensordot(weighted, B2, axes=([2, 3], [0, 1]))  # (j1, k1, m2)
        out = np.tensordot(B1, T, axes=([0, 1], [0, 1]))       # (m1, m2)
        return self.norm * out * self.pgrid.measure(hbar)

    def family_state(self, jp: int, kx: int) -> np.ndarray:
        """Sampled family state at one phase point (single pair only)."""
        E, W, K = self.kernels[0], self.windows[0], self.kphases[0]
        dx = self.grid.axes[0].spacing
        return self.norm * np.conj(E[jp, :]) / dx * np.conj(W[:, kx]) \
            * np.exp(1j * K[jp, kx])


def _check_phase_coverage(state: GridWavefunction, pgrid: PhaseGrid, n_sigma: float):
    stats = moments(state)
    for mu, pair in enumerate(pgrid.pairs):
        sp = np.sqrt(stats.P[mu, mu])
        sx = np.sqrt(stats.X[mu, mu])
        if (pair.p_min > stats.mean_p[mu] - n_sigma * sp
                or pair.p_max < stats.mean_p[mu] + n_sigma * sp
                or pair.x_min > stats.mean_x[mu] - n_sigma * sx
                or pair.x_max < stats.mean_x[mu] + n_sigma * sx):
            raise CoverageError(
                f"phase grid pair {mu} does not cover the state by {n_sigma} sigma"
            )


def phase_wavefunction(state: GridWavefunction, family: JointStateSpec,
                       pgrid: PhaseGrid, check_coverage: bool = True) -> PhaseWavefunction:
    """psi~(q, y) = <family state at each phase point | state>."""
    if not state.is_normalized(1e-6):
        raise InvalidInputError("phase analysis needs a normalized state")
    if check_coverage:
        _check_phase_coverage(state, pgrid, 6.0)
    analyzer = PhaseAnalyzer(family, pgrid, state.grid)
    return PhaseWavefunction(pgrid, analyzer.transform(state.values), family)


def husimi_distribution(source, family: JointStateSpec, pgrid: PhaseGrid,
                        grid: CoordinateGrid | None = None) -> PhaseDistribution:
    """Positive phase-space density of a pure state, a mixture, or a density matrix.

    Pure state: |psi~|^2.  Mixture (sequence of (weight, GridWavefunction)):
    the weighted sum of pure densities.  Density matrix: the quadratic form
    of psi~ over its truncated basis realized on `grid`.
    """
    if isinstance(source, GridWavefunction):
        pw = phase_wavefunction(source, family, pgrid)
        values = np.abs(pw.values) ** 2
    elif hasattr(source, "basis") and hasattr(source, "matrix"):
        if grid is None:
            raise InvalidInputError("a coordinate grid is needed for density sources")
        from .fock import grid_number_states

        states = grid_number_states(source.basis, grid)
        analyzer = PhaseAnalyzer(family, pgrid, grid)
        tilde = np.stack([analyzer.transform(s.values) for s in states])
        values = np.real(np.einsum("n...,nm,m...->...", tilde, source.matrix,
                                   np.conj(tilde)))
    else:
        try:
            components = [(float(w), s) for w, s in source]
        except (TypeError, ValueError) as exc:
            raise InvalidInputError("unsupported husimi source") from exc
        weights = np.array([w for w, _ in components])
        if weights.min() < 0.0 or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidInputError("mixture weights must be >= 0 and sum to 1")
        values = 0.0
        for w, s in components:
            pw = phase_wavefunction(s, family, pgrid)
            values = values + w * np.abs(pw.values) ** 2
    return PhaseDistribution(pgrid, values, "husimi_like", family.hbar)


def wigner_distribution(state: GridWavefunction, pgrid: PhaseGrid) -> PhaseDistribution:
    """Standard Wigner transform of a one-pair state, as a contrast fixture.

    Stored against the same dq dy / h measure as the positive distribution,
    i.e. the samples are h times the textbook density.  Real within 1e-10 by
    the symmetry of the half-offset quadrature.
    """
    if state.grid.ndim != 1 or pgrid.npairs != 1:
        raise UnsupportedError("the Wigner fixture is one-pair only")
    _check_phase_coverage(state, pgrid, 6.0)
    hbar = state.hbar
    pair = pgrid.pairs[0]
    x = state.grid.axis_points(0)
    spline_re = CubicSpline(x, state.values.real, extrapolate=False)
    spline_im = CubicSpline(x, state.values.imag, extrapolate=False)

    def psi_at(pts):
        out = spline_re(pts) + 1j * spline_im(pts)
        return np.nan_to_num(out, nan=0.0)

    half_span = 0.5 * (x[-1] - x[0])
    du = state.grid.axes[0].spacing
    u = np.arange(-half_span, half_span + 0.5 * du, du)
    y = pair.x_points()
    plus = psi_at(y[:, None] + u[None, :])
    minus = psi_at(y[:, None] - u[None, :])
    kernel = np.exp(2j / hbar * np.outer(pair.p_points(), u))
    integrand = np.conj(plus) * minus
    w = (kernel @ integrand.T) * du / (np.pi * hbar)
    imag_max = float(np.abs(w.imag).max())
    if imag_max > 1e-10 * max(1.0, float(np.abs(w.real).max())):
        raise InvalidInputError(f"Wigner quadrature lost reality: {imag_max:.2e}")
    values = 2.0 * np.pi * hbar * w.real
    return PhaseDistribution(pgrid, values, "wigner", hbar)


@dataclass(frozen=True, eq=False)
class ClosureResult:
    reconstruction: GridWavefunction
    l2_error: float


def closure_reconstruct(state: GridWavefunction, family: JointStateSpec,
                        pgrid: PhaseGrid) -> ClosureResult:
    """Resynthesize the state from its phase-space representation.

    reconstruction = sum over phase cells of psi~(z) (family state at z)
    dq dy / h; the L2 error gauges how well the (exact) closure relation is
    resolved by the midpoint grid.
    """
    if not state.is_normalized(1e-6):
        raise InvalidInputError("closure needs a normalized state")
    _check_phase_coverage(state, pgrid, 8.0)
    analyzer = PhaseAnalyzer(family, pgrid, state.grid)
    pw = analyzer.transform(state.values)
    rec = analyzer.synthesize(pw)
    err = np.sqrt(np.sum(np.abs(rec - state.values) ** 2) * state.grid.cell_volume)
    return ClosureResult(
        reconstruction=state.with_values(rec),
        l2_error=float(err),
    )


def microstate_hypervolume(state: GridWavefunction, family: JointStateSpec,
                           pgrid: PhaseGrid) -> float:
    """integral of |psi~|^2 dq dy with no 1/h factors; equals h^D = (2 pi hbar)^D."""
    pw = phase_wavefunction(state, family, pgrid)
    return float(np.sum(np.abs(pw.values) ** 2) * pgrid.cell)


def write_distribution(dist, csv_path, json_path=None, gauge_label: str | None = None):
    """CSV export: columns p, x[, p2, x2], value[, im] plus JSON metadata."""
    json_path = json_path or f"{csv_path}.json"
    grid = dist.grid
    complex_valued = np.iscomplexobj(dist.values)
    coords = []
    for pair in grid.pairs:
        coords.append(pair.p_points())
        coords.append(pair.x_points())
    mesh = np.meshgrid(*coords, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    vals = dist.values.reshape(-1)
    if grid.npairs == 1:
        header = ["p", "x", "value"]
    else:
        header = ["p1", "x1", "p2", "x2", "value"]
    columns = list(flat)
    if complex_valued:
        header.append("im")
        columns += [vals.real, vals.imag]
    else:
        columns.append(vals)
    tmp = f"{csv_path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        np.savetxt(fh, np.column_stack(columns), fmt="%.12g", delimiter=",",
                   header=",".join(header), comments="")
    os.replace(tmp, csv_path)
    hbar = dist.hbar if hasattr(dist, "hbar") else dist.family.hbar
    meta = {
        "schema": 1,
        "hbar": hbar,
        "kind": getattr(dist, "kind", "phasewave"),
        "pairs": [
            {"p_min": p.p_min, "p_max": p.p_max, "n_p": p.n_p,
             "x_min": p.x_min, "x_max": p.x_max, "n_x": p.n_x}
            for p in grid.pairs
        ],
    }
    if gauge_label is not None:
        meta["gauge"] = gauge_label
    tmp = f"{json_path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, json_path)
