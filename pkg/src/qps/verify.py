"""Named verification suites behind `qps verify`.

Every check is deterministic (fixed seeds) and reports a row
{name, value, bound, pass[, target]}; with no target the row passes iff
value <= bound, with a target iff |value - target| <= bound.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import density, fock, phasespace, psops
from .grids import CoordinateGrid, GridWavefunction, apply_position, inner_product, moments
from .phasespace import PhaseGrid
from .states import GaugeChoice, JointStateSpec, analytic_overlap, coordinate_wavefunction

SUITES = ("uncertainty", "closure", "microstate", "fock", "gauge", "density")


def _row(name, value, bound, target=None):
    value = float(value)
    bound = float(bound)
    ok = abs(value - target) <= bound if target is not None else value <= bound
    row = {"name": name, "value": value, "bound": bound, "pass": bool(ok)}
    if target is not None:
        row["target"] = float(target)
    return row


def _tol(tols, name, default):
    return float(tols.get(name, default)) if tols else default


def _ground_spec(hbar=1.0, gauge=None):
    return JointStateSpec.from_covariance(
        X=[[hbar / 2.0]], gauge=gauge or GaugeChoice.zero(), hbar=hbar
    )


def _random_states(rng, grid, hbar, count):
    """Smooth normalized states: random mixes of displaced Gaussians.

    Widths scale as sqrt(hbar) and the correlation as hbar, so the family
    keeps the same geometry relative to the grid at any hbar.
    """
    s = np.sqrt(hbar)
    out = []
    for _ in range(count):
        n_comp = rng.integers(1, 4)
        values = np.zeros(grid.shape, dtype=complex)
        for _ in range(n_comp):
            X = rng.uniform(0.3, 1.2) * hbar
            spec = JointStateSpec.from_covariance(
                X=[[X]],
                rho=[[rng.uniform(-0.5, 0.5) * hbar]],
                mean_p=[rng.uniform(-2, 2) * s],
                mean_x=[rng.uniform(-2, 2) * s],
                hbar=hbar,
            )
            amp = rng.normal() + 1j * rng.normal()
            values += amp * coordinate_wavefunction(spec, grid).values
        psi = GridWavefunction(grid, values, hbar)
        out.append(psi.with_values(psi.values / psi.norm()))
    return out


def suite_uncertainty(hbar=1.0, tols=None):
    rng = np.random.default_rng(101)
    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-16 * s, 16 * s, 1024)
    checks = []

    worst = 0.0
    for _ in range(50):
        X = rng.uniform(0.25, 1.5) * hbar
        spec = JointStateSpec.from_covariance(
            X=[[X]],
            rho=[[rng.uniform(-0.6, 0.6) * hbar]],
            mean_p=[rng.uniform(-2, 2) * s],
            mean_x=[rng.uniform(-2, 2) * s],
            hbar=hbar,
        )
        m = moments(coordinate_wavefunction(spec, grid))
        det = m.P[0, 0] * m.X[0, 0] - m.rho[0, 0] ** 2
        worst = max(worst, abs(det - hbar**2 / 4.0) / (hbar**2 / 4.0))
    checks.append(_row("saturation_grid_rel", worst, _tol(tols, "saturation", 1e-6)))

    margin = np.inf
    for psi in _random_states(rng, grid, hbar, 100):
        m = moments(psi)
        margin = min(margin, np.sqrt(m.X[0, 0] * m.P[0, 0]) - hbar / 2.0)
    checks.append(_row("kennard_violation", max(0.0, -margin), _tol(tols, "kennard", 1e-8)))

    spec = _ground_spec(hbar)
    basis = fock.TruncatedBasis((8,), spec)
    viol = 0.0
    for _ in range(50):
        A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        A = A + A.conj().T
        B = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        B = B + B.conj().T
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        state = fock.FockVector(basis, v / np.linalg.norm(v))
        rep = fock.robertson_check(A, B, state)
        viol = max(viol, rep.rhs - rep.lhs)
    checks.append(_row("robertson_violation", max(0.0, viol), _tol(tols, "kennard", 1e-8)))
    return checks


def _superposition(grid, spec, seed=7, n_top=3):
    basis = fock.TruncatedBasis((n_top + 1,), spec)
    states = fock.grid_number_states(basis, grid)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n_top + 1) + 1j * rng.normal(size=n_top + 1)
    c /= np.linalg.norm(c)
    values = sum(ci * s.values for ci, s in zip(c, states))
    psi = GridWavefunction(grid, values, spec.hbar)
    return psi.with_values(psi.values / psi.norm())


def suite_closure(hbar=1.0, tols=None):
    spec = _ground_spec(hbar)
    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-16 * s, 16 * s, 1024)
    tol = _tol(tols, "closure", 1e-3)
    checks = []

    coherent = coordinate_wavefunction(spec.displaced([0.3 * s], [0.8 * s]), grid)
    pg = PhaseGrid.symmetric(12.0 * s, 128)
    checks.append(
        _row("coherent_closure", phasespace.closure_reconstruct(coherent, spec, pg).l2_error, tol)
    )

    sup = _superposition(grid, spec)
    pg_sup = PhaseGrid.symmetric(16.0 * s, 128)
    checks.append(
        _row("superposition_closure", phasespace.closure_reconstruct(sup, spec, pg_sup).l2_error, tol)
    )

    coarse = phasespace.closure_reconstruct(sup, spec, PhaseGrid.symmetric(16.0 * s, 32)).l2_error
    fine = phasespace.closure_reconstruct(sup, spec, PhaseGrid.symmetric(16.0 * s, 64)).l2_error
    checks.append(_row("refinement_decrease", fine, coarse))
    return checks


def suite_microstate(hbar=1.0, tols=None):
    h = 2.0 * np.pi * hbar
    rel = _tol(tols, "microstate", 1e-3)
    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-16 * s, 16 * s, 1024)
    spec = _ground_spec(hbar)
    pg = PhaseGrid.symmetric(12.0 * s, 128)
    checks = []

    named = {
        "integral_h": coordinate_wavefunction(spec.displaced([0.5 * s], [0.5 * s]), grid),
        "integral_h_squeezed": coordinate_wavefunction(
            JointStateSpec.from_covariance(X=[[hbar / 4.0]], hbar=hbar), grid
        ),
        "integral_h_correlated": coordinate_wavefunction(
            JointStateSpec.from_covariance(X=[[hbar / 2.0]], rho=[[0.4 * hbar]], hbar=hbar), grid
        ),
        "integral_h_number1": fock.number_state(1, fock.TruncatedBasis((3,), spec), grid),
        "integral_h_superposition": _superposition(grid, spec),
    }
    vol = None
    for name, psi in named.items():
        vol = phasespace.microstate_hypervolume(psi, spec, pg)
        checks.append(_row(name, vol, rel * h, target=h))

    spec2 = JointStateSpec.from_covariance(X=np.diag([hbar / 2.0, hbar / 2.0]), hbar=hbar)
    grid2 = CoordinateGrid.square(-12 * s, 12 * s, 128)
    psi2 = coordinate_wavefunction(spec2, grid2)
    pg2 = PhaseGrid.symmetric(8.0 * s, 48, npairs=2)
    vol2 = phasespace.microstate_hypervolume(psi2, spec2, pg2)
    checks.append(_row("integral_h2_product", vol2, 2.0 * rel * h**2, target=h**2))

    count = density.count_microstates(vol, 1, hbar)
    checks.append(_row("omega_single_state", count.omega, rel, target=1.0))
    checks.append(_row("entropy_ten_h", density.boltzmann_entropy(10.0), 1e-12, target=np.log(10.0)))
    return checks


def suite_fock(hbar=1.0, tols=None):
    spec = _ground_spec(hbar)
    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-12 * s, 12 * s, 2048)
    basis = fock.TruncatedBasis((4,), spec)
    lad = fock.build_ladder(basis)
    checks = []

    sub = np.diag(lad.lowering[0], k=1)
    checks.append(_row("subdiagonal_sqrt_n", np.abs(sub - np.sqrt(np.arange(1, 4))).max(), 0.0))
    # number is the literal product raise @ lower; its diagonal hits the
    # integers to a few ulps of the squared roots
    checks.append(
        _row("number_eigenvalues", np.abs(np.diag(lad.number) - np.arange(4)).max(), 1e-12)
    )
    comm = lad.lowering[0] @ lad.raising[0] - lad.raising[0] @ lad.lowering[0]
    checks.append(_row("commutator_interior", np.abs(comm - np.eye(4))[:3, :3].max(), 1e-12))

    checks.append(
        _row("gram_identity", fock.orthonormality_check(basis, grid), _tol(tols, "gram", 1e-6))
    )

    xmat = fock.operator_matrix(lambda s: apply_position(s, 0), basis, grid)
    checks.append(_row("x_matrix_hermitian", np.abs(xmat - xmat.conj().T).max(), 1e-8))
    checks.append(_row("x_01_element", abs(xmat[0, 1]), 1e-6, target=np.sqrt(spec.moments.X[0, 0])))

    n2 = fock.number_state(2, fock.TruncatedBasis((4,), spec), grid)
    coeffs = np.array(
        [inner_product(s, n2) for s in fock.grid_number_states(basis, grid)]
    )
    nval = float(np.real(coeffs.conj() @ lad.number @ coeffs))
    checks.append(_row("number_expectation_n2", nval, 1e-7, target=2.0))
    return checks


def suite_gauge(hbar=1.0, tols=None):
    spec_zero = _ground_spec(hbar)
    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-16 * s, 16 * s, 1024)
    psi = coordinate_wavefunction(spec_zero.displaced([0.4 * s], [0.6 * s]), grid)
    pg = PhaseGrid.symmetric(12.0 * s, 192)
    pw = phasespace.phase_wavefunction(psi, spec_zero, pg)
    ccr_tol = _tol(tols, "ccr", 1e-8)
    checks = []

    residuals = {}
    for gauge in (GaugeChoice.zero(), GaugeChoice.full(), GaugeChoice.half()):
        residuals[gauge.kind] = psops.ccr_residual(gauge, pw)
        checks.append(_row(f"ccr_{gauge.kind}", residuals[gauge.kind], ccr_tol))
    vals = list(residuals.values())
    spread = max(vals) - min(vals)
    checks.append(_row("ccr_pairwise_agreement", spread, _tol(tols, "gauge_pair", 1e-10)))

    # gauge covariance: analyzing the same state in each gauge and applying
    # the matching operator changes the samples by a unit-modulus factor only
    mods = []
    for gauge in (GaugeChoice.zero(), GaugeChoice.full(), GaugeChoice.half()):
        fam = dataclasses.replace(spec_zero, gauge=gauge)
        pw_g = phasespace.phase_wavefunction(psi, fam, pg)
        mods.append(np.abs(psops.apply_ptilde(pw_g, 0).values))
    mod_dev = max(np.abs(m - mods[0]).max() for m in mods[1:])
    checks.append(_row("ptilde_modulus_gauge_invariance", mod_dev, 1e-10))

    rep = psops.consistency_check(psi, spec_zero, pg, GaugeChoice.zero())
    checks.append(_row("consistency_p", rep.p_error, _tol(tols, "consistency", 1e-3)))
    checks.append(_row("consistency_x", rep.x_error, _tol(tols, "consistency", 1e-3)))

    # complex overlap matches quadrature exactly in the zero gauge
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(25):
        a = spec_zero.displaced([rng.uniform(-2, 2) * s], [rng.uniform(-2, 2) * s])
        b = spec_zero.displaced([rng.uniform(-2, 2) * s], [rng.uniform(-2, 2) * s])
        quad = inner_product(coordinate_wavefunction(a, grid), coordinate_wavefunction(b, grid))
        worst = max(worst, abs(quad - analytic_overlap(a, b)))
    checks.append(_row("overlap_phase_zero_gauge", worst, _tol(tols, "overlap", 1e-8)))
    return checks


def suite_density(hbar=1.0, tols=None):
    rng = np.random.default_rng(23)
    spec = _ground_spec(hbar)
    basis = fock.TruncatedBasis((8,), spec)
    tol = _tol(tols, "purity", 1e-10)
    checks = []

    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    pure = density.from_pure(fock.FockVector(basis, v / np.linalg.norm(v)))
    checks.append(_row("purity_pure", density.purity(pure), 1e-10, target=1.0))

    drift = 0.0
    for _ in range(100):
        H = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        H = H + H.conj().T
        comps = []
        weights = rng.uniform(0.1, 1.0, size=3)
        weights /= weights.sum()
        for w in weights:
            u = rng.normal(size=8) + 1j * rng.normal(size=8)
            comps.append((w, fock.FockVector(basis, u / np.linalg.norm(u))))
        rho = density.from_mixture(density.MixtureSpec(tuple(comps)))
        rho_t = density.evolve_lvn(rho, H, rng.uniform(0.1, 5.0), hbar)
        drift = max(
            drift,
            abs(np.trace(rho_t.matrix).real - 1.0),
            abs(density.purity(rho_t) - density.purity(rho)),
            float(
                np.abs(
                    np.linalg.eigvalsh(rho_t.matrix) - np.linalg.eigvalsh(rho.matrix)
                ).max()
            ),
        )
    checks.append(_row("lvn_preservation", drift, tol))

    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    A = A + A.conj().T
    comps = []
    weights = rng.uniform(0.1, 1.0, size=4)
    weights /= weights.sum()
    for w in weights:
        u = rng.normal(size=8) + 1j * rng.normal(size=8)
        comps.append((w, fock.FockVector(basis, u / np.linalg.norm(u))))
    mix = density.MixtureSpec(tuple(comps))
    lhs = density.expectation(density.from_mixture(mix), A)
    rhs = sum(w * np.vdot(s.coeffs, A @ s.coeffs) for w, s in mix.components)
    checks.append(_row("mixture_linearity", abs(lhs - rhs), 1e-10))

    s = np.sqrt(hbar)
    grid = CoordinateGrid.line(-12 * s, 12 * s, 1024)
    basis_c = fock.TruncatedBasis((14,), spec)
    coh = coordinate_wavefunction(spec.displaced([0.0], [1.0 * s]), grid)
    coeffs = np.array([inner_product(s, coh) for s in fock.grid_number_states(basis_c, grid)])
    rho0 = density.from_pure(fock.FockVector(basis_c, coeffs / np.linalg.norm(coeffs)))
    H = density.number_hamiltonian(basis_c, omega=1.0, hbar=hbar)
    rho_q = density.evolve_lvn(rho0, H, np.pi / 2.0, hbar)
    xm = fock.position_matrix(basis_c)
    pm = fock.momentum_matrix(basis_c)
    checks.append(_row("quarter_turn_x", density.expectation(rho_q, xm).real, 1e-6 * s, target=0.0))
    checks.append(_row("quarter_turn_p", density.expectation(rho_q, pm).real, 1e-6 * s, target=-1.0 * s))

    pg = PhaseGrid.symmetric(8.0 * s, 128)
    hus = phasespace.husimi_distribution(rho_q, spec, pg, grid)
    peak = hus.argmax_point()
    cell = np.hypot(pg.pairs[0].dp, pg.pairs[0].dx)
    checks.append(_row("quarter_turn_husimi_peak", np.hypot(peak[0] + 1.0 * s, peak[1]), cell))

    rho_full = density.evolve_lvn(rho0, H, 2.0 * np.pi, hbar)
    checks.append(
        _row("full_period_return", float(np.abs(rho_full.matrix - rho0.matrix).max()), 1e-8)
    )
    return checks


def run_suite(name: str, hbar: float = 1.0, tols=None) -> dict:
    funcs = {
        "uncertainty": suite_uncertainty,
        "closure": suite_closure,
        "microstate": suite_microstate,
        "fock": suite_fock,
        "gauge": suite_gauge,
        "density": suite_density,
    }
    if name == "all":
        checks = []
        for key in SUITES:
            for row in funcs[key](hbar, tols):
                row = dict(row)
                row["name"] = f"{key}.{row['name']}"
                checks.append(row)
    else:
        if name not in funcs:
            raise ValueError(f"unknown suite {name!r}")
        checks = funcs[name](hbar, tols)
    return {"schema": 1, "suite": name, "checks": checks}
