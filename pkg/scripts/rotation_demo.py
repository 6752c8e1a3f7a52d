"""Track a coherent density matrix around one oscillator period.

Prints the means trajectory from the evolved density matrix next to the
classical circle, and the drift of the conserved quantities.
"""

import argparse

import numpy as np

from qps import (
    CoordinateGrid,
    FockVector,
    JointStateSpec,
    TruncatedBasis,
    coordinate_wavefunction,
    evolve_lvn,
    expectation,
    from_pure,
    grid_number_states,
    inner_product,
    momentum_matrix,
    number_hamiltonian,
    position_matrix,
    purity,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--x0", type=float, default=1.0)
    parser.add_argument("--steps", type=int, default=8)
    parser.add_argument("--n-max", type=int, default=16)
    args = parser.parse_args()

    spec = JointStateSpec.from_covariance(X=[[0.5]])
    grid = CoordinateGrid.line()
    basis = TruncatedBasis((args.n_max,), spec)
    target = coordinate_wavefunction(spec.displaced([0.0], [args.x0]), grid)
    coeffs = np.array([inner_product(s, target) for s in grid_number_states(basis, grid)])
    rho0 = from_pure(FockVector(basis, coeffs / np.linalg.norm(coeffs)))

    H = number_hamiltonian(basis, args.omega)
    xm, pm = position_matrix(basis), momentum_matrix(basis)
    period = 2.0 * np.pi / args.omega
    print(f"{'t':>8s} {'<x>':>12s} {'<p>':>12s} {'classical x':>12s} {'classical p':>12s}")
    worst_drift = 0.0
    for k in range(args.steps + 1):
        t = period * k / args.steps
        rho_t = evolve_lvn(rho0, H, t)
        x = expectation(rho_t, xm).real
        p = expectation(rho_t, pm).real
        print(f"{t:8.4f} {x:12.8f} {p:12.8f} "
              f"{args.x0 * np.cos(args.omega * t):12.8f} "
              f"{-args.x0 * np.sin(args.omega * t):12.8f}")
        worst_drift = max(worst_drift, abs(purity(rho_t) - purity(rho0)))
    print(f"max purity drift over the period: {worst_drift:.3e}")


if __name__ == "__main__":
    main()
