"""Random initial states versus eigenstates: who remembers the perturbation?

A Haar-random state spreads over all eigenstates from the start, so its
fidelity settles near 1/N whatever the perturbation strength. An initial
eigenstate keeps a memory: its saturation level is the inverse
participation ratio over the perturbed basis and scales like 1/delta^2.

The exact closed-form double sum over the overlap matrix gives 1/N for
the random-state level by row normalization. A Monte Carlo over explicit
random states lands slightly above it, at (1 + IPR)/N: the state's
expansion coefficients are correlated with its overlaps onto the
perturbed basis, a term the closed form drops. The excess dies off as the
eigenstate IPR collapses at strong perturbation.
"""

import numpy as np

from fidsat import (
    certify_unitary,
    fidelity_direct,
    ipr_all,
    overlap_matrix,
    perturbation_unitary,
    qubit_perturbation,
    sample_cue,
    saturation_random_state,
    saturation_time_average,
    spectral_decompose,
)

DIM, NQ = 64, 6
N_STATES = 20


def monte_carlo_level(u, up, rng):
    vals = []
    for _ in range(N_STATES):
        psi = rng.standard_normal(DIM) + 1j * rng.standard_normal(DIM)
        psi /= np.linalg.norm(psi)
        series = fidelity_direct(u, up, psi, 3999, label="haar-random")
        vals.append(saturation_time_average(series, 2000, 2000).value)
    vals = np.array(vals)
    return vals.mean(), vals.std(ddof=1) / np.sqrt(N_STATES)


def main():
    u = sample_cue(DIM, seed=42)
    dec = spectral_decompose(u)
    rng = np.random.Generator(np.random.PCG64(777))
    print(f"CUE N={DIM}, {N_STATES} random states per strength; 1/N = "
          f"{1 / DIM:.5f}\n")
    print(f"{'delta':>6} {'eigenstate':>11} {'closed form':>12} "
          f"{'random MC':>10} {'(1+IPR)/N':>10}")
    for delta in (0.1, 0.2, 0.5, 1.0, 2.0):
        up = perturbation_unitary(qubit_perturbation(NQ, delta))
        pert = certify_unitary(up.matrix @ u.matrix)
        ov = overlap_matrix(dec, spectral_decompose(pert))
        ipr = float(ipr_all(ov).mean())
        closed = saturation_random_state(ov).value
        mc, sem = monte_carlo_level(u, up, rng)
        print(f"{delta:6.2f} {ipr:11.5f} {closed:12.5f} "
              f"{mc:10.5f} {(1 + ipr) / DIM:10.5f}")
    print(
        "\neigenstates saturate far above 1/N and keep falling with delta;\n"
        "the random-state Monte Carlo tracks (1 + IPR)/N and approaches the\n"
        "closed-form 1/N only once the eigenstate IPR itself is near 1/N."
    )


if __name__ == "__main__":
    main()
