"""Local density of states and the exponential decay it generates.

An unperturbed eigenstate spreads over the perturbed eigenbasis with a
Lorentzian profile whose width is the golden-rule rate
Gamma = delta^2 * lam2. The fidelity is the squared Fourier transform of
that profile, so the early decay is exp(-Gamma n): plotting the
eigenstate-averaged curves against delta^2 n collapses them onto one line
until each bends off at its own saturation level.
"""

import numpy as np

from fidsat import (
    certify_unitary,
    fidelity_spectral_batch,
    fit_exponential_decay,
    fit_lorentzian,
    gamma_theory,
    ipr_all,
    ldos,
    overlap_matrix,
    perturbation_unitary,
    qubit_perturbation,
    sample_cue,
    spectral_decompose,
)
from fidsat.fidelity import FidelitySeries

DIM, NQ, LAM2 = 256, 8, 2.0
DELTAS = (0.1, 0.2, 0.3, 0.4)


def main():
    u = sample_cue(DIM, seed=1)
    dec = spectral_decompose(u)
    print(f"CUE N={DIM}, collective z-rotation on {NQ} qubits (lam2={LAM2})\n")
    print(f"{'delta':>6} {'Gamma theory':>13} {'LDOS width':>11} "
          f"{'rate fit':>9} {'F_inf':>8}")

    for delta in DELTAS:
        up = perturbation_unitary(qubit_perturbation(NQ, delta))
        pert = certify_unitary(up.matrix @ u.matrix)
        ov = overlap_matrix(dec, spectral_decompose(pert))

        hist = ldos(ov, m="all", bins=101)
        width = fit_lorentzian(hist).params["width"]

        fbar = fidelity_spectral_batch(ov, 800).mean(axis=1)
        series = FidelitySeries(values=fbar, method="spectral",
                                initial_state="eigenstate-averaged")
        f_inf = float(ipr_all(ov).mean())
        rate = fit_exponential_decay(series, fit_floor=0.1,
                                     offset=f_inf).params["rate"]
        gamma = gamma_theory(delta, LAM2)
        print(f"{delta:6.2f} {gamma:13.4f} {width:11.4f} {rate:9.4f} "
              f"{f_inf:8.4f}")

    print(
        "\nthe golden-rule window at this dimension opens near delta ~ 0.28\n"
        "(coupling above the mean level spacing): the weaker strengths carry\n"
        "a visible rate excess, the stronger ones land on Gamma. The LDOS\n"
        "width tracks Gamma throughout."
    )


if __name__ == "__main__":
    main()
