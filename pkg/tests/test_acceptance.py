"""Acceptance suite: one test per acceptance criterion, at stated tolerances.

Each test prints an ``ACCEPTANCE <n> ...: PASS/FAIL`` line before asserting,
so a plain ``pytest -s tests/test_acceptance.py`` reads as a checklist.
Heavy spectral decompositions are cached at module scope and shared across
criteria. Everything is seeded and deterministic.
"""

import functools

import numpy as np
import pytest

from fidsat import (
    KickedTopParams,
    certify_unitary,
    coe_spacing_pdf,
    cue_spacing_pdf,
    ensemble_ratio,
    fidelity_direct,
    fidelity_spectral,
    fidelity_spectral_batch,
    fit_exponential_decay,
    fit_lorentzian,
    fit_power_law,
    gamma_theory,
    ipr_all,
    kicked_top,
    l1_distance_to_pdf,
    ldos,
    make_coe,
    nearest_neighbor_spacings,
    oe_system,
    overlap_matrix,
    perturbation_generator_variance,
    perturbation_unitary,
    qubit_perturbation,
    rotation_parity_operator,
    sample_cue,
    saturation_random_state,
    saturation_time_average,
    select_fgr_window,
    spectral_decompose,
    spin_perturbation,
)
from fidsat.analysis import SaturationCurve
from fidsat.experiment import run_experiment, validate_config

SEEDS = (1, 2, 3, 4, 5)
GRID = (0.16, 0.20, 0.25, 0.32, 0.40, 0.50)  # spans the N=256 FGR window

N256, NQ256, LAM2_256 = 256, 8, 2.0
QKT_J = 127.5
QKT_LAM2 = QKT_J * (QKT_J + 1.0) / 3.0
# same golden-rule rates as GRID, mapped onto the spin-form generator
QKT_GRID = tuple(d * np.sqrt(LAM2_256 / QKT_LAM2) for d in GRID)
OE_J = 256


def report(name, ok, detail):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} - {detail}")


@functools.lru_cache(maxsize=None)
def base_system(kind, seed):
    if kind == "CUE":
        u = sample_cue(N256, seed)
    elif kind == "COE":
        u = make_coe(sample_cue(N256, seed))
    elif kind == "QKT":
        u = kicked_top(KickedTopParams(j=QKT_J, k=12.0))
    elif kind == "QKT-oe":
        u = oe_system(KickedTopParams(j=OE_J, k=12.0)).restricted
    else:
        raise ValueError(kind)
    return u, spectral_decompose(u)


@functools.lru_cache(maxsize=None)
def overlap(kind, seed, delta):
    u, dec = base_system(kind, seed)
    if kind == "QKT":
        spec = spin_perturbation(QKT_J, delta)
    else:
        spec = qubit_perturbation(NQ256, delta)
    up = perturbation_unitary(spec)
    pert = certify_unitary(up.matrix @ u.matrix)
    return overlap_matrix(dec, spectral_decompose(pert))


@functools.lru_cache(maxsize=None)
def f_inf(kind, seed, delta):
    return float(ipr_all(overlap(kind, seed, delta)).mean())


@functools.lru_cache(maxsize=None)
def pinned_constant(kind, seed, grid):
    lam2 = QKT_LAM2 if kind == "QKT" else LAM2_256
    vals = [f_inf(kind, seed, d) * d**2 * lam2 * N256 for d in grid]
    return float(np.mean(vals))


def seed_mean_curve(kind, grid):
    lam2 = QKT_LAM2 if kind == "QKT" else LAM2_256
    f = np.array([np.mean([f_inf(kind, s, d) for s in SEEDS]) for d in grid])
    return SaturationCurve(deltas=np.array(grid), f_inf=f, ensemble=kind,
                           dim=N256, lambda_sq=lam2)


@functools.lru_cache(maxsize=None)
def coe_band():
    """Measured seed-to-seed band of the pinned COE constant."""
    cs = np.array([pinned_constant("COE", s, GRID) for s in SEEDS])
    return float(cs.mean()), float(2.0 * cs.std(ddof=1))


def test_criterion_1_estimator_equivalence():
    # CUE N=64, 5 seeds, deltas {0.1, 0.2, 0.3}, all eigenstates: the IPR
    # agrees with the (2000, 2000)-window time average within 4 standard
    # errors for at least 95% of (state, delta) cells.
    dim, nq = 64, 6
    good = total = 0
    for seed in SEEDS:
        u = sample_cue(dim, seed)
        dec = spectral_decompose(u)
        for delta in (0.1, 0.2, 0.3):
            up = perturbation_unitary(qubit_perturbation(nq, delta))
            pert = certify_unitary(up.matrix @ u.matrix)
            ov = overlap_matrix(dec, spectral_decompose(pert))
            f = fidelity_spectral_batch(ov, 3999)
            window = f[2000:4000]
            means = window.mean(axis=0)
            errs = window.std(axis=0, ddof=1) / np.sqrt(2000)
            devs = np.abs(means - ipr_all(ov)) / np.maximum(errs, 1e-300)
            good += int((devs <= 4.0).sum())
            total += dim
    frac = good / total
    report("1 estimator equivalence", frac >= 0.95,
           f"{good}/{total} cells within 4 sigma ({100 * frac:.2f}%)")
    assert frac >= 0.95


def test_criterion_2_cross_method_oracle():
    # fidelity_direct and fidelity_spectral agree to 1e-8 for N <= 32,
    # n <= 200, 20 random seeds.
    worst = 0.0
    for seed in range(1, 21):
        rng = np.random.Generator(np.random.PCG64(seed))
        dim = int(rng.integers(4, 33))
        u = sample_cue(dim, seed)
        up = perturbation_unitary(spin_perturbation((dim - 1) / 2.0, 0.3))
        dec = spectral_decompose(u)
        pert = certify_unitary(up.matrix @ u.matrix)
        ov = overlap_matrix(dec, spectral_decompose(pert))
        for m in range(0, dim, 4):
            spectral = fidelity_spectral(ov, m, 200)
            direct = fidelity_direct(u, up, dec.vectors[:, m], 200)
            worst = max(worst, float(np.abs(spectral.values
                                            - direct.values).max()))
    report("2 cross-method oracle", worst < 1e-8,
           f"max |direct - spectral| = {worst:.3e}")
    assert worst < 1e-8


def test_criterion_3_strong_perturbation_floors():
    # At delta = 2.0 the eigenstate-averaged saturation reaches 2/N (CUE)
    # and 3/N (COE) within 15%, measured through the experiment runner.
    for kind, floor in (("CUE", 2.0 / N256), ("COE", 3.0 / N256)):
        cfg = validate_config(
            f"ensemble = {kind}\ndim = {N256}\ndeltas = 2.0\n"
            f"seeds = {', '.join(str(s) for s in SEEDS)}\nestimator = ipr\n"
        )
        res = run_experiment(cfg)
        mean = float(np.mean([r.f_inf_mean for r in res.rows]))
        rel = abs(mean - floor) / floor
        report(f"3 strong floor {kind}", rel < 0.15,
               f"N*F_inf = {N256 * mean:.4f} vs {N256 * floor:.0f} "
               f"({100 * rel:.2f}% off)")
        assert rel < 0.15


def test_criterion_4_fgr_power_law_cue():
    # Free-exponent fit within [-2.2, -1.6]; pinned constant within the
    # paper value 3.6 plus/minus the measured 2-sigma seed spread.
    curve = seed_mean_curve("CUE", GRID)
    window = select_fgr_window(curve)
    assert window is not None
    assert window[0] == pytest.approx(GRID[0]) and window[1] == pytest.approx(GRID[-1])
    fit = fit_power_law(curve, *window)
    exponent = fit.params["exponent"]

    cs = np.array([pinned_constant("CUE", s, GRID) for s in SEEDS])
    c_mean, half_width = float(cs.mean()), float(2.0 * cs.std(ddof=1))

    ok_exp = -2.2 <= exponent <= -1.6
    report("4 CUE free exponent", ok_exp, f"exponent = {exponent:.3f}")
    ok_c = abs(c_mean - 3.6) <= half_width
    report("4 CUE pinned constant", ok_c,
           f"C = {c_mean:.3f} vs 3.6 +- {half_width:.3f} "
           f"(per-seed {np.round(cs, 3)})")
    assert ok_exp
    assert ok_c


def test_criterion_5_ensemble_ratio():
    # COE to CUE saturation ratio over the shared FGR window in [1.3, 1.7].
    coe = seed_mean_curve("COE", GRID)
    cue = seed_mean_curve("CUE", GRID)
    ratio = ensemble_ratio(coe, cue)
    ok = 1.3 <= ratio <= 1.7
    report("5 COE/CUE ratio", ok, f"ratio = {ratio:.3f}")
    assert ok


def test_criterion_5_coe_constant():
    # Pinned COE constant against the quoted 5.4 with the same 2-sigma
    # seed-spread band rule as criterion 4.
    #
    # Known red at desk scale: with the default golden-rule window at
    # N = 256 the measured constant sits near 4.8 (it rises toward 5.4
    # only as N grows; 5.23 at N = 512), while the seed-to-seed spread at
    # fixed N = 256 is ~0.1, far smaller than that finite-size gap. The
    # assertion is kept at its stated tolerance rather than widened.
    cs = np.array([pinned_constant("COE", s, GRID) for s in SEEDS])
    c_mean = float(cs.mean())
    half_width = float(2.0 * cs.std(ddof=1))
    ok = abs(c_mean - 5.4) <= half_width
    report("5 COE pinned constant", ok,
           f"C = {c_mean:.3f} vs 5.4 +- {half_width:.3f} "
           f"(per-seed {np.round(cs, 3)})")
    assert ok, (
        f"measured C_COE = {c_mean:.3f} with 2-sigma seed spread "
        f"{half_width:.3f} does not cover 5.4; the gap is a finite-size "
        f"window systematic (C grows with N: ~5.2 at N=512), not seed noise"
    )


def _averaged_series(delta, n_max=800):
    ov = overlap("CUE", 1, delta)
    f = fidelity_spectral_batch(ov, n_max)
    fbar = f.mean(axis=1)
    from fidsat.fidelity import FidelitySeries

    series = FidelitySeries(values=fbar, method="spectral",
                            initial_state="eigenstate-averaged")
    ipr = float(ipr_all(ov).mean())
    return series, ipr


DECAY_DELTAS = (0.1, 0.2, 0.3, 0.4)


@functools.lru_cache(maxsize=None)
def decay_fits():
    out = {}
    for delta in DECAY_DELTAS:
        series, ipr = _averaged_series(delta)
        fit = fit_exponential_decay(series, fit_floor=0.1, offset=ipr)
        n_end = int(fit.window.split("..")[1].split(" ")[0]) + 1
        out[delta] = (series, ipr, fit.params["rate"], n_end)
    return out


def test_criterion_6_decay_rates():
    # Gamma_fit within 20% of delta^2 lambda2 for each delta.
    #
    # Known red at delta = 0.1 and 0.2: at N = 256 those strengths sit
    # below the golden-rule threshold (coupling sigma < level spacing
    # Delta; sigma/Delta = 0.36 and 0.72), where the decay is not
    # exponential at the golden-rule rate. At N = 1024, where all four
    # strengths satisfy sigma > Delta, the same fit recovers the rate.
    rows = []
    ok_all = True
    for delta in DECAY_DELTAS:
        _, _, rate, _ = decay_fits()[delta]
        gamma = gamma_theory(delta, LAM2_256)
        rel = abs(rate - gamma) / gamma
        ok = rel <= 0.20
        ok_all = ok_all and ok
        rows.append(f"delta={delta}: fit {rate:.4f} vs {gamma:.4f} "
                    f"({100 * rel:.1f}% off)")
    report("6 decay rates", ok_all, "; ".join(rows))
    assert ok_all, (
        "rate fits outside 20%: " + "; ".join(rows)
        + "; the sub-threshold strengths (sigma < mean level spacing at "
        "N=256 for delta <= 0.2) decay faster than the golden-rule rate"
    )


def test_criterion_6_decay_collapse():
    # ln F curves plotted against delta^2 n overlap over the shared fit
    # window: pairwise RMS below 0.2.
    fits = decay_fits()
    x_max = min(delta**2 * fits[delta][3] for delta in DECAY_DELTAS)
    xgrid = np.linspace(x_max * 5e-3, x_max, 64)
    logf = {}
    for delta in DECAY_DELTAS:
        series = fits[delta][0]
        x = delta**2 * np.arange(len(series.values))
        logf[delta] = np.interp(xgrid, x, np.log(series.values))
    worst = 0.0
    import itertools

    for a, b in itertools.combinations(DECAY_DELTAS, 2):
        rms = float(np.sqrt(np.mean((logf[a] - logf[b]) ** 2)))
        worst = max(worst, rms)
    report("6 decay collapse", worst < 0.2,
           f"max pairwise RMS(ln F) = {worst:.3f} over delta^2 n <= {x_max:.3f}")
    assert worst < 0.2


def test_criterion_7_ldos_lorentzian():
    # Averaged LDOS at delta = 0.2: fitted width within 30% of the
    # golden-rule rate, histogram complete to 1e-8.
    ov = overlap("CUE", 1, 0.20)
    hist = ldos(ov, m="all", bins=101)
    total = float(hist.weights.sum())
    fit = fit_lorentzian(hist)
    width = fit.params["width"]
    gamma = gamma_theory(0.20, LAM2_256)
    rel = abs(width - gamma) / gamma
    ok = rel < 0.30 and abs(total - 1.0) < 1e-8
    report("7 LDOS Lorentzian", ok,
           f"width = {width:.4f} vs {gamma:.4f} ({100 * rel:.1f}% off), "
           f"sum = {total:.10f}")
    assert abs(total - 1.0) < 1e-8
    assert rel < 0.30
    for m in (0, 85, 170, 255):
        single = ldos(ov, m=m, bins=101)
        assert float(single.weights.sum()) == pytest.approx(1.0, abs=1e-8)


@functools.lru_cache(maxsize=None)
def random_state_mc():
    dim, nq, delta = 64, 6, 0.2
    u = sample_cue(dim, 42)
    up = perturbation_unitary(qubit_perturbation(nq, delta))
    rng = np.random.Generator(np.random.PCG64(12345))
    vals = []
    for _ in range(20):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        series = fidelity_direct(u, up, psi, 3999, label="haar-random")
        vals.append(saturation_time_average(series, 2000, 2000).value)
    return np.array(vals), u, up


def test_criterion_8_random_state_mc():
    # 20 Haar-random initial states at N = 64, delta = 0.2: time-averaged
    # saturation consistent with 1/N within 5 standard errors of the mean.
    #
    # Known red: the measured mean sits at (1 + IPR_bar)/N, not 1/N. The
    # closed-form 1/N drops the correlation between the state's expansion
    # coefficients and its overlaps with the perturbed basis; that
    # correction is proportional to the mean eigenstate IPR, which is
    # ~0.49 at these sub-golden-rule parameters, i.e. a ~50% systematic,
    # while the 20-state standard error is under 1%.
    vals, _, _ = random_state_mc()
    mean = float(vals.mean())
    sem = float(vals.std(ddof=1) / np.sqrt(len(vals)))
    target = 1.0 / 64
    dev = abs(mean - target) / sem
    ok = dev <= 5.0
    report("8 random-state MC", ok,
           f"mean = {mean:.6f} vs 1/N = {target:.6f} ({dev:.1f} sem)")
    assert ok, (
        f"random-state time average {mean:.6f} is {dev:.1f} standard errors "
        f"from 1/N = {target:.6f}; the offset equals the mean eigenstate "
        f"IPR / N (state-overlap correlation term dropped by the 1/N "
        f"closed form), a systematic, not sampling noise"
    )


def test_criterion_8_closed_form_double_sum():
    _, u, up = random_state_mc()
    dec = spectral_decompose(u)
    pert = certify_unitary(up.matrix @ u.matrix)
    ov = overlap_matrix(dec, spectral_decompose(pert))
    value = saturation_random_state(ov).value
    ok = abs(value - 1.0 / 64) < 1e-8
    report("8 closed-form double sum", ok, f"sum = {value:.12f}")
    assert ok


def test_criterion_9_qkt_spacings_coe_like():
    _, dec = base_system("QKT", 0)
    s = nearest_neighbor_spacings(dec.phases)
    d_coe = l1_distance_to_pdf(s, coe_spacing_pdf)
    d_cue = l1_distance_to_pdf(s, cue_spacing_pdf)
    ok = d_coe < d_cue
    report("9 QKT spacings", ok,
           f"L1 to COE = {d_coe:.3f} < L1 to CUE = {d_cue:.3f}")
    assert ok


def test_criterion_9_oe_projector():
    system = oe_system(KickedTopParams(j=OE_J, k=12.0))
    n_full = 2 * OE_J + 1
    r = rotation_parity_operator(OE_J)
    defect = float(np.abs(r @ system.projector + system.projector).max())
    ok = defect < 1e-9 * n_full
    report("9 oe projector", ok,
           f"|R P + P| = {defect:.2e}, restricted defect = "
           f"{system.restricted.unitarity_defect:.2e}")
    assert ok
    assert system.restricted.unitarity_defect < 1e-10 * system.restricted.dim
    assert system.projector.shape == (n_full, OE_J)


def test_criterion_9_qkt_constant_in_coe_band():
    # The full-top constant (spin-form perturbation, same golden-rule
    # window) lies inside the measured COE seed band of criterion 5.
    c_qkt = pinned_constant("QKT", 0, QKT_GRID)
    center, half_width = coe_band()
    ok = abs(c_qkt - center) <= half_width
    report("9 QKT constant vs COE band", ok,
           f"C_QKT = {c_qkt:.3f} vs COE {center:.3f} +- {half_width:.3f}")
    assert ok


def test_criterion_9_oe_constant_exceeds_qkt():
    # The odd-subspace experiment (collective qubit z-rotation on the
    # 256-dimensional sector) reports a constant above the full top's.
    cs = [f_inf("QKT-oe", 0, d) * d**2 * LAM2_256 * N256 for d in GRID]
    c_oe = float(np.mean(cs))
    c_qkt = pinned_constant("QKT", 0, QKT_GRID)
    ok = c_oe > c_qkt
    report("9 oe constant", ok, f"C_oe = {c_oe:.3f} > C_QKT = {c_qkt:.3f}")
    assert ok


def test_criterion_10_weak_perturbation_limit():
    value = f_inf("CUE", 1, 1e-4)
    ok = value > 0.99
    report("10 weak-perturbation limit", ok, f"mean IPR = {value:.8f}")
    assert ok
