import math

import numpy as np
import pytest

from ffma.mcsim import (
    BERCurve,
    ChannelConfig,
    FramePipeline,
    ModulationMap,
    analytic_ser,
    detect_ffsp_posteriors,
    ebn0_at_ser,
    girth_at_least_6,
    ldpc_ensemble,
    modulate,
    run_pipeline,
    transmit_superposed,
)


def test_modulation_maps():
    m2 = ModulationMap.for_field_char(2)
    assert m2.amplitudes.tolist() == [-1.0, 1.0]
    m3 = ModulationMap.for_field_char(3)
    assert m3.amplitudes[0] == 0.0
    assert m3.amplitudes[1] == pytest.approx(math.sqrt(1.5))
    assert m3.amplitudes[2] == pytest.approx(-math.sqrt(1.5))
    # unit average energy and zero mean for the ternary map
    assert np.mean(m3.amplitudes**2) == pytest.approx(1.0)
    assert np.mean(m3.amplitudes) == pytest.approx(0.0)


def test_sum_compatibility_of_levels():
    # the integer level sum determines the finite-field sum
    for p in (3, 5, 7):
        mmap = ModulationMap.for_field_char(p)
        for u in range(p):
            assert mmap.int_levels[u] % p == u
    m2 = ModulationMap.for_field_char(2)
    for total, J, expected in ((-2, 2, 0), (0, 2, 1), (2, 2, 0), (-3, 3, 0), (-1, 3, 1)):
        assert m2.ffsp_of_level_sum(total, J) == expected


def test_modulate_zero_power():
    mmap = ModulationMap.for_field_char(3)
    assert not modulate(np.array([0, 1, 2]), 0.0, mmap).any()
    x = modulate(np.array([1]), 4.0, mmap)
    assert x[0] == pytest.approx(2.0 * math.sqrt(1.5))


def test_transmit_superposed():
    mmap = ModulationMap.for_field_char(3)
    rng = np.random.default_rng(0)
    x = modulate(np.array([1, 2, 0]), 1.0, mmap)
    y = transmit_superposed([x], 1e-30, rng)
    assert np.allclose(y, x, atol=1e-10)
    x2 = modulate(np.array([1, 1, 1]), 1.0, mmap)
    y2 = transmit_superposed([x2, x2], 1e-30, rng)
    assert y2[0] == pytest.approx(2.0 * math.sqrt(1.5), abs=1e-9)


def test_detect_noiseless_deltas():
    mmap = ModulationMap.for_field_char(3)
    symbols = np.array([0, 1, 2, 1])
    y = modulate(symbols, 2.0, mmap)
    post = detect_ffsp_posteriors(y, 1, 2.0, mmap, 1e-9)
    assert np.argmax(post, axis=1).tolist() == symbols.tolist()
    assert post.sum(axis=1) == pytest.approx(np.ones(4))


def test_detect_superposed_lattice_point():
    mmap = ModulationMap.for_field_char(3)
    # two users both sending 1: received 2A, finite-field sum 2
    y = np.array([2.0 * math.sqrt(1.5)])
    post = detect_ffsp_posteriors(y, 2, 1.0, mmap, 1e-6)
    assert np.argmax(post[0]) == 2
    assert post[0, 2] > 0.999


def test_detect_hard_fallback_agrees_at_low_noise():
    mmap = ModulationMap.for_field_char(3)
    rng = np.random.default_rng(8)
    symbols = rng.integers(0, 3, size=(64, 2))
    y = (mmap.amplitudes[symbols[:, 0]] + mmap.amplitudes[symbols[:, 1]]) + rng.normal(
        0, 1e-4, size=64
    )
    soft = detect_ffsp_posteriors(y, 2, 1.0, mmap, 1e-8)
    hard = detect_ffsp_posteriors(y, 2, 1.0, mmap, 1e-8, lattice_budget=1)
    assert np.argmax(soft, axis=1).tolist() == np.argmax(hard, axis=1).tolist()


def test_analytic_ser_closed_forms():
    esn0 = 10 ** (6.0 / 10.0)

    def q(x):
        from scipy.special import erfc

        return 0.5 * erfc(x / math.sqrt(2.0))

    assert analytic_ser(2, esn0) == pytest.approx(q(math.sqrt(2 * esn0)))
    assert analytic_ser(3, esn0) == pytest.approx((4.0 / 3.0) * q(math.sqrt(0.75 * esn0)))
    assert analytic_ser(3, 1e6) < 1e-12


def test_analytic_ser_against_monte_carlo():
    # 10^7-sample check of the decision-boundary formula
    mmap = ModulationMap.for_field_char(3)
    esn0 = 10 ** (5.0 / 10.0)
    sigma = math.sqrt(1.0 / (2.0 * esn0))
    rng = np.random.default_rng(123)
    n = 10**7
    symbols = rng.integers(0, 3, size=n)
    y = mmap.amplitudes[symbols] + rng.normal(0, sigma, size=n)
    thresholds = mmap.amplitudes[1] / 2.0
    decisions = np.zeros(n, dtype=np.int64)
    decisions[y > thresholds] = 1
    decisions[y < -thresholds] = 2
    measured = float((decisions != symbols).mean())
    expected = analytic_ser(3, esn0)
    sigma_mc = math.sqrt(expected * (1 - expected) / n)
    assert abs(measured - expected) <= 3 * sigma_mc


def test_uncoded_crossing_points():
    b = ebn0_at_ser(2, 1e-5)
    t = ebn0_at_ser(3, 1e-5)
    assert analytic_ser(2, 10 ** (b / 10)) == pytest.approx(1e-5, rel=1e-3)
    assert t > b


# --------------------------------------------------------------------------
# LDPC ensembles
# --------------------------------------------------------------------------

def test_ldpc_ensemble_parity_consistency():
    for seed in range(20):
        p = (2, 3)[seed % 2]
        H, G = ldpc_ensemble(48, 24, p, column_weight=3, seed=seed)
        assert not ((G.as_array() @ H.as_array().T) % p).any()
        assert G.shape == (24, 48) and H.shape == (24, 48)


def test_ldpc_dimension_match():
    H, G = ldpc_ensemble(400, 300, 2, seed=1)
    assert G.shape == (300, 400)
    assert H.shape == (100, 400)
    assert G.shape[0] / G.shape[1] == 0.75


def test_ldpc_girth_after_reduction():
    H, _ = ldpc_ensemble(60, 30, 3, column_weight=3, seed=4)
    assert girth_at_least_6(H)


# --------------------------------------------------------------------------
# pipelines
# --------------------------------------------------------------------------

def test_noiseless_pipelines_are_error_free():
    grids = [40.0]
    ch = ChannelConfig(seed=5, max_frames=20, max_frame_errors=10**9)
    uncoded = FramePipeline(label="u", p_char=3, n=60, k_info=60, J=1, decoder="hard")
    assert run_pipeline(uncoded, grids, ch).points[0].symbol_errors == 0
    H, G = ldpc_ensemble(60, 30, 3, seed=2)
    coded = FramePipeline(label="c", p_char=3, n=60, k_info=30, J=1, G=G, H=H)
    assert run_pipeline(coded, grids, ch).points[0].symbol_errors == 0
    two_user = FramePipeline(label="c2", p_char=3, n=60, k_info=15, J=2, G=G, H=H)
    assert run_pipeline(two_user, grids, ch).points[0].symbol_errors == 0


def test_uncoded_bpsk_matches_analytic():
    db = ebn0_at_ser(2, 1e-3)
    pipe = FramePipeline(label="b", p_char=2, n=1000, k_info=1000, J=1, decoder="hard")
    ch = ChannelConfig(seed=123, max_frames=400, max_frame_errors=10**9)
    pt = run_pipeline(pipe, [db], ch).points[0]
    n = pt.frames * 1000
    sigma_mc = math.sqrt(1e-3 * (1 - 1e-3) / n)
    assert abs(pt.ser - 1e-3) <= 3 * sigma_mc


def test_reproducible_curves():
    H, G = ldpc_ensemble(60, 30, 3, seed=3)
    pipe = FramePipeline(label="x", p_char=3, n=60, k_info=30, J=1, G=G, H=H)
    ch = ChannelConfig(seed=77, max_frames=128, max_frame_errors=50)
    c1 = run_pipeline(pipe, [2.0, 3.0], ch)
    c2 = run_pipeline(pipe, [2.0, 3.0], ch)
    assert [p.__dict__ for p in c1.points] == [p.__dict__ for p in c2.points]


def test_energy_accounting():
    # seed chosen so every user's parity slice is active (the layout
    # bookkeeping assumes uniform parity symbols)
    H, G = ldpc_ensemble(90, 45, 3, seed=4)
    pipe = FramePipeline(label="e", p_char=3, n=90, k_info=15, J=3, G=G, H=H, mu1=2.5, mu2=0.8)
    mmap = ModulationMap.for_field_char(3)
    rng = np.random.default_rng(1)
    b = 10**4
    Ga = G.as_array()
    x = np.zeros((b, 90))
    digits = rng.integers(0, 3, size=(b, 45))
    for j in range(3):
        uj = np.zeros((b, 45), dtype=np.int64)
        sl = slice(j * 15, (j + 1) * 15)
        uj[:, sl] = digits[:, sl]
        cw = (uj @ Ga) % 3
        x[:, sl] += math.sqrt(2.5) * mmap.amplitudes[cw[:, sl]]
        x[:, 45:] += math.sqrt(0.8) * mmap.amplitudes[cw[:, 45:]]
    measured = float((x**2).sum(axis=1).mean())
    assert abs(measured - pipe.frame_energy()) <= 0.005 * pipe.frame_energy()


def test_ml_table_decoder_on_small_code():
    rng = np.random.default_rng(6)
    from ffma.ffcore import FieldMatrix, PrimeField, rank

    while True:
        a = rng.integers(0, 3, size=(3, 9))
        if rank(a, 3) == 3:
            break
    G = FieldMatrix(PrimeField(3), a)
    pipe = FramePipeline(label="ml", p_char=3, n=9, k_info=3, J=1, G=G, decoder="ml-table")
    ch = ChannelConfig(seed=9, max_frames=64, max_frame_errors=10**9)
    pt = run_pipeline(pipe, [30.0], ch).points[0]
    assert pt.symbol_errors == 0


def test_curve_csv_rows():
    pipe = FramePipeline(label="u", p_char=2, n=10, k_info=10, J=1, decoder="hard")
    ch = ChannelConfig(seed=1, max_frames=4, max_frame_errors=100)
    rows = run_pipeline(pipe, [8.0], ch).csv_rows()
    assert set(rows[0]) == {"scheme", "p", "eta", "J", "ebn0_db", "ser", "ber", "frames", "errors", "seed"}


def test_concatenated_channel_code_pipeline():
    # inner (30, 10) multiuser code wrapped by an outer (45, 30) code
    H, G = ldpc_ensemble(30, 10, 3, seed=6)
    Hg, Gg = ldpc_ensemble(45, 30, 3, seed=8)
    pipe = FramePipeline(
        label="cc", p_char=3, n=30, k_info=5, J=2, G=G, H=H, G_gc=Gg, H_gc=Hg,
        mu1=2.0, mu2=1.0, muc=0.5,
    )
    assert pipe.frame_energy() == pytest.approx(2 * (5 * 2.0 + 20 * 1.0 + 15 * 0.5))
    ch = ChannelConfig(seed=5, max_frames=40, max_frame_errors=10**9)
    assert run_pipeline(pipe, [40.0], ch).points[0].symbol_errors == 0
    ch2 = ChannelConfig(seed=5, max_frames=256, max_frame_errors=10**9)
    noisy = run_pipeline(pipe, [5.0, 8.0, 11.0], ch2)
    sers = [pt.ser for pt in noisy.points]
    assert sers[0] > sers[1] > sers[2] == 0.0


def test_ber_monotone_in_snr():
    pipe = FramePipeline(label="u", p_char=2, n=500, k_info=500, J=1, decoder="hard")
    ch = ChannelConfig(seed=3, max_frames=200, max_frame_errors=10**9)
    curve = run_pipeline(pipe, [2.0, 5.0, 8.0], ch)
    sers = [p.ser for p in curve.points]
    assert sers[0] > sers[1] > sers[2]
