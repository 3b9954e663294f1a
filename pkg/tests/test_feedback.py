import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifi_feedback.downlink import IDLE, SinrVector, simplified_sinr
from lifi_feedback.errors import ConfigError, IntervalError
from lifi_feedback.feedback import (FeedbackReport, FeedbackScheme, ap_select,
                                    default_onebit_threshold, feedback_ratio,
                                    feedback_ratio_frames, frames_per_update, lcf_estimate,
                                    one_bit_report, one_bit_schedule, overhead_per_frame,
                                    report_airtime, write_overhead_csv)


def test_scheme_validation():
    with pytest.raises(ConfigError):
        FeedbackScheme("bogus")
    with pytest.raises(ConfigError):
        FeedbackScheme("onebit", threshold=0.0)
    with pytest.raises(ConfigError):
        FeedbackScheme("lff", update_interval=-1.0)
    with pytest.raises(TypeError):
        FeedbackReport("scalar", np.zeros(3))
    FeedbackReport("deferred")


def test_feedback_ratio():
    assert feedback_ratio(8e-4, 0.1) == pytest.approx(8e-3)
    with pytest.raises(IntervalError):
        feedback_ratio(1e-3, 5e-4)


@given(st.integers(0, 500), st.integers(1, 50), st.floats(1e-5, 1e-2), st.floats(1e-4, 1e-1))
def test_frame_ratio_identity(n_data, n_fb, t_fb, t_fr):
    # N_f reports spread over (N_D + N_f) frames is one report every t_tot / N_f
    t_u = (n_data + n_fb) * t_fr / n_fb
    assert feedback_ratio_frames(n_data, n_fb, t_fb, t_fr) == pytest.approx(t_fb / t_u, rel=1e-12)


@pytest.mark.parametrize("K", [64, 512, 2048])
def test_overhead_formulas(K):
    n = K // 2 - 1
    assert overhead_per_frame("ff", K, 10) == 10 * n
    assert overhead_per_frame("onebit", K, 10) == n
    assert overhead_per_frame("lcf", K, 10) == 10
    assert overhead_per_frame("lff", K, 10, M=1) == 10 * n


def test_overhead_crossovers():
    K = 2048
    assert overhead_per_frame("lff", K, 10, M=11) < overhead_per_frame("onebit", K, 10)
    assert overhead_per_frame("lff", K, 10, M=10) >= overhead_per_frame("onebit", K, 10)
    tie = overhead_per_frame("lff", K, 10, M=K // 2)
    assert abs(tie - overhead_per_frame("lcf", K, 10)) < 1
    with pytest.raises(ValueError):
        overhead_per_frame("lff", K, 10)


def test_frames_per_update():
    assert frames_per_update(0.157, 1.6e-3) == 99
    assert frames_per_update(3.2e-3, 1.6e-3) == 2
    assert frames_per_update(1e-4, 1.6e-3) == 1


def test_report_airtime(cfg):
    assert report_airtime(cfg.bits_per_sinr * cfg.n_data_subcarriers, cfg) == pytest.approx(cfg.t_fb)
    assert report_airtime(cfg.n_data_subcarriers, cfg) == pytest.approx(cfg.t_fb / 10)


def test_overhead_csv(tmp_path):
    write_overhead_csv(tmp_path / "o.csv", [64], M=4)
    rows = (tmp_path / "o.csv").read_text().splitlines()
    assert rows[0] == "K,scheme,bits_per_frame"
    assert rows[1:] == ["64,ff,310", "64,onebit,31", "64,lcf,10", "64,lff,77.5"]


def test_lcf_estimate_tracks_los_motion(cfg):
    k = np.arange(1, 1024)

    def sinr(r):
        return simplified_sinr(r, k, cfg.link_gain_down, cfg.h, cfg.lambertian_order,
                               cfg.bw_down, cfg.n_subcarriers, cfg.w0)

    def dc(r):
        return float(simplified_sinr(r, 0, cfg.link_gain_down, cfg.h, cfg.lambertian_order,
                                     cfg.bw_down, cfg.n_subcarriers, cfg.w0))

    est = lcf_estimate(SinrVector(sinr(0.5), dc(0.5)), dc(1.5))
    err_db = 10 * np.abs(np.log10(est.per_subcarrier / sinr(1.5)))
    assert err_db.max() < 1.0


def test_one_bit_report_inclusive():
    assert one_bit_report(2.0, 2.0) == 1
    assert one_bit_report(np.array([1.0, 3.0]), 2.0).tolist() == [0, 1]
    with pytest.raises(ValueError):
        one_bit_report(1.0, 0.0)


def test_ap_select_uniform():
    rng = np.random.default_rng(7)
    bits = np.array([1, 0, 1, 1, 0])
    picks = np.array([ap_select(bits, rng) for _ in range(10_000)])
    freq = np.bincount(picks, minlength=5) / picks.size
    sigma = np.sqrt(1 / 3 * 2 / 3 / picks.size)
    assert np.all(np.abs(freq[[0, 2, 3]] - 1 / 3) < 3 * sigma)
    assert freq[1] == 0 and freq[4] == 0
    assert ap_select(np.zeros(3), rng) is None
    assert ap_select(np.zeros(3), rng, fallback=True) in (0, 1, 2)


def test_one_bit_schedule_respects_bits(rng):
    bits = rng.random((4, 200)) < 0.4
    alloc = one_bit_schedule(bits, np.full(4, 2e6), 100.0, 1e4, rng, fallback=False)
    for col, o in enumerate(alloc.owner):
        if o != IDLE:
            assert bits[o, col]


def test_one_bit_schedule_fallback_fills(rng):
    bits = np.zeros((3, 50), dtype=bool)
    none = one_bit_schedule(bits, np.full(3, 1e9), 10.0, 1e4, rng, fallback=False)
    assert np.all(none.owner == IDLE)
    some = one_bit_schedule(bits, np.full(3, 1e9), 10.0, 1e4, rng, fallback=True)
    assert np.all(some.owner >= 0)


def test_one_bit_schedule_stops_at_request(rng):
    bits = np.ones((2, 400), dtype=bool)
    credit = 1e4 * np.log2(101.0)
    alloc = one_bit_schedule(bits, np.full(2, 20 * credit), 100.0, 1e4, rng)
    assert alloc.counts(2).tolist() == [20, 20]
    assert np.allclose(alloc.believed_rate, 20 * credit)


def test_default_threshold_is_median(cfg, rng):
    thr = default_onebit_threshold(cfg)
    r = cfg.cell_radius_m * np.sqrt(rng.random(200_000))
    k = rng.integers(1, cfg.n_subcarriers // 2, 200_000)
    g = simplified_sinr(r, k, cfg.link_gain_down, cfg.h, cfg.lambertian_order, cfg.bw_down,
                        cfg.n_subcarriers, cfg.w0)
    assert np.mean(g >= thr) == pytest.approx(0.5, abs=0.005)
    assert default_onebit_threshold(cfg.replace(onebit_threshold=30.0)) == 30.0
