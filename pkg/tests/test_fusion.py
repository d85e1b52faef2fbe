import json

import pytest
from hypothesis import given, strategies as st

from firewatch.fusion import (
    DomainError,
    FusionWeights,
    NodeId,
    SectorSignal,
    SensorReading,
    compute_signal,
    load_fusion_config,
    rank_sectors,
    smoke_pct_from_raw,
)


def oracle_signal(reading, w):
    """Independent direct evaluation of the fusion formula.

    Deliberately coded differently from the implementation (raw / 40.95
    instead of raw * 100 / 4095) so the two paths stay independent.
    """
    cs = reading.smoke_raw / 40.95
    bt = 1.0 if reading.temperature_c > w.temp_threshold_c else 0.0
    bh = 1.0 if reading.humidity_pct < w.humidity_threshold_pct else 0.0
    return w.w_smoke * (cs / 100.0) + w.w_temp * bt + w.w_hum * bh


def make_reading(node=0, smoke_raw=0, temp=20.0, hum=50.0, pressure=900.0, water=0, t=0):
    return SensorReading(
        node=NodeId(node),
        timestamp_ms=t,
        temperature_c=temp,
        humidity_pct=hum,
        pressure_hpa=pressure,
        smoke_raw=smoke_raw,
        water_raw=water,
    )


reading_strategy = st.builds(
    make_reading,
    node=st.integers(0, 7),
    smoke_raw=st.integers(0, 4095),
    temp=st.floats(-40, 85, allow_nan=False),
    hum=st.floats(0, 100, allow_nan=False),
    pressure=st.floats(300, 1100, allow_nan=False),
    water=st.integers(0, 4095),
)


class TestSmokePct:
    def test_zero(self):
        assert smoke_pct_from_raw(0) == 0.0

    def test_full_scale(self):
        assert smoke_pct_from_raw(4095) == 100.0

    def test_midpoint(self):
        assert smoke_pct_from_raw(2048) == 2048 * 100.0 / 4095
        assert smoke_pct_from_raw(2048) == pytest.approx(50.012, abs=1e-3)

    @pytest.mark.parametrize("raw", [-1, 4096, 99999])
    def test_out_of_range(self, raw):
        with pytest.raises(DomainError):
            smoke_pct_from_raw(raw)


class TestComputeSignal:
    def test_all_indicators_firing(self):
        r = make_reading(smoke_raw=4095, temp=40.0, hum=10.0)
        s = compute_signal(r, FusionWeights())
        assert s.signal == pytest.approx(0.95, abs=1e-12)
        assert (s.temp_exceeded, s.hum_exceeded) == (1, 1)

    def test_all_zero(self):
        s = compute_signal(make_reading(), FusionWeights())
        assert s.signal == 0.0
        assert (s.temp_exceeded, s.hum_exceeded) == (0, 0)

    def test_half_smoke_plus_temperature(self):
        r = make_reading(smoke_raw=2048, temp=40.0, hum=50.0)
        s = compute_signal(r, FusionWeights())
        assert s.signal == pytest.approx(0.60, abs=1e-3)
        assert s.signal == pytest.approx(oracle_signal(r, FusionWeights()), abs=1e-12)

    def test_threshold_direction(self):
        # Humidity indicator fires on dryness (below threshold).
        dry = compute_signal(make_reading(hum=29.9), FusionWeights())
        humid = compute_signal(make_reading(hum=30.1), FusionWeights())
        assert dry.hum_exceeded == 1
        assert humid.hum_exceeded == 0

    @given(reading_strategy)
    def test_matches_oracle(self, reading):
        w = FusionWeights()
        assert compute_signal(reading, w).signal == pytest.approx(
            oracle_signal(reading, w), abs=1e-12
        )

    @given(
        reading_strategy,
        st.floats(0, 2, allow_nan=False),
        st.floats(0, 2, allow_nan=False),
        st.floats(0, 2, allow_nan=False),
    )
    def test_signal_bounds(self, reading, ws, wt, wh):
        w = FusionWeights(w_smoke=ws, w_temp=wt, w_hum=wh)
        s = compute_signal(reading, w)
        assert 0.0 <= s.signal <= w.max_signal + 1e-12

    @given(reading_strategy, st.integers(0, 4095))
    def test_monotone_in_smoke(self, reading, other_raw):
        w = FusionWeights()
        lo, hi = sorted([reading.smoke_raw, other_raw])
        s_lo = compute_signal(make_reading(smoke_raw=lo, temp=reading.temperature_c,
                                           hum=reading.humidity_pct), w)
        s_hi = compute_signal(make_reading(smoke_raw=hi, temp=reading.temperature_c,
                                           hum=reading.humidity_pct), w)
        assert s_lo.signal <= s_hi.signal + 1e-15


def sig(node_id, value):
    return SectorSignal(node=NodeId(node_id), smoke_pct=0.0, temp_exceeded=0,
                        hum_exceeded=0, signal=value)


class TestRankSectors:
    def test_unique_maximum(self):
        assert rank_sectors([sig(0, 0.2), sig(1, 0.9), sig(2, 0.1)]).id == 1

    def test_tie_break_lowest_id(self):
        assert rank_sectors([sig(1, 0.5), sig(0, 0.5)]).id == 0

    def test_empty_list(self):
        with pytest.raises(DomainError):
            rank_sectors([])

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=12))
    def test_matches_linear_scan(self, values):
        signals = [sig(i, v) for i, v in enumerate(values)]
        # Brute-force scan oracle: best value, then lowest id among bests.
        best = min(i for i, v in enumerate(values) if v == max(values))
        assert rank_sectors(signals).id == best

    @given(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=8),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariant(self, values, rnd):
        signals = [sig(i, v) for i, v in enumerate(values)]
        shuffled = list(signals)
        rnd.shuffle(shuffled)
        assert rank_sectors(shuffled) == rank_sectors(signals)

    @given(
        st.lists(st.tuples(st.integers(0, 4095), st.floats(-40, 85), st.floats(0, 100)),
                 min_size=1, max_size=6),
        st.floats(0.01, 50, allow_nan=False),
    )
    def test_weight_scaling_leaves_winner(self, rows, scale):
        w1 = FusionWeights()
        w2 = FusionWeights(w_smoke=w1.w_smoke * scale, w_temp=w1.w_temp * scale,
                           w_hum=w1.w_hum * scale)
        readings = [make_reading(node=i, smoke_raw=s, temp=t, hum=h)
                    for i, (s, t, h) in enumerate(rows)]
        a = rank_sectors([compute_signal(r, w1) for r in readings])
        b = rank_sectors([compute_signal(r, w2) for r in readings])
        assert a == b


class TestTypes:
    def test_reading_range_enforced(self):
        with pytest.raises(DomainError):
            make_reading(temp=90.0)
        with pytest.raises(DomainError):
            make_reading(smoke_raw=5000)
        with pytest.raises(DomainError):
            make_reading(pressure=100.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError):
            FusionWeights(w_smoke=-0.1)

    def test_node_label_defaults(self):
        assert NodeId(0).label == "A"
        assert NodeId(2).label == "C"
        assert NodeId(30).label == "N30"


def test_config_round_trip(tmp_path):
    path = tmp_path / "fusion.json"
    path.write_text(json.dumps({"w_smoke": 0.5, "temp_threshold_c": 40.0}))
    w = load_fusion_config(path)
    assert w.w_smoke == 0.5
    assert w.temp_threshold_c == 40.0
    assert w.w_temp == 0.3  # untouched default


def test_config_unknown_key(tmp_path):
    path = tmp_path / "fusion.json"
    path.write_text(json.dumps({"w_smok": 0.5}))
    with pytest.raises(DomainError, match="w_smok"):
        load_fusion_config(path)
