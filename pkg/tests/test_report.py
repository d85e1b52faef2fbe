import json

import pytest

from firewatch import report
from firewatch.report import TraceError


def trace_lines(records):
    return [json.dumps(r) for r in records]


def alert_record(t=118_000, node=0, alert_id="alert-1", trigger=12_180):
    return {"t": t, "event": "alert", "alert_id": alert_id, "node": node,
            "azimuth_deg": 30.0, "signal": 0.6, "t_trigger": trigger,
            "t_oriented": trigger + 3820, "t_verified": t, "t_dispatched": t,
            "delivered": True, "attempts": 1}


def fire_record(t=0, node=0):
    return {"t": t, "event": "scenario", "kind": "place_fire", "fire_id": "f1",
            "azimuth_deg": 30.0, "distance_m": 3.0, "intensity": 1.0,
            "nearest_node": node}


class TestParse:
    def test_round_trip(self):
        records = [fire_record(), alert_record()]
        assert report.parse_trace(trace_lines(records)) == records

    def test_corrupt_line_reports_number(self):
        lines = trace_lines([fire_record()]) + ["{not json"]
        with pytest.raises(TraceError, match="line 2"):
            report.parse_trace(lines)

    def test_blank_lines_skipped(self):
        lines = ["", json.dumps(fire_record()), "   "]
        assert len(report.parse_trace(lines)) == 1

    def test_missing_fields_rejected(self):
        with pytest.raises(TraceError, match="line 1"):
            report.parse_trace(['{"event": "x"}'])


class TestOrdering:
    def test_monotone_accepted(self):
        report.check_ordering([fire_record(t=0), alert_record(t=118_000)])

    def test_shuffled_rejected(self):
        with pytest.raises(TraceError, match="backwards"):
            report.check_ordering([alert_record(t=118_000), fire_record(t=0)])

    def test_broken_alert_chain_rejected(self):
        bad = alert_record()
        bad["t_oriented"] = bad["t_trigger"] - 1
        with pytest.raises(TraceError, match="monotone"):
            report.check_ordering([bad])


class TestBreakdown:
    def test_stages_sum_to_total(self):
        records = [fire_record(), alert_record()]
        (b,) = report.alert_breakdowns(records)
        assert b.stages_sum_ms == b.total_ms
        assert b.total_ms == 118_000 - 12_180

    def test_empty_trace(self):
        assert report.alert_breakdowns([]) == []


class TestDetectionTimes:
    def test_alert_attributed_to_latest_matching_fire(self):
        records = [
            fire_record(t=1000, node=0),
            fire_record(t=50_000, node=0),
            alert_record(t=160_000, node=0, trigger=60_000),
        ]
        times = report.detection_times(records)
        assert times == {0: [(160_000 - 50_000) / 1000]}

    def test_mismatched_node_ignored(self):
        records = [fire_record(t=1000, node=1), alert_record(t=5000, node=0)]
        assert report.detection_times(records) == {}

    def test_summary_rows_and_formats(self):
        records = []
        t = 0
        for trial in range(2):
            for node in (0, 1):
                records.append(fire_record(t=t, node=node))
                records.append(alert_record(t=t + 100_000 + node * 5000,
                                            node=node, trigger=t + 12_000,
                                            alert_id=f"a{t}"))
                t += 200_000
        rows = report.summary_rows(records, labels={0: "A", 1: "B"})
        assert [r["label"] for r in rows] == ["A", "B"]
        assert rows[0]["mean_s"] == pytest.approx(100.0)
        assert rows[1]["mean_s"] == pytest.approx(105.0)
        text = report.format_summary_text(rows)
        assert "mean" in text and "A" in text
        csv = report.format_summary_csv(rows)
        assert csv.splitlines()[0] == "node,t_1,t_2,mean_s"

    def test_empty_summary(self):
        assert report.format_summary_text([]) == "no alerts\n"
        assert report.format_summary_csv([]) == "node,mean_s\n"
