import logging
import random

import numpy as np
import pytest

from aliasmine.dataset import (
    FEATURE_NAMES,
    AvatarIdentity,
    DatasetSpec,
    FeatureVector,
    SurrogateSpec,
    TraceEvent,
    TraceMeta,
    extract_features,
    filter_min_traces,
    inject_surrogates,
    read_events_csv,
    read_features_csv,
    read_meta_csv,
    trace_counts,
    write_events_csv,
    write_features_csv,
    write_meta_csv,
)


def ident(label, account=None, name=None):
    return AvatarIdentity(label=label, account_id=account, name=name)


def meta(tid, label="av", faction=0, outcome=1, duration=600.0):
    return TraceMeta(tid, ident(label), faction, outcome, duration)


def vector(tid, label, hotkeys=None, apm=0.0):
    values = np.zeros(len(FEATURE_NAMES))
    if hotkeys:
        for slot, count in hotkeys.items():
            values[FEATURE_NAMES.index(slot)] = count
    values[32] = apm
    return FeatureVector(tid, ident(label), values)


class TestFeatureSpace:
    def test_33_features_in_declared_order(self):
        assert len(FEATURE_NAMES) == 33
        assert FEATURE_NAMES[0] == "assign_0"
        assert FEATURE_NAMES[9] == "assign_9"
        assert FEATURE_NAMES[10] == "remove_0"
        assert FEATURE_NAMES[20] == "select_0"
        assert FEATURE_NAMES[30:] == ("faction", "outcome", "apm")

    def test_hotkey_counts_must_be_non_negative_integers(self):
        with pytest.raises(ValueError, match="non-negative integer"):
            vector("t", "a", {"assign_1": -1})
        with pytest.raises(ValueError, match="non-negative integer"):
            vector("t", "a", {"assign_1": 1.5})


class TestTraceEvent:
    def test_negative_timestamp_rejected(self):
        with pytest.raises(ValueError, match="negative timestamp"):
            TraceEvent("t1", -0.5, "assign", 1)

    def test_key_required_iff_hotkey_action(self):
        with pytest.raises(ValueError, match="requires a key"):
            TraceEvent("t1", 1.0, "select", None)
        with pytest.raises(ValueError, match="must not carry a key"):
            TraceEvent("t1", 1.0, "other", 3)
        TraceEvent("t1", 1.0, "other")  # fine

    def test_unknown_action_rejected(self):
        with pytest.raises(ValueError, match="unknown action"):
            TraceEvent("t1", 1.0, "teleport", 1)


class TestSpecs:
    def test_dataset_spec_bounds(self):
        DatasetSpec(tau=90.0, theta=1)
        with pytest.raises(ValueError):
            DatasetSpec(tau=0.0, theta=1)
        with pytest.raises(ValueError):
            DatasetSpec(tau=30.0, theta=0)

    def test_surrogate_spec_bounds(self):
        SurrogateSpec(gamma=0.2, beta=0.5, seed=1)
        with pytest.raises(ValueError):
            SurrogateSpec(gamma=0.0, beta=0.5, seed=1)
        with pytest.raises(ValueError):
            SurrogateSpec(gamma=0.2, beta=0.3, seed=1)
        with pytest.raises(ValueError):
            SurrogateSpec(gamma=0.2, beta=1.0, seed=1)


class TestExtractFeatures:
    def test_zero_events_gives_zero_counts_and_zero_apm(self):
        out = extract_features([], tau=30.0, meta=[meta("t1")])
        assert len(out) == 1
        fv = out[0]
        assert np.all(fv.values[:30] == 0)
        assert fv.features["apm"] == 0.0
        assert fv.features["faction"] == 0.0
        assert fv.features["outcome"] == 1.0

    def test_tau_cutoff_excludes_late_events(self):
        events = [
            TraceEvent("t1", 5.0, "assign", 1),
            TraceEvent("t1", 12.0, "select", 1),
            TraceEvent("t1", 40.0, "select", 1),
        ]
        (fv,) = extract_features(events, tau=30.0, meta=[meta("t1")])
        assert fv.features["assign_1"] == 1
        assert fv.features["select_1"] == 1
        assert sum(fv.values[:30]) == 2  # the t=40 event is excluded

    def test_apm_is_60_times_actions_over_window(self):
        # 90 actions inside 30 s of a 600 s game -> 60 * 90 / 30 = 180
        events = [TraceEvent("t1", 0.1 + i * 0.3, "other") for i in range(90)]
        (fv,) = extract_features(events, tau=30.0, meta=[meta("t1", duration=600.0)])
        assert fv.features["apm"] == pytest.approx(180.0)

    def test_short_game_window_caps_at_duration(self):
        events = [TraceEvent("t1", float(i), "other") for i in range(10)]
        (fv,) = extract_features(events, tau=30.0, meta=[meta("t1", duration=20.0)])
        assert fv.features["apm"] == pytest.approx(60.0 * 10 / 20.0)

    def test_unknown_trace_id_rejected_with_id(self):
        with pytest.raises(ValueError, match="ghost"):
            extract_features(
                [TraceEvent("ghost", 1.0, "other")], tau=30.0, meta=[meta("t1")]
            )

    def test_event_order_does_not_matter(self):
        events = [
            TraceEvent("t1", 3.0, "assign", 2),
            TraceEvent("t1", 1.0, "select", 2),
            TraceEvent("t1", 2.0, "assign", 2),
        ]
        (a,) = extract_features(events, tau=30.0, meta=[meta("t1")])
        for perm in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
            (b,) = extract_features([events[i] for i in perm], 30.0, [meta("t1")])
            assert np.array_equal(a.values, b.values)


class TestFilterMinTraces:
    def test_keeps_only_avatars_at_or_above_theta(self):
        data = [vector(f"a{i}", "a") for i in range(5)]
        data += [vector(f"b{i}", "b") for i in range(2)]
        kept = filter_min_traces(data, theta=3)
        assert trace_counts(kept) == {"a": 5}

    def test_theta_one_is_identity(self):
        data = [vector("t1", "a"), vector("t2", "b")]
        assert filter_min_traces(data, theta=1) == data

    def test_boundary_is_inclusive(self):
        data = (
            [vector(f"a{i}", "a") for i in range(20)]
            + [vector(f"b{i}", "b") for i in range(20)]
            + [vector(f"c{i}", "c") for i in range(19)]
        )
        kept = filter_min_traces(data, theta=20)
        assert set(trace_counts(kept)) == {"a", "b"}

    def test_empty_result_is_an_error(self):
        data = [vector("t1", "a")]
        with pytest.raises(ValueError, match="theta=5"):
            filter_min_traces(data, theta=5)

    def test_monotone_in_theta(self):
        rng = random.Random(3)
        data = []
        for label in "abcdef":
            for i in range(rng.randint(1, 9)):
                data.append(vector(f"{label}{i}", label))
        kept = [set(trace_counts(filter_min_traces(data, t))) for t in (1, 3, 5)]
        assert kept[2] <= kept[1] <= kept[0]


class TestInjectSurrogates:
    @staticmethod
    def build(counts: dict[str, int]):
        return [
            vector(f"{label}_{i}", label)
            for label, n in counts.items()
            for i in range(n)
        ]

    def test_balanced_split_halves_traces(self):
        data = self.build({"a": 10})
        out, pairs = inject_surrogates(data, SurrogateSpec(1.0, 0.5, 1), theta=1)
        assert pairs == [("a#1", "a#2")]
        assert trace_counts(out) == {"a#1": 5, "a#2": 5}

    def test_unbalanced_split_rounds_beta_share(self):
        data = self.build({"a": 10})
        out, _ = inject_surrogates(data, SurrogateSpec(1.0, 0.7, 1), theta=1)
        assert trace_counts(out) == {"a#1": 7, "a#2": 3}

    def test_gamma_selects_most_active_only(self):
        data = self.build({"busy": 8, "lazy": 4})
        out, pairs = inject_surrogates(data, SurrogateSpec(0.5, 0.5, 1), theta=1)
        assert pairs == [("busy#1", "busy#2")]
        assert trace_counts(out) == {"busy#1": 4, "busy#2": 4, "lazy": 4}

    def test_activity_ties_break_by_label(self):
        data = self.build({"zeta": 4, "alpha": 4, "mid": 4})
        _, pairs = inject_surrogates(data, SurrogateSpec(0.3, 0.5, 1), theta=1)
        assert pairs == [("alpha#1", "alpha#2")]

    def test_split_avatar_label_disappears_and_counts_are_preserved(self):
        data = self.build({"a": 9, "b": 5})
        out, _ = inject_surrogates(data, SurrogateSpec(0.5, 0.5, 7), theta=1)
        assert len(out) == len(data)
        assert "a" not in trace_counts(out)
        # identity fields are inherited by both siblings
        by_label = {fv.avatar.label: fv.avatar for fv in out}
        assert by_label["a#1"].account_id == by_label["a#2"].account_id

    def test_fixed_seed_reproduces_exactly(self):
        data = self.build({"a": 11, "b": 7})
        spec = SurrogateSpec(1.0, 0.6, 42)
        out1, pairs1 = inject_surrogates(data, spec, theta=1)
        out2, pairs2 = inject_surrogates(data, spec, theta=1)
        assert pairs1 == pairs2
        assert [(fv.trace_id, fv.avatar.label) for fv in out1] == [
            (fv.trace_id, fv.avatar.label) for fv in out2
        ]

    def test_empty_second_surrogate_skips_with_warning(self, caplog):
        data = self.build({"solo": 1, "b": 5})
        with caplog.at_level(logging.WARNING, logger="aliasmine.dataset"):
            out, pairs = inject_surrogates(data, SurrogateSpec(1.0, 0.9, 1), theta=1)
        assert any("solo" in rec.message for rec in caplog.records)
        assert ("solo#1", "solo#2") not in pairs
        assert trace_counts(out)["solo"] == 1
        assert len(out) == len(data)

    def test_label_collision_is_an_error(self):
        data = self.build({"a": 4}) + [vector("x", "a#1")]
        with pytest.raises(ValueError, match="collides"):
            inject_surrogates(data, SurrogateSpec(1.0, 0.5, 1), theta=4)

    def test_theta_gates_eligibility(self):
        data = self.build({"a": 10, "b": 3})
        out, pairs = inject_surrogates(data, SurrogateSpec(1.0, 0.5, 1), theta=5)
        assert pairs == [("a#1", "a#2")]
        assert trace_counts(out)["b"] == 3


class TestCsvRoundTrips:
    def test_events_round_trip_sorted_within_trace(self, tmp_path):
        events = [
            TraceEvent("t2", 4.0, "other"),
            TraceEvent("t1", 9.0, "remove", 7),
            TraceEvent("t1", 2.0, "assign", 0),
        ]
        path = tmp_path / "events.csv"
        write_events_csv(path, events)
        back = read_events_csv(path)
        assert len(back) == 3
        t1 = [ev for ev in back if ev.trace_id == "t1"]
        assert [ev.timestamp for ev in t1] == [2.0, 9.0]
        assert t1[0].key == 0 and t1[1].key == 7

    def test_events_header_is_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="expected header"):
            read_events_csv(path)

    def test_meta_round_trip_with_identities(self, tmp_path):
        metas = [
            TraceMeta("t1", ident("a", account="7", name="Foo"), 2, 1, 300.0),
            TraceMeta("t2", ident("a", account="7", name="Foo"), 2, 0, 400.0),
            TraceMeta("t3", ident("b"), 0, 1, 500.0),
        ]
        path = tmp_path / "meta.csv"
        write_meta_csv(path, metas)
        back = read_meta_csv(path)
        assert back["t1"].avatar.account_id == "7"
        assert back["t3"].avatar.account_id is None
        assert back["t2"].outcome == 0

    def test_meta_faction_strings_and_unknowns(self, tmp_path):
        path = tmp_path / "meta.csv"
        head = "trace_id,avatar_label,account_id,server,name,faction,outcome,duration_s"
        path.write_text(f"{head}\nt1,a,,,,Zerg,winner,100\n")
        assert read_meta_csv(path)["t1"].faction == 2
        path.write_text(f"{head}\nt1,a,,,,klingon,winner,100\n")
        with pytest.raises(ValueError, match="unknown faction"):
            read_meta_csv(path)

    def test_meta_conflicting_identity_rows_rejected(self, tmp_path):
        path = tmp_path / "meta.csv"
        head = "trace_id,avatar_label,account_id,server,name,faction,outcome,duration_s"
        path.write_text(f"{head}\nt1,a,7,,,0,1,100\nt2,a,8,,,0,1,100\n")
        with pytest.raises(ValueError, match="conflicting identity"):
            read_meta_csv(path)

    def test_features_round_trip(self, tmp_path):
        data = [
            vector("t1", "a", {"assign_3": 4, "select_9": 2}, apm=123.456),
            vector("t2", "b"),
        ]
        path = tmp_path / "features.csv"
        write_features_csv(path, data)
        back = read_features_csv(path)
        assert [fv.trace_id for fv in back] == ["t1", "t2"]
        assert np.array_equal(back[0].values, data[0].values)
        header = path.read_text().splitlines()[0]
        assert header.split(",") == ["trace_id", "avatar_label"] + list(FEATURE_NAMES)

    def test_features_duplicate_trace_id_rejected(self, tmp_path):
        data = [vector("t1", "a"), vector("t1", "b")]
        path = tmp_path / "features.csv"
        write_features_csv(path, data)
        with pytest.raises(ValueError, match="duplicate trace_id"):
            read_features_csv(path)
