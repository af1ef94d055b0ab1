import numpy as np
import pytest

from knockon import (
    InvalidParameterError,
    LossRule,
    ReplicationError,
    ScenarioConfig,
    SurchargePolicy,
    Topology,
    percentile,
    run_replication,
    sweep,
    write_edge_list,
)
from knockon.experiment import RAW_CSV_HEADER, SWEEP_CSV_HEADER


def small_config(**overrides):
    base = dict(
        n_banks=60,
        topology_kind="homogeneous",
        density=0.06,
        loan_fraction=0.1,
        capital_ratio_grid=(0.02, 0.05, 0.1),
        replications=40,
        master_seed=321,
        loss_rule=LossRule.CAPPED,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


class TestPercentile:
    def test_nearest_rank_examples(self):
        assert percentile([1, 1, 1, 2, 3, 5, 9, 9, 10, 50], 0.9) == 10
        assert percentile([7], 0.01) == 7
        assert percentile([7], 1.0) == 7
        assert percentile(list(range(1, 101)), 0.99) == 99

    def test_unsorted_input_allowed(self):
        assert percentile([5, 1, 9, 3], 0.5) == 3

    def test_empty_rejected(self):
        with pytest.raises(InvalidParameterError):
            percentile([], 0.9)

    def test_bad_quantile_rejected(self):
        with pytest.raises(InvalidParameterError):
            percentile([1, 2], 0.0)
        with pytest.raises(InvalidParameterError):
            percentile([1, 2], 1.2)

    def test_matches_counting_definition(self):
        gen = np.random.default_rng(5)
        for _ in range(50):
            data = gen.integers(0, 30, size=int(gen.integers(1, 60)))
            q = float(gen.uniform(0.01, 1.0))
            value = percentile(data, q)
            # the smallest sample with at least ceil(q n) samples at or
            # below it
            at_or_below = np.count_nonzero(np.sort(data) <= value)
            import math

            need = max(1, math.ceil(q * data.size - 1e-12))
            assert at_or_below >= need
            smaller = data[data < value]
            assert smaller.size < need


class TestConfigValidation:
    def test_valid_passes(self):
        small_config().validate()

    def test_bad_loan_fraction(self):
        with pytest.raises(InvalidParameterError, match="Q"):
            small_config(loan_fraction=0.6).validate()

    def test_grid_must_increase(self):
        with pytest.raises(InvalidParameterError, match="increasing"):
            small_config(capital_ratio_grid=(0.1, 0.05)).validate()

    def test_grid_bounds(self):
        with pytest.raises(InvalidParameterError, match="r_grid"):
            small_config(capital_ratio_grid=(0.0, 0.1)).validate()

    def test_replications_positive(self):
        with pytest.raises(InvalidParameterError, match="replications"):
            small_config(replications=0).validate()

    def test_external_needs_path(self):
        with pytest.raises(InvalidParameterError, match="topology_path"):
            small_config(topology_kind="external").validate()

    def test_surcharge_bounds(self):
        with pytest.raises(InvalidParameterError, match="R_s"):
            small_config(
                capital_ratio_grid=(0.5,), surcharge=SurchargePolicy(0.6, 0.1)
            ).validate()
        with pytest.raises(InvalidParameterError, match="biggest_fraction"):
            small_config(surcharge=SurchargePolicy(0.01, 1.2)).validate()

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError, match="topology"):
            small_config(topology_kind="ring").validate()


class TestRunReplication:
    def test_deterministic(self):
        cfg = small_config()
        a = run_replication(cfg, 0.05, 7)
        b = run_replication(cfg, 0.05, 7)
        assert a == b

    def test_matches_sweep_samples(self):
        cfg = small_config(replications=12)
        result = sweep(cfg, keep_samples=True)
        for idx, ratio in enumerate(cfg.capital_ratio_grid):
            for k in (0, 5, 11):
                assert run_replication(cfg, ratio, k) == result.samples[idx, k]

    def test_two_bank_external_forced_edge(self, tmp_path):
        # single-edge market: striking the borrower fells both banks
        path = tmp_path / "pair.edges"
        write_edge_list(Topology(2, np.array([[0, 1]]), "external"), path)
        cfg = small_config(
            n_banks=2,
            topology_kind="external",
            topology_path=str(path),
            capital_ratio_grid=(0.05,),
            replications=8,
        )
        values = [run_replication(cfg, 0.05, k) for k in range(8)]
        assert set(values) <= {1, 2}
        # replications that strike bank 1 (the borrower) default both banks
        assert 2 in values

    def test_error_carries_stream_index(self):
        cfg = small_config(density=0.0)
        with pytest.raises(ReplicationError) as err:
            run_replication(cfg, 0.05, 3)
        assert err.value.stream_index == 3
        assert "interbank" in str(err.value)


class TestSweep:
    def test_degenerate_single_cell(self):
        cfg = small_config(capital_ratio_grid=(0.05,), replications=1)
        result = sweep(cfg)
        assert len(result.records) == 1
        rec = result.records[0]
        assert rec.std == 0.0
        assert rec.mean == rec.max_defaults
        assert rec.p90 == rec.p95 == rec.p99 == rec.max_defaults

    def test_statistics_recomputable_from_samples(self):
        cfg = small_config()
        result = sweep(cfg, keep_samples=True)
        assert result.samples.shape == (3, cfg.replications)
        for idx, rec in enumerate(result.records):
            row = result.samples[idx]
            assert rec.mean == pytest.approx(row.mean())
            assert rec.std == pytest.approx(row.std(ddof=1))
            assert rec.max_defaults == row.max()
            assert rec.knock_on_fraction == pytest.approx(
                np.count_nonzero(row >= 2) / row.size
            )
            assert rec.p90 <= rec.p95 <= rec.p99 <= rec.max_defaults
            assert rec.mean_plus_std == pytest.approx(rec.mean + rec.std)

    def test_worker_count_does_not_change_results(self):
        cfg = small_config(replications=30)
        serial = sweep(cfg, workers=1, keep_samples=True)
        threaded = sweep(cfg, workers=2, keep_samples=True)
        assert np.array_equal(serial.samples, threaded.samples)
        assert serial.to_csv() == threaded.to_csv()

    def test_abort_reports_lowest_failing_stream(self):
        cfg = small_config(density=0.0, replications=5)
        with pytest.raises(ReplicationError) as err:
            sweep(cfg)
        assert err.value.stream_index == 0

    def test_csv_headers(self):
        cfg = small_config(replications=6)
        result = sweep(cfg, keep_samples=True)
        assert result.to_csv().splitlines()[0] == SWEEP_CSV_HEADER
        raw = result.raw_samples_csv().splitlines()
        assert raw[0] == RAW_CSV_HEADER
        assert len(raw) == 1 + 3 * 6

    def test_raw_csv_requires_samples(self):
        result = sweep(small_config(replications=2))
        with pytest.raises(InvalidParameterError):
            result.raw_samples_csv()

    def test_external_topology_reused(self, tmp_path):
        path = tmp_path / "net.edges"
        from knockon import RngStream, gen_erdos_renyi

        fixed = gen_erdos_renyi(30, 0.2, RngStream(2, 0))
        write_edge_list(fixed, path)
        cfg = small_config(
            n_banks=30,
            topology_kind="external",
            topology_path=str(path),
            replications=10,
        )
        result = sweep(cfg)
        # the fixed topology is reused by every replication
        assert result.realized_density_mean == pytest.approx(
            fixed.n_edges / (30 * 29), rel=1e-12
        )

    def test_trace_sink_receives_default_events(self):
        events = []
        cfg = small_config(replications=5, capital_ratio_grid=(0.02,))
        sweep(cfg, trace_sink=events.append)
        assert events, "expected at least one default at a low capital ratio"
        sample = events[0]
        assert {"stream_index", "R", "round", "bank", "distress", "transmitted"} == set(
            sample
        )

    def test_trace_requires_single_worker(self):
        with pytest.raises(InvalidParameterError, match="workers"):
            sweep(small_config(), workers=2, trace_sink=lambda e: None)

    def test_paired_counts_non_increasing(self):
        cfg = small_config(replications=60)
        result = sweep(cfg, keep_samples=True)
        diffs = np.diff(result.samples, axis=0)
        assert np.all(diffs <= 0)
