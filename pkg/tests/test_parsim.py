import numpy as np
import pytest

from conftest import siso_instance, small_instance

from eebeam.errors import ProtocolError
from eebeam.inner import InnerOptions
from eebeam.model import BeamformerSet
from eebeam.outer import OuterOptions, outer_solve
from eebeam.parsim import (Message, ProtocolTrace, count_overhead, run_parallel,
                           save_trace)


@pytest.fixture(scope="module")
def solved():
    cfg, H = small_instance(seed=90)
    report, trace = run_parallel(cfg, H)
    return cfg, H, report, trace


class TestEquivalence:
    def test_bit_for_bit_vs_centralized(self, solved):
        cfg, H, report, trace = solved
        central = outer_solve(cfg, H)
        assert report.eta_star == central.eta_star
        assert report.outer_iters == central.outer_iters
        assert report.inner_iters_total == central.inner_iters_total
        for j, k in cfg.users():
            assert np.array_equal(report.W.w[j][k], central.W.w[j][k])
        assert report.F_trace == central.F_trace

    def test_siso_case(self):
        cfg, H = siso_instance()
        report, trace = run_parallel(cfg, H)
        central = outer_solve(cfg, H)
        assert report.eta_star == central.eta_star
        assert np.array_equal(report.W.w[0][0], central.W.w[0][0])


class TestAccounting:
    def test_matches_closed_form(self, solved):
        _, _, _, trace = solved
        assert trace.total_reals == trace.expected_reals()
        assert count_overhead(trace) == trace.total_reals

    def test_round_counts_consistent(self, solved):
        _, _, report, trace = solved
        assert trace.kappa1 == report.outer_iters == len(trace.kappa2)
        assert sum(trace.kappa2) == report.inner_iters_total

    def test_worked_example_formula(self):
        # kappa1=2, kappa2=3 inner rounds, K=3 cells, 5 users in total:
        # 2 * (3*3*5 + 3 + 1) = 98 shared reals
        trace = ProtocolTrace(K=3, total_users=5, kappa2=[3, 3])
        assert trace.expected_reals() == 98

    def test_message_kinds_and_counts(self, solved):
        cfg, _, _, trace = solved
        kinds = {m.kind for m in trace.messages}
        assert kinds == {"CsiShare", "EtaBroadcast", "CrossTermReport",
                         "PowerReport", "StopCommand"}
        assert sum(m.kind == "CsiShare" for m in trace.messages) == cfg.K
        assert all(m.initialization for m in trace.messages
                   if m.kind == "CsiShare")
        assert sum(m.kind == "EtaBroadcast" for m in trace.messages) == trace.kappa1
        assert sum(m.kind == "PowerReport" for m in trace.messages) \
            == trace.kappa1 * cfg.K
        stops = [m for m in trace.messages if m.kind == "StopCommand"]
        assert len(stops) == 1 and stops[0].payload_real_count == 0

    def test_crossterm_payload_sizes(self, solved):
        cfg, _, _, trace = solved
        for m in trace.messages:
            if m.kind != "CrossTermReport":
                continue
            if m.sender == "controller":
                assert m.payload_real_count == cfg.total_users
            else:
                j = int(m.sender.split("-")[1])
                assert m.payload_real_count == 2 * cfg.N[j]

    def test_single_cell_emits_no_crossterms(self):
        cfg, H = siso_instance()
        _, trace = run_parallel(cfg, H)
        assert not any(m.kind == "CrossTermReport" for m in trace.messages)
        assert trace.total_reals == trace.expected_reals() \
            == trace.kappa1 * (cfg.K + 1)

    def test_incomplete_trace_rejected(self):
        with pytest.raises(ProtocolError):
            count_overhead(ProtocolTrace(K=3, total_users=5))


class TestGuards:
    def test_rejects_random_init(self):
        cfg, H = small_instance(seed=91)
        with pytest.raises(ProtocolError):
            run_parallel(cfg, H, OuterOptions(inner=InnerOptions(init="random")))

    def test_rejects_warm_start_init(self):
        cfg, H = small_instance(seed=92)
        W = BeamformerSet.zeros(cfg)
        with pytest.raises(ProtocolError):
            run_parallel(cfg, H, OuterOptions(inner=InnerOptions(init=W)))

    def test_rejects_restarts(self):
        cfg, H = small_instance(seed=93)
        with pytest.raises(ProtocolError):
            run_parallel(cfg, H, OuterOptions(inner=InnerOptions(restarts=3)))

    def test_rejects_cold_outer(self):
        cfg, H = small_instance(seed=94)
        with pytest.raises(ProtocolError):
            run_parallel(cfg, H, OuterOptions(warm_start=False))


class TestExport:
    def test_export_line_format(self, solved):
        _, _, _, trace = solved
        lines = trace.export_lines()
        assert len(lines) == len(trace.messages)
        first = lines[0].split()
        assert first[0] == "0" and first[3] == "CsiShare"

    def test_save_trace_roundtrip(self, solved, tmp_path):
        _, _, _, trace = solved
        path = tmp_path / "trace.txt"
        save_trace(path, trace)
        lines = path.read_text().splitlines()
        assert lines == trace.export_lines()
        # recount the recurring overhead from the file alone
        total = sum(int(l.split()[4]) for l in lines
                    if l.split()[3] != "CsiShare")
        assert total == trace.total_reals
