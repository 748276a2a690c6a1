import io
import math

import numpy as np
import pytest

from listcap.capacity import arimoto_blahut
from listcap.harness import (
    EXACT_LIMIT,
    SWEEP_COLUMNS,
    SweepConfig,
    SweepRow,
    converse_success_bound,
    fmt,
    run_sweep,
    sweep_point,
    write_csv,
)
from listcap.renyi import ExponentQuery, sc_exponent


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(rates=(), block_lengths=(4,)),
        dict(rates=(-0.1,), block_lengths=(4,)),
        dict(rates=(0.1,), block_lengths=(0,)),
        dict(rates=(0.1,), block_lengths=(4,), rho=-1.0),
        dict(rates=(0.1,), block_lengths=(4,), method="magic"),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SweepConfig(**kw)

    def test_exponential_list(self):
        cfg = SweepConfig(rates=(0.1,), block_lengths=(5,), rho=0.2)
        assert cfg.list_size_at(5) == math.ceil(math.exp(1.0))


def test_row_rate_recomputed():
    row = SweepRow(n=4, N=11, L=2, p_e=0.25, stderr=0.0, converse_rhs_min=1.0, method="exact")
    assert row.rate == math.log(11 / 2) / 4
    assert row.one_minus_pe == 0.75


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(7) == "7" and fmt(np.int64(3)) == "3" and fmt(math.nan) == "nan"


def test_write_csv_header_always():
    fh = io.StringIO()
    write_csv(fh, SWEEP_COLUMNS, [])
    assert fh.getvalue() == ",".join(SWEEP_COLUMNS) + "\n"


class TestConverseColumn:
    def test_at_most_one(self, bsc01):
        sigma = arimoto_blahut(bsc01).sigma_star
        assert converse_success_bound(bsc01, sigma, 8, 100, 1, np.linspace(-8, 0, 65)) <= 1.0

    def test_matches_exponent(self, bsc01):
        sigma = arimoto_blahut(bsc01).sigma_star
        n = 200
        N = math.exp(0.6 * n)
        b = converse_success_bound(bsc01, sigma, n, N, 1, np.linspace(-8, 0, 4097))
        E = sc_exponent(ExponentQuery(0.6), bsc01, sigma).exponent
        assert math.log(b) / n == pytest.approx(-E, abs=1e-4)


class TestSweep:
    def test_below_capacity_exact_decreasing(self, bsc01):
        rows = run_sweep(bsc01, SweepConfig(rates=(0.25,), block_lengths=(6, 10, 14), seed=0))
        assert [r.method for r in rows] == ["exact"] * 3
        pe = [r.p_e for r in rows]
        assert pe[0] > pe[1] > pe[2]

    def test_above_capacity_success_decreasing(self, bsc01):
        cfg = SweepConfig(rates=(0.6,), block_lengths=(8, 12), seed=0, trials=4000, method="mc")
        rows = run_sweep(bsc01, cfg)
        assert rows[0].one_minus_pe > rows[1].one_minus_pe
        for r in rows:
            assert r.one_minus_pe <= r.converse_rhs_min + 3 * r.stderr

    def test_rho_rule_same_trends(self, bsc01):
        # growing lists at a fixed normalized rate keep the side-of-capacity behavior
        def run(rate, ns):
            cfg = SweepConfig(rates=(rate,), block_lengths=ns, rho=0.15, method="mc", trials=4000, seed=0)
            return run_sweep(bsc01, cfg)

        below = run(0.25, (6, 12, 18))
        assert [r.L for r in below] == [math.ceil(math.exp(0.15 * n)) for n in (6, 12, 18)]
        assert all(abs(r.rate - 0.25) < 0.01 for r in below)
        assert below[0].p_e > below[1].p_e > below[2].p_e
        above = run(0.6, (6, 10, 14))
        assert above[0].one_minus_pe > above[1].one_minus_pe > above[2].one_minus_pe

    def test_deterministic(self, bsc01):
        cfg = SweepConfig(rates=(0.3, 0.6), block_lengths=(5, 9), trials=1000, seed=7)
        a, b = io.StringIO(), io.StringIO()
        write_csv(a, SWEEP_COLUMNS, (r.as_tuple() for r in run_sweep(bsc01, cfg)))
        write_csv(b, SWEEP_COLUMNS, (r.as_tuple() for r in run_sweep(bsc01, cfg)))
        assert a.getvalue() == b.getvalue()
        assert a.getvalue().count("\n") == 5

    def test_budget_exceeded_row(self, bsc01):
        cfg = SweepConfig(rates=(0.3,), block_lengths=(30,), method="exact")
        cap = arimoto_blahut(bsc01)
        row = sweep_point(bsc01, cap.p_star, cap.sigma_star, 30, 0.3, cfg)
        assert row.N * 2**30 > EXACT_LIMIT
        assert row.status == "budget_exceeded" and math.isnan(row.p_e)
