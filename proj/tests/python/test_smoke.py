import math

import pytest

import dasim


def symmetric():
    return dasim.Schedule([150 - 10 * i for i in range(10)], [50 + 10 * i for i in range(10)])


def market(days=2, rounds=30):
    c = dasim.MarketConfig()
    c.days = days
    c.rounds_per_day = rounds
    return c


def test_equilibrium():
    eq = dasim.compute_equilibrium([10, 9, 8], [5, 6, 7])
    assert eq == {"q0": 3, "p0": 7.5, "interval": (7.0, 8.0)}
    assert dasim.compute_equilibrium([3], [5])["p0"] is None


def test_truth_tellers_trade_at_midpoint():
    log = dasim.run_game(market(1, 5), dasim.Schedule([10], [5]), ["tt", "tt"], 1)
    assert [t.price for t in log.transactions] == [7.5]
    m = dasim.compute_metrics(log)
    assert m.ea == pytest.approx(100.0)


def test_game_is_deterministic():
    traders = ["zi-c"] * 20
    a = dasim.run_game(market(), symmetric(), traders, 42)
    b = dasim.run_game(market(), symmetric(), traders, 42)
    assert a.dump_events() == b.dump_events()
    assert len(a.transactions) > 0


def test_strategy_params_and_errors():
    traders = [("zip", {"beta_lo": 0.2, "beta_hi": 0.3})] * 20
    log = dasim.run_game(market(), symmetric(), traders, 3)
    assert dasim.compute_metrics(log).ea <= 100.0
    with pytest.raises(dasim.DasimError, match="UNKNOWN_STRATEGY"):
        dasim.run_game(market(), symmetric(), ["nope"] * 20, 0)
    with pytest.raises(ValueError):
        dasim.run_game(market(), symmetric(), ["tt"] * 3, 0)


def test_metric_formulas():
    assert dasim.convergence_alpha([90, 110], 100) == pytest.approx(10.0)
    assert dasim.profit_dispersion([2, 0], [5, 5]) == pytest.approx(math.sqrt(17))
    assert dasim.allocative_efficiency(3, 0) is None


def test_prisoners_dilemma_flows_to_defection():
    g = dasim.HeuristicGame(["C", "D"], 2)
    g.set([2, 0], [3, 0])
    g.set([1, 1], [0, 4])
    g.set([0, 2], [0, 1])
    assert dasim.mixture_payoff(g, 0, [0.5, 0.5]) == pytest.approx(1.5)
    search = dasim.find_equilibria(g, 50, 1)
    assert len(search.attractors) == 1
    assert search.attractors[0].point[1] == pytest.approx(1.0, abs=1e-6)
    flipped = dasim.find_equilibria(dasim.perturb(g, 1, 0, 1.5), 50, 1)
    assert flipped.attractors[0].point[0] == pytest.approx(1.0, abs=1e-6)


def test_build_game():
    g = dasim.build_game(["TT", "ZIC"], ["tt", "zi-c"], 4, market(1, 10),
                         dasim.Schedule([150, 130], [50, 70]), reps=2, seed=5)
    assert g.complete()
    assert len(g.profiles()) == 5


def test_ga_with_python_fitness():
    cfg = dasim.GaConfig()
    cfg.generations = 40
    r = dasim.ga_run(cfg, lambda x: -sum((v - 0.25) ** 2 for v in x), [(0, 1)] * 3, 7)
    assert all(abs(v - 0.25) < 0.05 for v in r["best"])
    assert r["best_ever"] == sorted(r["best_ever"])


def test_bandit_prefers_better_arm():
    b = dasim.Bandit([0.0, 1.0], 0.0)
    reward = None
    for i in range(20):
        arm = b.step(reward, i)
        reward = [1.0, 2.0][arm]
    assert b.counts[1] > b.counts[0]


def test_config_and_experiment(tmp_path):
    cfg = dasim.parse_config(
        "schedule:\n  buyers: [10]\n  sellers: [5]\ntraders:\n  - strategy: tt\nreps: 2\n")
    summary, files = dasim.run_experiment(cfg, str(tmp_path))
    assert summary["volume"][0] == 1
    assert (tmp_path / "transactions.csv").read_text().count("\n") == 3
    assert dasim.parse_config(dasim.emit_config(cfg)).reps == 2
    with pytest.raises(dasim.DasimError):
        dasim.parse_config("market:\n  pricng: kda\n")
