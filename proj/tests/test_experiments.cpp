#include <catch2/catch_amalgamated.hpp>

#include "agentgate/experiments.hpp"

using namespace agentgate;

namespace {

AppConfig small_config() {
    AppConfig cfg;
    cfg.synth.n_agents = 150;
    cfg.synth.seed = 9;
    cfg.train.rounds = 15;
    return cfg;
}

Dataset small_population_dataset(const AppConfig& cfg) {
    const SyntheticWorld world = generate(cfg.synth);
    const FeatureSchema schema = FeatureSchema::from_profiles(world.profiles);
    return build_feature_dataset(world.profiles, world.pdos, world.requests, cfg.thresholds,
                                 schema)
        .dataset;
}

} // namespace

TEST_CASE("learning-rate sweep shape and determinism") {
    const AppConfig cfg = small_config();
    const Dataset raw = small_population_dataset(cfg);
    const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    const SplitSpec spec{0.8, cfg.synth.seed};

    const SweepResult sweep = run_lr_sweep(raw, cfg.train, grid, spec);
    CHECK(sweep.parameter == "learning_rate");
    REQUIRE(sweep.points.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(sweep.points[i].value == grid[i]);
        CHECK(sweep.points[i].train_accuracy >= 0.0);
        CHECK(sweep.points[i].train_accuracy <= 1.0);
        CHECK(sweep.points[i].gap() ==
              std::abs(sweep.points[i].train_accuracy - sweep.points[i].test_accuracy));
    }

    SECTION("repeated run is identical") {
        const SweepResult again = run_lr_sweep(raw, cfg.train, grid, spec);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(again.points[i].train_accuracy == sweep.points[i].train_accuracy);
            CHECK(again.points[i].test_accuracy == sweep.points[i].test_accuracy);
        }
    }

    SECTION("bad grids are rejected") {
        const std::vector<double> unsorted = {0.3, 0.1};
        CHECK_THROWS_AS(run_lr_sweep(raw, cfg.train, unsorted, spec), std::invalid_argument);
        const std::vector<double> out_of_range = {0.5, 1.5};
        CHECK_THROWS_AS(run_lr_sweep(raw, cfg.train, out_of_range, spec), std::invalid_argument);
        CHECK_THROWS_AS(run_lr_sweep(raw, cfg.train, {}, spec), std::invalid_argument);
    }
}

TEST_CASE("min-child-weight sweep produces one table per weight") {
    AppConfig cfg = small_config();
    cfg.train.min_child_weight = 0.0;
    const Dataset raw = small_population_dataset(cfg);
    const std::vector<double> weights = {2.0, 3.0, 4.0};
    const std::vector<double> lr_grid = {0.2, 0.5, 0.8};
    const SplitSpec spec{0.8, cfg.synth.seed};

    const auto tables = run_weight_sweep(raw, cfg.train, weights, lr_grid, spec);
    REQUIRE(tables.size() == 3);
    for (std::size_t w = 0; w < weights.size(); ++w) {
        CHECK(tables[w].min_child_weight == weights[w]);
        CHECK(tables[w].lr_sweep.points.size() == lr_grid.size());
    }

    SECTION("a zero weight reproduces the plain learning-rate sweep") {
        const std::vector<double> zero = {0.0};
        const auto base_table = run_weight_sweep(raw, cfg.train, zero, lr_grid, spec);
        const SweepResult plain = run_lr_sweep(raw, cfg.train, lr_grid, spec);
        REQUIRE(base_table.size() == 1);
        for (std::size_t i = 0; i < lr_grid.size(); ++i) {
            CHECK(base_table[0].lr_sweep.points[i].train_accuracy ==
                  plain.points[i].train_accuracy);
            CHECK(base_table[0].lr_sweep.points[i].test_accuracy == plain.points[i].test_accuracy);
        }
    }

    SECTION("a weight large enough to block all splits falls to the majority baseline") {
        const std::vector<double> blocking = {1e9};
        const std::vector<double> single_lr = {0.3};
        const auto blocked = run_weight_sweep(raw, cfg.train, blocking, single_lr, spec);
        const auto [train, test] = split(raw, spec);
        std::map<int, std::size_t> train_counts;
        for (int y : train.labels) ++train_counts[y];
        int majority = 0;
        std::size_t best = 0;
        for (const auto& [label, count] : train_counts) {
            if (count > best) {
                best = count;
                majority = label;
            }
        }
        std::size_t hits = 0;
        for (int y : test.labels) hits += y == majority ? 1 : 0;
        const double baseline = static_cast<double>(hits) / static_cast<double>(test.n_rows);
        CHECK(blocked[0].lr_sweep.points[0].test_accuracy == baseline);
    }
}

TEST_CASE("scale experiment emits one report per trial plus per-scale summaries") {
    AppConfig cfg = small_config();
    cfg.train.rounds = 10;
    const std::vector<std::int64_t> scales = {80, 120};

    const auto [results, summaries] = run_scale_experiment(cfg, scales, 2);
    REQUIRE(results.size() == 4);
    REQUIRE(summaries.size() == 2);
    for (const auto& s : summaries) {
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
        CHECK(s.min_success <= s.mean_success);
        CHECK(s.mean_success <= s.max_success);
    }
    CHECK(results[0].seed != results[1].seed);
    CHECK(results[0].n_agents == 80);
    CHECK(results[3].n_agents == 120);

    SECTION("reruns are identical") {
        const auto [again, again_summaries] = run_scale_experiment(cfg, scales, 2);
        for (std::size_t i = 0; i < results.size(); ++i) {
            CHECK(again[i].report.accuracy == results[i].report.accuracy);
            CHECK(again[i].report.success_rate == results[i].report.success_rate);
        }
    }
}

TEST_CASE("the gatekeeper simulation runs the loop end to end") {
    AppConfig cfg;
    cfg.synth.n_agents = 60;
    cfg.synth.intervals = 6;
    cfg.synth.seed = 12;
    cfg.train.rounds = 15;
    cfg.sim_intervals = 30;
    cfg.retrain_every = 10;
    cfg.min_retrain_rows = 50;

    const SimulationResult sim = run_simulation(cfg);

    SECTION("retrain schedule: thirty intervals at cadence ten means three checks") {
        REQUIRE(sim.retrains.size() == 3);
        for (const auto& ev : sim.retrains) {
            CHECK(ev.status == RetrainStatus::retrained);
        }
        CHECK(sim.retrains[0].interval == 6 + 9);
        CHECK(sim.retrains[2].interval == 6 + 29);
    }

    SECTION("decisions and knowledge accumulate consistently") {
        CHECK_FALSE(sim.decisions.empty());
        CHECK(sim.store.records().size() == sim.decisions.size());
        CHECK(sim.metrics.n_agents > 0);

        // Unknown agents are denied while their history is empty.
        std::size_t unknown_denials = 0;
        for (const auto& [interval, d] : sim.decisions) {
            if (d.model_intent == kClassUnknown) {
                CHECK_FALSE(d.granted);
                ++unknown_denials;
            }
        }
        CHECK(unknown_denials > 0);
    }

    SECTION("the simulation is deterministic") {
        const SimulationResult again = run_simulation(cfg);
        REQUIRE(again.decisions.size() == sim.decisions.size());
        for (std::size_t i = 0; i < sim.decisions.size(); ++i) {
            CHECK(again.decisions[i].first == sim.decisions[i].first);
            CHECK(again.decisions[i].second.agent_id == sim.decisions[i].second.agent_id);
            CHECK(again.decisions[i].second.granted == sim.decisions[i].second.granted);
        }
        CHECK(again.metrics.accuracy == sim.metrics.accuracy);
    }
}
