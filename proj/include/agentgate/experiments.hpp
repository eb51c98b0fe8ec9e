#pragma once

// Experiment runners: the generate -> assess -> train -> evaluate pipeline,
// learning-rate and min-child-weight sweeps, the population-scale study and
// the interval-by-interval gatekeeper simulation. Every runner derives its
// randomness from explicit seeds, so repeated runs are byte-identical.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentgate/config.hpp"
#include "agentgate/dataset.hpp"
#include "agentgate/gatekeeper.hpp"
#include "agentgate/gbdt.hpp"
#include "agentgate/metrics.hpp"

namespace agentgate {

struct PipelineResult {
    FeatureSchema schema;
    Dataset dataset; // raw (un-normalized) features for the whole population
    Dataset train;
    Dataset test;
    BoostedEnsemble model;
    MetricsReport train_metrics;
    MetricsReport test_metrics;
};

inline MetricsReport evaluate(const BoostedEnsemble& model, const Dataset& raw, int n_classes) {
    std::vector<int> predicted;
    predicted.reserve(raw.n_rows);
    for (std::size_t i = 0; i < raw.n_rows; ++i) {
        predicted.push_back(model.predict(raw.row(i)).predicted_class);
    }
    return compute_metrics(predicted, raw.labels, n_classes);
}

// Full desk-scale pipeline on a fresh synthetic population.
inline PipelineResult run_pipeline(const AppConfig& cfg) {
    PipelineResult out;
    const SyntheticWorld world = generate(cfg.synth);
    out.schema = FeatureSchema::from_profiles(world.profiles);
    out.dataset = build_feature_dataset(world.profiles, world.pdos, world.requests,
                                        cfg.thresholds, out.schema)
                      .dataset;
    std::tie(out.train, out.test) = split(out.dataset, {cfg.train_fraction, cfg.synth.seed});
    out.model = train_model(out.train, cfg.train);
    const int k = std::max(out.train.n_classes(), out.test.n_classes());
    out.train_metrics = evaluate(out.model, out.train, k);
    out.test_metrics = evaluate(out.model, out.test, k);
    return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.
// ---------------------------------------------------------------------------

struct SweepPoint {
    double value = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;

    double gap() const { return std::abs(train_accuracy - test_accuracy); }
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepPoint> points;
};

namespace detail {

inline void require_increasing(std::span<const double> grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) {
            throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
        }
    }
}

} // namespace detail

// Trains once per grid value on a fixed seeded split and reports train and
// test accuracy side by side.
inline SweepResult run_lr_sweep(const Dataset& raw, const TrainConfig& base,
                                std::span<const double> grid, const SplitSpec& split_spec) {
    detail::require_increasing(grid, "learning_rate");
    for (double lr : grid) {
        if (!(lr > 0.0 && lr <= 1.0)) {
            throw std::invalid_argument("learning_rate grid values must lie in (0,1]");
        }
    }
    const auto [train, test] = split(raw, split_spec);
    const int k = std::max(train.n_classes(), test.n_classes());

    SweepResult result;
    result.parameter = "learning_rate";
    for (double lr : grid) {
        TrainConfig cfg = base;
        cfg.learning_rate = lr;
        try {
            const BoostedEnsemble model = train_model(train, cfg);
            result.points.push_back(
                {lr, evaluate(model, train, k).accuracy, evaluate(model, test, k).accuracy});
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep point learning_rate=" + format_double(lr) + ": " +
                                     e.what());
        }
    }
    return result;
}

// One learning-rate table per min-child-weight value.
struct WeightSweepResult {
    double min_child_weight = 0.0;
    SweepResult lr_sweep;
};

inline std::vector<WeightSweepResult> run_weight_sweep(const Dataset& raw, const TrainConfig& base,
                                                       std::span<const double> weight_grid,
                                                       std::span<const double> lr_grid,
                                                       const SplitSpec& split_spec) {
    detail::require_increasing(weight_grid, "min_child_weight");
    for (double w : weight_grid) {
        if (w < 0.0) throw std::invalid_argument("min_child_weight grid values must be >= 0");
    }
    std::vector<WeightSweepResult> tables;
    tables.reserve(weight_grid.size());
    for (double w : weight_grid) {
        TrainConfig cfg = base;
        cfg.min_child_weight = w;
        try {
            tables.push_back({w, run_lr_sweep(raw, cfg, lr_grid, split_spec)});
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep point min_child_weight=" + format_double(w) + ": " +
                                     e.what());
        }
    }
    return tables;
}

// ---------------------------------------------------------------------------
// Population-scale study.
// ---------------------------------------------------------------------------

struct ScaleResult {
    std::int64_t n_agents = 0;
    std::uint64_t seed = 0;
    MetricsReport report;
};

struct ScaleSummary {
    std::int64_t n_agents = 0;
    double mean = 0.0, min = 0.0, max = 0.0;                     // accuracy
    double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
    double mean_success = 0.0, min_success = 0.0, max_success = 0.0;
};

// Per scale, several seeded trials of the full pipeline; each grid point's
// seed is derived from (base seed, point index) so points are independent.
inline std::pair<std::vector<ScaleResult>, std::vector<ScaleSummary>> run_scale_experiment(
    const AppConfig& base, std::span<const std::int64_t> scales, int n_seeds) {
    if (scales.empty()) throw std::invalid_argument("scale grid must be non-empty");
    if (n_seeds < 1) throw std::invalid_argument("need at least one seed per scale");

    std::vector<ScaleResult> results;
    std::vector<ScaleSummary> summaries;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        ScaleSummary summary;
        summary.n_agents = scales[si];
        summary.min = 1.0;
        summary.min_success = 1.0;
        for (int r = 0; r < n_seeds; ++r) {
            AppConfig cfg = base;
            cfg.synth.n_agents = scales[si];
            cfg.synth.seed = derive_seed(base.synth.seed,
                                         static_cast<std::uint64_t>(si) * 1000 +
                                             static_cast<std::uint64_t>(r));
            try {
                const PipelineResult run = run_pipeline(cfg);
                const MetricsReport& m = run.test_metrics;
                results.push_back({scales[si], cfg.synth.seed, m});
                summary.mean += m.accuracy;
                summary.min = std::min(summary.min, m.accuracy);
                summary.max = std::max(summary.max, m.accuracy);
                summary.mean_precision += m.precision;
                summary.mean_recall += m.recall;
                summary.mean_f1 += m.f1;
                summary.mean_success += m.success_rate;
                summary.min_success = std::min(summary.min_success, m.success_rate);
                summary.max_success = std::max(summary.max_success, m.success_rate);
            } catch (const std::exception& e) {
                throw std::runtime_error("scale " + std::to_string(scales[si]) + " seed " +
                                         std::to_string(r) + ": " + e.what());
            }
        }
        const double n = static_cast<double>(n_seeds);
        summary.mean /= n;
        summary.mean_precision /= n;
        summary.mean_recall /= n;
        summary.mean_f1 /= n;
        summary.mean_success /= n;
        summaries.push_back(summary);
    }
    return {std::move(results), std::move(summaries)};
}

// ---------------------------------------------------------------------------
// Gatekeeper simulation (the operational loop, end to end).
// ---------------------------------------------------------------------------

struct RetrainEvent {
    TimeIndex interval = 0;
    RetrainStatus status = RetrainStatus::retrained;
};

struct SimulationResult {
    std::vector<std::pair<TimeIndex, AccessDecision>> decisions;
    KnowledgeStore store;
    MetricsReport metrics;
    std::vector<RetrainEvent> retrains;
    BoostedEnsemble model; // the model in service after the last interval
    FeatureSchema schema;
};

// Runs the loop: seed a population, train the initial classifier on its
// assessed feature set, then per interval sample requests, decide, record,
// append the attempt events to the histories and retrain on schedule. The
// model swap happens between intervals, never inside one.
inline SimulationResult run_simulation(const AppConfig& cfg) {
    cfg.validate();
    const SyntheticWorld world = generate(cfg.synth);

    SimulationResult out;
    out.schema = FeatureSchema::from_profiles(world.profiles);
    const Dataset initial =
        build_feature_dataset(world.profiles, world.pdos, world.requests, cfg.thresholds, out.schema)
            .dataset;
    out.model = train_model(initial, cfg.train);

    GateState state = GateState::from_population(world.profiles, world.pdos);
    const TimeIndex lookback = cfg.synth.intervals;

    // Ordered agent list for deterministic per-agent streams.
    std::vector<const AgentProfile*> agents;
    agents.reserve(state.profiles.size());
    for (const auto& [id, profile] : state.profiles) agents.push_back(&profile);

    for (std::int64_t s = 0; s < cfg.sim_intervals; ++s) {
        const TimeIndex t = cfg.synth.intervals + s;

        std::vector<DataAccessRequest> requests;
        for (std::size_t ai = 0; ai < agents.size(); ++ai) {
            Rng rng(derive_seed(cfg.synth.seed,
                                0x513aULL + static_cast<std::uint64_t>(s) * 1000003ULL +
                                    static_cast<std::uint64_t>(ai)));
            if (!rng.bernoulli(cfg.request_prob)) continue;

            const AgentProfile& profile = *agents[ai];
            const PermissibleSet& pdo = state.pdos.at(profile.agent_id);
            const bool malicious = profile.true_class == kClassMalicious;
            const double breach_p = malicious ? cfg.synth.request_breach_prob_malicious
                                              : cfg.synth.request_breach_prob_normal;

            DataAccessRequest request;
            request.agent_id = profile.agent_id;
            request.window = {t, t + lookback - 1};
            const std::int64_t n_objects = rng.uniform_int(1, 3);
            std::set<ObjectId> seen;
            for (std::int64_t k = 0; k < n_objects; ++k) {
                RequestedObject ro;
                if (rng.bernoulli(breach_p) || pdo.entries.empty()) {
                    for (int tries = 0; tries < 64; ++tries) {
                        const auto& obj = world.catalog[static_cast<std::size_t>(
                            rng.uniform_int(0, cfg.synth.n_objects - 1))];
                        if (!pdo.contains_object(obj.id)) {
                            ro = {obj.category, obj.id};
                            break;
                        }
                    }
                    if (ro.object_id.empty()) continue;
                } else {
                    auto it = pdo.entries.begin();
                    std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(pdo.entries.size()) - 1));
                    ro = {it->first, it->second};
                }
                if (seen.insert(ro.object_id).second) request.objects.push_back(std::move(ro));
            }
            if (!request.objects.empty()) requests.push_back(std::move(request));
        }

        IntervalOutcome outcome =
            process_interval(requests, state, out.model, cfg.thresholds, out.schema);
        record(out.store, t, outcome);

        // Every processed request is an attempt: it extends the agent's
        // history whether or not it was granted. Leaks can only arise from
        // granted data.
        for (const auto& d : outcome.decisions) {
            AgentProfile& profile = state.profiles.at(d.agent_id);
            const PermissibleSet& pdo = state.pdos.at(d.agent_id);
            const bool malicious = profile.true_class == kClassMalicious;
            Rng leak_rng(derive_seed(cfg.synth.seed,
                                     0x1eacULL + static_cast<std::uint64_t>(t) * 1000003ULL +
                                         std::hash<std::string>{}(d.agent_id)));
            for (const auto& ro : d.requested_objects) {
                AccessEvent ev;
                ev.agent_id = d.agent_id;
                ev.object_id = ro.object_id;
                ev.time = t;
                ev.authorized = pdo.contains(ro.category, ro.object_id);
                const double leak_p =
                    malicious ? cfg.synth.leak_prob_malicious : cfg.synth.leak_prob_normal;
                ev.leaked = d.granted && leak_rng.bernoulli(leak_p);
                profile.history.push_back(ev);
            }
        }

        for (const auto& d : outcome.decisions) {
            out.decisions.emplace_back(t, d);
        }

        if ((s + 1) % cfg.retrain_every == 0) {
            RetrainResult rr = retrain(out.store, out.schema.feature_names(), cfg.train,
                                       static_cast<std::size_t>(cfg.min_retrain_rows));
            out.retrains.push_back({t, rr.status});
            if (rr.status == RetrainStatus::retrained) {
                out.model = std::move(*rr.model);
            }
        }
    }

    // Operational metrics: the model's class call per decision against the
    // population's ground-truth labels.
    std::vector<int> predicted, actual;
    for (const auto& [interval, d] : out.decisions) {
        const auto it = state.profiles.find(d.agent_id);
        if (it == state.profiles.end() || !it->second.true_class) continue;
        predicted.push_back(d.model_intent);
        actual.push_back(*it->second.true_class);
    }
    if (!predicted.empty()) {
        out.metrics = compute_metrics(predicted, actual, kNumClasses);
    }
    return out;
}

} // namespace agentgate
