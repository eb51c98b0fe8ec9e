#pragma once

// Data preparation and the seeded synthetic workload generator. The
// generator produces a labeled agent population whose behavior is sampled
// conditionally on the assigned class, so the class structure is separable
// by construction and fully reproducible under a seed.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agentgate/assessment.hpp"
#include "agentgate/core.hpp"
#include "agentgate/rng.hpp"

namespace agentgate {

struct NormalizationStats {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t width() const { return min.size(); }
};

// Row-major numeric matrix with aligned labels. A label of -1 marks an
// unlabeled row.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<AgentId> row_ids;
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<int> labels;
    std::optional<NormalizationStats> stats;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * n_cols, n_cols};
    }

    bool labeled() const {
        if (labels.size() != n_rows) return false;
        for (int y : labels) {
            if (y < 0) return false;
        }
        return n_rows > 0;
    }

    int n_classes() const {
        int k = 0;
        for (int y : labels) k = std::max(k, y + 1);
        return k;
    }
};

inline NormalizationStats compute_stats(const Dataset& d) {
    if (d.n_rows == 0) throw std::invalid_argument("cannot compute stats of an empty dataset");
    NormalizationStats s;
    s.min.assign(d.n_cols, 0.0);
    s.max.assign(d.n_cols, 0.0);
    for (std::size_t j = 0; j < d.n_cols; ++j) {
        double lo = d.values[j], hi = d.values[j];
        for (std::size_t i = 1; i < d.n_rows; ++i) {
            const double v = d.values[i * d.n_cols + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        s.min[j] = lo;
        s.max[j] = hi;
    }
    return s;
}

// Scales one value into [0,1] using the stored training range. Values from
// outside the range are clipped; a constant feature maps to 0.
inline double normalize_value(double v, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double scaled = (v - lo) / (hi - lo);
    return std::clamp(scaled, 0.0, 1.0);
}

inline void normalize_row(std::span<double> row, const NormalizationStats& stats) {
    if (row.size() != stats.width()) {
        throw std::invalid_argument("row width does not match normalization stats");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = normalize_value(row[j], stats.min[j], stats.max[j]);
    }
}

// Min-max scaling per feature. When `reuse` is null (training path) the
// stats are computed from the matrix itself and attached to the result for
// later inference use.
inline Dataset normalize(const Dataset& d, const NormalizationStats* reuse = nullptr) {
    if (d.n_rows == 0) throw std::invalid_argument("cannot normalize an empty dataset");
    NormalizationStats stats = reuse ? *reuse : compute_stats(d);
    if (stats.width() != d.n_cols) {
        throw std::invalid_argument("normalization stats width does not match dataset");
    }
    Dataset out = d;
    for (std::size_t i = 0; i < out.n_rows; ++i) {
        normalize_row(out.row(i), stats);
    }
    out.stats = std::move(stats);
    return out;
}

inline double denormalize_value(double v, double lo, double hi) {
    if (hi <= lo) return lo;
    return lo + v * (hi - lo);
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t shuffle_seed = 0;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw std::invalid_argument("train_fraction must lie in (0,1)");
        }
    }
};

namespace detail {

inline Dataset take_rows(const Dataset& d, std::span<const std::size_t> rows) {
    Dataset out;
    out.feature_names = d.feature_names;
    out.n_rows = rows.size();
    out.n_cols = d.n_cols;
    out.stats = d.stats;
    out.values.reserve(rows.size() * d.n_cols);
    for (std::size_t i : rows) {
        const auto r = d.row(i);
        out.values.insert(out.values.end(), r.begin(), r.end());
        if (!d.labels.empty()) out.labels.push_back(d.labels[i]);
        if (!d.row_ids.empty()) out.row_ids.push_back(d.row_ids[i]);
    }
    return out;
}

} // namespace detail

// Seeded shuffle partition into train (first floor(n*f) shuffled rows) and
// test (the rest).
inline std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    spec.validate();
    if (d.n_rows < 2) throw std::invalid_argument("need at least 2 rows to split");

    std::vector<std::size_t> order(d.n_rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(spec.shuffle_seed, 0x5eedULL));
    for (std::size_t i = d.n_rows - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
    }

    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(d.n_rows) * spec.train_fraction));
    if (n_train == 0 || n_train == d.n_rows) {
        throw std::invalid_argument("split would leave one side empty");
    }
    return {detail::take_rows(d, {order.data(), n_train}),
            detail::take_rows(d, {order.data() + n_train, d.n_rows - n_train})};
}

struct SyntheticConfig {
    std::int64_t n_agents = 1000;
    double malicious_fraction = 0.2;
    double unknown_fraction = 0.1;
    std::int64_t n_objects = 200;
    std::int64_t n_categories = 4;
    std::int64_t intervals = 12;
    std::uint64_t seed = 1;

    // Per-access leak probability, conditional on class.
    double leak_prob_malicious = 0.3;
    double leak_prob_normal = 0.01;
    // Probability that an access attempt targets an object outside the PDO.
    double breach_prob_malicious = 0.3;
    double breach_prob_normal = 0.02;
    // Probability that the pending request includes an out-of-PDO object.
    double request_breach_prob_malicious = 0.6;
    double request_breach_prob_normal = 0.02;

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");
        if (malicious_fraction < 0 || unknown_fraction < 0 ||
            malicious_fraction + unknown_fraction > 1.0) {
            throw std::invalid_argument("class fractions must be non-negative and sum to <= 1");
        }
        if (n_objects < 1 || n_categories < 1 || n_categories > n_objects) {
            throw std::invalid_argument("need 1 <= n_categories <= n_objects");
        }
        if (intervals < 1) throw std::invalid_argument("intervals must be >= 1");
        for (double p : {leak_prob_malicious, leak_prob_normal, breach_prob_malicious,
                         breach_prob_normal, request_breach_prob_malicious,
                         request_breach_prob_normal}) {
            if (p < 0.0 || p > 1.0) throw std::invalid_argument("probabilities must lie in [0,1]");
        }
    }
};

struct SyntheticWorld {
    std::vector<DataObject> catalog;
    std::vector<AgentProfile> profiles;
    std::vector<AccessEvent> events;       // all agents' events, time-sorted per agent
    std::vector<PermissibleSet> pdos;      // aligned with profiles
    std::vector<DataAccessRequest> requests; // one pending request per non-degenerate agent
    std::vector<Category> categories;
};

namespace detail {

inline std::string padded_id(const char* prefix, std::int64_t i, int width = 5) {
    std::string digits = std::to_string(i);
    std::string out(prefix);
    if (static_cast<int>(digits.size()) < width) {
        out.append(static_cast<std::size_t>(width) - digits.size(), '0');
    }
    out += digits;
    return out;
}

inline const std::vector<std::string>& profession_vocab() {
    static const std::vector<std::string> v = {"analyst", "contractor", "engineer", "manager"};
    return v;
}

inline const std::vector<std::string>& request_type_vocab() {
    static const std::vector<std::string> v = {"read", "share", "write"};
    return v;
}

} // namespace detail

// Builds a labeled population. Labels are assigned first (counts rounded to
// the requested fractions, then shuffled across agent slots) and behavior is
// sampled conditionally on the label from a per-agent stream derived from
// (seed, agent index), so generation is schedule-independent.
inline SyntheticWorld generate(const SyntheticConfig& cfg) {
    cfg.validate();
    SyntheticWorld world;

    world.categories.reserve(static_cast<std::size_t>(cfg.n_categories));
    for (std::int64_t c = 1; c <= cfg.n_categories; ++c) {
        world.categories.push_back("C" + std::to_string(c));
    }

    // Catalog: objects assigned round-robin to categories; roughly a quarter
    // of each category marked sensitive.
    Rng catalog_rng(derive_seed(cfg.seed, 0xca7a106ULL));
    world.catalog.reserve(static_cast<std::size_t>(cfg.n_objects));
    for (std::int64_t o = 1; o <= cfg.n_objects; ++o) {
        DataObject obj;
        obj.id = detail::padded_id("o", o);
        obj.category = world.categories[static_cast<std::size_t>((o - 1) % cfg.n_categories)];
        obj.sensitive = catalog_rng.bernoulli(0.25);
        world.catalog.push_back(std::move(obj));
    }

    // Label plan: rounded counts (clamped so both classes fit when the
    // fractions sum to 1), deterministically shuffled.
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    const auto n_mal = std::min(
        n, static_cast<std::size_t>(std::llround(cfg.malicious_fraction * static_cast<double>(n))));
    const auto n_unk = std::min(
        n - n_mal,
        static_cast<std::size_t>(std::llround(cfg.unknown_fraction * static_cast<double>(n))));
    std::vector<int> labels(n, kClassNonMalicious);
    std::fill_n(labels.begin(), n_mal, kClassMalicious);
    std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(n_mal), n_unk, kClassUnknown);
    Rng label_rng(derive_seed(cfg.seed, 0x1abe1ULL));
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(label_rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(labels[i], labels[j]);
    }

    world.profiles.reserve(n);
    world.pdos.reserve(n);
    world.requests.reserve(n);

    const TimeWindow request_window{cfg.intervals, 2 * cfg.intervals - 1};

    for (std::size_t idx = 0; idx < n; ++idx) {
        Rng rng(derive_seed(cfg.seed, 0xa9e27ULL + idx));
        const int label = labels[idx];
        const bool malicious = label == kClassMalicious;
        const bool unknown = label == kClassUnknown;

        AgentProfile profile;
        profile.agent_id = detail::padded_id("a", static_cast<std::int64_t>(idx) + 1);
        profile.true_class = label;
        profile.profession = detail::profession_vocab()[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(detail::profession_vocab().size()) - 1))];
        profile.live.request_type = detail::request_type_vocab()[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(detail::request_type_vocab().size()) - 1))];
        profile.live.request_count = malicious ? rng.uniform_int(10, 30) : rng.uniform_int(3, 15);
        profile.live.data_limit =
            malicious ? rng.uniform(15.0, 40.0) : rng.uniform(5.0, 20.0);

        // Per-agent grants: 1-3 categories, several objects each.
        PermissibleSet pdo;
        pdo.agent_id = profile.agent_id;
        const std::int64_t n_granted_cats = rng.uniform_int(1, std::min<std::int64_t>(3, cfg.n_categories));
        std::vector<std::size_t> cat_order(world.categories.size());
        std::iota(cat_order.begin(), cat_order.end(), 0);
        for (std::size_t i = cat_order.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(cat_order[i], cat_order[j]);
        }
        for (std::int64_t c = 0; c < n_granted_cats; ++c) {
            const Category& cat = world.categories[cat_order[static_cast<std::size_t>(c)]];
            const std::int64_t n_grant = rng.uniform_int(3, 8);
            for (std::int64_t g = 0; g < n_grant; ++g) {
                const auto& obj = world.catalog[static_cast<std::size_t>(
                    rng.uniform_int(0, cfg.n_objects - 1))];
                if (obj.category == cat) pdo.entries.insert({obj.category, obj.id});
            }
            // Guarantee at least one grant per chosen category.
            const auto it = pdo.entries.lower_bound({cat, ObjectId()});
            if (it == pdo.entries.end() || it->first != cat) {
                for (const auto& obj : world.catalog) {
                    if (obj.category == cat) {
                        pdo.entries.insert({obj.category, obj.id});
                        break;
                    }
                }
            }
        }

        auto pick_in_pdo = [&]() -> const std::pair<Category, ObjectId>& {
            auto it = pdo.entries.begin();
            std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(pdo.entries.size()) - 1));
            return *it;
        };
        auto pick_out_of_pdo = [&]() -> const DataObject& {
            for (int tries = 0; tries < 64; ++tries) {
                const auto& obj = world.catalog[static_cast<std::size_t>(
                    rng.uniform_int(0, cfg.n_objects - 1))];
                if (!pdo.contains_object(obj.id)) return obj;
            }
            return world.catalog.front();
        };

        // History: unknown agents have none; everyone else accrues a few
        // accesses per interval with class-conditional leak and breach rates.
        if (!unknown) {
            const double leak_p = malicious ? cfg.leak_prob_malicious : cfg.leak_prob_normal;
            const double breach_p = malicious ? cfg.breach_prob_malicious : cfg.breach_prob_normal;
            for (std::int64_t t = 0; t < cfg.intervals; ++t) {
                const std::int64_t n_events = rng.uniform_int(2, 6);
                for (std::int64_t e = 0; e < n_events; ++e) {
                    AccessEvent ev;
                    ev.agent_id = profile.agent_id;
                    ev.time = t;
                    if (rng.bernoulli(breach_p) || pdo.entries.empty()) {
                        ev.object_id = pick_out_of_pdo().id;
                        ev.authorized = false;
                    } else {
                        ev.object_id = pick_in_pdo().second;
                        ev.authorized = true;
                    }
                    ev.leaked = rng.bernoulli(leak_p);
                    profile.history.push_back(ev);
                }
            }
        }

        // Pending request for the next evaluation window.
        DataAccessRequest request;
        request.agent_id = profile.agent_id;
        request.window = request_window;
        const double req_breach_p =
            malicious ? cfg.request_breach_prob_malicious : cfg.request_breach_prob_normal;
        const std::int64_t n_requested = rng.uniform_int(1, 4);
        std::set<ObjectId> seen;
        for (std::int64_t r = 0; r < n_requested; ++r) {
            RequestedObject ro;
            if ((rng.bernoulli(req_breach_p) || pdo.entries.empty())) {
                const auto& obj = pick_out_of_pdo();
                ro.category = obj.category;
                ro.object_id = obj.id;
            } else {
                const auto& [cat, oid] = pick_in_pdo();
                ro.category = cat;
                ro.object_id = oid;
            }
            if (seen.insert(ro.object_id).second) request.objects.push_back(std::move(ro));
        }

        world.events.insert(world.events.end(), profile.history.begin(), profile.history.end());
        world.requests.push_back(std::move(request));
        world.pdos.push_back(std::move(pdo));
        world.profiles.push_back(std::move(profile));
    }

    return world;
}

// Runs the rule pipeline over a whole population and assembles the raw
// (un-normalized) feature dataset, one row per agent request.
struct AssessedPopulation {
    Dataset dataset;
    std::vector<SecurityAssessment> assessments;
};

inline AssessedPopulation build_feature_dataset(std::span<const AgentProfile> profiles,
                                                std::span<const PermissibleSet> pdos,
                                                std::span<const DataAccessRequest> requests,
                                                const Thresholds& thr,
                                                const FeatureSchema& schema) {
    if (profiles.size() != pdos.size() || profiles.size() != requests.size()) {
        throw std::invalid_argument("profiles, pdos and requests must be aligned");
    }
    AssessedPopulation out;
    out.dataset.feature_names = schema.feature_names();
    out.dataset.n_cols = schema.width();
    out.dataset.n_rows = profiles.size();
    out.dataset.values.reserve(profiles.size() * schema.width());
    out.assessments.reserve(profiles.size());

    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const SecurityAssessment a = assess(requests[i], profiles[i].history, pdos[i], thr);
        const FeatureVector fv = schema.assemble(profiles[i], a);
        out.dataset.values.insert(out.dataset.values.end(), fv.values.begin(), fv.values.end());
        out.dataset.row_ids.push_back(fv.agent_id);
        out.dataset.labels.push_back(fv.label.value_or(-1));
        out.assessments.push_back(a);
    }
    return out;
}

} // namespace agentgate
