#pragma once

// Agent eligibility estimation: the rule engine that turns an agent's
// request, live details and access history into binary security flags, an
// aggregated score and an intent verdict, plus the fixed-order feature
// vector handed to the classifier.
//
// Flag conventions, fixed across the whole toolkit:
//   0 = clear (access allowed by that parameter), 1 = flagged.
//   Every threshold comparison is strict: a flag stays clear only while
//   the threshold exceeds the measured statistic.

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agentgate/core.hpp"

namespace agentgate {

struct Thresholds {
    double thr_attack = 0.1;   // leak ratio above which access is flagged
    std::int64_t thr_freq = 3; // unauthorized-attempt count ceiling

    void validate() const {
        if (thr_attack < 0.0 || thr_attack > 1.0) {
            throw std::invalid_argument("thr_attack must lie in [0,1]");
        }
        if (thr_freq < 0) {
            throw std::invalid_argument("thr_freq must be non-negative");
        }
    }
};

// The set of (category, object) pairs an agent is entitled to access.
struct PermissibleSet {
    AgentId agent_id;
    std::set<std::pair<Category, ObjectId>> entries;

    bool contains(const Category& c, const ObjectId& o) const {
        return entries.count({c, o}) > 0;
    }
    bool contains_object(const ObjectId& o) const {
        for (const auto& [cat, obj] : entries) {
            if (obj == o) return true;
        }
        return false;
    }
};

struct SecurityAssessment {
    int sp_hist = 0;   // 1 when the agent has no recorded history
    int sp_pdo = 0;    // 1 when the request reaches outside the permissible set
    int sp_acd = 0;    // 1 when the prior-window leak ratio breaches thr_attack
    int sp_pdint = 0;  // 1 when prior-window unauthorized attempts breach thr_freq
    std::vector<int> extra_flags; // room for additional parameters
    int sp_total = 0;  // sum of all flags
    int intent = 0;    // 0 non-malicious, 1 malicious

    std::int64_t leak_count = 0; // leak events in the prior window
    double acd = 0.0;            // leak_count / gross accesses in the prior window
    std::int64_t pd_int = 0;     // unauthorized attempts in the prior window
};

// Per-(agent, object) risk information attached to a scored request.
struct RiskRecord {
    AgentId agent_id;
    ObjectId object_id;
    Category category;
    int intent = 0;
    TimeWindow window;
};

struct FeatureVector {
    AgentId agent_id;
    std::vector<double> values;
    std::optional<int> label;
};

// Leak events (data later found leaked) inside the prior window.
inline std::int64_t compute_leak_count(std::span<const AccessEvent> history, const TimeWindow& prev_window) {
    require_valid(prev_window);
    std::int64_t count = 0;
    for (const auto& ev : history) {
        if (ev.leaked && prev_window.contains(ev.time)) ++count;
    }
    return count;
}

// Leak ratio over the prior window. An agent with no accesses carries no
// attack evidence, so gross == 0 yields 0.
inline double compute_attack_component(std::int64_t leak_count, std::int64_t gross) {
    if (leak_count < 0 || gross < 0 || leak_count > gross) {
        throw std::invalid_argument("invalid leak statistics: leak_count must lie in [0, gross]");
    }
    if (gross == 0) return 0.0;
    return static_cast<double>(leak_count) / static_cast<double>(gross);
}

inline int score_attack_component(double acd, const Thresholds& thr) {
    return thr.thr_attack > acd ? 0 : 1;
}

// Count of accesses inside the prior window that fall outside the agent's
// permissible set; repeated attempts on the same object all count.
inline std::int64_t compute_breach_frequency(std::span<const AccessEvent> history,
                                             const PermissibleSet& pdo,
                                             const TimeWindow& prev_window) {
    require_valid(prev_window);
    std::int64_t count = 0;
    for (const auto& ev : history) {
        if (prev_window.contains(ev.time) && !pdo.contains_object(ev.object_id)) ++count;
    }
    return count;
}

inline int score_breach_frequency(std::int64_t pd_int, const Thresholds& thr) {
    if (pd_int < 0) throw std::invalid_argument("pd_int must be non-negative");
    return thr.thr_freq > pd_int ? 0 : 1;
}

// Known (0) when any history exists, unknown (1) otherwise.
inline int score_history(std::span<const AccessEvent> history) {
    return !history.empty() ? 0 : 1;
}

// Union of per-category object grants. Categories must come from the
// declared category vocabulary.
inline PermissibleSet build_permissible_set(
    AgentId agent_id,
    std::span<const std::pair<Category, std::vector<ObjectId>>> grants,
    std::span<const Category> declared_categories) {
    PermissibleSet pdo;
    pdo.agent_id = std::move(agent_id);
    for (const auto& [category, objects] : grants) {
        if (std::find(declared_categories.begin(), declared_categories.end(), category) ==
            declared_categories.end()) {
            throw std::invalid_argument("unknown category in grant: " + category);
        }
        for (const auto& obj : objects) {
            pdo.entries.insert({category, obj});
        }
    }
    return pdo;
}

// Authorized (0) only when every requested pair lies inside the set.
inline int score_authorization(const DataAccessRequest& request, const PermissibleSet& pdo) {
    validate(request);
    for (const auto& ro : request.objects) {
        if (!pdo.contains(ro.category, ro.object_id)) return 1;
    }
    return 0;
}

inline int aggregate_security(int sp_hist, int sp_pdo, int sp_acd, int sp_pdint,
                              std::span<const int> extra_flags = {}) {
    for (int f : {sp_hist, sp_pdo, sp_acd, sp_pdint}) {
        if (f != 0 && f != 1) throw std::invalid_argument("security flags must be 0 or 1");
    }
    int total = sp_hist + sp_pdo + sp_acd + sp_pdint;
    for (int f : extra_flags) {
        if (f != 0 && f != 1) throw std::invalid_argument("security flags must be 0 or 1");
        total += f;
    }
    return total;
}

inline int classify_intent(int sp_total) {
    if (sp_total < 0) throw std::invalid_argument("aggregated score must be non-negative");
    return sp_total < 1 ? 0 : 1;
}

inline std::vector<RiskRecord> emit_risk_records(const DataAccessRequest& request, int intent) {
    validate(request);
    if (intent != 0 && intent != 1) throw std::invalid_argument("intent must be 0 or 1");
    std::vector<RiskRecord> records;
    records.reserve(request.objects.size());
    for (const auto& ro : request.objects) {
        records.push_back({request.agent_id, ro.object_id, ro.category, intent, request.window});
    }
    return records;
}

// Full rule pipeline for one request: prior-window statistics, the four
// flags, the aggregate and the intent verdict. When the request window
// starts at the epoch there is no prior window and the windowed statistics
// are all zero.
inline SecurityAssessment assess(const DataAccessRequest& request,
                                 std::span<const AccessEvent> history,
                                 const PermissibleSet& pdo,
                                 const Thresholds& thr) {
    validate(request);
    thr.validate();

    SecurityAssessment a;
    if (auto prev = previous_window(request.window)) {
        a.leak_count = compute_leak_count(history, *prev);
        const std::int64_t gross = gross_access_count(history, *prev);
        a.acd = compute_attack_component(a.leak_count, gross);
        a.pd_int = compute_breach_frequency(history, pdo, *prev);
    }
    a.sp_hist = score_history(history);
    a.sp_pdo = score_authorization(request, pdo);
    a.sp_acd = score_attack_component(a.acd, thr);
    a.sp_pdint = score_breach_frequency(a.pd_int, thr);
    a.sp_total = aggregate_security(a.sp_hist, a.sp_pdo, a.sp_acd, a.sp_pdint, a.extra_flags);
    a.intent = classify_intent(a.sp_total);
    return a;
}

// Categorical vocabularies frozen at training time. Feature order is part
// of the model contract:
//   profession one-hot | request_count | request_type one-hot | data_limit |
//   leak_count | acd | pd_int | sp_hist | sp_pdo | sp_acd | sp_pdint | sp_total
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<std::string> professions, std::vector<std::string> request_types)
        : professions_(std::move(professions)), request_types_(std::move(request_types)) {
        if (professions_.empty() || request_types_.empty()) {
            throw std::invalid_argument("feature schema vocabularies must be non-empty");
        }
    }

    static FeatureSchema from_profiles(std::span<const AgentProfile> profiles) {
        std::set<std::string> prof, rtype;
        for (const auto& p : profiles) {
            prof.insert(p.profession);
            rtype.insert(p.live.request_type);
        }
        return FeatureSchema({prof.begin(), prof.end()}, {rtype.begin(), rtype.end()});
    }

    // Rebuilds the schema from a persisted feature-name list.
    static FeatureSchema from_feature_names(std::span<const std::string> names) {
        std::vector<std::string> prof, rtype;
        for (const auto& n : names) {
            if (n.rfind("profession=", 0) == 0) prof.push_back(n.substr(11));
            if (n.rfind("request_type=", 0) == 0) rtype.push_back(n.substr(13));
        }
        return FeatureSchema(std::move(prof), std::move(rtype));
    }

    const std::vector<std::string>& professions() const { return professions_; }
    const std::vector<std::string>& request_types() const { return request_types_; }

    std::size_t width() const { return professions_.size() + request_types_.size() + 10; }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names;
        names.reserve(width());
        for (const auto& p : professions_) names.push_back("profession=" + p);
        names.push_back("request_count");
        for (const auto& r : request_types_) names.push_back("request_type=" + r);
        names.push_back("data_limit");
        names.push_back("leak_count");
        names.push_back("acd");
        names.push_back("pd_int");
        names.push_back("sp_hist");
        names.push_back("sp_pdo");
        names.push_back("sp_acd");
        names.push_back("sp_pdint");
        names.push_back("sp_total");
        return names;
    }

    FeatureVector assemble(const AgentProfile& profile, const SecurityAssessment& a) const {
        FeatureVector fv;
        fv.agent_id = profile.agent_id;
        fv.label = profile.true_class;
        fv.values.reserve(width());
        one_hot(fv.values, professions_, profile.profession, "profession");
        fv.values.push_back(static_cast<double>(profile.live.request_count));
        one_hot(fv.values, request_types_, profile.live.request_type, "request_type");
        fv.values.push_back(profile.live.data_limit);
        fv.values.push_back(static_cast<double>(a.leak_count));
        fv.values.push_back(a.acd);
        fv.values.push_back(static_cast<double>(a.pd_int));
        fv.values.push_back(static_cast<double>(a.sp_hist));
        fv.values.push_back(static_cast<double>(a.sp_pdo));
        fv.values.push_back(static_cast<double>(a.sp_acd));
        fv.values.push_back(static_cast<double>(a.sp_pdint));
        fv.values.push_back(static_cast<double>(a.sp_total));
        return fv;
    }

private:
    static void one_hot(std::vector<double>& out, const std::vector<std::string>& vocab,
                        const std::string& level, const char* what) {
        std::size_t hit = vocab.size();
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            if (vocab[i] == level) hit = i;
        }
        if (hit == vocab.size()) {
            throw std::invalid_argument(std::string(what) + " level not in training vocabulary: " + level);
        }
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            out.push_back(i == hit ? 1.0 : 0.0);
        }
    }

    std::vector<std::string> professions_;
    std::vector<std::string> request_types_;
};

} // namespace agentgate
