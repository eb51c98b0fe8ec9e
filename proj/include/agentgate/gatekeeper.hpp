#pragma once

// The operational loop: per interval, assess each requesting agent, obtain
// the model's intent prediction, grant or deny the requested objects,
// append the outcome to the knowledge store and periodically retrain.
//
// Fail-closed combination rule: a request is granted only when BOTH the
// rule verdict is non-malicious (aggregate score 0) AND the model predicts
// the non-malicious class. A model prediction of the unknown class also
// denies, and is logged distinctly for operator review.

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "agentgate/assessment.hpp"
#include "agentgate/dataset.hpp"
#include "agentgate/gbdt.hpp"

namespace agentgate {

struct AccessDecision {
    AgentId agent_id;
    TimeWindow window;
    std::vector<RequestedObject> requested_objects;
    bool granted = false;
    int rule_intent = 0;  // Eq-style aggregate verdict: 0/1
    int model_intent = 0; // predicted class: 0/1/2
    std::vector<RequestedObject> granted_objects; // equals requested when granted, else empty
};

struct KnowledgeRecord {
    std::uint64_t seq = 0;
    TimeIndex interval = 0;
    FeatureVector features;
    SecurityAssessment assessment;
    bool granted = false;
    int rule_intent = 0;
    int model_intent = 0;
    std::optional<int> outcome_label; // ground truth when later known
};

// Append-only store of per-decision records, the training source for
// periodic retraining. Appends are batched per interval and intervals must
// strictly advance, which makes replaying the same interval a detectable
// error rather than silent duplication.
class KnowledgeStore {
public:
    const std::vector<KnowledgeRecord>& records() const { return records_; }
    std::uint64_t next_seq() const { return next_seq_; }
    TimeIndex last_interval() const { return last_interval_; }

    std::span<const KnowledgeRecord> append_interval(TimeIndex interval,
                                                     std::vector<KnowledgeRecord> batch) {
        if (interval <= last_interval_) {
            throw std::invalid_argument("knowledge store: interval " + std::to_string(interval) +
                                        " already recorded (sequence check)");
        }
        const std::size_t first = records_.size();
        for (auto& rec : batch) {
            rec.seq = next_seq_++;
            rec.interval = interval;
            records_.push_back(std::move(rec));
        }
        last_interval_ = interval;
        return {records_.data() + first, records_.size() - first};
    }

    std::size_t labeled_count() const {
        std::size_t n = 0;
        for (const auto& r : records_) n += r.outcome_label.has_value() ? 1 : 0;
        return n;
    }

    // Reconstructs the training matrix from the stored feature snapshots.
    Dataset to_dataset(const std::vector<std::string>& feature_names) const {
        Dataset d;
        d.feature_names = feature_names;
        d.n_cols = feature_names.size();
        for (const auto& r : records_) {
            if (!r.outcome_label) continue;
            if (r.features.values.size() != d.n_cols) {
                throw std::invalid_argument("knowledge record width does not match schema");
            }
            d.values.insert(d.values.end(), r.features.values.begin(), r.features.values.end());
            d.labels.push_back(*r.outcome_label);
            d.row_ids.push_back(r.features.agent_id);
            ++d.n_rows;
        }
        return d;
    }

private:
    std::vector<KnowledgeRecord> records_;
    std::uint64_t next_seq_ = 0;
    TimeIndex last_interval_ = -1;
};

// Mutable world state owned by the gatekeeper: profiles hold the append-only
// histories; the permissible sets are keyed by agent.
struct GateState {
    std::map<AgentId, AgentProfile> profiles;
    std::map<AgentId, PermissibleSet> pdos;

    static GateState from_population(std::span<const AgentProfile> profiles,
                                     std::span<const PermissibleSet> pdos) {
        GateState s;
        for (const auto& p : profiles) s.profiles[p.agent_id] = p;
        for (const auto& pdo : pdos) s.pdos[pdo.agent_id] = pdo;
        return s;
    }
};

struct IntervalOutcome {
    std::vector<AccessDecision> decisions;
    std::vector<FeatureVector> features;       // aligned with decisions
    std::vector<SecurityAssessment> assessments; // aligned with decisions
};

// Scores one interval's worth of requests. Pure with respect to `state`:
// histories are only extended later through record-keeping, so processing
// the same interval twice from the same state yields identical decisions.
// An agent id without recorded state is treated as an empty-history agent
// with an empty permissible set.
inline IntervalOutcome process_interval(std::span<const DataAccessRequest> requests,
                                        const GateState& state, const BoostedEnsemble& model,
                                        const Thresholds& thresholds, const FeatureSchema& schema) {
    IntervalOutcome out;
    out.decisions.reserve(requests.size());
    out.features.reserve(requests.size());
    out.assessments.reserve(requests.size());

    static const std::vector<AccessEvent> kNoHistory;

    for (const auto& request : requests) {
        validate(request);

        const auto profile_it = state.profiles.find(request.agent_id);
        const auto pdo_it = state.pdos.find(request.agent_id);
        std::span<const AccessEvent> history =
            profile_it != state.profiles.end() ? profile_it->second.history : kNoHistory;
        PermissibleSet empty_pdo;
        empty_pdo.agent_id = request.agent_id;
        const PermissibleSet& pdo = pdo_it != state.pdos.end() ? pdo_it->second : empty_pdo;

        const SecurityAssessment assessment = assess(request, history, pdo, thresholds);

        // A first-contact agent still gets a deterministic feature row:
        // default levels stand in for the missing live details, and the
        // rule path (history flag set) already forces a denial.
        AgentProfile fallback;
        if (profile_it == state.profiles.end()) {
            fallback.agent_id = request.agent_id;
            fallback.profession = schema.professions().front();
            fallback.live.request_type = schema.request_types().front();
        }
        const AgentProfile& profile =
            profile_it != state.profiles.end() ? profile_it->second : fallback;

        const FeatureVector features = schema.assemble(profile, assessment);
        const Prediction prediction = model.predict(features.values);

        AccessDecision decision;
        decision.agent_id = request.agent_id;
        decision.window = request.window;
        decision.requested_objects = request.objects;
        decision.rule_intent = assessment.intent;
        decision.model_intent = prediction.predicted_class;
        decision.granted =
            assessment.intent == 0 && prediction.predicted_class == kClassNonMalicious;
        if (decision.granted) decision.granted_objects = request.objects;

        out.decisions.push_back(std::move(decision));
        out.features.push_back(features);
        out.assessments.push_back(assessment);
    }

    // Postcondition sweep: nothing outside a permissible set is ever granted.
    for (const auto& d : out.decisions) {
        for (const auto& ro : d.granted_objects) {
            const auto pdo_it = state.pdos.find(d.agent_id);
            if (pdo_it == state.pdos.end() || !pdo_it->second.contains(ro.category, ro.object_id)) {
                throw std::logic_error("granted object outside the permissible set");
            }
        }
    }
    return out;
}

// Turns one interval's outcome into knowledge records and appends them
// atomically. `labels` carries the ground truth per decision when known
// (e.g. synthetic data); pass an empty span when unlabeled.
inline std::span<const KnowledgeRecord> record(KnowledgeStore& store, TimeIndex interval,
                                               const IntervalOutcome& outcome,
                                               std::span<const std::optional<int>> labels = {}) {
    if (!labels.empty() && labels.size() != outcome.decisions.size()) {
        throw std::invalid_argument("labels must align with decisions");
    }
    std::vector<KnowledgeRecord> batch;
    batch.reserve(outcome.decisions.size());
    for (std::size_t i = 0; i < outcome.decisions.size(); ++i) {
        KnowledgeRecord rec;
        rec.features = outcome.features[i];
        rec.assessment = outcome.assessments[i];
        rec.granted = outcome.decisions[i].granted;
        rec.rule_intent = outcome.decisions[i].rule_intent;
        rec.model_intent = outcome.decisions[i].model_intent;
        rec.outcome_label = labels.empty() ? outcome.features[i].label : labels[i];
        batch.push_back(std::move(rec));
    }
    return store.append_interval(interval, std::move(batch));
}

enum class RetrainStatus { retrained, skipped_insufficient_rows, skipped_single_class };

struct RetrainResult {
    RetrainStatus status = RetrainStatus::skipped_insufficient_rows;
    std::optional<BoostedEnsemble> model;
};

// Rebuilds the classifier from every labeled knowledge record. When the
// store cannot support training (too few labeled rows, or a single class)
// the current model stays in service and the skip is reported.
inline RetrainResult retrain(const KnowledgeStore& store,
                             const std::vector<std::string>& feature_names,
                             const TrainConfig& config, std::size_t min_rows = 50) {
    RetrainResult result;
    Dataset data = store.to_dataset(feature_names);
    if (data.n_rows < min_rows) {
        result.status = RetrainStatus::skipped_insufficient_rows;
        return result;
    }
    if (data.n_classes() < 2) {
        result.status = RetrainStatus::skipped_single_class;
        return result;
    }
    bool single = true;
    for (std::size_t i = 1; i < data.n_rows && single; ++i) {
        single = data.labels[i] == data.labels[0];
    }
    if (single) {
        result.status = RetrainStatus::skipped_single_class;
        return result;
    }
    result.model = train_model(data, config);
    result.status = RetrainStatus::retrained;
    return result;
}

} // namespace agentgate
