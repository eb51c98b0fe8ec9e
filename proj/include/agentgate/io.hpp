#pragma once

// Delimited-text persistence for every file format the toolkit reads or
// writes: event logs, agent profiles, permissible sets, object catalogs,
// pending requests, feature datasets, assessments, decision logs and the
// knowledge log. All files are UTF-8 with LF line endings; fields never
// contain the delimiter (ids and vocabulary levels are single tokens,
// enforced on write). Numeric fields use round-trip formatting so rereads
// are bit-exact.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "agentgate/assessment.hpp"
#include "agentgate/core.hpp"
#include "agentgate/dataset.hpp"
#include "agentgate/gatekeeper.hpp"
#include "agentgate/metrics.hpp"

namespace agentgate {

struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open file: " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // binary: keep LF on every platform
    if (!out) throw FileError("cannot write file: " + path.string());
    return out;
}

inline std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.emplace_back();
    return fields;
}

inline const std::string& check_token(const std::string& s, const char* what) {
    if (s.empty()) throw ParseError(std::string(what) + " must be non-empty");
    if (s.find_first_of(",= \t\r\n") != std::string::npos) {
        throw ParseError(std::string(what) + " contains a delimiter character: '" + s + "'");
    }
    return s;
}

// Feature names carry '=' (one-hot levels), so only the column and record
// separators are banned.
inline const std::string& check_field(const std::string& s, const char* what) {
    if (s.empty()) throw ParseError(std::string(what) + " must be non-empty");
    if (s.find_first_of(", \t\r\n") != std::string::npos) {
        throw ParseError(std::string(what) + " contains a delimiter character: '" + s + "'");
    }
    return s;
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError("");
        return v;
    } catch (...) {
        throw ParseError(std::string("bad numeric value for ") + what + ": '" + s + "'");
    }
}

inline std::int64_t parse_int(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw ParseError("");
        return v;
    } catch (...) {
        throw ParseError(std::string("bad integer value for ") + what + ": '" + s + "'");
    }
}

inline bool parse_bool01(const std::string& s, const char* what) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw ParseError(std::string(what) + " must be 0 or 1, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Access-event log: header + one row per event.
// Columns: agent_id,object_id,time,leak_status,authorized
// ---------------------------------------------------------------------------

inline constexpr const char* kEventHeader = "agent_id,object_id,time,leak_status,authorized";

inline void write_events(std::ostream& os, std::span<const AccessEvent> events) {
    os << kEventHeader << "\n";
    for (const auto& ev : events) {
        os << check_token(ev.agent_id, "agent_id") << "," << check_token(ev.object_id, "object_id")
           << "," << ev.time << "," << (ev.leaked ? 1 : 0) << "," << (ev.authorized ? 1 : 0)
           << "\n";
    }
}

inline std::vector<AccessEvent> read_events(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kEventHeader) {
        throw ParseError("event log: missing or wrong header");
    }
    std::vector<AccessEvent> events;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ParseError("event log: expected 5 columns, got line '" + line + "'");
        AccessEvent ev;
        ev.agent_id = f[0];
        ev.object_id = f[1];
        ev.time = parse_int(f[2], "time");
        if (ev.time < 0) throw ParseError("event log: negative time index");
        ev.leaked = parse_bool01(f[3], "leak_status");
        ev.authorized = parse_bool01(f[4], "authorized");
        events.push_back(std::move(ev));
    }
    return events;
}

// ---------------------------------------------------------------------------
// Agent profiles: one self-describing record per line, space-separated
// key=value pairs. History is carried by the event log, not here.
// ---------------------------------------------------------------------------

inline void write_profiles(std::ostream& os, std::span<const AgentProfile> profiles) {
    for (const auto& p : profiles) {
        os << "agent_id=" << check_token(p.agent_id, "agent_id")
           << " profession=" << check_token(p.profession, "profession")
           << " request_count=" << p.live.request_count
           << " request_type=" << check_token(p.live.request_type, "request_type")
           << " data_limit=" << format_double(p.live.data_limit);
        if (p.true_class) os << " true_class=" << *p.true_class;
        os << "\n";
    }
}

inline std::vector<AgentProfile> read_profiles(std::istream& is) {
    std::vector<AgentProfile> profiles;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        AgentProfile p;
        std::istringstream ss(line);
        std::string pair;
        while (ss >> pair) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) throw ParseError("profile line: expected key=value, got '" + pair + "'");
            const std::string key = pair.substr(0, eq);
            const std::string value = pair.substr(eq + 1);
            if (key == "agent_id") {
                p.agent_id = value;
            } else if (key == "profession") {
                p.profession = value;
            } else if (key == "request_count") {
                p.live.request_count = parse_int(value, "request_count");
            } else if (key == "request_type") {
                p.live.request_type = value;
            } else if (key == "data_limit") {
                p.live.data_limit = parse_double(value, "data_limit");
            } else if (key == "true_class") {
                const auto c = parse_int(value, "true_class");
                if (c < 0 || c > 2) throw ParseError("true_class must be 0, 1 or 2");
                p.true_class = static_cast<int>(c);
            } else {
                throw ParseError("profile line: unknown key '" + key + "'");
            }
        }
        if (p.agent_id.empty()) throw ParseError("profile line missing agent_id");
        profiles.push_back(std::move(p));
    }
    return profiles;
}

// Attaches events to their owners' history, keeping time order.
inline void attach_histories(std::vector<AgentProfile>& profiles,
                             std::span<const AccessEvent> events) {
    std::map<AgentId, AgentProfile*> by_id;
    for (auto& p : profiles) by_id[p.agent_id] = &p;
    for (const auto& ev : events) {
        const auto it = by_id.find(ev.agent_id);
        if (it == by_id.end()) throw ParseError("event for unknown agent '" + ev.agent_id + "'");
        it->second->history.push_back(ev);
    }
    for (auto& p : profiles) {
        std::stable_sort(p.history.begin(), p.history.end(),
                         [](const AccessEvent& a, const AccessEvent& b) { return a.time < b.time; });
    }
}

// ---------------------------------------------------------------------------
// Permissible sets: agent_id,category,object_id rows.
// ---------------------------------------------------------------------------

inline constexpr const char* kPdoHeader = "agent_id,category,object_id";

inline void write_pdos(std::ostream& os, std::span<const PermissibleSet> pdos) {
    os << kPdoHeader << "\n";
    for (const auto& pdo : pdos) {
        for (const auto& [cat, obj] : pdo.entries) {
            os << check_token(pdo.agent_id, "agent_id") << "," << check_token(cat, "category") << ","
               << check_token(obj, "object_id") << "\n";
        }
        if (pdo.entries.empty()) {
            // An agent with an empty set still needs a row to exist in the
            // file; the empty object field marks it.
            os << check_token(pdo.agent_id, "agent_id") << ",,\n";
        }
    }
}

inline std::vector<PermissibleSet> read_pdos(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kPdoHeader) {
        throw ParseError("pdo file: missing or wrong header");
    }
    std::vector<PermissibleSet> pdos;
    std::map<AgentId, std::size_t> index;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw ParseError("pdo file: expected 3 columns, got line '" + line + "'");
        auto [it, inserted] = index.try_emplace(f[0], pdos.size());
        if (inserted) {
            PermissibleSet p;
            p.agent_id = f[0];
            pdos.push_back(std::move(p));
        }
        if (!f[1].empty() && !f[2].empty()) {
            pdos[it->second].entries.insert({f[1], f[2]});
        }
    }
    return pdos;
}

// ---------------------------------------------------------------------------
// Object catalog: id,category,sensitive rows.
// ---------------------------------------------------------------------------

inline constexpr const char* kObjectHeader = "object_id,category,sensitive";

inline void write_objects(std::ostream& os, std::span<const DataObject> catalog) {
    os << kObjectHeader << "\n";
    for (const auto& obj : catalog) {
        os << check_token(obj.id, "object_id") << "," << check_token(obj.category, "category") << ","
           << (obj.sensitive ? 1 : 0) << "\n";
    }
}

inline std::vector<DataObject> read_objects(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kObjectHeader) {
        throw ParseError("object catalog: missing or wrong header");
    }
    std::vector<DataObject> catalog;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw ParseError("object catalog: expected 3 columns");
        catalog.push_back({f[0], f[1], parse_bool01(f[2], "sensitive")});
    }
    return catalog;
}

// ---------------------------------------------------------------------------
// Pending requests: one row per requested object.
// ---------------------------------------------------------------------------

inline constexpr const char* kRequestHeader = "agent_id,category,object_id,window_start,window_end";

inline void write_requests(std::ostream& os, std::span<const DataAccessRequest> requests) {
    os << kRequestHeader << "\n";
    for (const auto& r : requests) {
        for (const auto& ro : r.objects) {
            os << check_token(r.agent_id, "agent_id") << "," << check_token(ro.category, "category")
               << "," << check_token(ro.object_id, "object_id") << "," << r.window.start << ","
               << r.window.end << "\n";
        }
    }
}

inline std::vector<DataAccessRequest> read_requests(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kRequestHeader) {
        throw ParseError("request file: missing or wrong header");
    }
    std::vector<DataAccessRequest> requests;
    std::map<AgentId, std::size_t> index;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ParseError("request file: expected 5 columns");
        TimeWindow w{parse_int(f[3], "window_start"), parse_int(f[4], "window_end")};
        auto [it, inserted] = index.try_emplace(f[0], requests.size());
        if (inserted) {
            DataAccessRequest r;
            r.agent_id = f[0];
            r.window = w;
            requests.push_back(std::move(r));
        }
        DataAccessRequest& r = requests[it->second];
        if (r.window.start != w.start || r.window.end != w.end) {
            throw ParseError("request file: inconsistent window for agent '" + f[0] + "'");
        }
        r.objects.push_back({f[1], f[2]});
    }
    for (const auto& r : requests) validate(r);
    return requests;
}

// ---------------------------------------------------------------------------
// Feature datasets: header of agent_id, feature names and label; one row
// per agent. A missing label is an empty field.
// ---------------------------------------------------------------------------

inline void write_dataset(std::ostream& os, const Dataset& d) {
    os << "agent_id";
    for (const auto& name : d.feature_names) os << "," << check_field(name, "feature name");
    os << ",label\n";
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        os << (d.row_ids.empty() ? "row" + std::to_string(i) : d.row_ids[i]);
        for (const double v : d.row(i)) os << "," << format_double(v);
        os << ",";
        if (!d.labels.empty() && d.labels[i] >= 0) os << d.labels[i];
        os << "\n";
    }
}

inline Dataset read_dataset(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("dataset file: empty");
    const auto header = split(line, ',');
    if (header.size() < 3 || header.front() != "agent_id" || header.back() != "label") {
        throw ParseError("dataset file: header must be agent_id,<features...>,label");
    }
    Dataset d;
    d.feature_names.assign(header.begin() + 1, header.end() - 1);
    d.n_cols = d.feature_names.size();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != header.size()) {
            throw ParseError("dataset file: row width does not match header");
        }
        d.row_ids.push_back(f.front());
        for (std::size_t j = 1; j + 1 < f.size(); ++j) {
            d.values.push_back(parse_double(f[j], "feature value"));
        }
        d.labels.push_back(f.back().empty() ? -1 : static_cast<int>(parse_int(f.back(), "label")));
        ++d.n_rows;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Assessment export: one delimited row per agent per window.
// ---------------------------------------------------------------------------

inline constexpr const char* kAssessmentHeader =
    "agent_id,window_start,window_end,leak_count,acd,pd_int,sp_hist,sp_pdo,sp_acd,sp_pdint,"
    "sp_total,intent";

inline void write_assessments(std::ostream& os, std::span<const AgentId> agent_ids,
                              std::span<const DataAccessRequest> requests,
                              std::span<const SecurityAssessment> assessments) {
    if (agent_ids.size() != assessments.size() || requests.size() != assessments.size()) {
        throw std::invalid_argument("assessment export inputs must be aligned");
    }
    os << kAssessmentHeader << "\n";
    for (std::size_t i = 0; i < assessments.size(); ++i) {
        const auto& a = assessments[i];
        os << check_token(agent_ids[i], "agent_id") << "," << requests[i].window.start << ","
           << requests[i].window.end << "," << a.leak_count << "," << format_double(a.acd) << ","
           << a.pd_int << "," << a.sp_hist << "," << a.sp_pdo << "," << a.sp_acd << ","
           << a.sp_pdint << "," << a.sp_total << "," << a.intent << "\n";
    }
}

// ---------------------------------------------------------------------------
// Normalization stats: key/value text, one feature per line.
// ---------------------------------------------------------------------------

inline void write_normalization(std::ostream& os, std::span<const std::string> names,
                                const NormalizationStats& stats) {
    if (names.size() != stats.width()) {
        throw std::invalid_argument("normalization stats width does not match names");
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        os << names[j] << " = " << format_double(stats.min[j]) << " " << format_double(stats.max[j])
           << "\n";
    }
}

// ---------------------------------------------------------------------------
// Decision log: one row per decision.
// ---------------------------------------------------------------------------

inline constexpr const char* kDecisionHeader =
    "interval,agent_id,window_start,window_end,requested,rule_intent,model_intent,verdict,granted";

inline void write_decision_row(std::ostream& os, TimeIndex interval, const AccessDecision& d) {
    std::string requested, granted;
    for (const auto& ro : d.requested_objects) {
        if (!requested.empty()) requested += '|';
        requested += ro.object_id;
    }
    for (const auto& ro : d.granted_objects) {
        if (!granted.empty()) granted += '|';
        granted += ro.object_id;
    }
    os << interval << "," << check_token(d.agent_id, "agent_id") << "," << d.window.start << ","
       << d.window.end << "," << requested << "," << d.rule_intent << "," << d.model_intent << ","
       << (d.granted ? "granted" : "denied") << "," << granted << "\n";
}

// ---------------------------------------------------------------------------
// Knowledge log: versioned header, then one record per line:
// seq interval agent_id granted rule_intent model_intent outcome_label
// followed by the assessment scalars and the raw feature values.
// ---------------------------------------------------------------------------

inline constexpr const char* kKnowledgeMagic = "agentgate_knowledge";
inline constexpr int kKnowledgeVersion = 1;

inline void write_knowledge_log(std::ostream& os, const KnowledgeStore& store,
                                std::span<const std::string> feature_names) {
    os << kKnowledgeMagic << " v" << kKnowledgeVersion << " width " << feature_names.size() << "\n";
    for (const auto& r : store.records()) {
        os << r.seq << " " << r.interval << " " << check_token(r.features.agent_id, "agent_id")
           << " " << (r.granted ? 1 : 0) << " " << r.rule_intent << " " << r.model_intent << " "
           << (r.outcome_label ? std::to_string(*r.outcome_label) : std::string("-")) << " "
           << r.assessment.leak_count << " " << format_double(r.assessment.acd) << " "
           << r.assessment.pd_int << " " << r.assessment.sp_hist << " " << r.assessment.sp_pdo
           << " " << r.assessment.sp_acd << " " << r.assessment.sp_pdint << " "
           << r.assessment.sp_total << " " << r.assessment.intent;
        for (const double v : r.features.values) os << " " << format_double(v);
        os << "\n";
    }
}

inline KnowledgeStore read_knowledge_log(std::istream& is) {
    std::string magic, version, width_key;
    std::size_t width = 0;
    if (!(is >> magic >> version >> width_key >> width) || magic != kKnowledgeMagic ||
        width_key != "width") {
        throw ParseError("knowledge log: bad header");
    }
    if (version != "v" + std::to_string(kKnowledgeVersion)) {
        throw ParseError("knowledge log: unsupported version " + version);
    }

    KnowledgeStore store;
    std::vector<KnowledgeRecord> batch;
    TimeIndex batch_interval = -1;
    std::uint64_t seq = 0;
    TimeIndex interval = 0;

    auto flush = [&]() {
        if (!batch.empty()) {
            store.append_interval(batch_interval, std::move(batch));
            batch.clear();
        }
    };

    while (is >> seq >> interval) {
        KnowledgeRecord r;
        std::string label;
        int granted = 0;
        if (!(is >> r.features.agent_id >> granted >> r.rule_intent >> r.model_intent >> label >>
              r.assessment.leak_count >> r.assessment.acd >> r.assessment.pd_int >>
              r.assessment.sp_hist >> r.assessment.sp_pdo >> r.assessment.sp_acd >>
              r.assessment.sp_pdint >> r.assessment.sp_total >> r.assessment.intent)) {
            throw ParseError("knowledge log: truncated record");
        }
        r.granted = granted != 0;
        if (label != "-") r.outcome_label = static_cast<int>(parse_int(label, "outcome_label"));
        r.features.label = r.outcome_label;
        r.features.values.resize(width);
        for (auto& v : r.features.values) {
            if (!(is >> v)) throw ParseError("knowledge log: truncated feature values");
        }
        if (interval != batch_interval) {
            flush();
            batch_interval = interval;
        }
        batch.push_back(std::move(r));
    }
    flush();
    return store;
}

// ---------------------------------------------------------------------------
// Metrics report table.
// ---------------------------------------------------------------------------

inline void write_metrics(std::ostream& os, const MetricsReport& r, const std::string& tag = "") {
    os << "metric,value\n";
    if (!tag.empty()) os << "tag," << tag << "\n";
    os << "n_agents," << r.n_agents << "\n";
    os << "accuracy," << format_double(r.accuracy) << "\n";
    os << "precision," << format_double(r.precision) << "\n";
    os << "recall," << format_double(r.recall) << "\n";
    os << "f1," << format_double(r.f1) << "\n";
    os << "success_rate," << format_double(r.success_rate) << "\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        os << "class" << c << "_precision," << format_double(r.per_class[c].precision) << "\n";
        os << "class" << c << "_recall," << format_double(r.per_class[c].recall) << "\n";
        os << "class" << c << "_f1," << format_double(r.per_class[c].f1) << "\n";
        os << "class" << c << "_support," << r.per_class[c].support << "\n";
    }
    os << "confusion";
    for (const auto& row : r.confusion) {
        for (const auto v : row) os << "," << v;
    }
    os << "\n";
}

// ---------------------------------------------------------------------------
// Plain key = value configuration files. '#' starts a comment.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> read_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError("config line " + std::to_string(line_no) + ": empty key or value");
        }
        if (!kv.emplace(key, value).second) {
            throw ParseError("config: duplicate key '" + key + "'");
        }
    }
    return kv;
}

} // namespace io
} // namespace agentgate
