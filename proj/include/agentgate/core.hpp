#pragma once

// Shared domain vocabulary: agents, data objects, categories, access
// requests, access histories and the discrete time windows every other
// component operates on. All types are immutable value records once built;
// histories grow only through the gatekeeper's single-writer append path.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace agentgate {

// Shortest decimal form that parses back to the identical double. Every
// persisted file format uses this, which is what makes serialize ->
// deserialize round trips bit-exact.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    if (parsed == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &parsed);
            if (parsed == v) return shorter;
        }
    }
    return buf;
}

using AgentId = std::string;
using ObjectId = std::string;
using Category = std::string;
using TimeIndex = std::int64_t;

// Agent class labels. The encoding is part of every persisted file format.
inline constexpr int kClassNonMalicious = 0;
inline constexpr int kClassMalicious = 1;
inline constexpr int kClassUnknown = 2;
inline constexpr int kNumClasses = 3;

struct DataObject {
    ObjectId id;
    Category category;
    bool sensitive = false;
};

// Closed interval of discrete interval indices.
struct TimeWindow {
    TimeIndex start = 0;
    TimeIndex end = 0;

    bool valid() const { return start >= 0 && start <= end; }
    TimeIndex length() const { return end - start + 1; }
    bool contains(TimeIndex t) const { return t >= start && t <= end; }
};

inline void require_valid(const TimeWindow& w) {
    if (!w.valid()) {
        throw std::invalid_argument("invalid time window [" + std::to_string(w.start) +
                                    "," + std::to_string(w.end) + "]");
    }
}

// The window of equal length immediately preceding `w`. Empty when `w`
// starts at the epoch origin (there is nothing before index 0).
inline std::optional<TimeWindow> previous_window(const TimeWindow& w) {
    require_valid(w);
    const TimeIndex len = w.length();
    if (w.start < len) {
        return std::nullopt;
    }
    return TimeWindow{w.start - len, w.end - len};
}

struct AccessEvent {
    AgentId agent_id;
    ObjectId object_id;
    TimeIndex time = 0;
    bool leaked = false;     // data accessed here was later found leaked
    bool authorized = false; // object was in the agent's permissible set at access time
};

// Live request-side details supplied alongside a data request.
struct LiveDetails {
    std::int64_t request_count = 0;
    std::string request_type;
    double data_limit = 0.0; // objects per interval the agent may retain
};

struct AgentProfile {
    AgentId agent_id;
    std::string profession;
    LiveDetails live;
    std::vector<AccessEvent> history; // sorted by time, non-decreasing
    std::optional<int> true_class;    // 0/1/2, present only in labeled data
};

inline bool history_sorted(std::span<const AccessEvent> history) {
    return std::is_sorted(history.begin(), history.end(),
                          [](const AccessEvent& a, const AccessEvent& b) { return a.time < b.time; });
}

struct RequestedObject {
    Category category;
    ObjectId object_id;

    friend bool operator==(const RequestedObject&, const RequestedObject&) = default;
    friend auto operator<=>(const RequestedObject&, const RequestedObject&) = default;
};

struct DataAccessRequest {
    AgentId agent_id;
    std::vector<RequestedObject> objects; // non-empty, no duplicate object ids
    TimeWindow window;
};

inline void validate(const DataAccessRequest& request) {
    if (request.objects.empty()) {
        throw std::invalid_argument("data access request must name at least one object");
    }
    require_valid(request.window);
    std::vector<ObjectId> ids;
    ids.reserve(request.objects.size());
    for (const auto& ro : request.objects) ids.push_back(ro.object_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw std::invalid_argument("duplicate object id in data access request");
    }
}

// Total number of data accesses an agent performed inside `window`.
inline std::int64_t gross_access_count(std::span<const AccessEvent> history, const TimeWindow& window) {
    require_valid(window);
    std::int64_t count = 0;
    for (const auto& ev : history) {
        if (window.contains(ev.time)) ++count;
    }
    return count;
}

} // namespace agentgate
