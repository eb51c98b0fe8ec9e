#pragma once

// Classification metrics over a fixed class set. Aggregate precision,
// recall and F1 are weighted by class support; success_rate is the recall
// restricted to the malicious class. A class with zero support (or zero
// predictions, for precision) contributes 0, never NaN.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "agentgate/core.hpp"

namespace agentgate {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0; // support-weighted
    double recall = 0.0;    // support-weighted
    double f1 = 0.0;        // support-weighted
    double success_rate = 0.0;
    std::vector<std::vector<std::int64_t>> confusion; // [actual][predicted]
    std::vector<ClassMetrics> per_class;
    std::int64_t n_agents = 0;
};

inline MetricsReport compute_metrics(std::span<const int> predicted, std::span<const int> actual,
                                     int n_classes = 0) {
    if (predicted.size() != actual.size()) {
        throw std::invalid_argument("predicted and actual label lists differ in length");
    }
    if (predicted.empty()) throw std::invalid_argument("cannot score an empty prediction list");
    if (n_classes == 0) {
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            n_classes = std::max({n_classes, predicted[i] + 1, actual[i] + 1});
        }
    }

    MetricsReport r;
    r.n_agents = static_cast<std::int64_t>(predicted.size());
    const auto k = static_cast<std::size_t>(n_classes);
    r.confusion.assign(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i], a = actual[i];
        if (p < 0 || p >= n_classes || a < 0 || a >= n_classes) {
            throw std::invalid_argument("label outside the declared class set");
        }
        ++r.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
    }

    std::int64_t trace = 0;
    r.per_class.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::int64_t tp = r.confusion[c][c];
        trace += tp;
        std::int64_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row_sum += r.confusion[c][j];
            col_sum += r.confusion[j][c];
        }
        ClassMetrics& m = r.per_class[c];
        m.support = row_sum;
        m.precision = col_sum > 0 ? static_cast<double>(tp) / static_cast<double>(col_sum) : 0.0;
        m.recall = row_sum > 0 ? static_cast<double>(tp) / static_cast<double>(row_sum) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }

    const auto total = static_cast<double>(r.n_agents);
    r.accuracy = static_cast<double>(trace) / total;
    for (const auto& m : r.per_class) {
        const double w = static_cast<double>(m.support) / total;
        r.precision += w * m.precision;
        r.recall += w * m.recall;
        r.f1 += w * m.f1;
    }
    if (n_classes > kClassMalicious) {
        r.success_rate = r.per_class[kClassMalicious].recall;
    }
    return r;
}

} // namespace agentgate
