#pragma once

// One plain-text configuration file (key = value lines) drives thresholds,
// the category vocabulary, generator parameters, training parameters and
// the gatekeeper schedule. Unknown keys are rejected so typos surface as
// malformed-config errors instead of silently applied defaults.

#include <istream>
#include <string>
#include <vector>

#include "agentgate/dataset.hpp"
#include "agentgate/gbdt.hpp"
#include "agentgate/io.hpp"

namespace agentgate {

struct AppConfig {
    Thresholds thresholds;
    std::vector<Category> categories; // empty: derived as C1..Cn from synth.n_categories
    TrainConfig train;
    SyntheticConfig synth;
    double train_fraction = 0.8;

    // Gatekeeper schedule.
    std::int64_t sim_intervals = 30;
    std::int64_t retrain_every = 10;
    std::int64_t min_retrain_rows = 50;
    double request_prob = 0.5; // chance an agent raises a request in an interval

    // Reference targets juxtaposed in report output.
    double target_accuracy = 0.9555;
    double target_precision = 0.9530;
    double target_recall = 0.9550;
    double target_f1 = 0.9520;

    std::vector<Category> effective_categories() const {
        if (!categories.empty()) return categories;
        std::vector<Category> cats;
        for (std::int64_t c = 1; c <= synth.n_categories; ++c) {
            cats.push_back("C" + std::to_string(c));
        }
        return cats;
    }

    void validate() const {
        thresholds.validate();
        train.validate();
        synth.validate();
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw std::invalid_argument("train_fraction must lie in (0,1)");
        }
        if (sim_intervals < 1) throw std::invalid_argument("sim_intervals must be >= 1");
        if (retrain_every < 1) throw std::invalid_argument("retrain_every must be >= 1");
        if (min_retrain_rows < 1) throw std::invalid_argument("min_retrain_rows must be >= 1");
        if (request_prob < 0.0 || request_prob > 1.0) {
            throw std::invalid_argument("request_prob must lie in [0,1]");
        }
    }
};

inline AppConfig parse_config(std::istream& is) {
    AppConfig cfg;
    for (const auto& [key, value] : io::read_key_values(is)) {
        if (key == "thr_attack") {
            cfg.thresholds.thr_attack = io::parse_double(value, key.c_str());
        } else if (key == "thr_freq") {
            cfg.thresholds.thr_freq = io::parse_int(value, key.c_str());
        } else if (key == "categories") {
            cfg.categories.clear();
            for (const auto& c : io::split(value, ',')) {
                cfg.categories.push_back(io::check_token(c, "category"));
            }
        } else if (key == "rounds") {
            cfg.train.rounds = static_cast<int>(io::parse_int(value, key.c_str()));
        } else if (key == "learning_rate") {
            cfg.train.learning_rate = io::parse_double(value, key.c_str());
        } else if (key == "lambda") {
            cfg.train.lambda = io::parse_double(value, key.c_str());
        } else if (key == "gamma") {
            cfg.train.gamma = io::parse_double(value, key.c_str());
        } else if (key == "max_depth") {
            cfg.train.max_depth = static_cast<int>(io::parse_int(value, key.c_str()));
        } else if (key == "min_child_weight") {
            cfg.train.min_child_weight = io::parse_double(value, key.c_str());
        } else if (key == "min_split_gain") {
            cfg.train.min_split_gain = io::parse_double(value, key.c_str());
        } else if (key == "base_score") {
            cfg.train.base_score = io::parse_double(value, key.c_str());
        } else if (key == "n_agents") {
            cfg.synth.n_agents = io::parse_int(value, key.c_str());
        } else if (key == "malicious_fraction") {
            cfg.synth.malicious_fraction = io::parse_double(value, key.c_str());
        } else if (key == "unknown_fraction") {
            cfg.synth.unknown_fraction = io::parse_double(value, key.c_str());
        } else if (key == "n_objects") {
            cfg.synth.n_objects = io::parse_int(value, key.c_str());
        } else if (key == "n_categories") {
            cfg.synth.n_categories = io::parse_int(value, key.c_str());
        } else if (key == "intervals") {
            cfg.synth.intervals = io::parse_int(value, key.c_str());
        } else if (key == "seed") {
            cfg.synth.seed = static_cast<std::uint64_t>(io::parse_int(value, key.c_str()));
        } else if (key == "leak_prob_malicious") {
            cfg.synth.leak_prob_malicious = io::parse_double(value, key.c_str());
        } else if (key == "leak_prob_normal") {
            cfg.synth.leak_prob_normal = io::parse_double(value, key.c_str());
        } else if (key == "breach_prob_malicious") {
            cfg.synth.breach_prob_malicious = io::parse_double(value, key.c_str());
        } else if (key == "breach_prob_normal") {
            cfg.synth.breach_prob_normal = io::parse_double(value, key.c_str());
        } else if (key == "request_breach_prob_malicious") {
            cfg.synth.request_breach_prob_malicious = io::parse_double(value, key.c_str());
        } else if (key == "request_breach_prob_normal") {
            cfg.synth.request_breach_prob_normal = io::parse_double(value, key.c_str());
        } else if (key == "train_fraction") {
            cfg.train_fraction = io::parse_double(value, key.c_str());
        } else if (key == "sim_intervals") {
            cfg.sim_intervals = io::parse_int(value, key.c_str());
        } else if (key == "retrain_every") {
            cfg.retrain_every = io::parse_int(value, key.c_str());
        } else if (key == "min_retrain_rows") {
            cfg.min_retrain_rows = io::parse_int(value, key.c_str());
        } else if (key == "request_prob") {
            cfg.request_prob = io::parse_double(value, key.c_str());
        } else if (key == "target_accuracy") {
            cfg.target_accuracy = io::parse_double(value, key.c_str());
        } else if (key == "target_precision") {
            cfg.target_precision = io::parse_double(value, key.c_str());
        } else if (key == "target_recall") {
            cfg.target_recall = io::parse_double(value, key.c_str());
        } else if (key == "target_f1") {
            cfg.target_f1 = io::parse_double(value, key.c_str());
        } else {
            throw ParseError("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
    auto in = io::open_input(path);
    try {
        return parse_config(in);
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace agentgate
