#pragma once

// From-scratch gradient-boosted decision trees with a second-order
// objective: binary log-loss, regularized leaf weights w* = -G/(H+lambda),
// structure score -1/2 sum G^2/(H+lambda) + gamma*T and exact greedy split
// search over midpoint thresholds of sorted feature values. Multi-class is
// one-vs-rest over independent binary boosters with argmax at prediction.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agentgate/dataset.hpp"

namespace agentgate {

struct TrainConfig {
    int rounds = 100;               // trees per class score
    double learning_rate = 0.3;     // shrinkage applied to each tree's output
    double lambda = 1.0;            // L2 penalty on leaf weights
    double gamma = 0.0;             // per-leaf penalty, subtracted from every split gain
    int max_depth = 4;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double min_split_gain = 0.0;    // splits must strictly exceed this gain
    double base_score = 0.5;        // initial probability before any tree

    void validate() const {
        if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
            throw std::invalid_argument("learning_rate must lie in (0,1]");
        }
        if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
        if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
        if (min_child_weight < 0.0) throw std::invalid_argument("min_child_weight must be >= 0");
        if (min_split_gain < 0.0) throw std::invalid_argument("min_split_gain must be >= 0");
        if (!(base_score > 0.0 && base_score < 1.0)) {
            throw std::invalid_argument("base_score must lie in (0,1)");
        }
    }
};

struct GradPair {
    double g = 0.0;
    double h = 0.0;
};

inline double sigmoid(double margin) {
    if (margin >= 0.0) {
        return 1.0 / (1.0 + std::exp(-margin));
    }
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit requires p in (0,1)");
    return std::log(p / (1.0 - p));
}

inline constexpr double kProbClamp = 1e-12;

// Negative log-likelihood of a {0,1} label under probability p. p is
// clamped away from {0,1} before taking logs; values outside [0,1] beyond
// that clamp are rejected.
inline double logloss(int y, double p) {
    if (y != 0 && y != 1) throw std::invalid_argument("logloss label must be 0 or 1");
    if (p < -kProbClamp || p > 1.0 + kProbClamp) {
        throw std::invalid_argument("probability outside (0,1)");
    }
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return -(y * std::log(pc) + (1 - y) * std::log(1.0 - pc));
}

// First and second derivatives of logloss(y, sigmoid(margin)) w.r.t. the
// margin.
inline GradPair grad_hess(int y, double p) {
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0,1)");
    return {p - static_cast<double>(y), p * (1.0 - p)};
}

// Minimizer of the per-leaf quadratic G*w + 1/2*(H+lambda)*w^2.
inline double leaf_weight(double G, double H, double lambda) {
    if (H < 0.0 || lambda < 0.0) throw std::invalid_argument("H and lambda must be >= 0");
    if (H + lambda <= 0.0) throw std::invalid_argument("H + lambda must be positive");
    return -G / (H + lambda);
}

// Quality of a tree partition; lower is better.
inline double structure_score(std::span<const GradPair> leaves, double lambda, double gamma) {
    double score = 0.0;
    for (const auto& [G, H] : leaves) {
        if (H < 0.0) throw std::invalid_argument("leaf hessian sums must be >= 0");
        score += (G * G) / (H + lambda);
    }
    return -0.5 * score + gamma * static_cast<double>(leaves.size());
}

// Loss reduction from splitting one leaf into (L, R); equals the structure
// score of the parent minus that of the two children.
inline double split_gain(double GL, double HL, double GR, double HR, double lambda, double gamma) {
    if (HL < 0.0 || HR < 0.0) throw std::invalid_argument("hessian sums must be >= 0");
    const double G = GL + GR;
    const double H = HL + HR;
    return 0.5 * ((GL * GL) / (HL + lambda) + (GR * GR) / (HR + lambda) - (G * G) / (H + lambda)) -
           gamma;
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Two candidates whose gains agree to this relative tolerance count as
// tied. Different features frequently induce the same logical partition,
// whose gains then differ only by summation-order rounding; the band makes
// the tie-break land on the documented candidate instead of on that noise.
inline constexpr double kGainTieTolerance = 1e-9;

inline bool gain_improves(double gain, double best) {
    return gain > best + kGainTieTolerance * std::max({1.0, std::abs(gain), std::abs(best)});
}

// Exact greedy search: for each feature, instances sorted by value, prefix
// sums give (G_L, H_L) and the complement (G_R, H_R) at every boundary
// between distinct values; thresholds are midpoints. Returns the candidate
// with maximum gain among those whose gain strictly exceeds min_split_gain
// and whose children both reach min_child_weight, or nothing. Ties are
// broken toward the lowest feature index, then the lowest threshold.
inline std::optional<SplitCandidate> find_best_split(const Dataset& data,
                                                     std::span<const GradPair> gradients,
                                                     std::span<const std::size_t> rows,
                                                     const TrainConfig& cfg) {
    if (rows.empty()) throw std::invalid_argument("find_best_split needs at least one instance");
    if (gradients.size() != data.n_rows) {
        throw std::invalid_argument("gradients must align with dataset rows");
    }

    double G = 0.0, H = 0.0;
    for (std::size_t i : rows) {
        G += gradients[i].g;
        H += gradients[i].h;
    }

    std::optional<SplitCandidate> best;
    std::vector<std::size_t> order(rows.begin(), rows.end());

    for (std::size_t f = 0; f < data.n_cols; ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = data.values[a * data.n_cols + f];
            const double vb = data.values[b * data.n_cols + f];
            return va < vb || (va == vb && a < b);
        });

        double GL = 0.0, HL = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            GL += gradients[order[k]].g;
            HL += gradients[order[k]].h;
            const double v = data.values[order[k] * data.n_cols + f];
            const double vnext = data.values[order[k + 1] * data.n_cols + f];
            if (v == vnext) continue;

            const double HR = H - HL;
            if (HL < cfg.min_child_weight || HR < cfg.min_child_weight) continue;
            const double gain = split_gain(GL, HL, G - GL, HR, cfg.lambda, cfg.gamma);
            if (gain <= cfg.min_split_gain) continue;
            if (!best || gain_improves(gain, best->gain)) {
                best = SplitCandidate{static_cast<int>(f), 0.5 * (v + vnext), gain};
            }
        }
    }
    return best;
}

// Internal node when feature >= 0, leaf otherwise. Children are indices
// into the owning tree's node array.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes; // preorder, root at 0

    double value_at(std::span<const double> row) const {
        std::size_t idx = 0;
        while (!nodes[idx].is_leaf()) {
            const auto& n = nodes[idx];
            idx = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold
                                               ? n.left
                                               : n.right);
        }
        return nodes[idx].weight;
    }

    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
        return c;
    }
};

namespace detail {

inline int grow_node(Tree& tree, const Dataset& data, std::span<const GradPair> gradients,
                     std::vector<std::size_t>& rows, int depth, const TrainConfig& cfg) {
    double G = 0.0, H = 0.0;
    for (std::size_t i : rows) {
        G += gradients[i].g;
        H += gradients[i].h;
    }

    std::optional<SplitCandidate> cand;
    if (depth < cfg.max_depth && rows.size() >= 2) {
        cand = find_best_split(data, gradients, rows, cfg);
    }

    const int idx = static_cast<int>(tree.nodes.size());
    if (!cand) {
        TreeNode leaf;
        leaf.weight = leaf_weight(G, H, cfg.lambda);
        tree.nodes.push_back(leaf);
        return idx;
    }

    tree.nodes.push_back(TreeNode{cand->feature, cand->threshold, -1, -1, 0.0});
    std::vector<std::size_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (std::size_t i : rows) {
        const double v = data.values[i * data.n_cols + static_cast<std::size_t>(cand->feature)];
        (v < cand->threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(idx)].left =
        grow_node(tree, data, gradients, left, depth + 1, cfg);
    tree.nodes[static_cast<std::size_t>(idx)].right =
        grow_node(tree, data, gradients, right, depth + 1, cfg);
    return idx;
}

} // namespace detail

// Best-first is not needed for an exact greedy learner: the tree grows by
// recursive best-split expansion until max_depth or until no candidate
// qualifies, and every leaf carries the regularized optimal weight of its
// instance set.
inline Tree grow_tree(const Dataset& data, std::span<const GradPair> gradients,
                      std::span<const std::size_t> rows, const TrainConfig& cfg) {
    if (rows.empty()) throw std::invalid_argument("grow_tree needs a non-empty instance set");
    cfg.validate();
    Tree tree;
    std::vector<std::size_t> root_rows(rows.begin(), rows.end());
    detail::grow_node(tree, data, gradients, root_rows, 0, cfg);
    return tree;
}

enum class ClassLayout { binary, one_vs_rest };

struct Prediction {
    std::vector<double> margins;       // one per class score
    std::vector<double> probabilities; // sigmoid of each margin
    int predicted_class = 0;
};

struct BoostedEnsemble {
    ClassLayout layout = ClassLayout::binary;
    int n_classes = 2;
    double learning_rate = 0.3;
    double base_score = 0.5;
    TrainConfig config;
    std::vector<std::string> feature_names;
    std::optional<NormalizationStats> stats;
    std::vector<std::vector<Tree>> boosters; // one tree list per class score

    // Mean training log-loss after each round, per booster. Diagnostic
    // output of boost(); not persisted.
    std::vector<std::vector<double>> training_loss;

    std::size_t n_boosters() const { return boosters.size(); }

    // Scores one raw feature row. Normalization stats captured at training
    // time, when present, are applied here so callers always pass raw rows.
    Prediction predict(std::span<const double> raw_row) const {
        if (raw_row.size() != feature_names.size()) {
            throw std::invalid_argument("feature row width does not match the model");
        }
        std::vector<double> row(raw_row.begin(), raw_row.end());
        if (stats) normalize_row(row, *stats);

        Prediction pred;
        const double base_margin = logit(base_score);
        pred.margins.reserve(boosters.size());
        pred.probabilities.reserve(boosters.size());
        for (const auto& trees : boosters) {
            double margin = base_margin;
            for (const auto& tree : trees) {
                margin += learning_rate * tree.value_at(row);
            }
            pred.margins.push_back(margin);
            pred.probabilities.push_back(sigmoid(margin));
        }

        if (layout == ClassLayout::binary) {
            pred.predicted_class = pred.probabilities[0] > 0.5 ? 1 : 0;
        } else {
            std::size_t best = 0;
            for (std::size_t c = 1; c < pred.probabilities.size(); ++c) {
                if (pred.probabilities[c] > pred.probabilities[best]) best = c;
            }
            pred.predicted_class = static_cast<int>(best);
        }
        return pred;
    }
};

// Additive boosting loop: per round, margins -> (g, h) per instance -> one
// tree grown by exact greedy search -> margins updated with learning-rate
// scaling. For k > 2 classes, k independent one-vs-rest boosters share the
// same loop.
inline BoostedEnsemble boost(const Dataset& train, const TrainConfig& cfg) {
    cfg.validate();
    if (train.n_rows == 0 || train.n_cols == 0) {
        throw std::invalid_argument("training set is empty");
    }
    if (!train.labeled()) throw std::invalid_argument("training set must be fully labeled");
    const int k = train.n_classes();
    if (k < 2) throw std::invalid_argument("training set is degenerate: single class");

    BoostedEnsemble model;
    model.layout = k == 2 ? ClassLayout::binary : ClassLayout::one_vs_rest;
    model.n_classes = k;
    model.learning_rate = cfg.learning_rate;
    model.base_score = cfg.base_score;
    model.config = cfg;
    model.feature_names = train.feature_names;
    model.stats = train.stats;
    model.boosters.resize(model.layout == ClassLayout::binary ? 1 : static_cast<std::size_t>(k));

    std::vector<std::size_t> all_rows(train.n_rows);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const double base_margin = logit(cfg.base_score);
    model.training_loss.resize(model.boosters.size());

    for (std::size_t c = 0; c < model.boosters.size(); ++c) {
        std::vector<int> y(train.n_rows);
        for (std::size_t i = 0; i < train.n_rows; ++i) {
            y[i] = model.layout == ClassLayout::binary
                       ? train.labels[i]
                       : (train.labels[i] == static_cast<int>(c) ? 1 : 0);
        }

        std::vector<double> margins(train.n_rows, base_margin);
        std::vector<GradPair> grads(train.n_rows);
        auto& trees = model.boosters[c];
        trees.reserve(static_cast<std::size_t>(cfg.rounds));

        auto loss_now = [&]() {
            double total = 0.0;
            for (std::size_t i = 0; i < train.n_rows; ++i) {
                total += logloss(y[i], sigmoid(margins[i]));
            }
            return total / static_cast<double>(train.n_rows);
        };

        model.training_loss[c].reserve(static_cast<std::size_t>(cfg.rounds) + 1);
        model.training_loss[c].push_back(loss_now());

        for (int round = 0; round < cfg.rounds; ++round) {
            for (std::size_t i = 0; i < train.n_rows; ++i) {
                grads[i] = grad_hess(y[i], sigmoid(margins[i]));
            }
            Tree tree = grow_tree(train, grads, all_rows, cfg);
            for (std::size_t i = 0; i < train.n_rows; ++i) {
                margins[i] += cfg.learning_rate * tree.value_at(train.row(i));
            }
            trees.push_back(std::move(tree));
            model.training_loss[c].push_back(loss_now());
        }
    }
    return model;
}

// Convenience wrapper for raw feature datasets: computes normalization
// stats, trains on the scaled matrix and embeds the stats in the model.
inline BoostedEnsemble train_model(const Dataset& raw, const TrainConfig& cfg) {
    return boost(normalize(raw), cfg);
}

inline std::vector<Prediction> predict_dataset(const BoostedEnsemble& model, const Dataset& raw) {
    std::vector<Prediction> out;
    out.reserve(raw.n_rows);
    for (std::size_t i = 0; i < raw.n_rows; ++i) {
        out.push_back(model.predict(raw.row(i)));
    }
    return out;
}

inline double mean_logloss(const BoostedEnsemble& model, const Dataset& raw,
                           std::span<const int> labels) {
    if (labels.size() != raw.n_rows || raw.n_rows == 0) {
        throw std::invalid_argument("labels must align with rows");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < raw.n_rows; ++i) {
        total += logloss(labels[i], model.predict(raw.row(i)).probabilities[0]);
    }
    return total / static_cast<double>(raw.n_rows);
}

// ---------------------------------------------------------------------------
// Model persistence: versioned, self-describing text. Node lines appear in
// preorder with explicit leaf weights; doubles use round-trip formatting.
// ---------------------------------------------------------------------------

inline constexpr const char* kModelMagic = "agentgate_model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void save_tree_node(std::ostream& os, const Tree& tree, std::size_t idx) {
    const TreeNode& n = tree.nodes[idx];
    if (n.is_leaf()) {
        os << "node leaf " << format_double(n.weight) << "\n";
    } else {
        os << "node split " << n.feature << " " << format_double(n.threshold) << "\n";
        save_tree_node(os, tree, static_cast<std::size_t>(n.left));
        save_tree_node(os, tree, static_cast<std::size_t>(n.right));
    }
}

inline int load_tree_node(std::istream& is, Tree& tree) {
    std::string tok, kind;
    if (!(is >> tok >> kind) || tok != "node") {
        throw std::runtime_error("model file: expected a node line");
    }
    const int idx = static_cast<int>(tree.nodes.size());
    if (kind == "leaf") {
        double w = 0.0;
        if (!(is >> w)) throw std::runtime_error("model file: bad leaf weight");
        TreeNode leaf;
        leaf.weight = w;
        tree.nodes.push_back(leaf);
    } else if (kind == "split") {
        int feature = 0;
        double threshold = 0.0;
        if (!(is >> feature >> threshold)) throw std::runtime_error("model file: bad split node");
        tree.nodes.push_back(TreeNode{feature, threshold, -1, -1, 0.0});
        tree.nodes[static_cast<std::size_t>(idx)].left = load_tree_node(is, tree);
        tree.nodes[static_cast<std::size_t>(idx)].right = load_tree_node(is, tree);
    } else {
        throw std::runtime_error("model file: unknown node kind '" + kind + "'");
    }
    return idx;
}

} // namespace detail

inline void save_model(std::ostream& os, const BoostedEnsemble& m) {
    os << kModelMagic << " v" << kModelVersion << "\n";
    os << "learning_rate " << format_double(m.learning_rate) << "\n";
    os << "base_score " << format_double(m.base_score) << "\n";
    os << "rounds " << m.config.rounds << "\n";
    os << "lambda " << format_double(m.config.lambda) << "\n";
    os << "gamma " << format_double(m.config.gamma) << "\n";
    os << "max_depth " << m.config.max_depth << "\n";
    os << "min_child_weight " << format_double(m.config.min_child_weight) << "\n";
    os << "min_split_gain " << format_double(m.config.min_split_gain) << "\n";
    os << "class_layout " << (m.layout == ClassLayout::binary ? "binary" : "one_vs_rest") << "\n";
    os << "n_classes " << m.n_classes << "\n";
    os << "n_features " << m.feature_names.size() << "\n";
    for (const auto& name : m.feature_names) {
        os << "feature " << name << "\n";
    }
    os << "normalization " << (m.stats ? "present" : "absent") << "\n";
    if (m.stats) {
        for (std::size_t j = 0; j < m.stats->width(); ++j) {
            os << "norm " << format_double(m.stats->min[j]) << " " << format_double(m.stats->max[j])
               << "\n";
        }
    }
    os << "boosters " << m.boosters.size() << "\n";
    for (std::size_t c = 0; c < m.boosters.size(); ++c) {
        os << "booster " << c << " trees " << m.boosters[c].size() << "\n";
        for (const auto& tree : m.boosters[c]) {
            os << "tree " << tree.nodes.size() << "\n";
            detail::save_tree_node(os, tree, 0);
        }
    }
    os << "end\n";
}

inline BoostedEnsemble load_model(std::istream& is) {
    auto expect = [&](const char* key) {
        std::string tok;
        if (!(is >> tok) || tok != key) {
            throw std::runtime_error(std::string("model file: expected '") + key + "'");
        }
    };

    std::string magic, version;
    if (!(is >> magic >> version) || magic != kModelMagic) {
        throw std::runtime_error("not a model file");
    }
    if (version != "v" + std::to_string(kModelVersion)) {
        throw std::runtime_error("unsupported model version " + version);
    }

    BoostedEnsemble m;
    expect("learning_rate");
    is >> m.learning_rate;
    expect("base_score");
    is >> m.base_score;
    expect("rounds");
    is >> m.config.rounds;
    expect("lambda");
    is >> m.config.lambda;
    expect("gamma");
    is >> m.config.gamma;
    expect("max_depth");
    is >> m.config.max_depth;
    expect("min_child_weight");
    is >> m.config.min_child_weight;
    expect("min_split_gain");
    is >> m.config.min_split_gain;
    m.config.learning_rate = m.learning_rate;
    m.config.base_score = m.base_score;

    expect("class_layout");
    std::string layout;
    is >> layout;
    if (layout == "binary") {
        m.layout = ClassLayout::binary;
    } else if (layout == "one_vs_rest") {
        m.layout = ClassLayout::one_vs_rest;
    } else {
        throw std::runtime_error("model file: unknown class layout '" + layout + "'");
    }
    expect("n_classes");
    is >> m.n_classes;

    expect("n_features");
    std::size_t n_features = 0;
    is >> n_features;
    m.feature_names.resize(n_features);
    for (auto& name : m.feature_names) {
        expect("feature");
        is >> name;
    }

    expect("normalization");
    std::string presence;
    is >> presence;
    if (presence == "present") {
        NormalizationStats stats;
        stats.min.resize(n_features);
        stats.max.resize(n_features);
        for (std::size_t j = 0; j < n_features; ++j) {
            expect("norm");
            is >> stats.min[j] >> stats.max[j];
        }
        m.stats = std::move(stats);
    } else if (presence != "absent") {
        throw std::runtime_error("model file: bad normalization marker");
    }

    expect("boosters");
    std::size_t n_boosters = 0;
    is >> n_boosters;
    m.boosters.resize(n_boosters);
    for (std::size_t c = 0; c < n_boosters; ++c) {
        expect("booster");
        std::size_t booster_idx = 0;
        is >> booster_idx;
        expect("trees");
        std::size_t n_trees = 0;
        is >> n_trees;
        if (booster_idx != c) throw std::runtime_error("model file: booster index out of order");
        m.boosters[c].resize(n_trees);
        for (auto& tree : m.boosters[c]) {
            expect("tree");
            std::size_t n_nodes = 0;
            is >> n_nodes;
            detail::load_tree_node(is, tree);
            if (tree.nodes.size() != n_nodes) {
                throw std::runtime_error("model file: node count mismatch");
            }
        }
    }
    expect("end");
    if (!is) throw std::runtime_error("model file: truncated");
    return m;
}

} // namespace agentgate
