#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "agentgate/gbdt.hpp"
#include "agentgate/rng.hpp"
#include "oracles.hpp"

using namespace agentgate;

namespace {

Dataset tiny_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels) {
    Dataset d;
    d.n_rows = rows.size();
    d.n_cols = rows[0].size();
    for (std::size_t j = 0; j < d.n_cols; ++j) d.feature_names.push_back("f" + std::to_string(j));
    for (const auto& r : rows) d.values.insert(d.values.end(), r.begin(), r.end());
    d.labels = std::move(labels);
    return d;
}

TrainConfig loose_config() {
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.gamma = 0.0;
    cfg.min_child_weight = 0.0;
    cfg.min_split_gain = 0.0;
    return cfg;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.n_rows);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

// A linearly separable two-feature set: feature 0 carries the class,
// feature 1 is noise.
Dataset separable_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        rows.push_back({y == 0 ? rng.uniform(0.0, 0.4) : rng.uniform(0.6, 1.0),
                        rng.uniform(0.0, 1.0)});
        labels.push_back(y);
    }
    return tiny_dataset(std::move(rows), std::move(labels));
}

} // namespace

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK_THAT(sigmoid(std::log(3.0)), Catch::Matchers::WithinAbs(0.75, 1e-15));
    for (double m : {-30.0, -3.0, -0.2, 0.7, 4.0, 30.0}) {
        CHECK_THAT(sigmoid(m) + sigmoid(-m), Catch::Matchers::WithinAbs(1.0, 1e-15));
        CHECK(sigmoid(m) > 0.0);
        CHECK(sigmoid(m) < 1.0);
    }
}

TEST_CASE("log-loss") {
    CHECK_THAT(logloss(1, 1.0 - 1e-9), Catch::Matchers::WithinAbs(0.0, 1e-8));
    CHECK_THAT(logloss(1, 0.5), Catch::Matchers::WithinAbs(std::log(2.0), 1e-15));
    CHECK_THAT(logloss(0, 0.5), Catch::Matchers::WithinAbs(std::log(2.0), 1e-15));
    CHECK(logloss(1, 1.0) < 1e-11); // clamped, finite
    CHECK(std::isfinite(logloss(0, 1.0)));
    CHECK_THROWS_AS(logloss(1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(logloss(1, -0.2), std::invalid_argument);
    CHECK_THROWS_AS(logloss(2, 0.5), std::invalid_argument);
}

TEST_CASE("gradient and hessian match finite differences of the composed loss") {
    SECTION("worked values") {
        const GradPair at_half = grad_hess(1, 0.5);
        CHECK(at_half.g == -0.5);
        CHECK(at_half.h == 0.25);
        CHECK_THAT(at_half.g, Catch::Matchers::WithinAbs(oracles::fd_gradient(1, 0.0), 1e-5));
        CHECK_THAT(at_half.h, Catch::Matchers::WithinAbs(oracles::fd_hessian(1, 0.0), 1e-5));

        const double m09 = logit(0.9);
        const GradPair at_nine = grad_hess(0, 0.9);
        CHECK_THAT(at_nine.g, Catch::Matchers::WithinAbs(0.9, 1e-15));
        CHECK_THAT(at_nine.h, Catch::Matchers::WithinAbs(0.09, 1e-15));
        CHECK_THAT(at_nine.g, Catch::Matchers::WithinAbs(oracles::fd_gradient(0, m09), 1e-5));
        CHECK_THAT(at_nine.h, Catch::Matchers::WithinAbs(oracles::fd_hessian(0, m09), 1e-5));
    }

    SECTION("stationary case") {
        CHECK(grad_hess(1, 1.0 - 1e-9).g == Catch::Approx(0.0).margin(1e-8));
        CHECK(grad_hess(0, 1e-9).g == Catch::Approx(0.0).margin(1e-8));
    }

    SECTION("grid of labels and margins") {
        for (int y : {0, 1}) {
            for (double m = -6.0; m <= 6.0; m += 0.5) {
                const GradPair gh = grad_hess(y, sigmoid(m));
                CHECK_THAT(gh.g, Catch::Matchers::WithinAbs(oracles::fd_gradient(y, m), 1e-5));
                CHECK_THAT(gh.h, Catch::Matchers::WithinAbs(oracles::fd_hessian(y, m), 1e-5));
                CHECK(gh.h > 0.0);
                CHECK(gh.h <= 0.25);
            }
        }
    }
}

TEST_CASE("leaf weight minimizes the regularized leaf objective") {
    CHECK(leaf_weight(0.0, 3.0, 1.0) == 0.0);
    CHECK(leaf_weight(4.0, 3.0, 1.0) == -1.0);
    CHECK_THROWS_AS(leaf_weight(1.0, 0.0, 0.0), std::invalid_argument);

    SECTION("agrees with an independent grid-search minimizer") {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const double G = rng.uniform(-10.0, 10.0);
            const double H = rng.uniform(0.0, 10.0);
            const double lambda = rng.uniform(0.01, 5.0);
            const double w = leaf_weight(G, H, lambda);
            CHECK_THAT(w, Catch::Matchers::WithinAbs(oracles::grid_search_leaf_weight(G, H, lambda),
                                                     1e-6));
            // Local minimum certificate.
            const double at = oracles::leaf_objective(w, G, H, lambda);
            CHECK(at <= oracles::leaf_objective(w + 1e-3, G, H, lambda));
            CHECK(at <= oracles::leaf_objective(w - 1e-3, G, H, lambda));
        }
    }

    SECTION("shrinkage is monotone in lambda") {
        Rng rng(6);
        for (int trial = 0; trial < 200; ++trial) {
            const double G = rng.uniform(-10.0, 10.0);
            const double H = rng.uniform(0.0, 10.0);
            const double l1 = rng.uniform(0.0, 5.0);
            const double l2 = l1 + rng.uniform(0.0, 5.0) + 1e-9;
            CHECK(std::abs(leaf_weight(G, H, l1)) >= std::abs(leaf_weight(G, H, l2)));
        }
    }
}

TEST_CASE("structure score") {
    const std::vector<GradPair> single = {{0.0, 2.0}};
    CHECK(structure_score(single, 1.0, 0.7) == 0.7);

    const std::vector<GradPair> two = {{2.0, 3.0}, {-1.0, 2.0}};
    CHECK_THAT(structure_score(two, 1.0, 0.0),
               Catch::Matchers::WithinAbs(-0.5 * (4.0 / 4.0 + 1.0 / 3.0), 1e-12));

    SECTION("a zero-gradient leaf adds exactly gamma") {
        const std::vector<GradPair> three = {{2.0, 3.0}, {-1.0, 2.0}, {0.0, 5.0}};
        const double gamma = 0.3;
        CHECK_THAT(structure_score(three, 1.0, gamma) - structure_score(two, 1.0, gamma),
                   Catch::Matchers::WithinAbs(gamma, 1e-12));
    }
}

TEST_CASE("split gain") {
    CHECK_THAT(split_gain(2.0, 3.0, -1.0, 2.0, 1.0, 0.0),
               Catch::Matchers::WithinAbs(0.5 * (1.0 + 1.0 / 3.0 - 1.0 / 6.0), 1e-12));

    SECTION("equals the structure-score difference for random draws") {
        Rng rng(8);
        for (int trial = 0; trial < 1000; ++trial) {
            const double GL = rng.uniform(-10.0, 10.0), GR = rng.uniform(-10.0, 10.0);
            const double HL = rng.uniform(0.0, 10.0), HR = rng.uniform(0.0, 10.0);
            const double lambda = rng.uniform(0.0, 3.0) + 1e-6;
            const double gamma = rng.uniform(0.0, 2.0);
            const std::vector<GradPair> parent = {{GL + GR, HL + HR}};
            const std::vector<GradPair> children = {{GL, HL}, {GR, HR}};
            const double diff =
                structure_score(parent, lambda, gamma) - structure_score(children, lambda, gamma);
            CHECK_THAT(split_gain(GL, HL, GR, HR, lambda, gamma),
                       Catch::Matchers::WithinAbs(diff, 1e-9));
        }
    }

    SECTION("gamma larger than the raw improvement makes the gain negative") {
        const double raw = split_gain(2.0, 3.0, -1.0, 2.0, 1.0, 0.0);
        CHECK(split_gain(2.0, 3.0, -1.0, 2.0, 1.0, raw + 0.5) < 0.0);
    }

    SECTION("symmetric children, checked against the score difference") {
        const double G = 1.5, H = 2.0, lambda = 0.7;
        const std::vector<GradPair> parent = {{2 * G, 2 * H}};
        const std::vector<GradPair> children = {{G, H}, {G, H}};
        CHECK_THAT(split_gain(G, H, G, H, lambda, 0.0),
                   Catch::Matchers::WithinAbs(structure_score(parent, lambda, 0.0) -
                                                  structure_score(children, lambda, 0.0),
                                              1e-12));
    }
}

TEST_CASE("exact greedy split search") {
    SECTION("no valid threshold when all values coincide") {
        const Dataset d = tiny_dataset({{1.0}, {1.0}, {1.0}}, {0, 1, 0});
        const std::vector<GradPair> grads = {{-0.5, 0.25}, {0.5, 0.25}, {-0.5, 0.25}};
        CHECK_FALSE(find_best_split(d, grads, all_rows(d), loose_config()).has_value());
    }

    SECTION("sign-change example, verified by exhaustive enumeration") {
        const Dataset d = tiny_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {1, 1, 0, 0});
        const std::vector<GradPair> grads = {{-0.5, 0.25}, {-0.5, 0.25}, {0.5, 0.25}, {0.5, 0.25}};
        const auto cfg = loose_config();
        const auto got = find_best_split(d, grads, all_rows(d), cfg);
        const auto expected = oracles::brute_force_best_split(d, grads, all_rows(d), cfg);
        REQUIRE(got.has_value());
        REQUIRE(expected.has_value());
        CHECK(got->feature == 0);
        CHECK(got->threshold == 2.5); // between the sign change
        CHECK(got->threshold == expected->threshold);
        CHECK_THAT(got->gain, Catch::Matchers::WithinAbs(expected->gain, 1e-12));
        CHECK_THAT(got->gain, Catch::Matchers::WithinAbs(2.0, 1e-12));
    }

    SECTION("matches the brute-force argmax on random datasets") {
        Rng rng(13);
        for (int trial = 0; trial < 100; ++trial) {
            const auto n = static_cast<std::size_t>(rng.uniform_int(2, 8));
            const auto m = static_cast<std::size_t>(rng.uniform_int(1, 3));
            std::vector<std::vector<double>> rows;
            std::vector<int> labels;
            std::vector<GradPair> grads;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> row;
                for (std::size_t j = 0; j < m; ++j) row.push_back(rng.uniform());
                rows.push_back(std::move(row));
                const int y = rng.bernoulli(0.5) ? 1 : 0;
                labels.push_back(y);
                grads.push_back(grad_hess(y, sigmoid(rng.uniform(-2.0, 2.0))));
            }
            const Dataset d = tiny_dataset(std::move(rows), std::move(labels));

            TrainConfig cfg = loose_config();
            cfg.lambda = trial % 2 == 0 ? 0.0 : 1.0;
            cfg.gamma = trial % 3 == 0 ? 0.1 : 0.0;
            cfg.min_child_weight = trial % 4 == 0 ? 0.3 : 0.0;

            const auto got = find_best_split(d, grads, all_rows(d), cfg);
            const auto expected = oracles::brute_force_best_split(d, grads, all_rows(d), cfg);
            REQUIRE(got.has_value() == expected.has_value());
            if (got) {
                CHECK(got->feature == expected->feature);
                CHECK(got->threshold == expected->threshold);
                CHECK_THAT(got->gain, Catch::Matchers::WithinAbs(expected->gain, 1e-9));
            }
        }
    }

    SECTION("ties break to the lowest feature index") {
        // Two identical columns; all sums are exact in binary floating point.
        const Dataset d =
            tiny_dataset({{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}}, {1, 1, 0, 0});
        const std::vector<GradPair> grads = {{-0.5, 0.25}, {-0.5, 0.25}, {0.5, 0.25}, {0.5, 0.25}};
        const auto got = find_best_split(d, grads, all_rows(d), loose_config());
        REQUIRE(got.has_value());
        CHECK(got->feature == 0);
    }

    SECTION("ties break to the lowest threshold") {
        // Symmetric gradient pattern: thresholds 0.5 and 2.5 tie exactly.
        const Dataset d = tiny_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {1, 0, 0, 1});
        const std::vector<GradPair> grads = {{-1.0, 0.25}, {0.5, 0.25}, {0.5, 0.25}, {-1.0, 0.25}};
        const auto got = find_best_split(d, grads, all_rows(d), loose_config());
        REQUIRE(got.has_value());
        CHECK(got->threshold == 0.5);
        const auto expected =
            oracles::brute_force_best_split(d, grads, all_rows(d), loose_config());
        CHECK(got->threshold == expected->threshold);
    }

    SECTION("min_child_weight filters candidates") {
        const Dataset d = tiny_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {1, 1, 0, 0});
        const std::vector<GradPair> grads = {{-0.5, 0.25}, {-0.5, 0.25}, {0.5, 0.25}, {0.5, 0.25}};
        TrainConfig cfg = loose_config();
        cfg.min_child_weight = 0.5; // only the middle threshold leaves 0.5 per side
        const auto got = find_best_split(d, grads, all_rows(d), cfg);
        REQUIRE(got.has_value());
        CHECK(got->threshold == 2.5);
        cfg.min_child_weight = 0.6; // nothing qualifies
        CHECK_FALSE(find_best_split(d, grads, all_rows(d), cfg).has_value());
    }
}

TEST_CASE("tree growth") {
    SECTION("constant labels pool into a single leaf") {
        const Dataset d = tiny_dataset({{1.0}, {2.0}, {3.0}}, {1, 1, 1});
        std::vector<GradPair> grads(3, GradPair{-0.5, 0.25});
        TrainConfig cfg = loose_config();
        cfg.lambda = 1.0;
        cfg.max_depth = 1;
        const Tree tree = grow_tree(d, grads, all_rows(d), cfg);
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].is_leaf());
        CHECK(tree.nodes[0].weight == leaf_weight(-1.5, 0.75, 1.0));
    }

    SECTION("perfectly separable data yields a stump that reproduces the labels") {
        const Dataset d = separable_dataset(20, 17);
        std::vector<GradPair> grads;
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            grads.push_back(grad_hess(d.labels[i], 0.5));
        }
        TrainConfig cfg = loose_config();
        cfg.max_depth = 2;
        const Tree tree = grow_tree(d, grads, all_rows(d), cfg);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            const double out = tree.value_at(d.row(i));
            CHECK((d.labels[i] == 1 ? out > 0.0 : out < 0.0));
        }
    }

    SECTION("an unreachable split gain floor keeps the tree a single leaf") {
        const Dataset d = separable_dataset(20, 18);
        std::vector<GradPair> grads;
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            grads.push_back(grad_hess(d.labels[i], 0.5));
        }
        TrainConfig cfg = loose_config();
        cfg.min_split_gain = 1e18;
        const Tree tree = grow_tree(d, grads, all_rows(d), cfg);
        CHECK(tree.nodes.size() == 1);
    }

    SECTION("depth limit bounds every root-to-leaf path") {
        Rng rng(19);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        std::vector<GradPair> grads;
        for (int i = 0; i < 64; ++i) {
            rows.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
            const int y = rng.bernoulli(0.5) ? 1 : 0;
            labels.push_back(y);
            grads.push_back(grad_hess(y, sigmoid(rng.uniform(-1.0, 1.0))));
        }
        const Dataset d = tiny_dataset(std::move(rows), std::move(labels));
        TrainConfig cfg = loose_config();
        cfg.max_depth = 3;
        const Tree tree = grow_tree(d, grads, all_rows(d), cfg);

        // Walk all paths.
        struct Frame {
            std::size_t node;
            int depth;
        };
        std::vector<Frame> stack = {{0, 0}};
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            const auto& n = tree.nodes[f.node];
            if (n.is_leaf()) {
                CHECK(f.depth <= cfg.max_depth);
            } else {
                stack.push_back({static_cast<std::size_t>(n.left), f.depth + 1});
                stack.push_back({static_cast<std::size_t>(n.right), f.depth + 1});
            }
        }
    }
}

TEST_CASE("boosting") {
    SECTION("zero rounds predicts the base score everywhere") {
        const Dataset d = separable_dataset(10, 21);
        TrainConfig cfg = loose_config();
        cfg.rounds = 0;
        cfg.base_score = 0.5;
        const BoostedEnsemble model = boost(d, cfg);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            const Prediction p = model.predict(d.row(i));
            CHECK(p.probabilities[0] == 0.5);
        }
        TrainConfig other = cfg;
        other.base_score = 0.7;
        const BoostedEnsemble biased = boost(d, other);
        CHECK_THAT(biased.predict(d.row(0)).probabilities[0],
                   Catch::Matchers::WithinAbs(0.7, 1e-12));
    }

    SECTION("separable data reaches training accuracy 1.0 in 20 rounds") {
        const Dataset d = separable_dataset(60, 22);
        TrainConfig cfg = loose_config();
        cfg.rounds = 20;
        cfg.learning_rate = 0.3;
        cfg.lambda = 1.0;
        cfg.max_depth = 3;
        const BoostedEnsemble model = boost(d, cfg);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            correct += model.predict(d.row(i)).predicted_class == d.labels[i] ? 1 : 0;
        }
        CHECK(correct == d.n_rows);
    }

    SECTION("training log-loss is non-increasing per round") {
        const Dataset d = separable_dataset(200, 23);
        TrainConfig cfg;
        cfg.rounds = 20;
        cfg.learning_rate = 0.3;
        cfg.gamma = 0.0;
        cfg.min_split_gain = 0.0;
        const BoostedEnsemble model = boost(d, cfg);
        REQUIRE(model.training_loss.size() == 1);
        const auto& loss = model.training_loss[0];
        REQUIRE(loss.size() == 21);
        for (std::size_t r = 1; r < loss.size(); ++r) {
            CHECK(loss[r] <= loss[r - 1] + 1e-9);
        }
    }

    SECTION("boosting is stateless: retraining gives an identical model") {
        const Dataset d = separable_dataset(40, 24);
        TrainConfig cfg = loose_config();
        cfg.rounds = 5;
        const BoostedEnsemble a = boost(d, cfg);
        const BoostedEnsemble b = boost(d, cfg);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            CHECK(a.predict(d.row(i)).margins[0] == b.predict(d.row(i)).margins[0]);
        }
    }

    SECTION("degenerate training sets are rejected") {
        CHECK_THROWS_AS(boost(Dataset{}, loose_config()), std::invalid_argument);
        const Dataset single_class = tiny_dataset({{1.0}, {2.0}}, {0, 0});
        CHECK_THROWS_AS(boost(single_class, loose_config()), std::invalid_argument);
        Dataset unlabeled = tiny_dataset({{1.0}, {2.0}}, {0, -1});
        CHECK_THROWS_AS(boost(unlabeled, loose_config()), std::invalid_argument);
    }

    SECTION("three classes train one-vs-rest and argmax at prediction") {
        Rng rng(25);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < 90; ++i) {
            const int y = i % 3;
            rows.push_back({y + rng.uniform(0.0, 0.5), rng.uniform()});
            labels.push_back(y);
        }
        const Dataset d = tiny_dataset(std::move(rows), std::move(labels));
        TrainConfig cfg = loose_config();
        cfg.rounds = 15;
        cfg.lambda = 1.0;
        const BoostedEnsemble model = boost(d, cfg);
        CHECK(model.layout == ClassLayout::one_vs_rest);
        CHECK(model.boosters.size() == 3);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            correct += model.predict(d.row(i)).predicted_class == d.labels[i] ? 1 : 0;
        }
        CHECK(correct == d.n_rows);
    }
}

TEST_CASE("prediction") {
    SECTION("a single stump gives two probabilities symmetric around the base margin") {
        BoostedEnsemble model;
        model.layout = ClassLayout::binary;
        model.learning_rate = 1.0;
        model.base_score = 0.5;
        model.feature_names = {"f0"};
        Tree stump;
        stump.nodes.push_back(TreeNode{0, 0.5, 1, 2, 0.0});
        stump.nodes.push_back(TreeNode{-1, 0.0, -1, -1, -0.8});
        stump.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 0.8});
        model.boosters = {{stump}};

        const std::vector<double> low = {0.2}, high = {0.9};
        const Prediction pl = model.predict(low);
        const Prediction ph = model.predict(high);
        CHECK(pl.margins[0] == -0.8);
        CHECK(ph.margins[0] == 0.8);
        CHECK_THAT(pl.probabilities[0] + ph.probabilities[0],
                   Catch::Matchers::WithinAbs(1.0, 1e-15));
        CHECK(pl.predicted_class == 0);
        CHECK(ph.predicted_class == 1);
    }

    SECTION("width mismatch is rejected") {
        const Dataset d = separable_dataset(10, 26);
        TrainConfig cfg = loose_config();
        cfg.rounds = 2;
        const BoostedEnsemble model = boost(d, cfg);
        const std::vector<double> narrow = {0.5};
        CHECK_THROWS_AS(model.predict(narrow), std::invalid_argument);
    }

    SECTION("batch prediction equals row-by-row prediction") {
        const Dataset d = separable_dataset(30, 27);
        TrainConfig cfg = loose_config();
        cfg.rounds = 4;
        const BoostedEnsemble model = boost(d, cfg);
        const auto batch = predict_dataset(model, d);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            CHECK(batch[i].margins == model.predict(d.row(i)).margins);
        }
    }
}

TEST_CASE("model serialization round-trips to bit-identical predictions") {
    SECTION("binary model") {
        const Dataset d = separable_dataset(50, 30);
        TrainConfig cfg;
        cfg.rounds = 8;
        const BoostedEnsemble model = train_model(d, cfg);

        std::stringstream ss;
        save_model(ss, model);
        const BoostedEnsemble back = load_model(ss);
        CHECK(back.feature_names == model.feature_names);
        CHECK(back.n_classes == model.n_classes);
        REQUIRE(back.stats.has_value());
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            const Prediction a = model.predict(d.row(i));
            const Prediction b = back.predict(d.row(i));
            CHECK(a.margins == b.margins);
            CHECK(a.probabilities == b.probabilities);
            CHECK(a.predicted_class == b.predicted_class);
        }
    }

    SECTION("three-class model") {
        Rng rng(31);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) {
            rows.push_back({(i % 3) + rng.uniform(), rng.uniform(-3.0, 3.0)});
            labels.push_back(i % 3);
        }
        const Dataset d = tiny_dataset(std::move(rows), std::move(labels));
        TrainConfig cfg;
        cfg.rounds = 6;
        const BoostedEnsemble model = train_model(d, cfg);
        std::stringstream ss;
        save_model(ss, model);
        const BoostedEnsemble back = load_model(ss);
        REQUIRE(back.boosters.size() == 3);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
            CHECK(model.predict(d.row(i)).margins == back.predict(d.row(i)).margins);
        }
    }

    SECTION("malformed files are rejected") {
        std::stringstream not_a_model("hello world");
        CHECK_THROWS(load_model(not_a_model));
        std::stringstream wrong_version("agentgate_model v99\n");
        CHECK_THROWS(load_model(wrong_version));
        std::stringstream truncated("agentgate_model v1\nlearning_rate 0.3\n");
        CHECK_THROWS(load_model(truncated));
    }
}
