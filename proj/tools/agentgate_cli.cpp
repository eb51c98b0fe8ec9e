// Command-line surface for the toolkit. Subcommands cover the whole desk
// workflow: generate a synthetic population, assess it into a feature
// dataset, train/predict/evaluate the classifier, run parameter sweeps and
// scale studies, drive the full gatekeeper simulation and merge metric
// reports. Exit codes: 0 success, 2 usage error, 3 missing file,
// 4 malformed config or input, 1 anything else.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agentgate/config.hpp"
#include "agentgate/experiments.hpp"
#include "agentgate/io.hpp"

namespace fs = std::filesystem;
using namespace agentgate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitMalformed = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed = -1; // -1: keep the config's seed
};

AppConfig load_or_default(const CommonArgs& args) {
    AppConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    if (args.seed >= 0) cfg.synth.seed = static_cast<std::uint64_t>(args.seed);
    cfg.validate();
    return cfg;
}

fs::path ensure_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    for (const auto& tok : io::split(csv, ',')) {
        grid.push_back(io::parse_double(tok, "grid value"));
    }
    return grid;
}

// Profiles, permissible sets and pending requests keyed and aligned by
// agent id. Agents without a pending request are skipped; a missing
// permissible set means an empty one.
struct AlignedPopulation {
    std::vector<AgentProfile> profiles;
    std::vector<PermissibleSet> pdos;
    std::vector<DataAccessRequest> requests;
};

AlignedPopulation align_population(std::vector<AgentProfile> profiles,
                                   std::vector<PermissibleSet> pdos,
                                   std::vector<DataAccessRequest> requests) {
    std::map<AgentId, PermissibleSet> pdo_by_id;
    for (auto& p : pdos) pdo_by_id[p.agent_id] = std::move(p);
    std::map<AgentId, DataAccessRequest> req_by_id;
    for (auto& r : requests) {
        if (!req_by_id.emplace(r.agent_id, std::move(r)).second) {
            throw ParseError("multiple pending requests for one agent");
        }
    }

    AlignedPopulation out;
    for (auto& profile : profiles) {
        const auto rit = req_by_id.find(profile.agent_id);
        if (rit == req_by_id.end()) continue;
        const auto pit = pdo_by_id.find(profile.agent_id);
        PermissibleSet pdo;
        pdo.agent_id = profile.agent_id;
        if (pit != pdo_by_id.end()) pdo = pit->second;
        out.requests.push_back(rit->second);
        out.pdos.push_back(std::move(pdo));
        out.profiles.push_back(std::move(profile));
    }
    if (out.profiles.empty()) throw ParseError("no agent has a pending request to assess");
    return out;
}

void write_sweep_table(std::ostream& os, const SweepResult& sweep) {
    os << sweep.parameter << ",train_accuracy,test_accuracy,gap\n";
    for (const auto& p : sweep.points) {
        os << format_double(p.value) << "," << format_double(p.train_accuracy) << ","
           << format_double(p.test_accuracy) << "," << format_double(p.gap()) << "\n";
    }
}

int cmd_generate(const CommonArgs& args) {
    const AppConfig cfg = load_or_default(args);
    const SyntheticWorld world = generate(cfg.synth);
    const fs::path dir = ensure_out_dir(args);

    {
        auto os = io::open_output(dir / "profiles.txt");
        io::write_profiles(os, world.profiles);
    }
    {
        auto os = io::open_output(dir / "events.csv");
        io::write_events(os, world.events);
    }
    {
        auto os = io::open_output(dir / "pdos.csv");
        io::write_pdos(os, world.pdos);
    }
    {
        auto os = io::open_output(dir / "objects.csv");
        io::write_objects(os, world.catalog);
    }
    {
        auto os = io::open_output(dir / "requests.csv");
        io::write_requests(os, world.requests);
    }

    std::int64_t per_class[3] = {0, 0, 0};
    for (const auto& p : world.profiles) {
        if (p.true_class) ++per_class[*p.true_class];
    }
    std::cout << "generated " << world.profiles.size() << " agents (" << per_class[0]
              << " non-malicious, " << per_class[1] << " malicious, " << per_class[2]
              << " unknown), " << world.events.size() << " events -> " << dir.string() << "\n";
    return kExitOk;
}

int cmd_assess(const CommonArgs& args, const std::string& agents_path,
               const std::string& events_path, const std::string& pdos_path,
               const std::string& requests_path) {
    const AppConfig cfg = load_or_default(args);

    auto profiles = [&] {
        auto in = io::open_input(agents_path);
        return io::read_profiles(in);
    }();
    {
        auto in = io::open_input(events_path);
        io::attach_histories(profiles, io::read_events(in));
    }
    auto pdos = [&] {
        auto in = io::open_input(pdos_path);
        return io::read_pdos(in);
    }();
    auto requests = [&] {
        auto in = io::open_input(requests_path);
        return io::read_requests(in);
    }();

    AlignedPopulation pop =
        align_population(std::move(profiles), std::move(pdos), std::move(requests));
    const FeatureSchema schema = FeatureSchema::from_profiles(pop.profiles);
    const AssessedPopulation assessed =
        build_feature_dataset(pop.profiles, pop.pdos, pop.requests, cfg.thresholds, schema);

    const fs::path dir = ensure_out_dir(args);
    {
        auto os = io::open_output(dir / "dataset.csv");
        io::write_dataset(os, assessed.dataset);
    }
    {
        auto os = io::open_output(dir / "assessments.csv");
        io::write_assessments(os, assessed.dataset.row_ids, pop.requests, assessed.assessments);
    }
    std::cout << "assessed " << assessed.dataset.n_rows << " agents, "
              << assessed.dataset.n_cols << " features -> " << dir.string() << "\n";
    return kExitOk;
}

int cmd_train(const CommonArgs& args, const std::string& data_path) {
    const AppConfig cfg = load_or_default(args);
    auto in = io::open_input(data_path);
    const Dataset raw = io::read_dataset(in);
    if (!raw.labeled()) throw ParseError("training dataset must be fully labeled");

    const BoostedEnsemble model = train_model(raw, cfg.train);
    const fs::path dir = ensure_out_dir(args);
    {
        auto os = io::open_output(dir / "model.txt");
        save_model(os, model);
    }
    {
        auto os = io::open_output(dir / "normalization.txt");
        io::write_normalization(os, model.feature_names, *model.stats);
    }
    std::cout << "trained " << model.boosters.size() << " booster(s) x " << cfg.train.rounds
              << " rounds on " << raw.n_rows << " rows -> " << (dir / "model.txt").string() << "\n";
    return kExitOk;
}

int cmd_predict(const CommonArgs& args, const std::string& model_path,
                const std::string& data_path) {
    auto min = io::open_input(model_path);
    const BoostedEnsemble model = load_model(min);
    auto din = io::open_input(data_path);
    const Dataset raw = io::read_dataset(din);
    if (raw.feature_names != model.feature_names) {
        throw ParseError("dataset feature names do not match the model");
    }

    const fs::path dir = ensure_out_dir(args);
    auto os = io::open_output(dir / "predictions.csv");
    os << "agent_id,predicted_class";
    for (std::size_t c = 0; c < model.n_boosters(); ++c) os << ",probability" << c;
    os << "\n";
    for (std::size_t i = 0; i < raw.n_rows; ++i) {
        const Prediction p = model.predict(raw.row(i));
        os << raw.row_ids[i] << "," << p.predicted_class;
        for (const double prob : p.probabilities) os << "," << format_double(prob);
        os << "\n";
    }
    std::cout << "predicted " << raw.n_rows << " rows -> " << (dir / "predictions.csv").string()
              << "\n";
    return kExitOk;
}

int cmd_eval(const CommonArgs& args, const std::string& model_path, const std::string& data_path,
             std::int64_t scale, const std::string& grid_csv, int n_seeds) {
    const fs::path dir = ensure_out_dir(args);

    if (!model_path.empty() || !data_path.empty()) {
        if (model_path.empty() || data_path.empty()) {
            throw CLI::ValidationError("eval", "--model and --data must be given together");
        }
        auto min = io::open_input(model_path);
        const BoostedEnsemble model = load_model(min);
        auto din = io::open_input(data_path);
        const Dataset raw = io::read_dataset(din);
        if (!raw.labeled()) throw ParseError("evaluation dataset must be labeled");
        const MetricsReport report = evaluate(model, raw, std::max(model.n_classes, raw.n_classes()));
        auto os = io::open_output(dir / "metrics.csv");
        io::write_metrics(os, report);
        std::cout << "accuracy " << format_double(report.accuracy) << ", success_rate "
                  << format_double(report.success_rate) << " -> " << (dir / "metrics.csv").string()
                  << "\n";
        return kExitOk;
    }

    // Scale-study mode.
    const AppConfig cfg = load_or_default(args);
    std::vector<std::int64_t> scales;
    if (scale > 0) {
        scales.push_back(scale);
    } else if (!grid_csv.empty()) {
        for (const auto& tok : io::split(grid_csv, ',')) {
            scales.push_back(io::parse_int(tok, "scale"));
        }
    } else {
        throw CLI::ValidationError("eval", "give either --model/--data or --scale/--grid");
    }

    const auto [results, summaries] = run_scale_experiment(cfg, scales, n_seeds);
    {
        auto os = io::open_output(dir / "scale_results.csv");
        os << "n_agents,seed,accuracy,precision,recall,f1,success_rate\n";
        for (const auto& r : results) {
            os << r.n_agents << "," << r.seed << "," << format_double(r.report.accuracy) << ","
               << format_double(r.report.precision) << "," << format_double(r.report.recall) << ","
               << format_double(r.report.f1) << "," << format_double(r.report.success_rate)
               << "\n";
        }
    }
    {
        auto os = io::open_output(dir / "scale_summary.csv");
        os << "n_agents,accuracy_mean,accuracy_min,accuracy_max,precision_mean,recall_mean,"
              "f1_mean,success_mean,success_min,success_max\n";
        for (const auto& s : summaries) {
            os << s.n_agents << "," << format_double(s.mean) << "," << format_double(s.min) << ","
               << format_double(s.max) << "," << format_double(s.mean_precision) << ","
               << format_double(s.mean_recall) << "," << format_double(s.mean_f1) << ","
               << format_double(s.mean_success) << "," << format_double(s.min_success) << ","
               << format_double(s.max_success) << "\n";
        }
    }
    std::cout << "scale study over " << scales.size() << " scale(s) x " << n_seeds
              << " seed(s) -> " << dir.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& param, const std::string& grid_csv,
              const std::string& data_path, const std::string& lr_grid_csv) {
    const AppConfig cfg = load_or_default(args);

    Dataset raw;
    if (!data_path.empty()) {
        auto in = io::open_input(data_path);
        raw = io::read_dataset(in);
    } else {
        const SyntheticWorld world = generate(cfg.synth);
        const FeatureSchema schema = FeatureSchema::from_profiles(world.profiles);
        raw = build_feature_dataset(world.profiles, world.pdos, world.requests, cfg.thresholds,
                                    schema)
                  .dataset;
    }
    if (!raw.labeled()) throw ParseError("sweep dataset must be labeled");

    const std::vector<double> grid = parse_grid(grid_csv);
    const SplitSpec split_spec{cfg.train_fraction, cfg.synth.seed};
    const fs::path dir = ensure_out_dir(args);

    if (param == "learning_rate") {
        const SweepResult sweep = run_lr_sweep(raw, cfg.train, grid, split_spec);
        auto os = io::open_output(dir / "sweep_learning_rate.csv");
        write_sweep_table(os, sweep);
        std::cout << "learning-rate sweep over " << grid.size() << " points -> "
                  << (dir / "sweep_learning_rate.csv").string() << "\n";
    } else if (param == "min_child_weight") {
        std::vector<double> lr_grid = lr_grid_csv.empty()
                                          ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5,
                                                                0.6, 0.7, 0.8, 0.9, 1.0}
                                          : parse_grid(lr_grid_csv);
        const auto tables = run_weight_sweep(raw, cfg.train, grid, lr_grid, split_spec);
        for (const auto& t : tables) {
            const fs::path path =
                dir / ("sweep_min_child_weight_" + format_double(t.min_child_weight) + ".csv");
            auto os = io::open_output(path);
            write_sweep_table(os, t.lr_sweep);
        }
        std::cout << "min-child-weight sweep: " << tables.size() << " table(s) -> " << dir.string()
                  << "\n";
    } else {
        throw CLI::ValidationError("sweep",
                                   "--param must be learning_rate or min_child_weight");
    }
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    const AppConfig cfg = load_or_default(args);
    const SimulationResult sim = run_simulation(cfg);
    const fs::path dir = ensure_out_dir(args);

    {
        auto os = io::open_output(dir / "decisions.csv");
        os << io::kDecisionHeader << "\n";
        for (const auto& [interval, d] : sim.decisions) {
            io::write_decision_row(os, interval, d);
        }
    }
    {
        auto os = io::open_output(dir / "knowledge.log");
        io::write_knowledge_log(os, sim.store, sim.schema.feature_names());
    }
    {
        auto os = io::open_output(dir / "metrics.csv");
        io::write_metrics(os, sim.metrics, "simulation");
    }
    {
        auto os = io::open_output(dir / "model.txt");
        save_model(os, sim.model);
    }
    {
        auto os = io::open_output(dir / "retrains.csv");
        os << "interval,status\n";
        for (const auto& ev : sim.retrains) {
            const char* status = ev.status == RetrainStatus::retrained ? "retrained"
                                 : ev.status == RetrainStatus::skipped_insufficient_rows
                                     ? "skipped_insufficient_rows"
                                     : "skipped_single_class";
            os << ev.interval << "," << status << "\n";
        }
    }

    std::size_t granted = 0;
    for (const auto& [interval, d] : sim.decisions) granted += d.granted ? 1 : 0;
    std::cout << "simulated " << cfg.sim_intervals << " intervals: " << sim.decisions.size()
              << " decisions (" << granted << " granted), " << sim.retrains.size()
              << " retrain checks, accuracy " << format_double(sim.metrics.accuracy) << " -> "
              << dir.string() << "\n";
    return kExitOk;
}

int cmd_report(const CommonArgs& args, const std::string& metrics_path,
               const std::string& baselines_path) {
    const AppConfig cfg = load_or_default(args);

    auto in = io::open_input(metrics_path);
    std::map<std::string, std::string> metrics;
    std::string line;
    if (!std::getline(in, line) || line != "metric,value") {
        throw ParseError("metrics file: bad header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = io::split(line, ',');
        if (f.size() >= 2) metrics[f[0]] = f[1];
    }
    for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
        if (!metrics.count(key)) throw ParseError(std::string("metrics file: missing ") + key);
    }

    const fs::path dir = ensure_out_dir(args);
    auto os = io::open_output(dir / "report.csv");
    os << "model,accuracy,precision,recall,f1\n";
    os << "this_run," << metrics["accuracy"] << "," << metrics["precision"] << ","
       << metrics["recall"] << "," << metrics["f1"] << "\n";
    os << "reference_target," << format_double(cfg.target_accuracy) << ","
       << format_double(cfg.target_precision) << "," << format_double(cfg.target_recall) << ","
       << format_double(cfg.target_f1) << "\n";

    if (!baselines_path.empty()) {
        auto bin = io::open_input(baselines_path);
        std::string bline;
        if (!std::getline(bin, bline) || bline != "model,accuracy,precision,recall,f1") {
            throw ParseError("baselines file: header must be model,accuracy,precision,recall,f1");
        }
        while (std::getline(bin, bline)) {
            if (bline.empty()) continue;
            const auto f = io::split(bline, ',');
            if (f.size() != 5) throw ParseError("baselines file: expected 5 columns");
            for (std::size_t j = 1; j < 5; ++j) io::parse_double(f[j], "baseline metric");
            os << bline << "\n";
        }
    }
    std::cout << "report -> " << (dir / "report.csv").string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agentgate: proactive data-access gating toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string agents_path, events_path, pdos_path, requests_path;
    std::string model_path, data_path, metrics_path, baselines_path;
    std::string param, grid_csv, lr_grid_csv;
    std::int64_t scale = 0;
    int n_seeds = 3;

    auto add_common = [&](CLI::App* cmd, bool with_seed = true) {
        cmd->add_option("--config", common.config_path, "configuration file (key = value lines)");
        cmd->add_option("--out", common.out_dir, "output directory")->capture_default_str();
        if (with_seed) cmd->add_option("--seed", common.seed, "override the config seed");
    };

    auto* generate_cmd = app.add_subcommand("generate", "generate a synthetic labeled population");
    add_common(generate_cmd);

    auto* assess_cmd =
        app.add_subcommand("assess", "run the rule engine and emit the feature dataset");
    add_common(assess_cmd, false);
    assess_cmd->add_option("--agents", agents_path, "agent profile file")->required();
    assess_cmd->add_option("--events", events_path, "access event log")->required();
    assess_cmd->add_option("--pdos", pdos_path, "permissible-set file")->required();
    assess_cmd->add_option("--requests", requests_path, "pending request file")->required();

    auto* train_cmd = app.add_subcommand("train", "train the intent classifier");
    add_common(train_cmd, false);
    train_cmd->add_option("--data", data_path, "labeled feature dataset")->required();

    auto* predict_cmd = app.add_subcommand("predict", "score a feature dataset with a model");
    add_common(predict_cmd, false);
    predict_cmd->add_option("--model", model_path, "model file")->required();
    predict_cmd->add_option("--data", data_path, "feature dataset")->required();

    auto* eval_cmd =
        app.add_subcommand("eval", "evaluate a model, or run the population-scale study");
    add_common(eval_cmd);
    eval_cmd->add_option("--model", model_path, "model file");
    eval_cmd->add_option("--data", data_path, "labeled feature dataset");
    eval_cmd->add_option("--scale", scale, "single population scale to study");
    eval_cmd->add_option("--grid", grid_csv, "comma-separated population scales");
    eval_cmd->add_option("--seeds", n_seeds, "trials per scale")->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep with train/test accuracy");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", param, "learning_rate or min_child_weight")->required();
    sweep_cmd->add_option("--grid", grid_csv, "comma-separated grid values")->required();
    sweep_cmd->add_option("--data", data_path, "labeled feature dataset (default: generated)");
    sweep_cmd->add_option("--lr-grid", lr_grid_csv,
                          "learning-rate grid for the min_child_weight sweep");

    auto* simulate_cmd =
        app.add_subcommand("simulate", "run the interval-by-interval gatekeeper loop");
    add_common(simulate_cmd);

    auto* report_cmd = app.add_subcommand("report", "merge metrics with reference and baselines");
    add_common(report_cmd, false);
    report_cmd->add_option("--metrics", metrics_path, "metrics file from eval or simulate")
        ->required();
    report_cmd->add_option("--baselines", baselines_path,
                           "externally supplied baseline numbers to juxtapose");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate_cmd->parsed()) return cmd_generate(common);
        if (assess_cmd->parsed()) {
            return cmd_assess(common, agents_path, events_path, pdos_path, requests_path);
        }
        if (train_cmd->parsed()) return cmd_train(common, data_path);
        if (predict_cmd->parsed()) return cmd_predict(common, model_path, data_path);
        if (eval_cmd->parsed()) {
            return cmd_eval(common, model_path, data_path, scale, grid_csv, n_seeds);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(common, param, grid_csv, data_path, lr_grid_csv);
        }
        if (simulate_cmd->parsed()) return cmd_simulate(common);
        if (report_cmd->parsed()) return cmd_report(common, metrics_path, baselines_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingFile;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
