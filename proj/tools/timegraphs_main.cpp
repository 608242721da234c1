// Command-line entry point: simulation, graph building, pretraining,
// training, evaluation, and gradient diagnostics. One command per process;
// every command is reproducible from (config, seed, input files) and each
// output document embeds the config hash.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "timegraphs/builder.hpp"
#include "timegraphs/checkpoint.hpp"
#include "timegraphs/config.hpp"
#include "timegraphs/dataset.hpp"
#include "timegraphs/diagnostics.hpp"
#include "timegraphs/error.hpp"
#include "timegraphs/experiments.hpp"
#include "timegraphs/simulator.hpp"
#include "timegraphs/training.hpp"

namespace fs = std::filesystem;
using namespace timegraphs;

namespace {

void log_line(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

RunConfig load_config(const std::string& path, std::optional<uint64_t> seed_override) {
    RunConfig cfg;
    if (!path.empty()) cfg = RunConfig::from_json(read_json_file(path));
    cfg.apply_env_overrides();
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();
    return cfg;
}

Dataset load_data_dir(const fs::path& dir, const RunConfig& cfg) {
    return load_dataset((dir / "snapshots.jsonl").string(), (dir / "labels.jsonl").string(),
                        cfg.label_categories);
}

struct SplitWindows {
    std::vector<PreparedWindow> train, val, test;
    std::vector<std::string> categories;
    SplitResult splits;
};

SplitWindows split_and_prepare(const Dataset& ds, const RunConfig& cfg) {
    SplitWindows out;
    out.splits = split(ds, cfg.split_ratios, cfg.seed);
    for (const auto& w : out.splits.warnings) log_line({{"event", "warning"}, {"message", w}});
    out.train = prepare_windows(out.splits.train, cfg);
    out.val = prepare_windows(out.splits.val, cfg);
    out.test = prepare_windows(out.splits.test, cfg);
    out.categories = ds.categories;
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open for writing: " + path.string());
    f << text;
}

int cmd_config_init(const std::string& out_path) {
    RunConfig cfg;
    nlohmann::json j = cfg.to_json();
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(out_path, j);
        log_line({{"event", "config_written"}, {"path", out_path}});
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Dataset ds = simulate(cfg.simulator());
    fs::path dir(out_dir);
    write_dataset(ds, (dir / "snapshots.jsonl").string(), (dir / "labels.jsonl").string());
    nlohmann::json manifest = sim_manifest(cfg.simulator());
    manifest["run_config_hash"] = cfg.hash();
    write_json_file((dir / "manifest.json").string(), manifest);
    log_line({{"event", "simulated"},
              {"sequences", static_cast<int>(ds.sequences.size())},
              {"categories", ds.categories},
              {"out", out_dir},
              {"config_hash", cfg.hash()}});
    return 0;
}

int cmd_build_graph(const RunConfig& cfg, const std::string& in_path, const std::string& out_path,
                    bool stream) {
    auto snapshots = read_snapshot_jsonl_file(in_path);
    TemporalKnowledgeGraph tkg;
    if (stream) {
        StreamingBuilder builder(cfg.builder());
        for (const auto& snap : snapshots) builder.ingest(snap);
        tkg = builder.graph();
    } else {
        tkg = build_level0(snapshots, cfg.builder());
    }
    auto violations = validate(tkg);
    if (!violations.empty())
        throw schema_error("built TKG failed validation: " + violations.front());
    nlohmann::json j = tkg_to_json(tkg);
    j["config_hash"] = cfg.hash();
    write_json_file(out_path, j);
    log_line({{"event", "graph_built"},
              {"stream", stream},
              {"nodes", static_cast<int>(tkg.nodes.size())},
              {"edges", static_cast<int>(tkg.edges.size())},
              {"out", out_path}});
    return 0;
}

int cmd_pretrain(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Dataset ds = load_data_dir(data_dir, cfg);
    SplitWindows sw = split_and_prepare(ds, cfg);
    std::ofstream curve((fs::path(out_dir) / "pretrain_log.jsonl").string());
    LogSink sink = [&curve](const nlohmann::json& j) {
        log_line(j);
        curve << j.dump() << "\n";
    };
    EventCheckpoint ck = pretrain_event_model(sw.train, cfg, sink);
    write_json_file((fs::path(out_dir) / "event.json").string(), ck.to_json());
    log_line({{"event", "pretrained"},
              {"out", (fs::path(out_dir) / "event.json").string()},
              {"config_hash", cfg.hash()}});
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data_dir, const std::string& event_path,
              const std::string& out_dir) {
    fs::create_directories(out_dir);
    Dataset ds = load_data_dir(data_dir, cfg);
    SplitWindows sw = split_and_prepare(ds, cfg);
    std::optional<EventCheckpoint> event;
    if (!event_path.empty()) event = EventCheckpoint::from_json(read_json_file(event_path));
    std::ofstream curve((fs::path(out_dir) / "train_log.jsonl").string());
    LogSink sink = [&curve](const nlohmann::json& j) {
        log_line(j);
        curve << j.dump() << "\n";
    };
    ModelBundle bundle = train_two_phase(sw.train, sw.val, event, sw.categories, cfg, sink);
    write_json_file((fs::path(out_dir) / "model.json").string(), bundle.to_json());
    log_line({{"event", "trained"},
              {"out", (fs::path(out_dir) / "model.json").string()},
              {"ablation", cfg.ablation},
              {"config_hash", cfg.hash()}});
    return 0;
}

int cmd_e2e(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Dataset ds = load_data_dir(data_dir, cfg);
    SplitWindows sw = split_and_prepare(ds, cfg);
    std::ofstream curve((fs::path(out_dir) / "e2e_log.jsonl").string());
    LogSink sink = [&curve](const nlohmann::json& j) {
        log_line(j);
        curve << j.dump() << "\n";
    };
    ModelBundle bundle = train_e2e(sw.train, sw.val, sw.categories, cfg, sink);
    write_json_file((fs::path(out_dir) / "model.json").string(), bundle.to_json());
    log_line({{"event", "trained_e2e"},
              {"out", (fs::path(out_dir) / "model.json").string()},
              {"config_hash", cfg.hash()}});
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::vector<std::string>& checkpoint_paths,
             const std::string& data_dir, const std::string& experiment,
             const std::string& out_dir, const std::vector<int>& offsets) {
    if (checkpoint_paths.empty()) throw config_error("eval: at least one --checkpoint required");
    fs::create_directories(out_dir);
    Dataset ds = load_data_dir(data_dir, cfg);
    SplitResult splits = split(ds, cfg.split_ratios, cfg.seed);

    std::vector<ModelBundle> bundles;
    for (const auto& path : checkpoint_paths)
        bundles.push_back(ModelBundle::from_json(read_json_file(path)));

    nlohmann::json report;
    report["experiment"] = experiment;
    report["config_hash"] = cfg.hash();
    std::string table;

    if (experiment == "main" || experiment == "ablation") {
        auto test = prepare_windows(splits.test, cfg);
        std::vector<std::pair<std::string, ModelBundle*>> arms;
        for (size_t i = 0; i < bundles.size(); ++i) {
            std::string name = fs::path(checkpoint_paths[i]).stem().string();
            if (bundles[i].ablation != "none") name += "(" + bundles[i].ablation + ")";
            arms.emplace_back(name, &bundles[i]);
        }
        auto rows = run_main_eval(arms, test);
        report["rows"] = arms_to_json(rows);
        table = arms_to_table(rows);
    } else if (experiment == "growing") {
        auto curve = run_growing_window(bundles.front(), splits.test, cfg);
        report["curve"] = curve_to_json(curve);
        std::vector<std::pair<double, double>> pts;
        for (const auto& pt : curve) pts.emplace_back(pt.prefix_len, pt.accuracy);
        write_text(fs::path(out_dir) / "curve.svg",
                   curve_to_svg(pts, "prefix length (frames)", "exact match"));
        std::ostringstream os;
        os << "prefix_len accuracy macro_f1 samples\n";
        for (const auto& pt : curve)
            os << pt.prefix_len << " " << pt.accuracy << " " << pt.macro_f1 << " " << pt.samples
               << "\n";
        table = os.str();
    } else if (experiment == "future") {
        auto sweep = run_future_sweep(bundles.front(), splits.test, cfg,
                                      offsets.empty() ? std::vector<int>{0, 2, 4, 8} : offsets);
        report["sweep"] = sweep_to_json(sweep);
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : sweep) pts.emplace_back(row.offset, row.report.macro_f1);
        write_text(fs::path(out_dir) / "sweep.svg",
                   curve_to_svg(pts, "future offset (frames)", "macro F1"));
        std::ostringstream os;
        os << "offset f1 precision recall em map\n";
        for (const auto& row : sweep)
            os << row.offset << " " << row.report.macro_f1 << " " << row.report.macro_precision
               << " " << row.report.macro_recall << " " << row.report.exact_match << " "
               << row.report.map << "\n";
        table = os.str();
    } else {
        throw config_error("eval: unknown experiment " + experiment);
    }

    write_json_file((fs::path(out_dir) / "report.json").string(), report);
    write_text(fs::path(out_dir) / "report.txt", table);
    std::cout << table;
    log_line({{"event", "evaluated"}, {"experiment", experiment}, {"out", out_dir}});
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
    auto rows = run_gradcheck_suite(cfg.seed);
    bool ok = true;
    for (const auto& row : rows) {
        log_line({{"event", "gradcheck"},
                  {"loss", row.loss},
                  {"max_rel_error", row.max_rel_error},
                  {"params_checked", row.checked},
                  {"seconds", row.seconds}});
        if (row.max_rel_error >= 1e-4) ok = false;
    }
    if (!ok) throw numeric_error("gradient check failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TimeGraphs: hierarchical temporal knowledge graphs for event recognition"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_dir, in_path, event_path, experiment = "main";
    std::vector<std::string> checkpoints;
    std::vector<int> offsets;
    bool stream = false;
    std::optional<uint64_t> seed;
    std::string ablation;

    app.add_option("--seed", seed, "Override the config seed");

    auto* c_init = app.add_subcommand("config", "Configuration utilities");
    auto* c_init_init = c_init->add_subcommand("init", "Emit a config with full defaults");
    c_init_init->add_option("--out", out_path, "Write to a file instead of stdout");

    auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic labeled dataset");
    c_sim->add_option("--config", config_path, "Config JSON path");
    c_sim->add_option("--out", out_path, "Output directory")->required();

    auto* c_build = app.add_subcommand("build-graph", "Build the level-0 temporal knowledge graph");
    c_build->add_option("--config", config_path, "Config JSON path");
    c_build->add_option("--in", in_path, "Snapshot JSONL input")->required();
    c_build->add_option("--out", out_path, "TKG JSON output")->required();
    c_build->add_flag("--stream", stream, "Use the incremental builder");

    auto* c_pre = app.add_subcommand("pretrain", "Self-supervised event-model pretraining");
    c_pre->add_option("--config", config_path, "Config JSON path");
    c_pre->add_option("--data", data_dir, "Dataset directory")->required();
    c_pre->add_option("--out", out_path, "Output directory")->required();

    auto* c_train = app.add_subcommand("train", "Fine-tune the classifier (two-phase)");
    c_train->add_option("--config", config_path, "Config JSON path");
    c_train->add_option("--data", data_dir, "Dataset directory")->required();
    c_train->add_option("--event-checkpoint", event_path, "Pretrained event model");
    c_train->add_option("--out", out_path, "Output directory")->required();
    c_train->add_option("--ablation", ablation, "none | no-supernodes | no-temporal");

    auto* c_e2e = app.add_subcommand("e2e", "Joint end-to-end training");
    c_e2e->add_option("--config", config_path, "Config JSON path");
    c_e2e->add_option("--data", data_dir, "Dataset directory")->required();
    c_e2e->add_option("--out", out_path, "Output directory")->required();

    auto* c_eval = app.add_subcommand("eval", "Evaluate checkpoints");
    c_eval->add_option("--config", config_path, "Config JSON path");
    c_eval->add_option("--checkpoint", checkpoints, "Model bundle path (repeatable)")->required();
    c_eval->add_option("--data", data_dir, "Dataset directory")->required();
    c_eval->add_option("--experiment", experiment, "main | growing | future | ablation");
    c_eval->add_option("--offsets", offsets, "Future offsets in frames");
    c_eval->add_option("--out", out_path, "Output directory")->required();

    auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference checks of all losses");
    c_grad->add_option("--config", config_path, "Config JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_init_init->parsed()) return cmd_config_init(out_path);
        RunConfig cfg = load_config(config_path, seed);
        if (!ablation.empty()) {
            cfg.ablation = ablation;
            cfg.validate();
        }
        if (c_sim->parsed()) return cmd_simulate(cfg, out_path);
        if (c_build->parsed()) return cmd_build_graph(cfg, in_path, out_path, stream);
        if (c_pre->parsed()) return cmd_pretrain(cfg, data_dir, out_path);
        if (c_train->parsed()) return cmd_train(cfg, data_dir, event_path, out_path);
        if (c_e2e->parsed()) return cmd_e2e(cfg, data_dir, out_path);
        if (c_eval->parsed())
            return cmd_eval(cfg, checkpoints, data_dir, experiment, out_path, offsets);
        if (c_grad->parsed()) return cmd_gradcheck(cfg);
        std::cerr << nlohmann::json({{"error", "no command"}, {"kind", "usage"}}).dump() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << nlohmann::json({{"error", e.what()}, {"kind", e.kind()}}).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json({{"error", e.what()}, {"kind", "internal"}}).dump() << "\n";
        return 1;
    }
}
