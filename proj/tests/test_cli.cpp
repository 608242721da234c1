// Exercises the installed command-line binary end to end via std::system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#ifndef TIMEGRAPHS_CLI
#error "TIMEGRAPHS_CLI must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() /
              ("tg_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& workdir) {
    std::string cmd = "cd " + workdir + " && " + std::string(TIMEGRAPHS_CLI) + " " + args +
                      " >cli_stdout.txt 2>cli_stderr.txt";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

nlohmann::json tiny_config() {
    return {{"seed", 3},
            {"sim_sequences", 12},
            {"sim_frames", 16},
            {"sim_agents", 4},
            {"window_frames", 16},
            {"window_stride", 16},
            {"model_embed_dim", 8},
            {"classifier_hidden_dim", 8},
            {"optimizer_epochs", 2},
            {"optimizer_pretrain_epochs", 1}};
}

}  // namespace

TEST_CASE("config init emits a parsable default config") {
    Workspace ws;
    CHECK(run("config init --out cfg.json", ws.dir.string()) == 0);
    auto j = nlohmann::json::parse(slurp(ws.path("cfg.json")));
    CHECK(j.contains("optimizer_lr"));
    CHECK(j.at("optimizer_lr").get<double>() == 0.001);
    CHECK(j.at("optimizer_batch_size").get<int>() == 32);
}

TEST_CASE("unknown config keys fail with a machine-readable error") {
    Workspace ws;
    write_file(ws.path("bad.json"), "{\"not_a_key\": 1}");
    CHECK(run("simulate --config bad.json --out data", ws.dir.string()) == 1);
    auto err = nlohmann::json::parse(slurp(ws.path("cli_stderr.txt")));
    CHECK(err.at("kind") == "config");
    CHECK(err.at("error").get<std::string>().find("not_a_key") != std::string::npos);
}

TEST_CASE("missing files fail with nonzero exit") {
    Workspace ws;
    CHECK(run("build-graph --in nope.jsonl --out x.json", ws.dir.string()) != 0);
    auto err = nlohmann::json::parse(slurp(ws.path("cli_stderr.txt")));
    CHECK(err.contains("error"));
}

TEST_CASE("simulate twice is byte-identical; different seeds differ") {
    Workspace ws;
    write_file(ws.path("cfg.json"), tiny_config().dump());
    REQUIRE(run("simulate --config cfg.json --out a", ws.dir.string()) == 0);
    REQUIRE(run("simulate --config cfg.json --out b", ws.dir.string()) == 0);
    CHECK(slurp(ws.path("a/snapshots.jsonl")) == slurp(ws.path("b/snapshots.jsonl")));
    CHECK(slurp(ws.path("a/labels.jsonl")) == slurp(ws.path("b/labels.jsonl")));
    CHECK(slurp(ws.path("a/manifest.json")) == slurp(ws.path("b/manifest.json")));

    REQUIRE(run("--seed 99 simulate --config cfg.json --out c", ws.dir.string()) == 0);
    CHECK(slurp(ws.path("a/snapshots.jsonl")) != slurp(ws.path("c/snapshots.jsonl")));
}

TEST_CASE("build-graph stream and batch agree byte for byte") {
    Workspace ws;
    write_file(ws.path("cfg.json"), tiny_config().dump());
    REQUIRE(run("simulate --config cfg.json --out data", ws.dir.string()) == 0);
    // Extract the first sequence (16 frames).
    std::istringstream in(slurp(ws.path("data/snapshots.jsonl")));
    std::ostringstream head;
    std::string line;
    for (int i = 0; i < 16 && std::getline(in, line); ++i) head << line << "\n";
    write_file(ws.path("seq.jsonl"), head.str());

    REQUIRE(run("build-graph --in seq.jsonl --out batch.json", ws.dir.string()) == 0);
    REQUIRE(run("build-graph --in seq.jsonl --out stream.json --stream", ws.dir.string()) == 0);
    CHECK(slurp(ws.path("batch.json")) == slurp(ws.path("stream.json")));
    auto j = nlohmann::json::parse(slurp(ws.path("batch.json")));
    CHECK(j.at("format_version") == 1);
    CHECK(j.contains("config_hash"));
}

TEST_CASE("gradcheck exits zero with small errors") {
    Workspace ws;
    CHECK(run("gradcheck", ws.dir.string()) == 0);
    std::istringstream out(slurp(ws.path("cli_stdout.txt")));
    std::string line;
    int rows = 0;
    while (std::getline(out, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.value("event", "") == "gradcheck") {
            ++rows;
            CHECK(j.at("max_rel_error").get<double>() < 1e-4);
        }
    }
    CHECK(rows == 3);
}

TEST_CASE("full pipeline through the CLI with deterministic reports") {
    Workspace ws;
    write_file(ws.path("cfg.json"), tiny_config().dump());
    REQUIRE(run("simulate --config cfg.json --out data", ws.dir.string()) == 0);
    REQUIRE(run("pretrain --config cfg.json --data data --out pre", ws.dir.string()) == 0);
    REQUIRE(run("train --config cfg.json --data data --event-checkpoint pre/event.json --out tp",
                ws.dir.string()) == 0);
    REQUIRE(run("train --config cfg.json --data data --ablation no-supernodes --out flat",
                ws.dir.string()) == 0);

    REQUIRE(run("eval --config cfg.json --data data --checkpoint tp/model.json "
                "--checkpoint flat/model.json --experiment main --out ev1",
                ws.dir.string()) == 0);
    REQUIRE(run("eval --config cfg.json --data data --checkpoint tp/model.json "
                "--checkpoint flat/model.json --experiment main --out ev2",
                ws.dir.string()) == 0);
    CHECK(slurp(ws.path("ev1/report.json")) == slurp(ws.path("ev2/report.json")));

    auto report = nlohmann::json::parse(slurp(ws.path("ev1/report.json")));
    CHECK(report.at("rows").size() == 2);
    CHECK(report.contains("config_hash"));

    // Growing and future experiments produce their curve artifacts.
    REQUIRE(run("eval --config cfg.json --data data --checkpoint tp/model.json "
                "--experiment growing --out gw",
                ws.dir.string()) == 0);
    CHECK(fs::exists(ws.path("gw/curve.svg")));
    REQUIRE(run("eval --config cfg.json --data data --checkpoint tp/model.json "
                "--experiment future --offsets 0 --offsets 2 --out fut",
                ws.dir.string()) == 0);
    auto sweep = nlohmann::json::parse(slurp(ws.path("fut/report.json")));
    CHECK(sweep.at("sweep").size() == 2);
}

TEST_CASE("eval on a one-test-sequence dataset reports sample count 1") {
    Workspace ws;
    auto cfg = tiny_config();
    cfg["sim_sequences"] = 10;  // 7:2:1 split -> exactly one test sequence
    write_file(ws.path("cfg.json"), cfg.dump());
    REQUIRE(run("simulate --config cfg.json --out data", ws.dir.string()) == 0);
    REQUIRE(run("pretrain --config cfg.json --data data --out pre", ws.dir.string()) == 0);
    REQUIRE(run("train --config cfg.json --data data --event-checkpoint pre/event.json --out tp",
                ws.dir.string()) == 0);
    REQUIRE(run("eval --config cfg.json --data data --checkpoint tp/model.json "
                "--experiment main --out ev",
                ws.dir.string()) == 0);
    auto report = nlohmann::json::parse(slurp(ws.path("ev/report.json")));
    CHECK(report.at("rows")[0].at("samples").get<int>() == 1);
}

TEST_CASE("environment overrides reach the config") {
    Workspace ws;
    write_file(ws.path("cfg.json"), tiny_config().dump());
    std::string cmd = "cd " + ws.dir.string() + " && TIMEGRAPHS_SIM_SEQUENCES=8 " +
                      std::string(TIMEGRAPHS_CLI) +
                      " simulate --config cfg.json --out data >out.txt 2>err.txt";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    std::istringstream lines(slurp(ws.path("out.txt")));
    std::string first;
    std::getline(lines, first);
    auto j = nlohmann::json::parse(first);
    CHECK(j.at("sequences").get<int>() == 8);

    std::string bad = "cd " + ws.dir.string() + " && TIMEGRAPHS_NOPE=1 " +
                      std::string(TIMEGRAPHS_CLI) +
                      " simulate --config cfg.json --out data2 >out2.txt 2>err2.txt";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
}
