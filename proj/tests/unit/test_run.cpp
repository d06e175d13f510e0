#include "proofread/error.hpp"
#include "proofread/run.hpp"
#include "proofread/synthetic.hpp"

#include "testkit.hpp"

#include <httplib.h>

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

using namespace proofread;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) { return read_text_file(p); }

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto nl = s.find('\n', pos);
        if (nl == std::string::npos) nl = s.size();
        out.push_back(s.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

// Evaluation corpus, reference corpus and a 40-case manifest in one directory.
struct Workspace {
    testkit::TempDir dir{"proofread-run"};
    fs::path eval = dir / "eval.jsonl";
    fs::path refs = dir / "refs.jsonl";
    fs::path manifest = dir / "manifest.jsonl";

    Workspace() {
        write_corpus(eval, synthetic_corpus({150, 31, "ev"}));
        write_corpus(refs, synthetic_corpus({80, 32, "rf"}));
        const auto corpus = load_corpus(eval);
        write_text_file(manifest,
                        manifest_jsonl(build_benchmark(corpus, SubstitutionLexicon::builtin(), {15, 25, 0.5, 2})));
    }

    static void write_corpus(const fs::path& p, const std::vector<RadiologyReport>& rs) {
        std::string body;
        for (const auto& r : rs) body += nlohmann::json{{"report_id", r.id()}, {"text", r.text()}}.dump() + "\n";
        write_text_file(p, body);
    }

    RunConfig config(const std::string& out, const std::string& mode = "STAGED/MKGD_AND_EXKR") const {
        RunConfig c;
        c.evaluation_corpus = eval.string();
        c.manifest = manifest.string();
        c.reference_corpus = refs.string();
        c.mode = *PipelineMode::parse(mode);
        c.output_dir = (dir / out).string();
        return c;
    }
};

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

}  // namespace

TEST(Run, OracleRunWritesArtifacts) {
    Workspace w;
    const auto out = run_experiment(w.config("oracle"));
    EXPECT_TRUE(out.complete);
    EXPECT_EQ(out.total, 40u);
    ASSERT_TRUE(out.metrics);
    EXPECT_EQ(out.metrics->detection_accuracy, 1.0);
    EXPECT_EQ(*out.metrics->localization_accuracy, 1.0);
    EXPECT_EQ(*out.metrics->correction.agg_nlg, 1.0);
    for (auto f : {"config.jsonl", "verdicts.jsonl", "transcripts.jsonl", "metrics.jsonl", "artifact.jsonl"}) {
        const auto body = slurp(out.dir / f);
        const auto header = nlohmann::json::parse(lines_of(body).at(0));
        EXPECT_EQ(header["version"], kArtifactVersion) << f;
    }
    EXPECT_EQ(lines_of(slurp(out.dir / "verdicts.jsonl")).size(), 41u);
    const auto again = evaluate_artifact(out.dir);
    EXPECT_EQ(report_to_json(again), report_to_json(*out.metrics));
}

TEST(Run, DeterministicAcrossConcurrency) {
    Workspace w;
    auto a = w.config("a");
    auto b = w.config("b");
    a.backend.kind = b.backend.kind = "fuzz";
    a.backend.fuzz_seed = b.backend.fuzz_seed = 5;
    b.concurrency = 4;
    run_experiment(a);
    run_experiment(b);
    // Headers carry the config digest, which includes concurrency; the
    // records below them must not depend on it.
    for (auto f : {"verdicts.jsonl", "transcripts.jsonl", "metrics.jsonl"}) {
        auto fa = lines_of(slurp(fs::path(a.output_dir) / f));
        auto fb = lines_of(slurp(fs::path(b.output_dir) / f));
        ASSERT_FALSE(fa.empty());
        fa.erase(fa.begin());
        fb.erase(fb.begin());
        EXPECT_EQ(fa, fb) << f;
    }
}

TEST(Run, ResumeSkipsCompletedCases) {
    Workspace w;
    auto cfg = w.config("resume");
    cfg.backend.kind = "fuzz";
    RunOptions stop;
    stop.stop_after = 12;
    const auto first = run_experiment(cfg, stop);
    EXPECT_FALSE(first.complete);
    EXPECT_EQ(first.written, 12u);
    // Simulate a torn final line.
    {
        std::ofstream f(fs::path(cfg.output_dir) / "verdicts.jsonl", std::ios::app);
        f << "{\"case_id\": \"case-9";
    }
    RunOptions resume;
    resume.resume = true;
    const auto second = run_experiment(cfg, resume);
    EXPECT_TRUE(second.complete);
    EXPECT_EQ(second.written, 28u);

    auto full = w.config("full");
    full.backend.kind = "fuzz";
    run_experiment(full);
    for (auto f : {"verdicts.jsonl", "transcripts.jsonl", "metrics.jsonl"}) {
        EXPECT_EQ(slurp(fs::path(cfg.output_dir) / f), slurp(fs::path(full.output_dir) / f)) << f;
    }
}

TEST(Run, ResumeRejectsChangedConfig) {
    Workspace w;
    auto cfg = w.config("changed");
    RunOptions stop;
    stop.stop_after = 5;
    run_experiment(cfg, stop);
    cfg.k = 2;
    RunOptions resume;
    resume.resume = true;
    EXPECT_EQ(kind_of([&] { run_experiment(cfg, resume); }), ErrorKind::InvalidConfig);
}

TEST(Run, ReferenceOverlapRejected) {
    Workspace w;
    auto cfg = w.config("overlap");
    cfg.reference_corpus = w.eval.string();
    EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::InvalidConfig);
}

TEST(Run, ConfigRejectsUnknownKeysAndBadValues) {
    EXPECT_EQ(kind_of([] { config_from_json({{"kk", 3}}); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([] { config_from_json({{"backend", {{"kind", "oracle"}, {"api_key", "x"}}}}); }),
              ErrorKind::InvalidConfig);
    RunConfig c;
    c.concurrency = 0;
    EXPECT_THROW(c.validate(), Error);
    const RunConfig d;
    EXPECT_EQ(config_from_json(config_to_json(d)).k, d.k);
}

TEST(Run, NoSecretLeakage) {
    httplib::Server server;
    server.Post("/chat", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"content":"ANSWER: NO"}}]})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Workspace w;
    auto cfg = w.config("http", "STAGED/NONE");
    cfg.backend.kind = "http";
    cfg.backend.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/chat";
    cfg.backend.model = "m";
    cfg.backend.api_key_env = "PROOFREAD_TEST_SECRET";
    const std::string secret = "sk-very-secret-4242";
    setenv("PROOFREAD_TEST_SECRET", secret.c_str(), 1);
    const auto out = run_experiment(cfg);
    unsetenv("PROOFREAD_TEST_SECRET");
    server.stop();
    t.join();

    EXPECT_TRUE(out.complete);
    for (const auto& e : fs::directory_iterator(out.dir)) {
        EXPECT_EQ(slurp(e.path()).find(secret), std::string::npos) << e.path();
    }
}

TEST(Cli, ConfigPrecedence) {
    Workspace w;
    const auto cfg_path = w.dir / "run.json";
    auto base = config_to_json(w.config("unused"));
    base["k"] = 2;
    base["concurrency"] = 2;
    write_text_file(cfg_path, base.dump());

    const auto a = testkit::run_cli({"run", "--config", cfg_path.string(), "--out", (w.dir / "a").string(), "--k", "3"});
    ASSERT_EQ(a.exit_code, 0) << a.output;
    const auto snap_a = nlohmann::json::parse(lines_of(slurp(w.dir / "a" / "config.jsonl")).at(1));
    EXPECT_EQ(snap_a["k"], 3);
    EXPECT_EQ(snap_a["concurrency"], 2);

    const auto b = testkit::run_cli({"run", "--config", cfg_path.string(), "--out", (w.dir / "b").string()});
    ASSERT_EQ(b.exit_code, 0) << b.output;
    const auto snap_b = nlohmann::json::parse(lines_of(slurp(w.dir / "b" / "config.jsonl")).at(1));
    EXPECT_EQ(snap_b["k"], 2);
    EXPECT_EQ(snap_b["timing"], "auto");
}

TEST(Cli, InjectSmallManifest) {
    Workspace w;
    const auto out = w.dir / "small.jsonl";
    const auto p = testkit::run_cli({"inject-errors", "--corpus", w.eval.string(), "--clean", "2", "--corrupt", "3",
                                     "--seed", "1", "--out", out.string()});
    ASSERT_EQ(p.exit_code, 0) << p.output;
    EXPECT_EQ(lines_of(slurp(out)).size(), 6u);
}

TEST(Cli, InsufficientCorpusExitCode) {
    Workspace w;
    const auto p = testkit::run_cli({"inject-errors", "--corpus", w.refs.string(), "--clean", "50", "--corrupt",
                                     "500", "--out", (w.dir / "x.jsonl").string()});
    EXPECT_EQ(p.exit_code, 5) << p.output;
}

TEST(Cli, MissingCorpusNamesPath) {
    const auto p = testkit::run_cli({"inject-errors", "--corpus", "/nonexistent/corpus-dir", "--out", "/tmp/x.jsonl"});
    EXPECT_NE(p.exit_code, 0);
    EXPECT_NE(p.output.find("/nonexistent/corpus-dir"), std::string::npos) << p.output;
}

TEST(Cli, MissingVerdictExit) {
    Workspace w;
    const auto a = testkit::run_cli({"run", "--corpus", w.eval.string(), "--manifest", w.manifest.string(),
                                     "--reference", w.refs.string(), "--out", (w.dir / "partial").string(),
                                     "--stop-after", "3"});
    ASSERT_EQ(a.exit_code, 0) << a.output;
    const auto e = testkit::run_cli({"evaluate", (w.dir / "partial").string()});
    EXPECT_EQ(e.exit_code, 7) << e.output;
    EXPECT_NE(e.output.find("case-"), std::string::npos);
}

TEST(Cli, EvaluateTwoRunsShowsDelta) {
    Workspace w;
    for (auto [name, backend] : {std::pair{"echo", "echo"}, std::pair{"oracle", "oracle"}}) {
        const auto r = testkit::run_cli({"run", "--corpus", w.eval.string(), "--manifest", w.manifest.string(),
                                         "--reference", w.refs.string(), "--backend", backend, "--out",
                                         (w.dir / name).string()});
        ASSERT_EQ(r.exit_code, 0) << r.output;
    }
    const auto e = testkit::run_cli({"evaluate", (w.dir / "echo").string(), (w.dir / "oracle").string()});
    ASSERT_EQ(e.exit_code, 0) << e.output;
    EXPECT_NE(e.output.find("Δ"), std::string::npos);
    EXPECT_NE(e.output.find("Error Localization"), std::string::npos);
}

TEST(Cli, BadFlagIsConfigError) {
    EXPECT_EQ(testkit::run_cli({"run", "--no-such-flag"}).exit_code, 2);
    EXPECT_EQ(testkit::run_cli({"--help"}).exit_code, 0);
}
