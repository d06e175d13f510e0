#include "proofread/run.hpp"

#include "proofread/error.hpp"
#include "proofread/text.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace proofread {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- files

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

json artifact_header(std::string_view kind) {
    return {{"format", "proofread-" + std::string(kind)}, {"version", kArtifactVersion}, {"tool_version", kToolVersion}};
}

std::vector<RadiologyReport> load_corpus(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) fail(ErrorKind::Io, "corpus path not found: " + path.string());
    std::vector<RadiologyReport> out;
    auto add = [&](std::string text, std::string id, const std::string& where) {
        try {
            out.push_back(parse_report(std::move(text), std::move(id)));
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (" + where + ")");
        }
    };
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) add(read_text_file(f), f.stem().string(), f.string());
    } else if (path.extension() == ".jsonl") {
        std::istringstream in(read_text_file(path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            const auto where = path.string() + ":" + std::to_string(lineno);
            try {
                const auto j = json::parse(line);
                const auto id = j.contains("report_id") ? j.at("report_id") : j.at("id");
                add(j.at("text").get<std::string>(), id.get<std::string>(), where);
            } catch (const json::exception& e) {
                fail(ErrorKind::SchemaMismatch, where + ": " + e.what());
            }
        }
    } else {
        add(read_text_file(path), path.stem().string(), path.string());
    }
    std::set<std::string> seen;
    for (const auto& r : out) {
        if (!seen.insert(r.id()).second) fail(ErrorKind::DuplicateId, "duplicate report id '" + r.id() + "' in " + path.string());
    }
    return out;
}

// ---------------------------------------------------------------- config

json config_to_json(const RunConfig& c) {
    return {{"evaluation_corpus", c.evaluation_corpus},
            {"manifest", c.manifest},
            {"reference_corpus", c.reference_corpus},
            {"index", c.index},
            {"annotations", c.annotations},
            {"mode", {{"strategy", to_string(c.mode.strategy)}, {"knowledge", to_string(c.mode.knowledge)}}},
            {"backend",
             {{"kind", c.backend.kind},
              {"endpoint", c.backend.endpoint},
              {"model", c.backend.model},
              {"api_key_env", c.backend.api_key_env},
              {"script", c.backend.script},
              {"fuzz_seed", c.backend.fuzz_seed},
              {"fuzz_failure_rate", c.backend.fuzz_failure_rate},
              {"timeout_ms", c.backend.timeout_ms},
              {"max_attempts", c.backend.max_attempts}}},
            {"embedder",
             {{"kind", c.embedder.kind},
              {"dim", c.embedder.dim},
              {"endpoint", c.embedder.endpoint},
              {"api_key_env", c.embedder.api_key_env}}},
            {"generation",
             {{"max_new_tokens", c.params.max_new_tokens},
              {"temperature", c.params.temperature},
              {"top_p", c.params.top_p},
              {"sampling", c.params.sampling}}},
            {"basis", to_string(c.basis)},
            {"k", c.k},
            {"seed", c.seed},
            {"concurrency", c.concurrency},
            {"timing", c.timing}};
}

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::InvalidConfig, where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(ErrorKind::InvalidConfig, "unknown config key '" + where + key + "'");
        }
    }
}

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
    try {
        check_keys(j,
                   {"evaluation_corpus", "manifest", "reference_corpus", "index", "annotations", "mode", "backend",
                    "embedder", "generation", "basis", "k", "seed", "concurrency", "timing", "output_dir"},
                   "");
        take(j, "evaluation_corpus", c.evaluation_corpus);
        take(j, "manifest", c.manifest);
        take(j, "reference_corpus", c.reference_corpus);
        take(j, "index", c.index);
        take(j, "annotations", c.annotations);
        take(j, "output_dir", c.output_dir);
        if (j.contains("mode")) {
            const auto& m = j.at("mode");
            check_keys(m, {"strategy", "knowledge"}, "mode.");
            if (m.contains("strategy")) {
                const auto s = inference_strategy_from_string(m.at("strategy").get<std::string>());
                if (!s) fail(ErrorKind::InvalidConfig, "unknown mode.strategy");
                c.mode.strategy = *s;
            }
            if (m.contains("knowledge")) {
                const auto k = knowledge_mode_from_string(m.at("knowledge").get<std::string>());
                if (!k) fail(ErrorKind::InvalidConfig, "unknown mode.knowledge");
                c.mode.knowledge = *k;
            }
        }
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            check_keys(b, {"kind", "endpoint", "model", "api_key_env", "script", "fuzz_seed", "fuzz_failure_rate",
                           "timeout_ms", "max_attempts"},
                       "backend.");
            take(b, "kind", c.backend.kind);
            take(b, "endpoint", c.backend.endpoint);
            take(b, "model", c.backend.model);
            take(b, "api_key_env", c.backend.api_key_env);
            take(b, "script", c.backend.script);
            take(b, "fuzz_seed", c.backend.fuzz_seed);
            take(b, "fuzz_failure_rate", c.backend.fuzz_failure_rate);
            take(b, "timeout_ms", c.backend.timeout_ms);
            take(b, "max_attempts", c.backend.max_attempts);
        }
        if (j.contains("embedder")) {
            const auto& e = j.at("embedder");
            check_keys(e, {"kind", "dim", "endpoint", "api_key_env"}, "embedder.");
            take(e, "kind", c.embedder.kind);
            take(e, "dim", c.embedder.dim);
            take(e, "endpoint", c.embedder.endpoint);
            take(e, "api_key_env", c.embedder.api_key_env);
        }
        if (j.contains("generation")) {
            const auto& g = j.at("generation");
            check_keys(g, {"max_new_tokens", "temperature", "top_p", "sampling"}, "generation.");
            take(g, "max_new_tokens", c.params.max_new_tokens);
            take(g, "temperature", c.params.temperature);
            take(g, "top_p", c.params.top_p);
            take(g, "sampling", c.params.sampling);
        }
        if (j.contains("basis")) {
            const auto b = similarity_basis_from_string(j.at("basis").get<std::string>());
            if (!b) fail(ErrorKind::InvalidConfig, "unknown basis");
            c.basis = *b;
        }
        take(j, "k", c.k);
        take(j, "seed", c.seed);
        take(j, "concurrency", c.concurrency);
        take(j, "timing", c.timing);
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path, RunConfig base) {
    const auto body = read_text_file(path);
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

void RunConfig::validate() const {
    auto need_path = [](const std::string& p, const char* field) {
        if (p.empty()) fail(ErrorKind::InvalidConfig, std::string(field) + " is required");
        std::error_code ec;
        if (!fs::exists(p, ec)) fail(ErrorKind::Io, std::string(field) + " not found: " + p);
    };
    need_path(evaluation_corpus, "evaluation_corpus");
    need_path(manifest, "manifest");
    if (mode.uses_exkr() || mode.uses_chunks()) {
        if (!index.empty()) {
            need_path(index, "index");
        } else {
            need_path(reference_corpus, "reference_corpus");
        }
    }
    if (!annotations.empty()) need_path(annotations, "annotations");
    if (output_dir.empty()) fail(ErrorKind::InvalidConfig, "output_dir is required");
    if (k < 1) fail(ErrorKind::InvalidConfig, "k must be at least 1");
    if (concurrency < 1) fail(ErrorKind::InvalidConfig, "concurrency must be at least 1");
    static const std::set<std::string> kBackends = {"oracle", "echo", "fuzz", "scripted", "http"};
    if (!kBackends.count(backend.kind)) fail(ErrorKind::InvalidConfig, "unknown backend.kind '" + backend.kind + "'");
    if (backend.kind == "http" && (backend.endpoint.empty() || backend.model.empty())) {
        fail(ErrorKind::InvalidConfig, "http backend needs backend.endpoint and backend.model");
    }
    if (backend.kind == "scripted") need_path(backend.script, "backend.script");
    if (backend.max_attempts < 1) fail(ErrorKind::InvalidConfig, "backend.max_attempts must be at least 1");
    if (embedder.kind != "hashing" && embedder.kind != "http") {
        fail(ErrorKind::InvalidConfig, "unknown embedder.kind '" + embedder.kind + "'");
    }
    if (embedder.dim < 1) fail(ErrorKind::InvalidConfig, "embedder.dim must be at least 1");
    if (embedder.kind == "http" && embedder.endpoint.empty()) {
        fail(ErrorKind::InvalidConfig, "http embedder needs embedder.endpoint");
    }
    if (timing != "auto" && timing != "wall" && timing != "simulated") {
        fail(ErrorKind::InvalidConfig, "timing must be auto, wall or simulated");
    }
    if (params.max_new_tokens < 1) fail(ErrorKind::InvalidConfig, "generation.max_new_tokens must be positive");
    if (params.temperature < 0.0) fail(ErrorKind::InvalidConfig, "generation.temperature must be non-negative");
    if (params.top_p <= 0.0 || params.top_p > 1.0) fail(ErrorKind::InvalidConfig, "generation.top_p must lie in (0, 1]");
}

// ---------------------------------------------------------------- components

namespace {

std::optional<std::string> env(const std::string& name) {
    if (name.empty()) return std::nullopt;
    const char* v = std::getenv(name.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedderSpec& spec) {
    if (spec.kind == "hashing") return std::make_unique<HashingEmbedder>(spec.dim);
    if (spec.kind == "http") {
        HttpEmbedderConfig cfg;
        cfg.url = spec.endpoint;
        cfg.dim = spec.dim;
        cfg.api_key = env(spec.api_key_env);
        return std::make_unique<HttpEmbeddingProvider>(std::move(cfg));
    }
    fail(ErrorKind::InvalidConfig, "unknown embedder kind '" + spec.kind + "'");
}

std::unique_ptr<GraphProvider> make_annotator(const std::string& annotations_path) {
    if (annotations_path.empty()) return std::make_unique<LexiconGraphProvider>();
    return std::make_unique<AnnotationStoreProvider>(
        AnnotationStoreProvider::load(annotations_path, std::make_shared<LexiconGraphProvider>()));
}

namespace {

std::unique_ptr<ChatBackend> make_backend(const RunConfig& c, std::span<const BenchmarkCase> cases) {
    const auto& b = c.backend;
    if (b.kind == "oracle") return std::make_unique<OracleBackend>(cases);
    if (b.kind == "echo") return std::make_unique<EchoBackend>();
    if (b.kind == "fuzz") return std::make_unique<FuzzBackend>(b.fuzz_seed, b.fuzz_failure_rate);
    if (b.kind == "scripted") {
        try {
            return std::make_unique<ScriptedBackend>(json::parse(read_text_file(b.script)).get<std::vector<std::string>>());
        } catch (const json::exception& e) {
            fail(ErrorKind::InvalidConfig, "backend.script must be a JSON array of strings: " + std::string(e.what()));
        }
    }
    HttpChatConfig cfg;
    cfg.url = b.endpoint;
    cfg.model = b.model;
    cfg.api_key = env(b.api_key_env);
    cfg.timeout = std::chrono::milliseconds(b.timeout_ms);
    cfg.retry.max_attempts = b.max_attempts;
    return std::make_unique<HttpChatBackend>(std::move(cfg));
}

TimingModel timing_for(const RunConfig& c) {
    if (c.timing == "wall") return TimingModel::wall();
    if (c.timing == "simulated") return TimingModel::simulated();
    return c.backend.kind == "http" ? TimingModel::wall() : TimingModel::simulated();
}

std::string digest_file(const fs::path& p) { return text::sha256_hex(read_text_file(p)); }

struct Loaded {
    std::vector<RadiologyReport> corpus;
    Benchmark bench;
};

Loaded load_cases(const RunConfig& c) {
    Loaded l;
    l.corpus = load_corpus(c.evaluation_corpus);
    l.bench = load_manifest(read_text_file(c.manifest), l.corpus);
    return l;
}

// Complete lines of a line-delimited file; a torn final line is dropped.
std::vector<std::string> complete_lines(const fs::path& p) {
    std::vector<std::string> lines;
    if (!fs::exists(p)) return lines;
    const auto body = read_text_file(p);
    std::size_t pos = 0;
    while (true) {
        const auto nl = body.find('\n', pos);
        if (nl == std::string::npos) break;
        lines.push_back(body.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::vector<StagedVerdict> read_verdicts(const fs::path& p) {
    const auto lines = complete_lines(p);
    if (lines.empty()) fail(ErrorKind::MissingVerdict, "no verdict file at " + p.string());
    std::vector<StagedVerdict> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        try {
            out.push_back(verdict_from_json(json::parse(lines[i])));
        } catch (const json::exception& e) {
            fail(ErrorKind::SchemaMismatch, p.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const fs::path& p, const json& header, const std::vector<json>& records) {
    std::string body = header.dump() + "\n";
    for (const auto& r : records) body += r.dump() + "\n";
    write_text_file(p, body);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InconsistentKnowledgeInputs:
        case ErrorKind::InvalidChunkParams: return 2;
        case ErrorKind::Io: return 3;
        case ErrorKind::EmptyInput:
        case ErrorKind::MalformedEncoding:
        case ErrorKind::SchemaMismatch:
        case ErrorKind::DanglingRelation:
        case ErrorKind::InvalidGraph:
        case ErrorKind::EmptyText:
        case ErrorKind::DuplicateId:
        case ErrorKind::EmptyIndex: return 4;
        case ErrorKind::InsufficientCorpus:
        case ErrorKind::NoEligibleSite: return 5;
        case ErrorKind::ProviderUnavailable:
        case ErrorKind::BackendUnavailable:
        case ErrorKind::AuthFailure:
        case ErrorKind::UnparseableAfterRetry: return 6;
        case ErrorKind::MissingVerdict: return 7;
    }
    return 1;
}

// ---------------------------------------------------------------- run

RunOutcome run_experiment(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    auto log = [&](const std::string& msg) {
        if (options.log) *options.log << msg << '\n';
    };

    const auto loaded = load_cases(config);
    const auto& cases = loaded.bench.cases;
    const auto annotator = make_annotator(config.annotations);

    std::unique_ptr<EmbeddingProvider> embedder;
    std::optional<KnowledgeIndex> index;
    if (config.mode.uses_exkr() || config.mode.uses_chunks()) {
        embedder = make_embedder(config.embedder);
        if (!config.index.empty()) {
            index = KnowledgeIndex::load(config.index);
            if (index->header().basis == SimilarityBasis::Standardized && index->header().annotator_id != annotator->id()) {
                fail(ErrorKind::InvalidConfig, "index was standardized with annotator '" + index->header().annotator_id +
                                                   "' but the run uses '" + annotator->id() + "'");
            }
            if (config.mode.uses_chunks() && index->chunks().empty()) {
                fail(ErrorKind::InvalidConfig, "mode " + config.mode.label() + " needs an index built with chunks");
            }
        } else {
            const auto refs = load_corpus(config.reference_corpus);
            BuildOptions opts;
            opts.basis = config.basis;
            opts.with_chunks = config.mode.uses_chunks();
            index = build_index(refs, *embedder, *annotator, opts);
            log("indexed " + std::to_string(index->entries().size()) + " reference reports");
        }
        std::set<std::string> ref_ids;
        for (const auto& e : index->entries()) ref_ids.insert(e.report_id);
        for (const auto& c : cases) {
            if (ref_ids.count(c.original.id())) {
                fail(ErrorKind::InvalidConfig,
                     "reference set contains evaluation report '" + c.original.id() + "'; the pools must be disjoint");
            }
        }
    }
    const auto backend = make_backend(config, cases);

    PipelineContext ctx;
    ctx.index = index ? &*index : nullptr;
    ctx.embedder = embedder.get();
    ctx.annotator = annotator.get();
    ctx.k = config.k;
    ctx.scan = ScanMode::Parallel;
    ctx.timing = timing_for(config);

    const json snapshot = config_to_json(config);
    const auto config_digest = text::sha256_hex(snapshot.dump());
    write_jsonl(dir / "config.jsonl", artifact_header("config"), {snapshot});

    const auto verdict_path = dir / "verdicts.jsonl";
    const auto transcript_path = dir / "transcripts.jsonl";
    auto verdict_header = artifact_header("verdicts");
    verdict_header["config_digest"] = config_digest;
    auto transcript_header = artifact_header("transcripts");
    transcript_header["config_digest"] = config_digest;

    // Resume: keep complete verdict lines from a run with the same config and
    // the transcript lines of those cases.
    std::set<std::string> done;
    if (options.resume && fs::exists(verdict_path)) {
        auto vlines = complete_lines(verdict_path);
        if (vlines.empty() || json::parse(vlines[0]).value("config_digest", "") != config_digest) {
            fail(ErrorKind::InvalidConfig, "cannot resume: " + verdict_path.string() + " was written by a different config");
        }
        std::string vbody = vlines[0] + "\n";
        for (std::size_t i = 1; i < vlines.size(); ++i) {
            try {
                done.insert(json::parse(vlines[i]).at("case_id").get<std::string>());
                vbody += vlines[i] + "\n";
            } catch (const json::exception&) {
                break;
            }
        }
        std::string tbody = transcript_header.dump() + "\n";
        const auto tlines = complete_lines(transcript_path);
        for (std::size_t i = 1; i < tlines.size(); ++i) {
            try {
                if (done.count(json::parse(tlines[i]).at("case_id").get<std::string>())) tbody += tlines[i] + "\n";
            } catch (const json::exception&) {
                break;
            }
        }
        write_text_file(verdict_path, vbody);
        write_text_file(transcript_path, tbody);
        log("resuming: " + std::to_string(done.size()) + " of " + std::to_string(cases.size()) + " cases already done");
    } else {
        write_text_file(verdict_path, verdict_header.dump() + "\n");
        write_text_file(transcript_path, transcript_header.dump() + "\n");
    }

    std::vector<const BenchmarkCase*> todo;
    for (const auto& c : cases) {
        if (!done.count(c.case_id)) todo.push_back(&c);
    }

    struct Slot {
        std::optional<StagedVerdict> verdict;
        std::exception_ptr error;
        bool ready = false;
    };
    std::vector<Slot> slots(todo.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::condition_variable cv;

    auto worker = [&] {
        while (!stop.load()) {
            const auto i = next.fetch_add(1);
            if (i >= todo.size()) return;
            Slot s;
            try {
                s.verdict = run_pipeline(todo[i]->case_id, todo[i]->corrupted, config.mode, *backend, ctx, config.params);
            } catch (...) {
                s.error = std::current_exception();
            }
            s.ready = true;
            {
                std::lock_guard lock(mu);
                slots[i] = std::move(s);
            }
            cv.notify_all();
        }
    };

    const auto wall0 = std::chrono::steady_clock::now();
    std::vector<std::thread> pool;
    const auto n_workers = std::min<std::size_t>(config.concurrency, std::max<std::size_t>(todo.size(), 1));
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);

    RunOutcome outcome;
    outcome.dir = dir;
    outcome.total = cases.size();
    std::exception_ptr failure;
    {
        std::ofstream vout(verdict_path, std::ios::binary | std::ios::app);
        std::ofstream tout(transcript_path, std::ios::binary | std::ios::app);
        if (!vout || !tout) fail(ErrorKind::Io, "cannot append to run files in " + dir.string());
        for (std::size_t i = 0; i < todo.size(); ++i) {
            if (options.stop_after && outcome.written >= *options.stop_after) break;
            Slot s;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return slots[i].ready; });
                s = std::move(slots[i]);
                slots[i] = Slot{};
            }
            if (s.error) {
                failure = s.error;
                break;
            }
            for (const auto& t : s.verdict->transcripts) tout << transcript_to_json(t).dump() << '\n';
            tout.flush();
            vout << verdict_to_json(*s.verdict).dump() << '\n';
            vout.flush();
            if (!vout || !tout) fail(ErrorKind::Io, "write failed in " + dir.string());
            ++outcome.written;
        }
    }
    stop = true;
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    const double wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    outcome.complete = done.size() + outcome.written == cases.size();
    if (!outcome.complete) {
        log("stopped after " + std::to_string(outcome.written) + " new verdicts; rerun with --resume to continue");
        return outcome;
    }

    const auto verdicts = read_verdicts(verdict_path);
    TrigramTokenEmbedder trigram;
    CachedTokenEmbedder token_embedder(trigram);
    auto report = evaluate(verdicts, cases, token_embedder, config.mode.label());
    write_jsonl(dir / "metrics.jsonl", artifact_header("metrics"), {report_to_json(report)});

    double case_seconds = 0.0;
    for (const auto& v : verdicts) case_seconds += v.timings.total;
    json envelope = {{"timing_model", ctx.timing.kind == TimingModel::Kind::Wall ? "wall" : "simulated"},
                     {"case_seconds", case_seconds}};
    // Elapsed wall time only makes sense (and is only reproducible) for live runs.
    if (ctx.timing.kind == TimingModel::Kind::Wall) envelope["wall_seconds"] = wall_seconds;
    const json record = {{"tool_version", kToolVersion},
                         {"config_digest", config_digest},
                         {"manifest", {{"path", config.manifest}, {"sha256", digest_file(config.manifest)}}},
                         {"n_cases", cases.size()},
                         {"files",
                          {{"verdicts.jsonl", digest_file(verdict_path)},
                           {"transcripts.jsonl", digest_file(transcript_path)},
                           {"metrics.jsonl", digest_file(dir / "metrics.jsonl")}}},
                         {"envelope", envelope}};
    write_jsonl(dir / "artifact.jsonl", artifact_header("artifact"), {record});
    outcome.metrics = std::move(report);
    return outcome;
}

MetricReport evaluate_artifact(const fs::path& dir) {
    const auto lines = complete_lines(dir / "config.jsonl");
    if (lines.size() < 2) fail(ErrorKind::Io, "no run config in " + dir.string());
    RunConfig config;
    try {
        config = config_from_json(json::parse(lines[1]));
    } catch (const json::exception& e) {
        fail(ErrorKind::SchemaMismatch, (dir / "config.jsonl").string() + ": " + e.what());
    }
    const auto loaded = load_cases(config);
    const auto verdicts = read_verdicts(dir / "verdicts.jsonl");
    TrigramTokenEmbedder trigram;
    CachedTokenEmbedder token_embedder(trigram);
    return evaluate(verdicts, loaded.bench.cases, token_embedder, config.mode.label());
}

}  // namespace proofread
