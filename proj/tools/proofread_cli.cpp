// Command-line front end: build-index, inject-errors, run, ablate, evaluate,
// synth-corpus.

#include "proofread/error.hpp"
#include "proofread/injection.hpp"
#include "proofread/knowledge_index.hpp"
#include "proofread/metrics.hpp"
#include "proofread/run.hpp"
#include "proofread/synthetic.hpp"
#include "proofread/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace proofread;

namespace {

struct EmbedFlags {
    std::string kind = "hashing";
    std::size_t dim = 256;
    std::string endpoint;
    std::string key_env = "PROOFREAD_EMBED_API_KEY";

    void add(CLI::App* cmd) {
        cmd->add_option("--embedder", kind, "hashing or http")->check(CLI::IsMember({"hashing", "http"}));
        cmd->add_option("--embed-dim", dim, "embedding dimension");
        cmd->add_option("--embed-endpoint", endpoint, "remote embedding URL");
        cmd->add_option("--embed-api-key-env", key_env, "environment variable holding the embedding API key");
    }
    EmbedderSpec spec() const { return {kind, dim, endpoint, key_env}; }
};

// Flags shared by run and ablate. Only flags given on the command line
// override the config file.
struct RunFlags {
    std::string config_path;
    std::string corpus, manifest, reference, index, annotations, out;
    std::string mode, backend, endpoint, model, api_key_env, script, timing, basis;
    std::uint64_t fuzz_seed = 0, seed = 0;
    std::size_t k = 0, concurrency = 0;
    int max_new_tokens = 0;
    double temperature = 0, top_p = 0;
    bool no_sampling = false;
    EmbedFlags embed;
    bool resume = false;
    std::size_t stop_after = 0;

    void add(CLI::App* cmd, bool with_mode) {
        cmd->add_option("--config", config_path, "JSON run config");
        cmd->add_option("--corpus", corpus, "evaluation corpus (directory of .txt or .jsonl)");
        cmd->add_option("--manifest", manifest, "benchmark manifest from inject-errors");
        cmd->add_option("--reference", reference, "reference corpus to index for retrieval");
        cmd->add_option("--index", index, "prebuilt index from build-index");
        cmd->add_option("--annotations", annotations, "precomputed entity graphs keyed by report_id");
        cmd->add_option("--out", out, "output directory");
        if (with_mode) cmd->add_option("--mode", mode, "STRATEGY/KNOWLEDGE, e.g. STAGED/MKGD_AND_EXKR");
        cmd->add_option("--backend", backend, "oracle, echo, fuzz, scripted or http");
        cmd->add_option("--endpoint", endpoint, "chat completion URL for the http backend");
        cmd->add_option("--model", model, "model name for the http backend");
        cmd->add_option("--api-key-env", api_key_env, "environment variable holding the chat API key");
        cmd->add_option("--script", script, "JSON array of responses for the scripted backend");
        cmd->add_option("--fuzz-seed", fuzz_seed);
        cmd->add_option("--timing", timing, "auto, wall or simulated");
        cmd->add_option("--basis", basis, "raw_text or standardized");
        cmd->add_option("--k", k, "references retrieved per report");
        cmd->add_option("--seed", seed);
        cmd->add_option("--concurrency", concurrency, "concurrent reports in flight");
        cmd->add_option("--max-new-tokens", max_new_tokens);
        cmd->add_option("--temperature", temperature);
        cmd->add_option("--top-p", top_p);
        cmd->add_flag("--no-sampling", no_sampling);
        embed.add(cmd);
        cmd->add_flag("--resume", resume, "continue an interrupted run in --out");
        cmd->add_option("--stop-after", stop_after, "stop after this many new verdicts")->group("");
    }

    RunConfig build(const CLI::App* cmd) const {
        RunConfig c;
        if (!config_path.empty()) c = load_config(config_path);
        auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
        if (given("--corpus")) c.evaluation_corpus = corpus;
        if (given("--manifest")) c.manifest = manifest;
        if (given("--reference")) c.reference_corpus = reference;
        if (given("--index")) c.index = index;
        if (given("--annotations")) c.annotations = annotations;
        if (given("--out")) c.output_dir = out;
        if (cmd->get_option_no_throw("--mode") && given("--mode")) {
            const auto m = PipelineMode::parse(mode);
            if (!m) fail(ErrorKind::InvalidConfig, "bad --mode '" + mode + "'");
            c.mode = *m;
        }
        if (given("--backend")) c.backend.kind = backend;
        if (given("--endpoint")) c.backend.endpoint = endpoint;
        if (given("--model")) c.backend.model = model;
        if (given("--api-key-env")) c.backend.api_key_env = api_key_env;
        if (given("--script")) c.backend.script = script;
        if (given("--fuzz-seed")) c.backend.fuzz_seed = fuzz_seed;
        if (given("--timing")) c.timing = timing;
        if (given("--basis")) {
            const auto b = similarity_basis_from_string(basis);
            if (!b) fail(ErrorKind::InvalidConfig, "bad --basis '" + basis + "'");
            c.basis = *b;
        }
        if (given("--k")) c.k = k;
        if (given("--seed")) c.seed = seed;
        if (given("--concurrency")) c.concurrency = concurrency;
        if (given("--max-new-tokens")) c.params.max_new_tokens = max_new_tokens;
        if (given("--temperature")) c.params.temperature = temperature;
        if (given("--top-p")) c.params.top_p = top_p;
        if (no_sampling) c.params.sampling = false;
        if (given("--embedder")) c.embedder.kind = embed.kind;
        if (given("--embed-dim")) c.embedder.dim = embed.dim;
        if (given("--embed-endpoint")) c.embedder.endpoint = embed.endpoint;
        if (given("--embed-api-key-env")) c.embedder.api_key_env = embed.key_env;
        return c;
    }

    RunOptions options() const {
        RunOptions o;
        o.resume = resume;
        if (stop_after) o.stop_after = stop_after;
        o.log = &std::cerr;
        return o;
    }
};

void print_outcome(const RunOutcome& o) {
    if (!o.complete) {
        std::cout << "partial run: " << o.written << " new verdicts in " << o.dir.string() << "\n";
        return;
    }
    std::cout << "wrote " << o.total << " verdicts to " << o.dir.string() << "\n";
    std::cout << format_table(std::span(&*o.metrics, 1));
}

int cmd_build_index(const fs::path& corpus_path, const fs::path& out, const std::string& basis_name,
                    const std::string& annotations, const EmbedFlags& embed, bool no_chunks, std::size_t chunk_size,
                    std::size_t overlap) {
    const auto basis = similarity_basis_from_string(basis_name);
    if (!basis) fail(ErrorKind::InvalidConfig, "bad --basis '" + basis_name + "'");
    const auto corpus = load_corpus(corpus_path);
    const auto embedder = make_embedder(embed.spec());
    const auto annotator = make_annotator(annotations);
    BuildOptions opts;
    opts.basis = *basis;
    opts.with_chunks = !no_chunks;
    opts.chunk_size = chunk_size;
    opts.chunk_overlap = overlap;
    const auto index = build_index(corpus, *embedder, *annotator, opts);
    const auto body = index.serialize();
    write_text_file(out, body);
    std::cout << "indexed " << index.entries().size() << " reports\n";
    std::cout << "digest " << text::sha256_hex(body) << "\n";
    return 0;
}

int cmd_inject(const fs::path& corpus_path, const std::string& lexicon_path, const BenchmarkConfig& config,
               const fs::path& out, const std::string& exclude, bool serial) {
    const auto corpus = load_corpus(corpus_path);
    const auto lexicon = lexicon_path.empty() ? SubstitutionLexicon::builtin() : SubstitutionLexicon::load(lexicon_path);
    std::set<std::string> excluded;
    if (!exclude.empty()) {
        for (const auto& r : load_corpus(exclude)) excluded.insert(r.id());
    }
    const auto bench = build_benchmark(corpus, lexicon, config, excluded, serial ? ExecMode::Serial : ExecMode::Parallel);
    const auto manifest = manifest_jsonl(bench);
    write_text_file(out, manifest);
    std::string skips;
    for (const auto& line : bench.skip_log) skips += line + "\n";
    const fs::path skip_path = out.string() + ".skips";
    write_text_file(skip_path, skips);
    std::cout << "wrote " << bench.cases.size() << " cases (" << config.n_clean << " clean, " << config.n_corrupt
              << " corrupted) to " << out.string() << "\n";
    std::cout << "digest " << text::sha256_hex(manifest) << "\n";
    std::cout << "skipped " << bench.skip_log.size() << " reports without an eligible site (" << skip_path.string()
              << ")\n";
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& dirs, bool as_json) {
    std::vector<MetricReport> reports;
    for (const auto& d : dirs) {
        auto r = evaluate_artifact(d);
        r.label = fs::path(d).filename().string() + " " + r.label;
        reports.push_back(std::move(r));
    }
    if (as_json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(report_to_json(r, false));
        std::cout << arr.dump(2) << "\n";
    } else {
        std::cout << format_table(reports);
    }
    return 0;
}

int cmd_synth(std::size_t n, std::uint64_t seed, const std::string& prefix, const fs::path& out) {
    SyntheticOptions opt;
    opt.count = n;
    opt.seed = seed;
    opt.id_prefix = prefix;
    const auto texts = synthetic_report_texts(opt);
    std::string body;
    char id[64];
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::snprintf(id, sizeof id, "%s-%06zu", prefix.c_str(), i + 1);
        body += nlohmann::json{{"report_id", id}, {"text", texts[i]}}.dump() + "\n";
    }
    write_text_file(out, body);
    std::cout << "wrote " << n << " reports to " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Staged proofreading of radiology reports with knowledge-grounded prompts"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    // build-index
    auto* bi = app.add_subcommand("build-index", "embed a reference corpus into a retrieval index");
    std::string bi_corpus, bi_out, bi_basis = "raw_text", bi_annotations;
    EmbedFlags bi_embed;
    bool bi_no_chunks = false;
    std::size_t bi_chunk = 1000, bi_overlap = 100;
    bi->add_option("--corpus", bi_corpus)->required();
    bi->add_option("--out", bi_out)->required();
    bi->add_option("--basis", bi_basis, "raw_text or standardized");
    bi->add_option("--annotations", bi_annotations);
    bi_embed.add(bi);
    bi->add_flag("--no-chunks", bi_no_chunks, "skip raw-text chunks used by SIMPLE_RAG");
    bi->add_option("--chunk-size", bi_chunk);
    bi->add_option("--chunk-overlap", bi_overlap);

    // inject-errors
    auto* ie = app.add_subcommand("inject-errors", "build a benchmark with one injected error per corrupted report");
    std::string ie_corpus, ie_lexicon, ie_out, ie_exclude;
    BenchmarkConfig ie_cfg;
    bool ie_serial = false;
    ie->add_option("--corpus", ie_corpus)->required();
    ie->add_option("--lexicon", ie_lexicon, "substitution lexicon (default: built-in)");
    ie->add_option("--clean", ie_cfg.n_clean);
    ie->add_option("--corrupt", ie_cfg.n_corrupt);
    ie->add_option("--seed", ie_cfg.master_seed);
    ie->add_option("--negation-share", ie_cfg.negation_share, "share of corrupted cases that get a negation flip");
    ie->add_option("--exclude", ie_exclude, "reference corpus whose report ids are kept out of both pools");
    ie->add_option("--out", ie_out)->required();
    ie->add_flag("--serial", ie_serial);

    // run / ablate
    auto* run = app.add_subcommand("run", "run the pipeline over a benchmark");
    RunFlags run_flags;
    run_flags.add(run, true);
    auto* ab = app.add_subcommand("ablate", "run the four knowledge arms (NONE, MKGD_ONLY, EXKR_ONLY, MKGD_AND_EXKR)");
    RunFlags ab_flags;
    ab_flags.add(ab, false);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score one or more run directories");
    std::vector<std::string> ev_dirs;
    bool ev_json = false;
    ev->add_option("dirs", ev_dirs)->required();
    ev->add_flag("--json", ev_json);

    // synth-corpus
    auto* sy = app.add_subcommand("synth-corpus", "write a synthetic report corpus as JSONL");
    std::size_t sy_n = 100;
    std::uint64_t sy_seed = 1;
    std::string sy_prefix = "syn", sy_out;
    sy->add_option("--n", sy_n);
    sy->add_option("--seed", sy_seed);
    sy->add_option("--prefix", sy_prefix);
    sy->add_option("--out", sy_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*bi) {
            return cmd_build_index(bi_corpus, bi_out, bi_basis, bi_annotations, bi_embed, bi_no_chunks, bi_chunk,
                                   bi_overlap);
        }
        if (*ie) return cmd_inject(ie_corpus, ie_lexicon, ie_cfg, ie_out, ie_exclude, ie_serial);
        if (*run) {
            print_outcome(run_experiment(run_flags.build(run), run_flags.options()));
            return 0;
        }
        if (*ab) {
            const auto base = ab_flags.build(ab);
            if (base.output_dir.empty()) fail(ErrorKind::InvalidConfig, "output_dir is required");
            std::vector<MetricReport> reports;
            for (auto arm : {KnowledgeMode::None, KnowledgeMode::MkgdOnly, KnowledgeMode::ExkrOnly,
                             KnowledgeMode::MkgdAndExkr}) {
                auto cfg = base;
                cfg.mode = {InferenceStrategy::Staged, arm};
                cfg.output_dir = (fs::path(base.output_dir) / text::to_lower(to_string(arm))).string();
                auto outcome = run_experiment(cfg, ab_flags.options());
                if (!outcome.complete) {
                    print_outcome(outcome);
                    return 0;
                }
                reports.push_back(std::move(*outcome.metrics));
            }
            std::cout << format_table(reports);
            return 0;
        }
        if (*ev) return cmd_evaluate(ev_dirs, ev_json);
        if (*sy) return cmd_synth(sy_n, sy_seed, sy_prefix, sy_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
