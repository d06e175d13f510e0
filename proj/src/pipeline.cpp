#include "proofread/pipeline.hpp"

#include "proofread/graph_text.hpp"
#include "proofread/text.hpp"

#include <chrono>

namespace proofread {

std::string_view to_string(Detection d) { return d == Detection::Error ? "ERROR" : "NO_ERROR"; }

std::optional<Detection> detection_from_string(std::string_view s) {
    if (s == "ERROR") return Detection::Error;
    if (s == "NO_ERROR") return Detection::NoError;
    return std::nullopt;
}

bool StagedVerdict::unparseable_at(Stage s) const {
    return std::find(unparseable.begin(), unparseable.end(), s) != unparseable.end();
}

// ---------------------------------------------------------------- parsers

namespace {

std::string_view first_line(std::string_view s) {
    while (!s.empty()) {
        const auto nl = s.find('\n');
        const auto line = text::trim(s.substr(0, nl));
        if (!line.empty()) return line;
        if (nl == std::string_view::npos) break;
        s.remove_prefix(nl + 1);
    }
    return {};
}

// Case-insensitive "KEY:" prefix; returns the trimmed remainder.
std::optional<std::string_view> after_key(std::string_view line, std::string_view key) {
    if (line.size() < key.size() || !text::iequals(line.substr(0, key.size()), key)) return std::nullopt;
    return text::trim(line.substr(key.size()));
}

bool has_word(std::string_view lowered, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = lowered.find(word, pos)) != std::string_view::npos) {
        const auto end = pos + word.size();
        const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lowered[pos - 1]));
        const bool right = end >= lowered.size() || !std::isalnum(static_cast<unsigned char>(lowered[end]));
        if (left && right) return true;
        pos = end;
    }
    return false;
}

}  // namespace

std::optional<Detection> parse_detection(std::string_view response) {
    const auto rest = after_key(first_line(response), "ANSWER:");
    if (!rest) return std::nullopt;
    auto v = *rest;
    while (!v.empty() && (v.back() == '.' || v.back() == '!')) v.remove_suffix(1);
    if (text::iequals(v, "YES")) return Detection::Error;
    if (text::iequals(v, "NO")) return Detection::NoError;
    return std::nullopt;
}

Detection keyword_detection(std::string_view response) {
    const auto lowered = text::to_lower(response);
    if (has_word(lowered, "yes") || lowered.find("error present") != std::string::npos) return Detection::Error;
    return Detection::NoError;
}

std::optional<std::string> parse_span(std::string_view response) {
    const auto rest = after_key(first_line(response), "SPAN:");
    if (!rest) return std::nullopt;
    return std::string(*rest);
}

std::optional<std::string> parse_correction(std::string_view response) {
    static constexpr std::string_view kMarker = "CORRECTED_REPORT:";
    const auto lowered = text::to_lower(response);
    const auto key = text::to_lower(kMarker);
    std::size_t pos = 0;
    while ((pos = lowered.find(key, pos)) != std::string::npos) {
        // Only a marker that opens a line counts.
        std::size_t b = pos;
        while (b > 0 && (response[b - 1] == ' ' || response[b - 1] == '\t')) --b;
        if (b == 0 || response[b - 1] == '\n') break;
        pos += key.size();
    }
    if (pos == std::string::npos) return std::nullopt;
    auto rest = response.substr(pos + kMarker.size());
    std::size_t skip = 0;
    while (skip < rest.size() && (rest[skip] == ' ' || rest[skip] == '\t')) ++skip;
    if (skip < rest.size() && rest[skip] == '\r') ++skip;
    if (skip < rest.size() && rest[skip] == '\n') ++skip;
    return std::string(rest.substr(skip));
}

std::string longest_block(std::string_view response) {
    std::string_view best;
    std::size_t pos = 0;
    while (pos <= response.size()) {
        auto end = response.find("\n\n", pos);
        if (end == std::string_view::npos) end = response.size();
        const auto block = text::trim(response.substr(pos, end - pos));
        if (block.size() > best.size()) best = block;
        pos = end + 2;
    }
    return std::string(best);
}

std::string normalize_span(std::string_view span) {
    auto s = text::trim(span);
    while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                             (s.front() == '`' && s.back() == '`'))) {
        s = text::trim(s.substr(1, s.size() - 2));
    }
    return text::to_lower(text::collapse_whitespace(s));
}

std::string diff_span(std::string_view input, std::string_view rewritten) {
    const auto a = tokenize(input);
    const auto b = tokenize(rewritten);
    auto same = [&](std::size_t i, std::size_t j) {
        return input.substr(a[i].start, a[i].size()) == rewritten.substr(b[j].start, b[j].size());
    };
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && same(prefix, prefix)) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           same(a.size() - 1 - suffix, b.size() - 1 - suffix)) {
        ++suffix;
    }
    if (prefix + suffix < a.size()) {
        const auto first = a[prefix].start;
        const auto last = a[a.size() - 1 - suffix].end;
        return std::string(input.substr(first, last - first));
    }
    if (prefix + suffix < b.size()) {
        const auto first = b[prefix].start;
        const auto last = b[b.size() - 1 - suffix].end;
        return std::string(rewritten.substr(first, last - first));
    }
    return {};
}

// ---------------------------------------------------------------- pipeline

KnowledgeInputs gather_knowledge(const RadiologyReport& report, const PipelineMode& mode, const PipelineContext& ctx) {
    KnowledgeInputs k;
    if (mode.uses_mkgd()) {
        if (!ctx.annotator) fail(ErrorKind::InvalidConfig, "mode " + mode.label() + " needs an annotator");
        k.mkgd_sentences = graph_to_text(ctx.annotator->annotate(report));
    }
    if (mode.uses_exkr() || mode.uses_chunks()) {
        if (!ctx.index || !ctx.embedder) fail(ErrorKind::InvalidConfig, "mode " + mode.label() + " needs an index");
    }
    if (mode.uses_exkr()) {
        const auto result = retrieve(report, *ctx.index, *ctx.embedder, ctx.annotator, ctx.k, ctx.scan);
        std::vector<ReferenceSummary> refs;
        for (const auto& item : result.items) refs.push_back({item.entry.report_id, item.score, item.entry.knowledge});
        k.references = std::move(refs);
    }
    if (mode.uses_chunks()) {
        std::vector<ChunkExcerpt> out;
        for (const auto& c : retrieve_chunks(report, *ctx.index, *ctx.embedder, ctx.k, ctx.scan)) {
            out.push_back({c.chunk.report_id, c.chunk.ordinal, c.score, c.chunk.text});
        }
        k.chunks = std::move(out);
    }
    return k;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct StageAbort {
    std::string message;
};

class Runner {
public:
    Runner(StagedVerdict& v, const RadiologyReport& report, const ChatBackend& backend, const PipelineContext& ctx,
           const GenerationParams& params)
        : v_(v), report_(report), backend_(backend), ctx_(ctx), params_(params) {}

    // Up to two calls: the prompt, then the prompt with a reminder. Returns
    // the parsed value, or nullopt with every response in `raw` if both
    // missed the contract. Throws StageAbort on backend failure.
    template <class Parse>
    auto call(Stage stage, const PromptBundle& prompt, Parse parse, double& elapsed, std::vector<std::string>& raw)
        -> decltype(parse(std::string_view{})) {
        const auto base = prompt.render();
        for (int call = 0; call < 2; ++call) {
            ChatRequest req{v_.case_id, stage, call == 0 ? base : base + reminder_suffix(stage), report_.text(),
                            params_, call};
            TranscriptRecord rec{v_.case_id, stage, call, req.prompt, {}, {}, 0.0, {}};
            const auto t0 = Clock::now();
            try {
                auto resp = backend_.complete(req);
                rec.response = std::move(resp.text);
                rec.attempts = std::move(resp.attempts);
            } catch (const BackendFailure& e) {
                rec.attempts = e.attempts();
                rec.error = e.what();
            } catch (const Error& e) {
                rec.error = e.what();
            }
            rec.seconds = ctx_.timing.kind == TimingModel::Kind::Wall
                              ? seconds_since(t0)
                              : ctx_.timing.call_overhead_s +
                                    ctx_.timing.per_char_s * static_cast<double>(req.prompt.size() + rec.response.size());
            elapsed += rec.seconds;
            const std::string error = rec.error;
            const std::string response = rec.response;
            v_.transcripts.push_back(std::move(rec));
            if (!error.empty()) throw StageAbort{error};

            if (auto parsed = parse(response)) return parsed;
            raw.push_back(response);
            v_.events.push_back(std::string(to_string(stage)) + ": response " + std::to_string(call + 1) +
                                " did not follow the output format" + (call == 0 ? "; retrying with reminder" : ""));
        }
        return std::nullopt;
    }

private:
    StagedVerdict& v_;
    const RadiologyReport& report_;
    const ChatBackend& backend_;
    const PipelineContext& ctx_;
    const GenerationParams& params_;
};

void finish(StagedVerdict& v) {
    auto& t = v.timings;
    t.total = t.knowledge + t.detect.value_or(0.0) + t.localize.value_or(0.0) + t.correct.value_or(0.0) +
              t.end_to_end.value_or(0.0);
}

}  // namespace

StagedVerdict run_pipeline(const std::string& case_id, const RadiologyReport& report, const PipelineMode& mode,
                           const ChatBackend& backend, const PipelineContext& ctx, const GenerationParams& params) {
    StagedVerdict v;
    v.case_id = case_id;
    v.report_id = report.id();
    v.mode = mode.label();

    KnowledgeInputs knowledge;
    {
        const auto t0 = Clock::now();
        try {
            knowledge = gather_knowledge(report, mode, ctx);
        } catch (const Error& e) {
            v.failed_stage = "KNOWLEDGE";
            v.failure = e.what();
            v.events.push_back(std::string("KNOWLEDGE: ") + e.what());
        }
        if (ctx.timing.kind == TimingModel::Kind::Wall) {
            v.timings.knowledge = seconds_since(t0);
        } else {
            const int sources = int(mode.uses_mkgd()) + int(mode.uses_exkr()) + int(mode.uses_chunks());
            v.timings.knowledge = ctx.timing.knowledge_per_char_s * static_cast<double>(report.text().size()) * sources;
        }
        if (v.failed_stage) {
            finish(v);
            return v;
        }
    }

    Runner run(v, report, backend, ctx, params);
    std::vector<std::string> raw;
    Stage current = Stage::Detect;
    double elapsed = 0.0;
    try {
        if (mode.strategy == InferenceStrategy::EndToEnd) {
            current = Stage::EndToEnd;
            auto corrected = run.call(current, build_prompt(current, report, mode, knowledge), parse_correction,
                                      elapsed, raw);
            v.timings.end_to_end = elapsed;
            if (!corrected) {
                const auto block = longest_block(raw.back());
                v.events.push_back("END_TO_END: no CORRECTED_REPORT marker; took the longest response block");
                if (!block.empty()) corrected = block;
            }
            if (!corrected) {
                v.unparseable.push_back(current);
                v.detection = Detection::NoError;
            } else if (text::collapse_whitespace(*corrected) == text::collapse_whitespace(report.text())) {
                v.detection = Detection::NoError;
            } else {
                v.detection = Detection::Error;
                v.localized_span = normalize_span(diff_span(report.text(), *corrected));
                v.corrected_text = std::move(*corrected);
            }
            finish(v);
            return v;
        }

        // Stage 1
        auto detection = run.call(current, build_prompt(current, report, mode, knowledge), parse_detection, elapsed, raw);
        v.timings.detect = elapsed;
        if (!detection) {
            v.unparseable.push_back(current);
            detection = keyword_detection(raw.back());
            v.events.push_back("DETECT: keyword fallback classified the response as " +
                               std::string(to_string(*detection)));
        }
        v.detection = *detection;
        if (*detection == Detection::NoError) {
            finish(v);
            return v;
        }

        // Stage 2
        current = Stage::Localize;
        PriorOutputs prior{std::string(to_string(Detection::Error)), std::nullopt};
        elapsed = 0.0;
        raw.clear();
        auto span = run.call(current, build_prompt(current, report, mode, knowledge, prior), parse_span, elapsed, raw);
        v.timings.localize = elapsed;
        if (!span) {
            v.unparseable.push_back(current);
            span = std::string();
        }
        v.localized_span = normalize_span(*span);

        // Stage 3
        current = Stage::Correct;
        prior.span = *v.localized_span;
        elapsed = 0.0;
        raw.clear();
        auto corrected =
            run.call(current, build_prompt(current, report, mode, knowledge, prior), parse_correction, elapsed, raw);
        v.timings.correct = elapsed;
        if (!corrected) {
            const auto block = longest_block(raw.back());
            v.events.push_back("CORRECT: no CORRECTED_REPORT marker; took the longest response block");
            if (block.empty()) {
                v.unparseable.push_back(current);
            } else {
                corrected = block;
            }
        }
        if (corrected) v.corrected_text = std::move(*corrected);
    } catch (const StageAbort& e) {
        v.failed_stage = std::string(to_string(current));
        v.failure = e.message;
        v.events.push_back(std::string(to_string(current)) + ": " + e.message);
        switch (current) {
            case Stage::Detect: v.timings.detect = elapsed; break;
            case Stage::Localize: v.timings.localize = elapsed; break;
            case Stage::Correct: v.timings.correct = elapsed; break;
            case Stage::EndToEnd: v.timings.end_to_end = elapsed; break;
        }
    }
    finish(v);
    return v;
}

// ---------------------------------------------------------------- serialization

namespace {

nlohmann::json opt(const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); }
nlohmann::json opt(const std::optional<double>& d) { return d ? nlohmann::json(*d) : nlohmann::json(nullptr); }

std::optional<std::string> get_opt_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

std::optional<double> get_opt_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

nlohmann::json verdict_to_json(const StagedVerdict& v) {
    nlohmann::json unparseable = nlohmann::json::array();
    for (auto s : v.unparseable) unparseable.push_back(to_string(s));
    const auto& t = v.timings;
    return {{"case_id", v.case_id},
            {"report_id", v.report_id},
            {"mode", v.mode},
            {"detection", v.detection ? nlohmann::json(to_string(*v.detection)) : nlohmann::json(nullptr)},
            {"localized_span", opt(v.localized_span)},
            {"corrected_text", opt(v.corrected_text)},
            {"timings",
             {{"knowledge", t.knowledge},
              {"detect", opt(t.detect)},
              {"localize", opt(t.localize)},
              {"correct", opt(t.correct)},
              {"end_to_end", opt(t.end_to_end)},
              {"total", t.total}}},
            {"unparseable", unparseable},
            {"failed_stage", opt(v.failed_stage)},
            {"failure", v.failure},
            {"events", v.events}};
}

StagedVerdict verdict_from_json(const nlohmann::json& j) {
    StagedVerdict v;
    try {
        v.case_id = j.at("case_id").get<std::string>();
        v.report_id = j.at("report_id").get<std::string>();
        v.mode = j.value("mode", "");
        if (!j.at("detection").is_null()) {
            v.detection = detection_from_string(j.at("detection").get<std::string>());
            if (!v.detection) fail(ErrorKind::SchemaMismatch, "bad detection value for case '" + v.case_id + "'");
        }
        v.localized_span = get_opt_string(j, "localized_span");
        v.corrected_text = get_opt_string(j, "corrected_text");
        const auto& t = j.at("timings");
        v.timings.knowledge = t.value("knowledge", 0.0);
        v.timings.detect = get_opt_double(t, "detect");
        v.timings.localize = get_opt_double(t, "localize");
        v.timings.correct = get_opt_double(t, "correct");
        v.timings.end_to_end = get_opt_double(t, "end_to_end");
        v.timings.total = t.at("total").get<double>();
        for (const auto& s : j.value("unparseable", nlohmann::json::array())) {
            if (auto st = stage_from_string(s.get<std::string>())) v.unparseable.push_back(*st);
        }
        v.failed_stage = get_opt_string(j, "failed_stage");
        v.failure = j.value("failure", "");
        v.events = j.value("events", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::SchemaMismatch, std::string("verdict record: ") + e.what());
    }
    return v;
}

nlohmann::json transcript_to_json(const TranscriptRecord& t) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : t.attempts) {
        attempts.push_back({{"attempt", a.attempt}, {"status", a.status}, {"response_body", a.response_body},
                            {"error", a.error}});
    }
    return {{"case_id", t.case_id}, {"stage", to_string(t.stage)}, {"call", t.call},
            {"prompt", t.prompt},   {"response", t.response},      {"attempts", attempts},
            {"seconds", t.seconds}, {"error", t.error}};
}

}  // namespace proofread
