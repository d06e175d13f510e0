#include "proofread/metrics.hpp"

#include "proofread/error.hpp"
#include "proofread/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>

namespace proofread {

std::vector<std::string> metric_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) out.push_back(std::move(t.normalized));
    return out;
}

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngrams(std::span<const std::string> toks, std::size_t n) {
    Counts c;
    if (toks.size() < n) return c;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++c[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return c;
}

std::size_t clipped_matches(const Counts& cand, const Counts& ref) {
    std::size_t m = 0;
    for (const auto& [g, n] : cand) {
        const auto it = ref.find(g);
        if (it != ref.end()) m += std::min(n, it->second);
    }
    return m;
}

}  // namespace

double rouge1_f(std::span<const std::string> candidate, std::span<const std::string> reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    const auto overlap = static_cast<double>(clipped_matches(ngrams(candidate, 1), ngrams(reference, 1)));
    if (overlap == 0.0) return 0.0;
    const double p = overlap / static_cast<double>(candidate.size());
    const double r = overlap / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        const auto matches = clipped_matches(ngrams(candidate, n), ngrams(reference, n));
        const double total = static_cast<double>(candidate.size() - n + 1);
        const double p = matches == 0 ? kBleuEpsilon / total : static_cast<double>(matches) / total;
        log_sum += std::log(p);
    }
    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / static_cast<double>(max_order));
}

double bertscore_like(std::span<const std::string> candidate, std::span<const std::string> reference,
                      const TokenEmbedder& embedder, ScanMode mode) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    const auto dim = embedder.dim();
    auto pack = [&](std::span<const std::string> toks) {
        std::vector<float> rows;
        rows.reserve(toks.size() * dim);
        for (const auto& t : toks) {
            const auto v = embedder.embed_token(t);
            rows.insert(rows.end(), v.values().begin(), v.values().end());
        }
        return rows;
    };
    const auto a = pack(candidate);
    const auto b = pack(reference);
    const auto na = candidate.size();
    const auto nb = reference.size();
    std::vector<double> sim(na * nb);
    if (mode == ScanMode::Parallel) {
        kernels::similarity_matrix_parallel(a, b, dim, sim);
    } else {
        kernels::similarity_matrix_serial(a, b, dim, sim);
    }
    // Float storage leaves self-similarity a few ulps under 1; equal tokens
    // are pinned so the identity law holds exactly.
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            if (candidate[i] == reference[j]) sim[i * nb + j] = 1.0;
        }
    }
    double p = 0.0;
    for (std::size_t i = 0; i < na; ++i) p += *std::max_element(sim.begin() + i * nb, sim.begin() + (i + 1) * nb);
    p /= static_cast<double>(na);
    double r = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
        double best = sim[j];
        for (std::size_t i = 1; i < na; ++i) best = std::max(best, sim[i * nb + j]);
        r += best;
    }
    r /= static_cast<double>(nb);
    if (p + r <= 0.0) return 0.0;
    return std::clamp(2.0 * p * r / (p + r), 0.0, 1.0);
}

// ---------------------------------------------------------------- scoring

namespace {

std::map<std::string_view, const StagedVerdict*> index_verdicts(std::span<const StagedVerdict> verdicts,
                                                                std::span<const BenchmarkCase> cases) {
    std::map<std::string_view, const StagedVerdict*> by_id;
    for (const auto& v : verdicts) by_id[v.case_id] = &v;
    std::vector<std::string> missing;
    for (const auto& c : cases) {
        if (!by_id.count(c.case_id)) missing.push_back(c.case_id);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20) list += ", ...";
        fail(ErrorKind::MissingVerdict, std::to_string(missing.size()) + " case(s) without a verdict: " + list);
    }
    return by_id;
}

bool detection_correct(const StagedVerdict& v, const BenchmarkCase& c) {
    if (!v.detection || v.unparseable_at(Stage::Detect)) return false;
    return (*v.detection == Detection::Error) == c.descriptor.has_value();
}

std::optional<bool> localization_correct(const StagedVerdict& v, const BenchmarkCase& c) {
    if (!c.descriptor) return std::nullopt;
    if (v.detection != Detection::Error || !v.localized_span) return false;
    return localization_matches(*v.localized_span, c.descriptor->corrupted_span);
}

bool correction_scored(const StagedVerdict& v, const BenchmarkCase& c) {
    return c.descriptor && v.detection == Detection::Error && v.corrected_text.has_value();
}

}  // namespace

bool localization_matches(std::string_view predicted, std::string_view truth) {
    const auto p = normalize_span(predicted);
    const auto t = normalize_span(truth);
    if (p.empty() || t.empty()) return false;
    return p.find(t) != std::string::npos || t.find(p) != std::string::npos;
}

double score_detection(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases) {
    const auto by_id = index_verdicts(verdicts, cases);
    if (cases.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& c : cases) correct += detection_correct(*by_id.at(c.case_id), c);
    return static_cast<double>(correct) / static_cast<double>(cases.size());
}

double score_localization(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases) {
    const auto by_id = index_verdicts(verdicts, cases);
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& c : cases) {
        const auto ok = localization_correct(*by_id.at(c.case_id), c);
        if (!ok) continue;
        ++total;
        correct += *ok;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

CorrectionScores score_correction(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases,
                                  const TokenEmbedder& embedder) {
    const auto by_id = index_verdicts(verdicts, cases);
    CorrectionScores s;
    double r1 = 0.0, bs = 0.0, bl = 0.0;
    for (const auto& c : cases) {
        const auto& v = *by_id.at(c.case_id);
        if (!correction_scored(v, c)) continue;
        const auto cand = metric_tokens(*v.corrected_text);
        const auto ref = metric_tokens(c.original.text());
        r1 += rouge1_f(cand, ref);
        bs += bertscore_like(cand, ref, embedder);
        bl += bleu(cand, ref);
        ++s.n_scored;
    }
    if (s.n_scored == 0) return s;
    const auto n = static_cast<double>(s.n_scored);
    s.rouge1 = r1 / n;
    s.bertscore_like = bs / n;
    s.bleu = bl / n;
    s.agg_nlg = (*s.rouge1 + *s.bertscore_like + *s.bleu) / 3.0;
    return s;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

std::optional<TimingStats> timing_stats(std::span<const double> seconds) {
    if (seconds.empty()) return std::nullopt;
    std::vector<double> v(seconds.begin(), seconds.end());
    TimingStats t;
    t.n = v.size();
    t.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    t.median = percentile(v, 0.5);
    t.p90 = percentile(v, 0.9);
    t.p95 = percentile(v, 0.95);
    t.min = *std::min_element(v.begin(), v.end());
    t.max = *std::max_element(v.begin(), v.end());
    return t;
}

double reduction(double a, double b) {
    if (a == 0.0) fail(ErrorKind::InvalidConfig, "reduction baseline is zero");
    return (a - b) / a;
}

MetricReport evaluate(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases,
                      const TokenEmbedder& embedder, std::string label) {
    const auto by_id = index_verdicts(verdicts, cases);
    MetricReport r;
    r.label = std::move(label);
    r.n_cases = cases.size();

    std::vector<double> total, detect, localize, correct, knowledge;
    std::size_t det_ok = 0, loc_ok = 0;
    double r1 = 0.0, bs = 0.0, bl = 0.0;
    for (const auto& c : cases) {
        const auto& v = *by_id.at(c.case_id);
        CaseRow row;
        row.case_id = c.case_id;
        row.has_error = c.descriptor.has_value();
        row.predicted = v.detection;
        row.detection_correct = detection_correct(v, c);
        row.localization_correct = localization_correct(v, c);
        row.seconds = v.timings.total;
        det_ok += row.detection_correct;
        if (row.has_error) {
            ++r.n_corrupted;
            loc_ok += row.localization_correct.value_or(false);
        }
        if (correction_scored(v, c)) {
            const auto cand = metric_tokens(*v.corrected_text);
            const auto ref = metric_tokens(c.original.text());
            row.rouge1 = rouge1_f(cand, ref);
            row.bertscore_like = bertscore_like(cand, ref, embedder);
            row.bleu = bleu(cand, ref);
            r1 += *row.rouge1;
            bs += *row.bertscore_like;
            bl += *row.bleu;
            ++r.correction.n_scored;
        }
        total.push_back(v.timings.total);
        knowledge.push_back(v.timings.knowledge);
        if (v.timings.detect) detect.push_back(*v.timings.detect);
        if (v.timings.localize) localize.push_back(*v.timings.localize);
        if (v.timings.correct) correct.push_back(*v.timings.correct);
        r.rows.push_back(std::move(row));
    }
    if (r.n_cases) r.detection_accuracy = static_cast<double>(det_ok) / static_cast<double>(r.n_cases);
    if (r.n_corrupted) {
        r.localization_accuracy = static_cast<double>(loc_ok) / static_cast<double>(r.n_corrupted);
    } else {
        r.flags.push_back("no corrupted cases; localization accuracy undefined");
    }
    if (r.correction.n_scored) {
        const auto n = static_cast<double>(r.correction.n_scored);
        r.correction.rouge1 = r1 / n;
        r.correction.bertscore_like = bs / n;
        r.correction.bleu = bl / n;
        r.correction.agg_nlg = (*r.correction.rouge1 + *r.correction.bertscore_like + *r.correction.bleu) / 3.0;
    } else {
        r.flags.push_back("no scored corrections; correction metrics are null");
    }
    r.total_time = timing_stats(total);
    if (!r.total_time) r.flags.push_back("no verdicts; timing statistics are null");
    r.knowledge_time = timing_stats(knowledge);
    r.detect_time = timing_stats(detect);
    r.localize_time = timing_stats(localize);
    r.correct_time = timing_stats(correct);
    return r;
}

// ---------------------------------------------------------------- output

namespace {

nlohmann::json opt_num(const std::optional<double>& d) { return d ? nlohmann::json(*d) : nlohmann::json(nullptr); }

nlohmann::json stats_json(const std::optional<TimingStats>& t) {
    if (!t) return nullptr;
    return {{"n", t->n},       {"mean", t->mean}, {"median", t->median}, {"p90", t->p90},
            {"p95", t->p95},   {"min", t->min},   {"max", t->max}};
}

}  // namespace

nlohmann::json report_to_json(const MetricReport& r, bool with_rows) {
    nlohmann::json j = {{"label", r.label},
                        {"n_cases", r.n_cases},
                        {"n_corrupted", r.n_corrupted},
                        {"detection_accuracy", r.detection_accuracy},
                        {"localization_accuracy", opt_num(r.localization_accuracy)},
                        {"rouge1", opt_num(r.correction.rouge1)},
                        {"bertscore_like", opt_num(r.correction.bertscore_like)},
                        {"bleu", opt_num(r.correction.bleu)},
                        {"agg_nlg", opt_num(r.correction.agg_nlg)},
                        {"n_scored_corrections", r.correction.n_scored},
                        {"mean_seconds_per_case", r.total_time ? nlohmann::json(r.total_time->mean) : nlohmann::json(nullptr)},
                        {"timing",
                         {{"total", stats_json(r.total_time)},
                          {"knowledge", stats_json(r.knowledge_time)},
                          {"detect", stats_json(r.detect_time)},
                          {"localize", stats_json(r.localize_time)},
                          {"correct", stats_json(r.correct_time)}}},
                        {"flags", r.flags}};
    if (with_rows) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : r.rows) {
            rows.push_back({{"case_id", row.case_id},
                            {"has_error", row.has_error},
                            {"predicted", row.predicted ? nlohmann::json(to_string(*row.predicted)) : nlohmann::json(nullptr)},
                            {"detection_correct", row.detection_correct},
                            {"localization_correct",
                             row.localization_correct ? nlohmann::json(*row.localization_correct) : nlohmann::json(nullptr)},
                            {"rouge1", opt_num(row.rouge1)},
                            {"bertscore_like", opt_num(row.bertscore_like)},
                            {"bleu", opt_num(row.bleu)},
                            {"seconds", row.seconds}});
        }
        j["rows"] = std::move(rows);
    }
    return j;
}

std::string format_table(std::span<const MetricReport> reports) {
    struct Line {
        std::string name;
        std::function<std::optional<double>(const MetricReport&)> get;
        bool percent;
    };
    const std::vector<Line> lines = {
        {"Error Detection (Acc%)", [](const MetricReport& r) -> std::optional<double> { return r.detection_accuracy; }, true},
        {"Error Localization (Acc%)", [](const MetricReport& r) { return r.localization_accuracy; }, true},
        {"ROUGE-1", [](const MetricReport& r) { return r.correction.rouge1; }, true},
        {"BERTScore", [](const MetricReport& r) { return r.correction.bertscore_like; }, true},
        {"BLEU", [](const MetricReport& r) { return r.correction.bleu; }, true},
        {"AggNLG", [](const MetricReport& r) { return r.correction.agg_nlg; }, true},
        {"Scored corrections",
         [](const MetricReport& r) -> std::optional<double> { return static_cast<double>(r.correction.n_scored); }, false},
        {"Processing Time (s)",
         [](const MetricReport& r) -> std::optional<double> {
             if (!r.total_time) return std::nullopt;
             return r.total_time->mean;
         },
         false},
    };
    char buf[64];
    // Counts print without decimals; everything else with two.
    auto is_count = [](const Line& l) { return l.name == "Scored corrections"; };
    auto cell = [&](const Line& l, std::optional<double> v) -> std::string {
        if (!v) return "-";
        std::snprintf(buf, sizeof buf, is_count(l) ? "%.0f" : "%.2f", l.percent ? *v * 100.0 : *v);
        return buf;
    };
    auto delta = [&](const Line& l, std::optional<double> v, std::optional<double> base) -> std::string {
        if (!v || !base) return "-";
        std::snprintf(buf, sizeof buf, is_count(l) ? "%+.0f" : "%+.2f", (l.percent ? 100.0 : 1.0) * (*v - *base));
        return buf;
    };

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Metric"};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        header.push_back(reports[i].label.empty() ? "run " + std::to_string(i + 1) : reports[i].label);
        if (i > 0) header.push_back("Δ");
    }
    grid.push_back(header);
    for (const auto& line : lines) {
        std::vector<std::string> row{line.name};
        for (std::size_t i = 0; i < reports.size(); ++i) {
            row.push_back(cell(line, line.get(reports[i])));
            if (i > 0) row.push_back(delta(line, line.get(reports[i]), line.get(reports[0])));
        }
        grid.push_back(std::move(row));
    }

    // Column widths count code points so the delta sign lines up.
    auto width = [](const std::string& s) {
        std::size_t n = 0;
        for (unsigned char c : s) n += (c & 0xC0) != 0x80;
        return n;
    };
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
    }
    std::string out;
    for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t c = 0; c < grid[r].size(); ++c) {
            const auto& s = grid[r][c];
            const auto pad = std::string(widths[c] - width(s), ' ');
            out += c == 0 ? s + pad : "  " + pad + s;
        }
        out += '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : widths) total += w + 2;
            out += std::string(total - 2, '-') + '\n';
        }
    }
    return out;
}

}  // namespace proofread
