#include "proofread/injection.hpp"

#include "proofread/error.hpp"
#include "proofread/rng.hpp"
#include "proofread/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace proofread {

namespace embedded {
extern const std::string_view substitution_lexicon_tsv;
}

std::string_view to_string(Strategy s) {
    return s == Strategy::NegationFlip ? "NEGATION_FLIP" : "ENTITY_SUBSTITUTION";
}

std::string_view to_string(SubstitutionCategory c) {
    switch (c) {
        case SubstitutionCategory::SpeechConfusion: return "SPEECH_CONFUSION";
        case SubstitutionCategory::TerminologyAmbiguity: return "TERMINOLOGY_AMBIGUITY";
        case SubstitutionCategory::TemplateTerm: return "TEMPLATE_TERM";
        case SubstitutionCategory::OtherCondition: return "OTHER_CONDITION";
    }
    return "OTHER_CONDITION";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
    if (s == "NEGATION_FLIP") return Strategy::NegationFlip;
    if (s == "ENTITY_SUBSTITUTION") return Strategy::EntitySubstitution;
    return std::nullopt;
}

std::optional<SubstitutionCategory> category_from_string(std::string_view s) {
    for (auto c : {SubstitutionCategory::SpeechConfusion, SubstitutionCategory::TerminologyAmbiguity,
                   SubstitutionCategory::TemplateTerm, SubstitutionCategory::OtherCondition}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- lexicon

SubstitutionLexicon SubstitutionLexicon::parse(std::string_view body) {
    SubstitutionLexicon lex;
    std::string finding;
    std::set<std::string> seen_findings;
    std::istringstream in{std::string(body)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto where = " (line " + std::to_string(lineno) + ")";
        if (t.front() == '[') {
            if (t.back() != ']') fail(ErrorKind::SchemaMismatch, "unterminated block header" + where);
            finding = std::string(text::trim(t.substr(1, t.size() - 2)));
            if (std::find(kFindings.begin(), kFindings.end(), finding) == kFindings.end()) {
                fail(ErrorKind::SchemaMismatch, "unknown finding '" + finding + "'" + where);
            }
            seen_findings.insert(finding);
            continue;
        }
        if (finding.empty()) fail(ErrorKind::SchemaMismatch, "row outside a finding block" + where);
        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (true) {
            const auto tab = t.find('\t', pos);
            cols.emplace_back(text::trim(t.substr(pos, tab == std::string_view::npos ? t.npos : tab - pos)));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
        if (cols.size() != 3) fail(ErrorKind::SchemaMismatch, "expected 3 tab-separated columns" + where);
        const auto category = category_from_string(cols[1]);
        if (!category) fail(ErrorKind::SchemaMismatch, "unknown category '" + cols[1] + "'" + where);
        auto term = text::to_lower(cols[0]);
        auto replacement = text::to_lower(cols[2]);
        if (term.empty() || replacement.empty()) fail(ErrorKind::SchemaMismatch, "empty term" + where);
        if (term == replacement) fail(ErrorKind::SchemaMismatch, "replacement equals term" + where);
        lex.rows_.push_back({finding, std::move(term), *category, std::move(replacement)});
    }
    if (seen_findings.size() != kFindings.size()) {
        for (auto f : kFindings) {
            if (!seen_findings.count(std::string(f))) {
                fail(ErrorKind::SchemaMismatch, "finding '" + std::string(f) + "' has no block");
            }
        }
    }
    return lex;
}

SubstitutionLexicon SubstitutionLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const SubstitutionLexicon& SubstitutionLexicon::builtin() {
    static const SubstitutionLexicon lex = parse(embedded::substitution_lexicon_tsv);
    return lex;
}

std::vector<std::string> SubstitutionLexicon::terms() const {
    std::set<std::string> s;
    for (const auto& r : rows_) s.insert(r.term);
    return {s.begin(), s.end()};
}

std::map<SubstitutionCategory, std::vector<std::string>> SubstitutionLexicon::alternatives(
    std::string_view term) const {
    std::map<SubstitutionCategory, std::vector<std::string>> out;
    const auto key = text::to_lower(term);
    for (const auto& r : rows_) {
        if (r.term != key) continue;
        auto& v = out[r.category];
        if (std::find(v.begin(), v.end(), r.replacement) == v.end()) v.push_back(r.replacement);
    }
    return out;
}

bool SubstitutionLexicon::contains(std::string_view term, SubstitutionCategory category,
                                   std::string_view replacement) const {
    const auto t = text::to_lower(term);
    const auto r = text::to_lower(replacement);
    return std::any_of(rows_.begin(), rows_.end(), [&](const Row& row) {
        return row.term == t && row.category == category && row.replacement == r;
    });
}

std::string SubstitutionLexicon::digest() const {
    std::string canon;
    for (const auto& r : rows_) {
        canon += r.finding + '\t' + r.term + '\t' + std::string(to_string(r.category)) + '\t' + r.replacement + '\n';
    }
    return text::sha256_hex(canon);
}

// ---------------------------------------------------------------- edits

namespace {

struct Edit {
    std::size_t begin = 0;  // original document offsets
    std::size_t end = 0;
    std::string replacement;
    SectionKind section = SectionKind::Findings;
};

BenchmarkCase apply_edit(const RadiologyReport& report, const Edit& e, Strategy strategy,
                         std::optional<SubstitutionCategory> category, std::uint64_t seed) {
    ErrorDescriptor d;
    d.strategy = strategy;
    d.category = category;
    d.section = e.section;
    d.original_span = std::string(report.slice(e.begin, e.end));
    d.corrupted_span = e.replacement;
    d.begin = e.begin;
    d.end = e.begin + e.replacement.size();
    d.seed = seed;
    BenchmarkCase c;
    c.case_id = report.id();
    c.original = report;
    c.corrupted = replace_span(report, e.begin, e.end, e.replacement);
    c.descriptor = std::move(d);
    return c;
}

bool in_scope(SectionKind k) { return k == SectionKind::Findings || k == SectionKind::Impression; }

// Where the noun phrase of an OBS head begins: its modifier closure, extended
// over an ANAT compound that sits directly before it ("lower lobe opacity").
std::size_t phrase_start(const EntityGraph& g, const Entity& head, std::string_view doc) {
    auto closure_start = [&](const Entity& root) {
        std::size_t best = root.start;
        std::vector<const Entity*> stack{&root};
        std::set<std::string> seen{root.id};
        while (!stack.empty()) {
            const auto* e = stack.back();
            stack.pop_back();
            best = std::min(best, e->start);
            for (const auto* r : g.incoming(e->id, RelationKind::Modify)) {
                if (seen.insert(r->source).second) stack.push_back(g.find(r->source));
            }
        }
        return best;
    };
    std::size_t start = closure_start(head);
    for (const auto* r : g.outgoing(head.id, RelationKind::LocatedAt)) {
        const auto* anat = g.find(r->target);
        if (anat->end > start) continue;
        const auto gap = doc.substr(anat->end, start - anat->end);
        if (std::all_of(gap.begin(), gap.end(), [](char c) { return text::is_space(c); })) {
            start = closure_start(*anat);
        }
    }
    return start;
}

bool is_modifier(const EntityGraph& g, const Entity& e) { return !g.outgoing(e.id, RelationKind::Modify).empty(); }

// Predicate adjectives read badly with a preceding "no".
const std::set<std::string, std::less<>> kNotInsertable = {"clear", "normal", "unremarkable", "stable",
                                                           "intact", "within normal limits"};
// A "no" after these would break the phrase.
const std::set<std::string, std::less<>> kBlockingPrev = {"a",    "an",    "the",   "any", "some", "this",
                                                          "that", "these", "those", "of",  "no",   "without"};

struct Marker {
    std::size_t first = 0;  // token index within section
    std::size_t last = 0;
};

std::vector<Edit> negation_sites(const RadiologyReport& report, const GraphLexicon& lex) {
    const auto graph = extract_graph_lexicon(report, lex);
    const std::string_view doc = report.text();
    std::vector<Edit> sites;

    for (const auto& sec : report.sections()) {
        if (!in_scope(sec.kind)) continue;
        const auto& toks = sec.tokens;
        const auto sids = sentence_ids(toks);

        std::vector<Marker> markers;
        for (std::size_t i = 0; i < toks.size();) {
            std::size_t best = 0;
            for (const auto& term : lex.negation) {
                if (i + term.size() > toks.size() || term.empty()) continue;
                bool ok = sids[i + term.size() - 1] == sids[i];
                for (std::size_t k = 0; ok && k < term.size(); ++k) ok = toks[i + k].normalized == term[k];
                if (ok) best = std::max(best, term.size());
            }
            if (best) {
                markers.push_back({i, i + best});
                i += best;
            } else {
                ++i;
            }
        }

        // Heads of OBS phrases in this section, document order.
        std::vector<const Entity*> heads;
        for (const auto& e : graph.entities()) {
            if (e.category != EntityCategory::Obs || is_modifier(graph, e)) continue;
            if (e.start < sec.body_begin() || e.end > sec.end()) continue;
            heads.push_back(&e);
        }
        auto sentence_of = [&](std::size_t offset) {
            for (std::size_t i = 0; i < toks.size(); ++i) {
                if (toks[i].start <= offset && offset < toks[i].end) return sids[i];
            }
            return SIZE_MAX;
        };

        // Negative -> positive: the marker is removed (or its polarity word swapped).
        for (std::size_t m = 0; m < markers.size(); ++m) {
            const auto& mk = markers[m];
            const auto m_start = toks[mk.first].start;
            const auto m_end = toks[mk.last - 1].end;
            const auto limit = m + 1 < markers.size() && sids[markers[m + 1].first] == sids[mk.first]
                                   ? toks[markers[m + 1].first].start
                                   : SIZE_MAX;
            const Entity* target = nullptr;
            for (const auto* h : heads) {
                if (h->start >= m_end && h->end <= limit && h->certainty == Certainty::DA &&
                    sentence_of(h->start) == sids[mk.first]) {
                    target = h;
                    break;
                }
            }
            if (!target) continue;

            const auto first_word = toks[mk.first].normalized;
            const std::string_view original = doc.substr(m_start, target->end - m_start);
            std::string replaced;
            if (first_word == "without" || first_word == "absence") {
                // "without X" -> "with X", "absence of X" -> "presence of X".
                const std::string swap = first_word == "without" ? "with" : "presence";
                const auto word = doc.substr(m_start, toks[mk.first].end - m_start);
                replaced = (text::starts_with_upper(word) ? text::capitalize_first(swap) : swap) +
                           std::string(original.substr(word.size()));
            } else {
                if (mk.last >= toks.size()) continue;
                const auto rest_start = toks[mk.last].start;
                replaced = std::string(doc.substr(rest_start, target->end - rest_start));
                if (text::starts_with_upper(doc.substr(m_start, m_end - m_start))) {
                    replaced = text::capitalize_first(replaced);
                }
            }
            sites.push_back({m_start, target->end, std::move(replaced), sec.kind});
        }

        // Positive -> negative: "no " before the noun phrase.
        for (const auto* h : heads) {
            if (h->certainty != Certainty::DP || kNotInsertable.count(h->text)) continue;
            if (!graph.incoming(h->id, RelationKind::SuggestiveOf).empty()) continue;
            const auto np = phrase_start(graph, *h, doc);
            std::size_t np_tok = SIZE_MAX;
            for (std::size_t i = 0; i < toks.size(); ++i) {
                if (toks[i].start == np) np_tok = i;
            }
            if (np_tok == SIZE_MAX) continue;
            if (np_tok > 0 && sids[np_tok - 1] == sids[np_tok] && kBlockingPrev.count(toks[np_tok - 1].normalized)) {
                continue;
            }
            const std::string_view phrase = doc.substr(np, h->end - np);
            std::string replaced;
            if (text::starts_with_upper(phrase)) {
                const bool acronym = phrase.size() > 1 && !std::islower(static_cast<unsigned char>(phrase[1]));
                replaced = "No " + (acronym ? std::string(phrase) : text::lowercase_first(phrase));
            } else {
                replaced = "no " + std::string(phrase);
            }
            sites.push_back({np, h->end, std::move(replaced), sec.kind});
        }
    }
    std::sort(sites.begin(), sites.end(), [](const Edit& a, const Edit& b) {
        return std::tie(a.begin, a.end, a.replacement) < std::tie(b.begin, b.end, b.replacement);
    });
    sites.erase(std::unique(sites.begin(), sites.end(),
                            [](const Edit& a, const Edit& b) {
                                return a.begin == b.begin && a.end == b.end && a.replacement == b.replacement;
                            }),
                sites.end());
    return sites;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct Mention {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string term;
    SectionKind section;
};

std::vector<Mention> term_mentions(const RadiologyReport& report, const std::vector<std::string>& terms) {
    const std::string& doc = report.text();
    const auto lowered = text::to_lower(doc);
    std::vector<Mention> out;
    for (const auto& sec : report.sections()) {
        if (!in_scope(sec.kind)) continue;
        const auto lo = sec.body_begin();
        const auto hi = sec.end();
        for (const auto& term : terms) {
            std::size_t pos = lo;
            while ((pos = lowered.find(term, pos)) != std::string::npos && pos + term.size() <= hi) {
                const auto end = pos + term.size();
                const bool left_ok = pos == 0 || !is_word_char(doc[pos - 1]);
                const bool right_ok = end >= doc.size() || !is_word_char(doc[end]);
                if (left_ok && right_ok) out.push_back({pos, end, term, sec.kind});
                ++pos;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Mention& a, const Mention& b) {
        return std::tie(a.begin, a.end, a.term) < std::tie(b.begin, b.end, b.term);
    });
    return out;
}

}  // namespace

BenchmarkCase flip_negation(const RadiologyReport& report, std::uint64_t seed, const GraphLexicon& lexicon) {
    const auto sites = negation_sites(report, lexicon);
    if (sites.empty()) fail(ErrorKind::NoEligibleSite, "no negation site in report '" + report.id() + "'");
    Rng rng(seed);
    return apply_edit(report, sites[rng.index(sites.size())], Strategy::NegationFlip, std::nullopt, seed);
}

BenchmarkCase substitute_entity(const RadiologyReport& report, const SubstitutionLexicon& lexicon,
                                std::uint64_t seed) {
    const auto mentions = term_mentions(report, lexicon.terms());
    if (mentions.empty()) fail(ErrorKind::NoEligibleSite, "no finding mention in report '" + report.id() + "'");
    Rng rng(seed);
    const auto& m = mentions[rng.index(mentions.size())];
    const auto alts = lexicon.alternatives(m.term);
    std::vector<SubstitutionCategory> cats;
    for (const auto& [c, _] : alts) cats.push_back(c);
    const auto category = cats[rng.index(cats.size())];
    const auto& entries = alts.at(category);
    std::string replacement = entries[rng.index(entries.size())];
    if (text::starts_with_upper(report.slice(m.begin, m.end))) replacement = text::capitalize_first(replacement);
    return apply_edit(report, {m.begin, m.end, std::move(replacement), m.section}, Strategy::EntitySubstitution,
                      category, seed);
}

std::string restore_original(const BenchmarkCase& c) {
    std::string out = c.corrupted.text();
    if (!c.descriptor) return out;
    const auto& d = *c.descriptor;
    out.replace(d.begin, d.end - d.begin, d.original_span);
    return out;
}

// ---------------------------------------------------------------- benchmark

namespace {

struct Attempt {
    Strategy strategy;
    std::uint64_t seed;
    std::optional<BenchmarkCase> result;
    std::string error;
};

void run_attempt(const RadiologyReport& report, Attempt& a, const SubstitutionLexicon& lex,
                 const GraphLexicon& glex) {
    try {
        a.result = a.strategy == Strategy::NegationFlip ? flip_negation(report, a.seed, glex)
                                                        : substitute_entity(report, lex, a.seed);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoEligibleSite) throw;
        a.error = e.what();
    }
}

}  // namespace

Benchmark build_benchmark(std::span<const RadiologyReport> corpus, const SubstitutionLexicon& lexicon,
                          const BenchmarkConfig& config, const std::set<std::string>& excluded_ids,
                          ExecMode mode, const GraphLexicon& graph_lexicon) {
    if (config.negation_share < 0.0 || config.negation_share > 1.0) {
        fail(ErrorKind::InvalidConfig, "negation share must lie in [0, 1]");
    }
    std::vector<const RadiologyReport*> pool;
    std::set<std::string> ids;
    for (const auto& r : corpus) {
        if (!ids.insert(r.id()).second) fail(ErrorKind::DuplicateId, "duplicate report id '" + r.id() + "'");
        if (excluded_ids.count(r.id()) || !r.has_findings_or_impression()) continue;
        pool.push_back(&r);
    }
    std::sort(pool.begin(), pool.end(), [](auto* a, auto* b) { return a->id() < b->id(); });

    Rng rng(config.master_seed);
    rng.shuffle(pool);

    if (pool.size() < config.n_clean) {
        fail(ErrorKind::InsufficientCorpus, "need " + std::to_string(config.n_clean) + " clean reports, " +
                                                std::to_string(pool.size()) + " eligible (short by " +
                                                std::to_string(config.n_clean - pool.size()) + ")");
    }

    Benchmark bench;
    bench.config = config;
    bench.lexicon_digest = lexicon.digest();
    std::vector<BenchmarkCase> cases;
    for (std::size_t i = 0; i < config.n_clean; ++i) {
        cases.push_back({pool[i]->id(), *pool[i], *pool[i], std::nullopt});
    }

    // Strategy and seed are drawn in pool order before any attempt runs, so
    // the parallel and serial paths see the same plan.
    const std::size_t rest = pool.size() - config.n_clean;
    std::vector<Attempt> plan(rest);
    for (auto& a : plan) {
        a.strategy = rng.unit() < config.negation_share ? Strategy::NegationFlip : Strategy::EntitySubstitution;
        a.seed = rng.next();
    }

    std::size_t accepted = 0;
    std::size_t next = 0;
    while (accepted < config.n_corrupt && next < rest) {
        const std::size_t need = config.n_corrupt - accepted;
        const std::size_t block = std::min(rest - next, need + need / 4 + 16);
        const auto lo = static_cast<std::ptrdiff_t>(next);
        const auto hi = static_cast<std::ptrdiff_t>(next + block);
        if (mode == ExecMode::Parallel) {
            std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic, 8)
            for (std::ptrdiff_t i = lo; i < hi; ++i) {
                try {
                    run_attempt(*pool[config.n_clean + i], plan[i], lexicon, graph_lexicon);
                } catch (...) {
#pragma omp critical(proofread_inject_error)
                    if (!first_error) first_error = std::current_exception();
                }
            }
            if (first_error) std::rethrow_exception(first_error);
        } else {
            for (std::ptrdiff_t i = lo; i < hi; ++i) {
                run_attempt(*pool[config.n_clean + i], plan[i], lexicon, graph_lexicon);
            }
        }
        for (std::size_t i = next; i < next + block && accepted < config.n_corrupt; ++i) {
            auto& a = plan[i];
            const auto& report = *pool[config.n_clean + i];
            if (a.result) {
                cases.push_back(std::move(*a.result));
                ++accepted;
            } else {
                bench.skip_log.push_back(report.id() + "\t" + std::string(to_string(a.strategy)) + "\t" + a.error);
            }
        }
        next += block;
    }
    if (accepted < config.n_corrupt) {
        fail(ErrorKind::InsufficientCorpus,
             "need " + std::to_string(config.n_corrupt) + " corrupted reports, produced " + std::to_string(accepted) +
                 " (short by " + std::to_string(config.n_corrupt - accepted) + "; " +
                 std::to_string(bench.skip_log.size()) + " reports had no eligible site)");
    }

    std::sort(cases.begin(), cases.end(),
              [](const BenchmarkCase& a, const BenchmarkCase& b) { return a.original.id() < b.original.id(); });
    char buf[32];
    for (std::size_t i = 0; i < cases.size(); ++i) {
        std::snprintf(buf, sizeof buf, "case-%05zu", i + 1);
        cases[i].case_id = buf;
    }
    bench.cases = std::move(cases);
    return bench;
}

std::string manifest_jsonl(const Benchmark& b) {
    std::string out;
    nlohmann::json header = {{"format", "proofread-benchmark-manifest"},
                             {"version", 1},
                             {"n_clean", b.config.n_clean},
                             {"n_corrupt", b.config.n_corrupt},
                             {"negation_share", b.config.negation_share},
                             {"master_seed", b.config.master_seed},
                             {"lexicon_digest", b.lexicon_digest},
                             {"cases", b.cases.size()}};
    out += header.dump() + "\n";
    for (const auto& c : b.cases) {
        nlohmann::json rec = {{"case_id", c.case_id},
                              {"report_id", c.original.id()},
                              {"source_hash", c.original.source_hash()}};
        if (c.descriptor) {
            const auto& d = *c.descriptor;
            rec["strategy"] = to_string(d.strategy);
            rec["category"] = d.category ? nlohmann::json(to_string(*d.category)) : nlohmann::json(nullptr);
            rec["section"] = to_string(d.section);
            rec["original_span"] = d.original_span;
            rec["corrupted_span"] = d.corrupted_span;
            rec["offsets"] = {d.begin, d.end};
            rec["seed"] = d.seed;
        } else {
            for (const char* k : {"strategy", "category", "section", "original_span", "corrupted_span", "offsets", "seed"}) {
                rec[k] = nullptr;
            }
        }
        out += rec.dump() + "\n";
    }
    return out;
}

Benchmark load_manifest(std::string_view manifest, std::span<const RadiologyReport> corpus) {
    std::map<std::string, const RadiologyReport*, std::less<>> by_id;
    for (const auto& r : corpus) by_id[r.id()] = &r;

    Benchmark b;
    std::istringstream in{std::string(manifest)};
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto where = "manifest line " + std::to_string(lineno) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::SchemaMismatch, where + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("format", "") != "proofread-benchmark-manifest") {
                    fail(ErrorKind::SchemaMismatch, where + "missing manifest header");
                }
                if (j.at("version").get<int>() != 1) fail(ErrorKind::SchemaMismatch, where + "unsupported version");
                b.config.n_clean = j.at("n_clean").get<std::size_t>();
                b.config.n_corrupt = j.at("n_corrupt").get<std::size_t>();
                b.config.negation_share = j.at("negation_share").get<double>();
                b.config.master_seed = j.at("master_seed").get<std::uint64_t>();
                b.lexicon_digest = j.at("lexicon_digest").get<std::string>();
                have_header = true;
                continue;
            }
            const auto report_id = j.at("report_id").get<std::string>();
            const auto it = by_id.find(report_id);
            if (it == by_id.end()) fail(ErrorKind::SchemaMismatch, where + "report '" + report_id + "' not in corpus");
            const auto& original = *it->second;
            BenchmarkCase c{j.at("case_id").get<std::string>(), original, original, std::nullopt};
            if (!j.at("strategy").is_null()) {
                ErrorDescriptor d;
                const auto strategy = strategy_from_string(j.at("strategy").get<std::string>());
                const auto section = section_kind_from_string(j.at("section").get<std::string>());
                if (!strategy || !section) fail(ErrorKind::SchemaMismatch, where + "bad strategy or section");
                d.strategy = *strategy;
                d.section = *section;
                if (!j.at("category").is_null()) {
                    d.category = category_from_string(j.at("category").get<std::string>());
                    if (!d.category) fail(ErrorKind::SchemaMismatch, where + "bad category");
                }
                d.original_span = j.at("original_span").get<std::string>();
                d.corrupted_span = j.at("corrupted_span").get<std::string>();
                d.begin = j.at("offsets").at(0).get<std::size_t>();
                d.end = j.at("offsets").at(1).get<std::size_t>();
                d.seed = j.at("seed").get<std::uint64_t>();
                if (d.end - d.begin != d.corrupted_span.size() ||
                    original.text().compare(d.begin, d.original_span.size(), d.original_span) != 0) {
                    fail(ErrorKind::SchemaMismatch, where + "descriptor does not match report '" + report_id + "'");
                }
                c.corrupted = replace_span(original, d.begin, d.begin + d.original_span.size(), d.corrupted_span);
                c.descriptor = std::move(d);
            }
            b.cases.push_back(std::move(c));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::SchemaMismatch, where + e.what());
        }
    }
    if (!have_header) fail(ErrorKind::SchemaMismatch, "manifest is empty");
    return b;
}

}  // namespace proofread
