#include "proofread/annotate.hpp"

#include "proofread/error.hpp"
#include "proofread/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace proofread {

namespace embedded {
extern const std::string_view graph_lexicon_txt;
}

namespace {

std::vector<std::string> term_tokens(std::string_view term) {
    std::vector<std::string> out;
    for (auto& t : tokenize(term)) out.push_back(std::move(t.normalized));
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

GraphLexicon GraphLexicon::parse(std::string_view body) {
    GraphLexicon lex;
    std::vector<std::vector<std::string>>* current = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto nl = body.find('\n', pos);
        if (nl == std::string_view::npos) nl = body.size();
        ++line_no;
        auto line = text::trim(body.substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            const auto name = line.substr(1, line.size() - 2);
            if (name == "anatomy") current = &lex.anatomy;
            else if (name == "observation") current = &lex.observations;
            else if (name == "modifier") current = &lex.modifiers;
            else if (name == "negation") current = &lex.negation;
            else if (name == "hedge") current = &lex.hedging;
            else if (name == "suggestive") current = &lex.suggestive;
            else fail(ErrorKind::SchemaMismatch, "unknown lexicon table [" + std::string(name) + "]");
            continue;
        }
        if (!current) {
            fail(ErrorKind::SchemaMismatch, "lexicon line " + std::to_string(line_no) + " precedes any table header");
        }
        auto toks = term_tokens(line);
        if (!toks.empty()) current->push_back(std::move(toks));
    }
    return lex;
}

GraphLexicon GraphLexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const GraphLexicon& GraphLexicon::builtin() {
    static const GraphLexicon lex = parse(embedded::graph_lexicon_txt);
    return lex;
}

// ---------------------------------------------------------------------------
// Rule-based extraction

namespace {

enum class ItemKind { Negation, Hedge, Suggestive, Obs, Anat, Modifier };

struct Item {
    ItemKind kind;
    std::size_t first = 0;  // token index
    std::size_t last = 0;   // one past
};

struct TableRef {
    ItemKind kind;
    const std::vector<std::vector<std::string>>* terms;
};

std::size_t match_len(const std::vector<TokenSpan>& toks, std::size_t at, std::size_t sentence_end,
                      const std::vector<std::string>& term) {
    if (at + term.size() > sentence_end) return 0;
    for (std::size_t k = 0; k < term.size(); ++k) {
        if (toks[at + k].normalized != term[k]) return 0;
    }
    return term.size();
}

std::vector<Item> match_items(const std::vector<TokenSpan>& toks, std::size_t begin, std::size_t end,
                              const GraphLexicon& lex) {
    // Tie order on equal length: negation, hedge, suggestive, observation, anatomy, modifier.
    const TableRef tables[] = {
        {ItemKind::Negation, &lex.negation},       {ItemKind::Hedge, &lex.hedging},
        {ItemKind::Suggestive, &lex.suggestive},   {ItemKind::Obs, &lex.observations},
        {ItemKind::Anat, &lex.anatomy},            {ItemKind::Modifier, &lex.modifiers},
    };
    std::vector<Item> items;
    std::size_t i = begin;
    while (i < end) {
        std::size_t best = 0;
        ItemKind kind = ItemKind::Modifier;
        for (const auto& table : tables) {
            for (const auto& term : *table.terms) {
                const auto len = match_len(toks, i, end, term);
                if (len > best) {
                    best = len;
                    kind = table.kind;
                }
            }
        }
        if (best == 0) {
            ++i;
            continue;
        }
        items.push_back({kind, i, i + best});
        i += best;
    }
    return items;
}

bool is_head(const Item& it) { return it.kind == ItemKind::Obs || it.kind == ItemKind::Anat; }

struct Pending {
    std::size_t item = 0;
    EntityCategory category = EntityCategory::Obs;
    Certainty certainty = Certainty::DP;
};

}  // namespace

EntityGraph extract_graph_lexicon(const RadiologyReport& report, const GraphLexicon& lex) {
    std::vector<const Section*> scope;
    for (const auto& s : report.sections()) {
        if (s.kind != SectionKind::Other) scope.push_back(&s);
    }
    if (scope.empty()) {
        for (const auto& s : report.sections()) scope.push_back(&s);
    }

    struct Node {
        std::size_t start, end;
        std::string text;
        EntityCategory category;
        Certainty certainty;
    };
    std::vector<Node> nodes;
    std::vector<std::tuple<std::size_t, std::size_t, RelationKind>> edges;  // node indices

    for (const Section* section : scope) {
        const auto& toks = section->tokens;
        const auto sids = sentence_ids(toks);
        std::size_t sb = 0;
        while (sb < toks.size()) {
            std::size_t se = sb;
            while (se < toks.size() && sids[se] == sids[sb]) ++se;
            const auto items = match_items(toks, sb, se, lex);

            std::vector<long> node_of(items.size(), -1);
            std::vector<bool> suggestive_target(items.size(), false);
            auto make_node = [&](std::size_t idx, EntityCategory cat, Certainty cert) {
                const auto& it = items[idx];
                std::string surface;
                for (std::size_t k = it.first; k < it.last; ++k) {
                    if (!surface.empty()) surface.push_back(' ');
                    surface += toks[k].normalized;
                }
                node_of[idx] = static_cast<long>(nodes.size());
                nodes.push_back({toks[it.first].start, toks[it.last - 1].end, std::move(surface), cat, cert});
            };

            // Suggestive links: nearest OBS before the linker -> first OBS after it.
            std::vector<std::pair<std::size_t, std::size_t>> suggestive_pairs;
            for (std::size_t j = 0; j < items.size(); ++j) {
                if (items[j].kind != ItemKind::Suggestive) continue;
                long before = -1;
                for (long b = static_cast<long>(j) - 1; b >= 0; --b) {
                    if (items[b].kind == ItemKind::Obs) {
                        before = b;
                        break;
                    }
                }
                long after = -1;
                for (std::size_t a = j + 1; a < items.size(); ++a) {
                    if (items[a].kind == ItemKind::Obs) {
                        after = static_cast<long>(a);
                        break;
                    }
                }
                if (before >= 0 && after >= 0) {
                    suggestive_pairs.emplace_back(before, after);
                    suggestive_target[after] = true;
                }
            }

            // Heads, their certainty, and their contiguous modifier runs.
            std::vector<std::vector<std::size_t>> modifiers_of(items.size());
            for (std::size_t j = 0; j < items.size(); ++j) {
                if (!is_head(items[j])) continue;
                Certainty cert = Certainty::DP;
                if (items[j].kind == ItemKind::Obs) {
                    for (long b = static_cast<long>(j) - 1; b >= 0; --b) {
                        if (items[b].kind == ItemKind::Negation) {
                            cert = Certainty::DA;
                            break;
                        }
                        if (items[b].kind == ItemKind::Hedge) {
                            cert = Certainty::U;
                            break;
                        }
                    }
                }
                const auto cat = items[j].kind == ItemKind::Obs ? EntityCategory::Obs : EntityCategory::Anat;
                make_node(j, cat, cert);
                std::size_t next_first = items[j].first;
                for (long b = static_cast<long>(j) - 1; b >= 0; --b) {
                    if (items[b].kind != ItemKind::Modifier || items[b].last != next_first) break;
                    modifiers_of[j].push_back(static_cast<std::size_t>(b));
                    next_first = items[b].first;
                }
                for (auto m : modifiers_of[j]) {
                    make_node(m, cat, cert);
                    edges.emplace_back(node_of[m], node_of[j], RelationKind::Modify);
                }
            }

            // LOCATED_AT: ANAT head directly before the OBS noun phrase, else the
            // first ANAT head after the OBS in the sentence.
            for (std::size_t j = 0; j < items.size(); ++j) {
                if (items[j].kind != ItemKind::Obs || suggestive_target[j]) continue;
                std::size_t phrase_first = items[j].first;
                long lead = static_cast<long>(j) - 1;
                if (!modifiers_of[j].empty()) {
                    const auto m = modifiers_of[j].back();
                    phrase_first = items[m].first;
                    lead = static_cast<long>(m) - 1;
                }
                long anat = -1;
                if (lead >= 0 && items[lead].kind == ItemKind::Anat && items[lead].last == phrase_first) {
                    anat = lead;
                } else {
                    for (std::size_t a = j + 1; a < items.size(); ++a) {
                        if (items[a].kind == ItemKind::Anat) {
                            anat = static_cast<long>(a);
                            break;
                        }
                    }
                }
                if (anat >= 0) edges.emplace_back(node_of[j], node_of[anat], RelationKind::LocatedAt);
            }
            for (auto [from, to] : suggestive_pairs) {
                edges.emplace_back(node_of[from], node_of[to], RelationKind::SuggestiveOf);
            }
            sb = se;
        }
    }

    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nodes[a].start < nodes[b].start; });
    std::vector<std::string> ids(nodes.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) ids[order[rank]] = std::to_string(rank + 1);

    GraphBuilder builder(report.id());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto& n = nodes[i];
        builder.add_entity({ids[i], std::move(n.text), n.start, n.end, n.category, n.certainty});
    }
    for (auto [s, t, kind] : edges) builder.add_relation({ids[s], ids[t], kind});
    return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Annotation ingestion

namespace {

const nlohmann::json* find_entities(const nlohmann::json& record) {
    if (!record.is_object()) fail(ErrorKind::SchemaMismatch, "annotation record must be a JSON object");
    if (record.contains("entities")) return &record.at("entities");
    if (record.size() == 1) {
        const auto& inner = record.begin().value();
        if (inner.is_object() && inner.contains("entities")) return &inner.at("entities");
    }
    return nullptr;
}

std::string squash(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!text::is_space(c)) out.push_back(c);
    }
    return text::to_lower(out);
}

}  // namespace

IngestResult ingest_annotations(const nlohmann::json& record, const RadiologyReport& report) {
    IngestResult result;
    const nlohmann::json* entities = find_entities(record);
    if (!entities) {
        if (record.empty()) {
            result.graph = std::move(GraphBuilder(report.id())).build();
            return result;
        }
        fail(ErrorKind::SchemaMismatch, "annotation record has no 'entities' object");
    }
    if (!entities->is_object()) fail(ErrorKind::SchemaMismatch, "'entities' must be an object keyed by id");

    const auto toks = report.document_tokens();
    GraphBuilder builder(report.id());
    std::vector<Relation> relations;

    for (const auto& [id, ent] : entities->items()) {
        if (!ent.is_object()) fail(ErrorKind::SchemaMismatch, "entity '" + id + "' is not an object");
        if (!ent.contains("label") || !ent["label"].is_string()) {
            fail(ErrorKind::SchemaMismatch, "entity '" + id + "' lacks a string label");
        }
        const auto label = parse_label(ent["label"].get<std::string>());
        if (!label) fail(ErrorKind::SchemaMismatch, "entity '" + id + "' has unknown label " + ent["label"].dump());
        if (!ent.contains("start_ix") || !ent.contains("end_ix") || !ent["start_ix"].is_number_integer() ||
            !ent["end_ix"].is_number_integer()) {
            fail(ErrorKind::SchemaMismatch, "entity '" + id + "' lacks integer start_ix/end_ix");
        }
        const auto start_ix = ent["start_ix"].get<long long>();
        const auto end_ix = ent["end_ix"].get<long long>();
        if (start_ix < 0 || end_ix < start_ix || static_cast<std::size_t>(end_ix) >= toks.size()) {
            fail(ErrorKind::SchemaMismatch, "entity '" + id + "' token range [" + std::to_string(start_ix) + ", " +
                                                std::to_string(end_ix) + "] is outside the report");
        }
        std::size_t first = static_cast<std::size_t>(start_ix);
        std::size_t last = static_cast<std::size_t>(end_ix) + 1;

        auto joined = [&](std::size_t f, std::size_t l) {
            std::string s;
            for (std::size_t k = f; k < l; ++k) {
                if (!s.empty()) s.push_back(' ');
                s += toks[k].normalized;
            }
            return s;
        };
        if (ent.contains("tokens") && ent["tokens"].is_string()) {
            const auto want = squash(ent["tokens"].get<std::string>());
            if (squash(joined(first, last)) != want) {
                // Relocate to the first exact occurrence of the annotated tokens.
                const auto width = last - first;
                bool found = false;
                for (std::size_t f = 0; f + width <= toks.size(); ++f) {
                    if (squash(joined(f, f + width)) == want) {
                        first = f;
                        last = f + width;
                        found = true;
                        break;
                    }
                }
                result.unresolved.push_back("entity '" + id + "' tokens \"" + ent["tokens"].get<std::string>() +
                                            (found ? "\" relocated" : "\" not found in report"));
            }
        }
        builder.add_entity({id, joined(first, last), toks[first].start, toks[last - 1].end, label->first,
                            label->second});

        if (ent.contains("relations")) {
            const auto& rels = ent["relations"];
            if (!rels.is_array()) fail(ErrorKind::SchemaMismatch, "entity '" + id + "' relations must be an array");
            for (const auto& rel : rels) {
                if (!rel.is_array() || rel.size() != 2 || !rel[0].is_string() ||
                    !(rel[1].is_string() || rel[1].is_number_integer())) {
                    fail(ErrorKind::SchemaMismatch, "entity '" + id + "' has malformed relation " + rel.dump());
                }
                const auto kind = relation_kind_from_string(rel[0].get<std::string>());
                if (!kind) fail(ErrorKind::SchemaMismatch, "unknown relation kind " + rel[0].dump());
                const std::string target =
                    rel[1].is_string() ? rel[1].get<std::string>() : std::to_string(rel[1].get<long long>());
                if (!entities->contains(target)) {
                    fail(ErrorKind::DanglingRelation, "entity '" + id + "' relates to missing entity '" + target + "'");
                }
                relations.push_back({id, target, *kind});
            }
        }
    }
    for (auto& r : relations) builder.add_relation(std::move(r));
    try {
        result.graph = std::move(builder).build();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DanglingRelation) throw;
        fail(ErrorKind::SchemaMismatch, e.what());
    }
    return result;
}

AnnotationStoreProvider AnnotationStoreProvider::load(const std::filesystem::path& path,
                                                      std::shared_ptr<const GraphProvider> fallback) {
    const auto body = read_file(path);
    std::map<std::string, nlohmann::json> records;
    try {
        const bool whole = nlohmann::json::accept(body);
        nlohmann::json doc = whole ? nlohmann::json::parse(body) : nlohmann::json();
        if (whole && doc.is_object() && !doc.contains("report_id")) {
            for (auto& [k, v] : doc.items()) records.emplace(k, v);
        } else {
            std::istringstream in(body);
            std::string line;
            while (std::getline(in, line)) {
                if (text::trim(line).empty()) continue;
                auto j = nlohmann::json::parse(line);
                records.emplace(j.at("report_id").get<std::string>(), j.at("annotation"));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::SchemaMismatch, path.string() + ": " + e.what());
    }
    return AnnotationStoreProvider(std::move(records), std::move(fallback));
}

EntityGraph AnnotationStoreProvider::annotate(const RadiologyReport& report) const {
    auto it = records_.find(report.id());
    if (it == records_.end()) {
        if (fallback_) return fallback_->annotate(report);
        fail(ErrorKind::SchemaMismatch, "no annotation record for report '" + report.id() + "'");
    }
    return ingest_annotations(it->second, report).graph;
}

}  // namespace proofread
