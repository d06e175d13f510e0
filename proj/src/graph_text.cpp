#include "proofread/graph_text.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

namespace proofread {

namespace {

constexpr std::array kLaterality = {"left", "right", "bilateral", "unilateral", "both", "bibasilar", "bibasal"};
constexpr std::array kVertical = {"upper", "lower", "middle", "mid", "apical", "basilar", "basal", "superior",
                                  "inferior"};

int modifier_rank(const std::string& head_word) {
    for (auto w : kLaterality) {
        if (head_word == w) return 0;
    }
    for (auto w : kVertical) {
        if (head_word == w) return 1;
    }
    return 2;
}

class Renderer {
public:
    explicit Renderer(const EntityGraph& g) : g_(g) {
        for (std::size_t i = 0; i < g.entities().size(); ++i) pos_[g.entities()[i].id] = i;
        for (const auto& r : g.relations()) {
            if (r.kind == RelationKind::Modify) modifier_.insert(r.source);
            if (r.kind == RelationKind::LocatedAt) located_target_.insert(r.target);
        }
        assign_absorption();
    }

    std::vector<KnowledgePhrase> phrases() {
        std::vector<KnowledgePhrase> out;
        for (const auto& e : g_.entities()) {
            if (!is_root(e)) continue;
            std::set<std::string> visiting;
            KnowledgePhrase p;
            p.text = render_full(e, visiting);
            p.root_id = e.id;
            p.region_id = region_of(e);
            p.position = e.start;
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    const Entity& entity(const std::string& id) const { return g_.entities()[pos_.at(id)]; }

    std::vector<const Entity*> sorted_targets(const std::string& id, RelationKind kind) const {
        std::vector<const Entity*> out;
        for (const auto* r : g_.outgoing(id, kind)) out.push_back(&entity(r->target));
        std::sort(out.begin(), out.end(), [&](const Entity* a, const Entity* b) { return pos_.at(a->id) < pos_.at(b->id); });
        return out;
    }

    // SUGGESTIVE_OF targets fold into their first source's phrase when that
    // leaves every entity rendered exactly once.
    void assign_absorption() {
        std::vector<const Relation*> edges;
        for (const auto& r : g_.relations()) {
            if (r.kind == RelationKind::SuggestiveOf) edges.push_back(&r);
        }
        std::sort(edges.begin(), edges.end(), [&](const Relation* a, const Relation* b) {
            return std::pair(pos_.at(a->source), pos_.at(a->target)) < std::pair(pos_.at(b->source), pos_.at(b->target));
        });
        std::set<std::string> absorbers;
        for (const auto* r : edges) {
            const auto& t = entity(r->target);
            if (t.category != EntityCategory::Obs || modifier_.count(t.id) || absorbed_by_.count(t.id) ||
                absorbers.count(t.id) || absorbed_by_.count(r->source)) {
                continue;
            }
            absorbed_by_[t.id] = r->source;
            absorbers.insert(r->source);
        }
    }

    bool closure_has_obs(const std::string& id) const {
        for (const auto* r : g_.incoming(id, RelationKind::Modify)) {
            if (entity(r->source).category == EntityCategory::Obs || closure_has_obs(r->source)) return true;
        }
        return false;
    }

    bool is_root(const Entity& e) const {
        if (modifier_.count(e.id) || absorbed_by_.count(e.id)) return false;
        if (e.category == EntityCategory::Obs) return true;
        return !located_target_.count(e.id) && closure_has_obs(e.id);
    }

    std::string region_of(const Entity& e) const {
        const Entity* cur = &e;
        while (absorbed_by_.count(cur->id)) cur = &entity(absorbed_by_.at(cur->id));
        if (cur->category == EntityCategory::Anat) return cur->id;
        auto anat = sorted_targets(cur->id, RelationKind::LocatedAt);
        return anat.empty() ? std::string(kGlobalRegion) : anat.front()->id;
    }

    // Modifier chain merged in front of the head word.
    std::string core(const Entity& e) const {
        std::vector<const Entity*> mods;
        for (const auto* r : g_.incoming(e.id, RelationKind::Modify)) mods.push_back(&entity(r->source));
        std::stable_sort(mods.begin(), mods.end(), [&](const Entity* a, const Entity* b) {
            const int ra = modifier_rank(a->text);
            const int rb = modifier_rank(b->text);
            if (ra != rb) return ra < rb;
            return pos_.at(a->id) < pos_.at(b->id);
        });
        std::string out;
        for (const auto* m : mods) {
            out += core(*m);
            out.push_back(' ');
        }
        out += e.text;
        return out;
    }

    std::string with_anatomy(const Entity& e) const {
        std::string prefix;
        for (const auto* a : sorted_targets(e.id, RelationKind::LocatedAt)) {
            if (!prefix.empty()) prefix += " and ";
            prefix += core(*a);
        }
        return prefix.empty() ? core(e) : prefix + " " + core(e);
    }

    std::string render_full(const Entity& e, std::set<std::string>& visiting) const {
        visiting.insert(e.id);
        std::string out;
        if (e.category == EntityCategory::Obs) {
            if (e.certainty == Certainty::DA) out = "no ";
            if (e.certainty == Certainty::U) out = "possible ";
        }
        out += with_anatomy(e);
        auto targets = sorted_targets(e.id, RelationKind::SuggestiveOf);
        if (!targets.empty()) {
            out += " suggestive of ";
            for (std::size_t i = 0; i < targets.size(); ++i) {
                if (i > 0) out += " and ";
                const Entity& t = *targets[i];
                const auto owner = absorbed_by_.find(t.id);
                if (owner != absorbed_by_.end() && owner->second == e.id && !visiting.count(t.id)) {
                    out += render_full(t, visiting);
                } else {
                    out += core(t);
                }
            }
        }
        return out;
    }

    const EntityGraph& g_;
    std::map<std::string, std::size_t> pos_;
    std::set<std::string> modifier_;
    std::set<std::string> located_target_;
    std::map<std::string, std::string> absorbed_by_;
};

}  // namespace

std::vector<KnowledgePhrase> render_phrases(const EntityGraph& graph) { return Renderer(graph).phrases(); }

std::vector<std::string> graph_to_text(const EntityGraph& graph) {
    const auto phrases = render_phrases(graph);
    // Region order = position of its earliest phrase; phrases already in entity order.
    std::vector<std::string> region_order;
    std::map<std::string, std::vector<const KnowledgePhrase*>> by_region;
    for (const auto& p : phrases) {
        auto& bucket = by_region[p.region_id];
        if (bucket.empty()) region_order.push_back(p.region_id);
        bucket.push_back(&p);
    }
    std::vector<std::string> sentences;
    for (const auto& region : region_order) {
        std::string s;
        for (const auto* p : by_region[region]) {
            if (!s.empty()) s += ", ";
            s += p->text;
        }
        sentences.push_back(std::move(s));
    }
    return sentences;
}

std::vector<std::string> standardize_reference(const RadiologyReport& report, const GraphProvider& annotator) {
    return graph_to_text(annotator.annotate(report));
}

}  // namespace proofread
