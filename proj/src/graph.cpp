#include "proofread/graph.hpp"

#include "proofread/error.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace proofread {

std::string_view to_string(RelationKind kind) {
    switch (kind) {
        case RelationKind::Modify: return "modify";
        case RelationKind::LocatedAt: return "located_at";
        case RelationKind::SuggestiveOf: return "suggestive_of";
    }
    return "modify";
}

std::optional<RelationKind> relation_kind_from_string(std::string_view s) {
    std::string lower(s);
    for (auto& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (lower == "modify") return RelationKind::Modify;
    if (lower == "located_at") return RelationKind::LocatedAt;
    if (lower == "suggestive_of") return RelationKind::SuggestiveOf;
    return std::nullopt;
}

std::string label_of(EntityCategory category, Certainty certainty) {
    std::string out = category == EntityCategory::Anat ? "ANAT-" : "OBS-";
    switch (certainty) {
        case Certainty::DP: out += "DP"; break;
        case Certainty::U: out += "U"; break;
        case Certainty::DA: out += "DA"; break;
    }
    return out;
}

std::optional<std::pair<EntityCategory, Certainty>> parse_label(std::string_view label) {
    if (label == "ANAT-DP") return std::pair{EntityCategory::Anat, Certainty::DP};
    if (label == "OBS-DP") return std::pair{EntityCategory::Obs, Certainty::DP};
    if (label == "OBS-U") return std::pair{EntityCategory::Obs, Certainty::U};
    if (label == "OBS-DA") return std::pair{EntityCategory::Obs, Certainty::DA};
    return std::nullopt;
}

const Entity* EntityGraph::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entities_[it->second];
}

std::vector<const Relation*> EntityGraph::outgoing(std::string_view id, RelationKind kind) const {
    std::vector<const Relation*> out;
    for (const auto& r : relations_) {
        if (r.kind == kind && r.source == id) out.push_back(&r);
    }
    return out;
}

std::vector<const Relation*> EntityGraph::incoming(std::string_view id, RelationKind kind) const {
    std::vector<const Relation*> out;
    for (const auto& r : relations_) {
        if (r.kind == kind && r.target == id) out.push_back(&r);
    }
    return out;
}

GraphBuilder& GraphBuilder::add_entity(Entity entity) {
    entities_.push_back(std::move(entity));
    return *this;
}

GraphBuilder& GraphBuilder::add_relation(Relation relation) {
    relations_.push_back(std::move(relation));
    return *this;
}

EntityGraph GraphBuilder::build() && {
    EntityGraph g;
    g.report_id_ = std::move(report_id_);

    std::sort(entities_.begin(), entities_.end(), [](const Entity& a, const Entity& b) {
        return std::tie(a.start, a.id) < std::tie(b.start, b.id);
    });
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        const auto& e = entities_[i];
        if (e.id.empty()) fail(ErrorKind::InvalidGraph, "entity with empty id");
        if (e.category == EntityCategory::Anat && e.certainty != Certainty::DP) {
            fail(ErrorKind::InvalidGraph, "ANAT entity '" + e.id + "' must be DP");
        }
        if (e.start > e.end) fail(ErrorKind::InvalidGraph, "entity '" + e.id + "' has inverted span");
        if (!g.index_.emplace(e.id, i).second) fail(ErrorKind::InvalidGraph, "duplicate entity id '" + e.id + "'");
    }
    g.entities_ = std::move(entities_);

    std::set<Relation> unique(relations_.begin(), relations_.end());
    for (const auto& r : unique) {
        const Entity* s = g.find(r.source);
        const Entity* t = g.find(r.target);
        if (!s) fail(ErrorKind::DanglingRelation, "relation source '" + r.source + "' does not exist");
        if (!t) fail(ErrorKind::DanglingRelation, "relation target '" + r.target + "' does not exist");
        if (r.source == r.target) fail(ErrorKind::InvalidGraph, "self-loop on entity '" + r.source + "'");
        if (r.kind == RelationKind::LocatedAt &&
            (s->category != EntityCategory::Obs || t->category != EntityCategory::Anat)) {
            fail(ErrorKind::InvalidGraph, "located_at must link OBS '" + r.source + "' to ANAT '" + r.target + "'");
        }
    }
    g.relations_.assign(unique.begin(), unique.end());

    // MODIFY acyclicity: iterative three-colour DFS.
    std::map<std::string, std::vector<std::string>, std::less<>> adj;
    for (const auto& r : g.relations_) {
        if (r.kind == RelationKind::Modify) adj[r.source].push_back(r.target);
    }
    std::map<std::string, int, std::less<>> colour;
    for (const auto& [start, _] : adj) {
        if (colour[start] != 0) continue;
        std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
        colour[start] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            auto it = adj.find(node);
            if (it == adj.end() || next >= it->second.size()) {
                colour[node] = 2;
                stack.pop_back();
                continue;
            }
            const std::string child = it->second[next++];
            const int c = colour[child];
            if (c == 1) fail(ErrorKind::InvalidGraph, "modify cycle through entity '" + child + "'");
            if (c == 0) {
                colour[child] = 1;
                stack.emplace_back(child, 0);
            }
        }
    }
    return g;
}

}  // namespace proofread
