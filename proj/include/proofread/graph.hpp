#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proofread {

enum class EntityCategory { Anat, Obs };
enum class Certainty { DP, U, DA };
enum class RelationKind { Modify, LocatedAt, SuggestiveOf };

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_kind_from_string(std::string_view s);

// "ANAT-DP", "OBS-DP", "OBS-U", "OBS-DA".
std::string label_of(EntityCategory category, Certainty certainty);
std::optional<std::pair<EntityCategory, Certainty>> parse_label(std::string_view label);

struct Entity {
    std::string id;
    std::string text;  // case-folded surface
    std::size_t start = 0;
    std::size_t end = 0;
    EntityCategory category = EntityCategory::Obs;
    Certainty certainty = Certainty::DP;

    bool operator==(const Entity&) const = default;
};

struct Relation {
    std::string source;
    std::string target;
    RelationKind kind = RelationKind::Modify;

    auto operator<=>(const Relation&) const = default;
};

// Immutable once built. Entities are ordered by (start, id).
class EntityGraph {
public:
    EntityGraph() = default;

    const std::string& report_id() const { return report_id_; }
    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<Relation>& relations() const { return relations_; }
    bool empty() const { return entities_.empty(); }

    const Entity* find(std::string_view id) const;
    std::vector<const Relation*> outgoing(std::string_view id, RelationKind kind) const;
    std::vector<const Relation*> incoming(std::string_view id, RelationKind kind) const;

private:
    friend class GraphBuilder;

    std::string report_id_;
    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

// Validates on build(): endpoints exist (DanglingRelation), ANAT implies DP,
// no self-loops, LOCATED_AT is OBS->ANAT, MODIFY edges acyclic (InvalidGraph).
class GraphBuilder {
public:
    explicit GraphBuilder(std::string report_id = {}) : report_id_(std::move(report_id)) {}

    GraphBuilder& add_entity(Entity entity);
    GraphBuilder& add_relation(Relation relation);  // duplicate triples collapse

    EntityGraph build() &&;

private:
    std::string report_id_;
    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
};

}  // namespace proofread
