#pragma once

#include "proofread/annotate.hpp"
#include "proofread/graph.hpp"
#include "proofread/report.hpp"

#include <string>
#include <vector>

namespace proofread {

inline constexpr std::string_view kGlobalRegion = "global";

struct KnowledgePhrase {
    std::string text;
    std::string root_id;    // entity the phrase is built around
    std::string region_id;  // ANAT entity reached via located_at, or "global"
    std::size_t position = 0;
};

// Phases 1-3: classify entities, merge modifier chains (laterality, then
// vertical position, then document order) with located_at anatomy as a
// prefix, then apply "no " / "possible " and "X suggestive of Y".
std::vector<KnowledgePhrase> render_phrases(const EntityGraph& graph);

// Phase 4: one noun-phrase sentence per region, regions and phrases in order
// of first occurrence. Phrases within a sentence are joined by ", ".
std::vector<std::string> graph_to_text(const EntityGraph& graph);

std::vector<std::string> standardize_reference(const RadiologyReport& report, const GraphProvider& annotator);

}  // namespace proofread
