#pragma once

// Shared fixtures and independent oracles for the unit and acceptance suites.
// Oracles here deliberately avoid the library's own scoring code.

#include "proofread/embedding.hpp"
#include "proofread/graph.hpp"
#include "proofread/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testkit {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "proofread") {
        std::random_device rd;
        path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

struct Proc {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

inline Proc run_cli(const std::vector<std::string>& args, const std::string& env_prefix = {}) {
    std::string cmd = env_prefix + " " + shell_quote(PROOFREAD_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>&1";
    Proc p;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return p;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) p.output.append(buf.data(), n);
    const int status = pclose(pipe);
    p.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

inline std::string data_file(const std::string& name) { return std::string(PROOFREAD_DATA_DIR) + "/" + name; }

// ------------------------------------------------------------ graph fixtures

struct E {
    const char* id;
    const char* text;
    proofread::EntityCategory cat;
    proofread::Certainty cert;
};
struct R {
    const char* src;
    proofread::RelationKind kind;
    const char* tgt;
};

// Entities are laid out left to right in the order given.
inline proofread::EntityGraph make_graph(const std::vector<E>& es, const std::vector<R>& rs) {
    proofread::GraphBuilder b("golden");
    std::size_t at = 0;
    for (const auto& e : es) {
        const std::string t = e.text;
        b.add_entity({e.id, t, at, at + t.size(), e.cat, e.cert});
        at += t.size() + 1;
    }
    for (const auto& r : rs) b.add_relation({r.src, r.tgt, r.kind});
    return std::move(b).build();
}

struct Golden {
    const char* name;
    std::vector<E> entities;
    std::vector<R> relations;
    std::vector<std::string> expected;
};

inline std::vector<Golden> graph_goldens() {
    using proofread::Certainty;
    using proofread::EntityCategory;
    using proofread::RelationKind;
    constexpr auto A = EntityCategory::Anat;
    constexpr auto O = EntityCategory::Obs;
    constexpr auto DP = Certainty::DP;
    constexpr auto U = Certainty::U;
    constexpr auto DA = Certainty::DA;
    constexpr auto MOD = RelationKind::Modify;
    constexpr auto LOC = RelationKind::LocatedAt;
    constexpr auto SUG = RelationKind::SuggestiveOf;
    return {
        // The two worked conversions.
        {"worked_lower_lobe_opacity",
         {{"1", "lower", A, DP}, {"2", "lobe", A, DP}, {"3", "opacity", O, DP}},
         {{"1", MOD, "2"}, {"3", LOC, "2"}},
         {"lower lobe opacity"}},
        {"worked_no_lobe_opacity",
         {{"1", "lobe", A, DP}, {"2", "opacity", O, DA}},
         {{"2", LOC, "1"}},
         {"no lobe opacity"}},
        // Derived by hand from the ordering, prefix and grouping rules.
        {"laterality_before_vertical",
         {{"1", "lower", A, DP}, {"2", "right", A, DP}, {"3", "lobe", A, DP}, {"4", "opacity", O, DP}},
         {{"1", MOD, "3"}, {"2", MOD, "3"}, {"4", LOC, "3"}},
         {"right lower lobe opacity"}},
        {"uncertain_prefix", {{"1", "pneumothorax", O, U}}, {}, {"possible pneumothorax"}},
        {"absent_with_modifiers",
         {{"1", "left", A, DP}, {"2", "pleural", O, DP}, {"3", "effusion", O, DA}},
         {{"1", MOD, "3"}, {"2", MOD, "3"}},
         {"no left pleural effusion"}},
        {"document_order_among_plain_modifiers",
         {{"1", "small", O, DP}, {"2", "pleural", O, DP}, {"3", "effusion", O, DP}},
         {{"1", MOD, "3"}, {"2", MOD, "3"}},
         {"small pleural effusion"}},
        {"two_regions_two_sentences",
         {{"1", "lung", A, DP}, {"2", "nodule", O, DP}, {"3", "pneumothorax", O, DA}},
         {{"2", LOC, "1"}},
         {"lung nodule", "no pneumothorax"}},
        {"same_region_joined",
         {{"1", "base", A, DP}, {"2", "atelectasis", O, DP}, {"3", "effusion", O, U}},
         {{"2", LOC, "1"}, {"3", LOC, "1"}},
         {"base atelectasis, possible base effusion"}},
        {"suggestive_absorbs_target",
         {{"1", "opacity", O, DP}, {"2", "pneumonia", O, U}},
         {{"1", SUG, "2"}},
         {"opacity suggestive of possible pneumonia"}},
        {"anatomy_root_with_observation_modifier",
         {{"1", "enlarged", O, DP}, {"2", "heart", A, DP}},
         {{"1", MOD, "2"}},
         {"enlarged heart"}},
        {"nested_modifier_chain",
         {{"1", "mildly", O, DP}, {"2", "enlarged", O, DP}, {"3", "heart", A, DP}},
         {{"1", MOD, "2"}, {"2", MOD, "3"}},
         {"mildly enlarged heart"}},
        {"two_anatomy_targets_joined_with_and",
         {{"1", "hilum", A, DP}, {"2", "lobe", A, DP}, {"3", "nodule", O, DP}},
         {{"3", LOC, "1"}, {"3", LOC, "2"}},
         {"hilum and lobe nodule"}},
        {"uncertain_with_modified_anatomy",
         {{"1", "right", A, DP}, {"2", "lung", A, DP}, {"3", "nodule", O, U}},
         {{"1", MOD, "2"}, {"3", LOC, "2"}},
         {"possible right lung nodule"}},
        {"bare_anatomy_is_not_a_phrase", {{"1", "lung", A, DP}}, {}, {}},
        {"region_order_follows_first_phrase",
         {{"1", "edema", O, DA}, {"2", "apex", A, DP}, {"3", "pneumothorax", O, DP}, {"4", "effusion", O, DA}},
         {{"3", LOC, "2"}},
         {"no edema, no effusion", "apex pneumothorax"}},
    };
}

// ------------------------------------------------------------ metric oracles

// Hand-rolled unigram overlap.
inline double oracle_rouge1(const std::vector<std::string>& c, const std::vector<std::string>& r) {
    if (c.empty() && r.empty()) return 1.0;
    if (c.empty() || r.empty()) return 0.0;
    std::map<std::string, int> rc;
    for (const auto& t : r) ++rc[t];
    int overlap = 0;
    for (const auto& t : c) {
        auto it = rc.find(t);
        if (it != rc.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / c.size();
    const double rr = static_cast<double>(overlap) / r.size();
    return 2 * p * rr / (p + rr);
}

// Every cosine computed from scratch in double, then greedy max per side.
inline double oracle_greedy_f1(const std::vector<std::string>& c, const std::vector<std::string>& r,
                               const proofread::TokenEmbedder& emb) {
    if (c.empty() && r.empty()) return 1.0;
    if (c.empty() || r.empty()) return 0.0;
    auto vec = [&](const std::string& t) {
        const auto v = emb.embed_token(t);
        return std::vector<double>(v.values().begin(), v.values().end());
    };
    auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            d += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        return d / std::sqrt(na * nb);
    };
    std::vector<std::vector<double>> cv, rv;
    for (const auto& t : c) cv.push_back(vec(t));
    for (const auto& t : r) rv.push_back(vec(t));
    double p = 0, rec = 0;
    for (const auto& a : cv) {
        double best = -1;
        for (const auto& b : rv) best = std::max(best, cos(a, b));
        p += best;
    }
    for (const auto& b : rv) {
        double best = -1;
        for (const auto& a : cv) best = std::max(best, cos(a, b));
        rec += best;
    }
    p /= cv.size();
    rec /= rv.size();
    return p + rec <= 0 ? 0.0 : 2 * p * rec / (p + rec);
}

// Full sort of every row's score, ties broken by row order.
inline std::vector<std::pair<std::size_t, double>> oracle_top_k(const std::vector<proofread::EmbeddingVector>& rows,
                                                                const proofread::EmbeddingVector& q, std::size_t k) {
    std::vector<std::pair<std::size_t, double>> all;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double s = 0;
        const auto a = rows[i].values();
        const auto b = q.values();
        for (std::size_t d = 0; d < a.size(); ++d) s += static_cast<double>(a[d]) * static_cast<double>(b[d]);
        all.emplace_back(i, s);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    all.resize(std::min(k, all.size()));
    return all;
}

inline std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

}  // namespace testkit
