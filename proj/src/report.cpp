#include "proofread/report.hpp"

#include "proofread/error.hpp"
#include "proofread/text.hpp"

#include <algorithm>
#include <array>

namespace proofread {

std::string_view to_string(SectionKind kind) {
    switch (kind) {
        case SectionKind::Findings: return "FINDINGS";
        case SectionKind::Impression: return "IMPRESSION";
        case SectionKind::Other: return "OTHER";
    }
    return "OTHER";
}

std::optional<SectionKind> section_kind_from_string(std::string_view s) {
    if (s == "FINDINGS") return SectionKind::Findings;
    if (s == "IMPRESSION") return SectionKind::Impression;
    if (s == "OTHER") return SectionKind::Other;
    return std::nullopt;
}

namespace {

struct HeaderHit {
    std::size_t start = 0;
    std::size_t body = 0;  // first byte after the colon
    SectionKind kind = SectionKind::Other;
};

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Matches `word` case-insensitively at pos, followed by optional blanks and ':'.
std::optional<std::size_t> match_header_word(std::string_view t, std::size_t pos, std::string_view word) {
    if (pos + word.size() > t.size()) return std::nullopt;
    if (!text::iequals(t.substr(pos, word.size()), word)) return std::nullopt;
    std::size_t i = pos + word.size();
    if (i < t.size() && is_alnum(t[i])) return std::nullopt;
    while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
    if (i < t.size() && t[i] == ':') return i + 1;
    return std::nullopt;
}

bool at_line_start(std::string_view t, std::size_t pos) {
    std::size_t i = pos;
    while (i > 0 && (t[i - 1] == ' ' || t[i - 1] == '\t')) --i;
    return i == 0 || t[i - 1] == '\n' || t[i - 1] == '\r';
}

// Upper-case "EXAMINATION:"-style header at line start.
std::optional<std::size_t> match_other_header(std::string_view t, std::size_t pos) {
    if (!at_line_start(t, pos)) return std::nullopt;
    std::size_t i = pos;
    std::size_t letters = 0;
    while (i < t.size() && ((t[i] >= 'A' && t[i] <= 'Z') || t[i] == ' ' || t[i] == '/' || t[i] == '&' ||
                            t[i] == '-')) {
        if (t[i] >= 'A' && t[i] <= 'Z') ++letters;
        ++i;
    }
    if (letters < 3 || i >= t.size() || t[i] != ':') return std::nullopt;
    if (t[pos] < 'A' || t[pos] > 'Z') return std::nullopt;
    return i + 1;
}

std::vector<HeaderHit> find_headers(std::string_view t) {
    std::vector<HeaderHit> hits;
    bool seen_findings = false;
    bool seen_impression = false;
    std::size_t pos = 0;
    while (pos < t.size()) {
        if (pos > 0 && is_alnum(t[pos - 1])) {
            ++pos;
            continue;
        }
        if (!seen_findings) {
            if (auto body = match_header_word(t, pos, "findings")) {
                hits.push_back({pos, *body, SectionKind::Findings});
                seen_findings = true;
                pos = *body;
                continue;
            }
        }
        if (!seen_impression) {
            auto body = match_header_word(t, pos, "impressions");
            if (!body) body = match_header_word(t, pos, "impression");
            if (body) {
                hits.push_back({pos, *body, SectionKind::Impression});
                seen_impression = true;
                pos = *body;
                continue;
            }
        }
        // A repeated FINDINGS/IMPRESSION header is body text, never an OTHER header.
        const bool repeated = match_header_word(t, pos, "findings") || match_header_word(t, pos, "impression") ||
                              match_header_word(t, pos, "impressions");
        if (!repeated) {
            if (auto body = match_other_header(t, pos)) {
                hits.push_back({pos, *body, SectionKind::Other});
                pos = *body;
                continue;
            }
        }
        ++pos;
    }
    return hits;
}

}  // namespace

std::vector<TokenSpan> tokenize(std::string_view t, std::size_t base_offset) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const auto n = t.size();
    auto punct_token = [&](std::size_t at) {
        out.push_back({base_offset + at, base_offset + at + 1, std::string(1, t[at])});
    };
    while (i < n) {
        while (i < n && text::is_space(t[i])) ++i;
        if (i >= n) break;
        std::size_t e = i;
        while (e < n && !text::is_space(t[e])) ++e;
        std::size_t b = i;
        std::size_t ce = e;
        while (b < ce && text::is_punct(t[b])) ++b;
        while (ce > b && text::is_punct(t[ce - 1])) --ce;
        for (std::size_t k = i; k < b; ++k) punct_token(k);
        if (b < ce) out.push_back({base_offset + b, base_offset + ce, text::to_lower(t.substr(b, ce - b))});
        for (std::size_t k = std::max(ce, b); k < e; ++k) punct_token(k);
        i = e;
    }
    return out;
}

std::vector<std::size_t> sentence_ids(const std::vector<TokenSpan>& tokens) {
    std::vector<std::size_t> ids(tokens.size());
    std::size_t current = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        ids[i] = current;
        const auto& n = tokens[i].normalized;
        if (n == "." || n == "?" || n == "!" || n == ";") ++current;
    }
    return ids;
}

RadiologyReport parse_report(std::string input, std::string report_id) {
    if (input.empty()) fail(ErrorKind::EmptyInput, "report text is empty");
    if (!text::is_valid_utf8(input)) fail(ErrorKind::MalformedEncoding, "report is not valid UTF-8");

    RadiologyReport report;
    report.id_ = std::move(report_id);
    report.text_ = std::move(input);
    report.hash_ = text::sha256_hex(report.text_);

    const std::string_view t(report.text_);
    const auto headers = find_headers(t);

    auto add_section = [&](SectionKind kind, std::size_t start, std::size_t body, std::size_t end) {
        Section s;
        s.kind = kind;
        s.offset = start;
        s.raw_text = std::string(t.substr(start, end - start));
        s.body_offset = body - start;
        s.tokens = tokenize(s.body(), body);
        report.sections_.push_back(std::move(s));
    };

    const std::size_t first = headers.empty() ? t.size() : headers.front().start;
    if (first > 0) add_section(SectionKind::Other, 0, 0, first);
    for (std::size_t h = 0; h < headers.size(); ++h) {
        const std::size_t end = h + 1 < headers.size() ? headers[h + 1].start : t.size();
        add_section(headers[h].kind, headers[h].start, headers[h].body, end);
    }
    return report;
}

std::string serialize_report(const RadiologyReport& report) {
    std::string out;
    out.reserve(report.text().size());
    for (const auto& s : report.sections()) out += s.raw_text;
    return out;
}

RadiologyReport replace_span(const RadiologyReport& report, std::size_t start, std::size_t end,
                             std::string_view replacement) {
    const auto& t = report.text();
    if (start > end || end > t.size()) fail(ErrorKind::InvalidConfig, "span out of range");
    std::string next;
    next.reserve(t.size() - (end - start) + replacement.size());
    next.append(t, 0, start);
    next.append(replacement);
    next.append(t, end, std::string::npos);
    return parse_report(std::move(next), report.id());
}

const Section* RadiologyReport::find(SectionKind kind) const {
    for (const auto& s : sections_) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

const Section* RadiologyReport::section_at(std::size_t offset) const {
    for (const auto& s : sections_) {
        if (offset >= s.offset && offset < s.end()) return &s;
    }
    return nullptr;
}

bool RadiologyReport::has_findings_or_impression() const {
    return find(SectionKind::Findings) != nullptr || find(SectionKind::Impression) != nullptr;
}

std::vector<TokenSpan> RadiologyReport::document_tokens() const { return tokenize(text_, 0); }

}  // namespace proofread
