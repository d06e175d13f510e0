#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proofread {

enum class SectionKind { Findings, Impression, Other };

std::string_view to_string(SectionKind kind);
std::optional<SectionKind> section_kind_from_string(std::string_view s);

// Byte range [start, end) into the owning document plus its case-folded form.
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string normalized;

    std::size_t size() const { return end - start; }
    bool operator==(const TokenSpan&) const = default;
};

struct Section {
    SectionKind kind = SectionKind::Other;
    std::size_t offset = 0;       // document offset of raw_text
    std::string raw_text;         // header (if any) + body
    std::size_t body_offset = 0;  // offset of the body inside raw_text
    std::vector<TokenSpan> tokens;  // document offsets, body only

    std::string_view body() const { return std::string_view(raw_text).substr(body_offset); }
    std::size_t body_begin() const { return offset + body_offset; }
    std::size_t end() const { return offset + raw_text.size(); }
};

class RadiologyReport {
public:
    RadiologyReport() = default;

    const std::string& id() const { return id_; }
    const std::string& text() const { return text_; }
    const std::string& source_hash() const { return hash_; }
    const std::vector<Section>& sections() const { return sections_; }

    const Section* find(SectionKind kind) const;
    // Section containing the document byte offset, if any.
    const Section* section_at(std::size_t offset) const;
    bool has_findings_or_impression() const;

    // Tokens over the whole document, headers included.
    std::vector<TokenSpan> document_tokens() const;

    std::string_view slice(std::size_t start, std::size_t end) const {
        return std::string_view(text_).substr(start, end - start);
    }

private:
    friend RadiologyReport parse_report(std::string text, std::string report_id);

    std::string id_;
    std::string text_;
    std::string hash_;
    std::vector<Section> sections_;
};

// Splits on case-insensitive "FINDINGS:" / "IMPRESSION(S):" headers (first
// occurrence of each) and upper-case line-leading "WORD:" headers, which
// open OTHER sections. Text before the first header is OTHER.
// Throws EmptyInput / MalformedEncoding.
RadiologyReport parse_report(std::string text, std::string report_id = {});

// Whitespace split with leading/trailing ASCII punctuation detached, one
// token per punctuation byte. Offsets are shifted by base_offset.
std::vector<TokenSpan> tokenize(std::string_view text, std::size_t base_offset = 0);

std::string serialize_report(const RadiologyReport& report);

// Re-parses the document with bytes [start, end) replaced.
RadiologyReport replace_span(const RadiologyReport& report, std::size_t start, std::size_t end,
                             std::string_view replacement);

// Sentence index per token: ".", "?", "!", ";" close a sentence.
std::vector<std::size_t> sentence_ids(const std::vector<TokenSpan>& tokens);

}  // namespace proofread
