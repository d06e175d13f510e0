#pragma once

#include "proofread/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace proofread {

struct SyntheticOptions {
    std::size_t count = 100;
    std::uint64_t seed = 1;
    std::string id_prefix = "syn";
    double no_findings_rate = 0.03;  // share of reports with neither FINDINGS nor IMPRESSION
};

// Template-built chest X-ray reports. A pure function of the options.
std::vector<std::string> synthetic_report_texts(const SyntheticOptions& options);
std::vector<RadiologyReport> synthetic_corpus(const SyntheticOptions& options);

}  // namespace proofread
