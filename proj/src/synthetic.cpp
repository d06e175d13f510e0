#include "proofread/synthetic.hpp"

#include "proofread/rng.hpp"

#include <cstdio>

namespace proofread {

namespace {

const char* const kExams[] = {"CHEST (PA AND LAT)", "CHEST (PORTABLE AP)", "CHEST (SINGLE VIEW)"};
const char* const kIndications[] = {
    "Shortness of breath.", "Cough and fever.", "Evaluate for pneumonia.", "Chest pain.",
    "Follow-up of known effusion.", "Post-operative check.", "Hypoxia.",
};

// Sentences describing a normal chest.
const char* const kNormal[] = {
    "The lungs are clear.",
    "There is no pleural effusion or pneumothorax.",
    "No pleural effusion or pneumothorax is seen.",
    "Heart size is normal.",
    "The cardiomediastinal silhouette is within normal limits.",
    "No focal consolidation is seen.",
    "There is no focal consolidation, pleural effusion, or pneumothorax.",
    "No pulmonary edema.",
    "The hila are unremarkable.",
    "No acute osseous abnormality.",
    "There is no evidence of pneumonia.",
    "The lungs are clear without consolidation or effusion.",
    "No pneumothorax is identified.",
    "Mediastinal contours are normal.",
};

// Sentences describing a positive finding.
const char* const kAbnormal[] = {
    "There is a small left pleural effusion.",
    "Small right pleural effusion is present.",
    "Moderate bilateral pleural effusions are noted.",
    "There is mild cardiomegaly.",
    "Cardiac enlargement is stable.",
    "Left lower lobe opacity is concerning for pneumonia.",
    "Right lower lobe consolidation is consistent with pneumonia.",
    "There is mild pulmonary edema.",
    "Mild pulmonary vascular congestion is present.",
    "Bibasilar atelectasis is noted.",
    "Patchy opacity in the right upper lobe may represent atelectasis.",
    "There is a small right apical pneumothorax.",
    "Possible nodule in the left upper lobe.",
    "Healed right rib fracture is noted.",
    "Enlarged cardiomediastinal silhouette.",
    "Left basilar opacity likely reflects atelectasis.",
    "There is interstitial edema.",
    "A 1 cm lung lesion is seen in the right middle lobe.",
    "Pleural thickening at the left base.",
};

const char* const kImpressionNormal[] = {
    "No acute cardiopulmonary process.",
    "No acute cardiopulmonary abnormality.",
    "No evidence of pneumonia.",
    "Normal chest radiograph.",
    "No pleural effusion.",
};

const char* const kImpressionAbnormal[] = {
    "Small left pleural effusion.",
    "Mild cardiomegaly without pulmonary edema.",
    "Left lower lobe pneumonia.",
    "Mild pulmonary edema.",
    "Bibasilar atelectasis.",
    "Small right pneumothorax.",
    "Right lower lobe consolidation concerning for pneumonia.",
    "Mild vascular congestion.",
};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&pool)[N]) {
    return pool[rng.index(N)];
}

std::string one_report(Rng& rng, const SyntheticOptions& opt) {
    std::string t;
    t += "EXAMINATION: ";
    t += pick(rng, kExams);
    t += "\n\nINDICATION: ";
    t += pick(rng, kIndications);
    t += "\n\n";
    if (rng.unit() < opt.no_findings_rate) {
        t += "COMPARISON: None.\n\nNOTE: Preliminary read only; formal report to follow.\n";
        return t;
    }
    const std::size_t n_abnormal = rng.index(3);
    const std::size_t n_normal = 1 + rng.index(3);
    std::vector<const char*> sentences;
    for (std::size_t i = 0; i < n_abnormal; ++i) sentences.push_back(pick(rng, kAbnormal));
    for (std::size_t i = 0; i < n_normal; ++i) sentences.push_back(pick(rng, kNormal));
    rng.shuffle(sentences);
    t += rng.unit() < 0.5 ? "FINDINGS: " : "FINDINGS:\n";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) t += rng.unit() < 0.2 ? "\n" : " ";
        t += sentences[i];
    }
    t += "\n\nIMPRESSION: ";
    t += n_abnormal ? pick(rng, kImpressionAbnormal) : pick(rng, kImpressionNormal);
    t += "\n";
    return t;
}

}  // namespace

std::vector<std::string> synthetic_report_texts(const SyntheticOptions& options) {
    Rng rng(options.seed);
    std::vector<std::string> out;
    out.reserve(options.count);
    for (std::size_t i = 0; i < options.count; ++i) out.push_back(one_report(rng, options));
    return out;
}

std::vector<RadiologyReport> synthetic_corpus(const SyntheticOptions& options) {
    const auto texts = synthetic_report_texts(options);
    std::vector<RadiologyReport> out;
    out.reserve(texts.size());
    char id[64];
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::snprintf(id, sizeof id, "%s-%06zu", options.id_prefix.c_str(), i + 1);
        out.push_back(parse_report(texts[i], id));
    }
    return out;
}

}  // namespace proofread
