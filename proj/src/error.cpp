#include "proofread/error.hpp"

namespace proofread {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::MalformedEncoding: return "MalformedEncoding";
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
        case ErrorKind::DanglingRelation: return "DanglingRelation";
        case ErrorKind::InvalidGraph: return "InvalidGraph";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::EmptyIndex: return "EmptyIndex";
        case ErrorKind::InvalidChunkParams: return "InvalidChunkParams";
        case ErrorKind::InconsistentKnowledgeInputs: return "InconsistentKnowledgeInputs";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::AuthFailure: return "AuthFailure";
        case ErrorKind::UnparseableAfterRetry: return "UnparseableAfterRetry";
        case ErrorKind::NoEligibleSite: return "NoEligibleSite";
        case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
        case ErrorKind::MissingVerdict: return "MissingVerdict";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace proofread
