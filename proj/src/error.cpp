#include "dtwc/error.hpp"

namespace dtwc {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::missing_column: return "MissingColumn";
        case ErrorCode::non_binary_target: return "NonBinaryTarget";
        case ErrorCode::duplicate_id: return "DuplicateId";
        case ErrorCode::io_failure: return "IoFailure";
        case ErrorCode::empty_text: return "EmptyText";
        case ErrorCode::unlabeled_record: return "UnlabeledRecord";
        case ErrorCode::empty_class: return "EmptyClass";
        case ErrorCode::unknown_step: return "UnknownStep";
        case ErrorCode::empty_corpus: return "EmptyCorpus";
        case ErrorCode::dimension_mismatch: return "DimensionMismatch";
        case ErrorCode::shape_mismatch: return "ShapeMismatch";
        case ErrorCode::non_finite_gradient: return "NonFiniteGradient";
        case ErrorCode::single_class_corpus: return "SingleClassCorpus";
        case ErrorCode::non_positive_alpha: return "NonPositiveAlpha";
        case ErrorCode::invalid_model_kind: return "InvalidModelKind";
        case ErrorCode::sequence_too_long: return "SequenceTooLong";
        case ErrorCode::unknown_token_id: return "UnknownTokenId";
        case ErrorCode::non_finite_activation: return "NonFiniteActivation";
        case ErrorCode::length_mismatch: return "LengthMismatch";
        case ErrorCode::empty_input: return "Empty";
        case ErrorCode::empty_matrix: return "EmptyMatrix";
        case ErrorCode::empty_group: return "EmptyGroup";
        case ErrorCode::bad_magic: return "BadMagic";
        case ErrorCode::version_unsupported: return "VersionUnsupported";
        case ErrorCode::truncated_payload: return "TruncatedPayload";
        case ErrorCode::usage: return "Usage";
    }
    return "UnknownError";
}

} // namespace dtwc
