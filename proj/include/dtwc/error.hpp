#pragma once

#include <stdexcept>
#include <string>

namespace dtwc {

enum class ErrorCode {
    // corpus_io
    missing_column,
    non_binary_target,
    duplicate_id,
    io_failure,
    empty_text,
    unlabeled_record,
    empty_class,
    // cleanse
    unknown_step,
    // vectorize / embed
    empty_corpus,
    dimension_mismatch,
    // optimize
    shape_mismatch,
    non_finite_gradient,
    // classify
    single_class_corpus,
    non_positive_alpha,
    invalid_model_kind,
    // encoder
    sequence_too_long,
    unknown_token_id,
    non_finite_activation,
    // eval
    length_mismatch,
    empty_input,
    empty_matrix,
    empty_group,
    // container
    bad_magic,
    version_unsupported,
    truncated_payload,
    // cli
    usage,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace dtwc
