#pragma once

#include <stdexcept>
#include <string>

namespace nmrx {

// Every failure the library can signal. Parse-type errors come out of the
// readers, the rest are precondition violations from individual operations.
enum class errc {
    malformed_document,
    unsupported_feature,
    invariant_violation,
    schema_version_mismatch,
    not_power_of_two,
    too_short,
    singular_fit,
    not_corrected,
    disconnected,
    unknown_environment_class,
    sites_not_predicted,
    nucleus_mismatch,
    empty_database,
    no_legal_edits,
    no_feasible_assignment,
    empty_pool,
    nonpositive_curvature,
    curvature_mismatch,
    invalid_point,
    empty_negatives,
    too_few_scores,
    shape_mismatch,
    budget_exhausted,
    malformed_action,
    empty_evaluation,
    config_error,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::malformed_document: return "MalformedDocument";
        case errc::unsupported_feature: return "UnsupportedFeature";
        case errc::invariant_violation: return "InvariantViolation";
        case errc::schema_version_mismatch: return "SchemaVersionMismatch";
        case errc::not_power_of_two: return "NotPowerOfTwo";
        case errc::too_short: return "TooShort";
        case errc::singular_fit: return "SingularFit";
        case errc::not_corrected: return "NotCorrected";
        case errc::disconnected: return "Disconnected";
        case errc::unknown_environment_class: return "UnknownEnvironmentClass";
        case errc::sites_not_predicted: return "SitesNotPredicted";
        case errc::nucleus_mismatch: return "NucleusMismatch";
        case errc::empty_database: return "EmptyDatabase";
        case errc::no_legal_edits: return "NoLegalEdits";
        case errc::no_feasible_assignment: return "NoFeasibleAssignment";
        case errc::empty_pool: return "EmptyPool";
        case errc::nonpositive_curvature: return "NonpositiveCurvature";
        case errc::curvature_mismatch: return "CurvatureMismatch";
        case errc::invalid_point: return "InvalidPoint";
        case errc::empty_negatives: return "EmptyNegatives";
        case errc::too_few_scores: return "TooFewScores";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::budget_exhausted: return "BudgetExhausted";
        case errc::malformed_action: return "MalformedAction";
        case errc::empty_evaluation: return "EmptyEvaluation";
        case errc::config_error: return "ConfigError";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace nmrx
