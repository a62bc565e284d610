#ifndef POLYURN_ERRORS_HPP
#define POLYURN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace polyurn {

// One error code per rejectable condition. Grouped by how a CLI caller
// should exit: config errors (bad parameters), data errors (bad input
// files / tables), runtime errors (failures while computing).
enum class errc {
    // parameter validation
    non_positive_alpha,
    gamma_not_simplex,
    labor_share_out_of_range,
    dimension_mismatch,
    degenerate_labor_share_one,
    step_size_non_positive,
    non_positive_scale,
    epsilon_too_small,
    unknown_kind,
    missing_field,
    negative_skill_exponent,
    missing_file,
    // data / table problems
    empty_table,
    invalid_bins,
    invalid_cdf,
    negative_value,
    non_positive_wage,
    wealth_decrease,
    malformed_csv,
    malformed_json,
    missing_snapshot,
    tail_too_small,
    all_zero,
    zero_wage_with_positive_c,
    io_failure,
    // runtime / numerical
    zero_base_non_positive_exponent,
    all_weights_zero,
    index_out_of_range,
    boundary_point,
    exponent_not_sublinear,
    envelope_violated,
    negative_time,
    duplicate_seeds,
    left_simplex,
    degenerate_direction,
    no_interior_minimum,
    degenerate_target,
};

enum class error_category { config, data, runtime };

inline error_category category(errc c) {
    switch (c) {
    case errc::non_positive_alpha:
    case errc::gamma_not_simplex:
    case errc::labor_share_out_of_range:
    case errc::dimension_mismatch:
    case errc::degenerate_labor_share_one:
    case errc::step_size_non_positive:
    case errc::non_positive_scale:
    case errc::epsilon_too_small:
    case errc::unknown_kind:
    case errc::missing_field:
    case errc::negative_skill_exponent:
    case errc::missing_file:
        return error_category::config;
    case errc::empty_table:
    case errc::invalid_bins:
    case errc::invalid_cdf:
    case errc::negative_value:
    case errc::non_positive_wage:
    case errc::wealth_decrease:
    case errc::malformed_csv:
    case errc::malformed_json:
    case errc::missing_snapshot:
    case errc::tail_too_small:
    case errc::all_zero:
    case errc::zero_wage_with_positive_c:
    case errc::io_failure:
        return error_category::data;
    default:
        return error_category::runtime;
    }
}

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::non_positive_alpha: return "non_positive_alpha";
    case errc::gamma_not_simplex: return "gamma_not_simplex";
    case errc::labor_share_out_of_range: return "labor_share_out_of_range";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::degenerate_labor_share_one: return "degenerate_labor_share_one";
    case errc::step_size_non_positive: return "step_size_non_positive";
    case errc::non_positive_scale: return "non_positive_scale";
    case errc::epsilon_too_small: return "epsilon_too_small";
    case errc::unknown_kind: return "unknown_kind";
    case errc::missing_field: return "missing_field";
    case errc::negative_skill_exponent: return "negative_skill_exponent";
    case errc::missing_file: return "missing_file";
    case errc::empty_table: return "empty_table";
    case errc::invalid_bins: return "invalid_bins";
    case errc::invalid_cdf: return "invalid_cdf";
    case errc::negative_value: return "negative_value";
    case errc::non_positive_wage: return "non_positive_wage";
    case errc::wealth_decrease: return "wealth_decrease";
    case errc::malformed_csv: return "malformed_csv";
    case errc::malformed_json: return "malformed_json";
    case errc::missing_snapshot: return "missing_snapshot";
    case errc::tail_too_small: return "tail_too_small";
    case errc::all_zero: return "all_zero";
    case errc::zero_wage_with_positive_c: return "zero_wage_with_positive_c";
    case errc::io_failure: return "io_failure";
    case errc::zero_base_non_positive_exponent: return "zero_base_non_positive_exponent";
    case errc::all_weights_zero: return "all_weights_zero";
    case errc::index_out_of_range: return "index_out_of_range";
    case errc::boundary_point: return "boundary_point";
    case errc::exponent_not_sublinear: return "exponent_not_sublinear";
    case errc::envelope_violated: return "envelope_violated";
    case errc::negative_time: return "negative_time";
    case errc::duplicate_seeds: return "duplicate_seeds";
    case errc::left_simplex: return "left_simplex";
    case errc::degenerate_direction: return "degenerate_direction";
    case errc::no_interior_minimum: return "no_interior_minimum";
    case errc::degenerate_target: return "degenerate_target";
    }
    return "unknown";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) {
    throw error(code, msg);
}

} // namespace polyurn

#endif // POLYURN_ERRORS_HPP
