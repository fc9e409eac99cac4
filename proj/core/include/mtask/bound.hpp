#ifndef MTASK_BOUND_HPP
#define MTASK_BOUND_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mtask/discrepancy.hpp"
#include "mtask/learners.hpp"
#include "mtask/selection.hpp"
#include "mtask/tasks.hpp"

namespace mtask {

/// Sizes and confidence level entering the complexity terms.
struct bound_config {
    int d = 0;  // VC dimension of the hypothesis class (dim+1 for linear+bias)
    int k = 0;
    int m = 0;
    int n = 0;
    int T = 0;
    double delta = 0.05;

    void validate() const;
};

struct bound_constants {
    double a = 0.0;  // sqrt(2 d ln(e k m / d) / m)
    double b = 0.0;  // sqrt(ln(4/delta) / (2m))
    double c = 0.0;  // sqrt(8(ln T + d ln(e n T / d))/n) + sqrt(2 ln(4/delta)/n)
    double d = 0.0;  // 2 sqrt((2 d ln(2n) + 2 ln T + ln(4/delta))/n)
};

/// Closed-form complexity constants (natural logarithms).
bound_constants complexity_terms(const bound_config& cfg);

/// Every computable term of the generalization bound for one configuration
/// of labeled set, weights and trained predictors.
struct bound_report {
    double a_term = 0.0;
    double b_term = 0.0;
    double c_term = 0.0;
    double d_term = 0.0;
    double norm21 = 0.0;
    double norm12 = 0.0;
    double weighted_disc = 0.0;         // (1/T) sum_t sum_i alpha_i^t disc(t,i)
    double weighted_train_error = 0.0;  // (1/T) sum_t alpha-weighted 0/1 training error of h_t
    double total_computable = 0.0;
    std::optional<double> lambda_estimate;
};

bound_report make_bound_report(const task_collection& coll, const discrepancy_matrix& disc,
                               const weight_matrix& alpha, const std::vector<linear_model>& models,
                               const std::vector<labeled_subset>& subsets, const bound_config& cfg);

/// Upper estimate of the label-compatibility term for a task pair: one
/// linear model fit by least squares on the union of both tasks' labeled
/// points, scored by its summed 0/1 errors on the two test sets. Needs
/// ground-truth labels, so it is a diagnostic for synthetic data only.
double lambda_diagnostic(const task_collection& coll, int t, int i);

/// Flat key=value lines, full precision.
void save_report(const bound_report& report, const std::filesystem::path& path);
bound_report load_report(const std::filesystem::path& path);

} // namespace mtask

#endif
