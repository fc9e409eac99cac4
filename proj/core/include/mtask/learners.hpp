#ifndef MTASK_LEARNERS_HPP
#define MTASK_LEARNERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mtask/linalg.hpp"
#include "mtask/tasks.hpp"

namespace mtask {

/// Linear predictor with bias: sign(w.x + b), sign(0) := -1.
struct linear_model {
    Eigen::VectorXd w;
    double b = 0.0;

    int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        return predict_sign(w.dot(x) + b);
    }
};

/// 5x5-fold cross validation over {0} union {1e-17,...,1e8}.
struct cv_config {
    std::vector<double> lambdas;
    int repeats = 5;
    int folds = 5;
    std::uint64_t seed = 0;

    cv_config();
};

/// {0, 1e-17, 1e-16, ..., 1e8}, ascending.
std::vector<double> default_lambda_grid();

/// Weighted-ERM ridge: minimizes
///   sum_i alpha_i (1/|S_i|) sum_{(x,y) in S_i} (w.x + b - y)^2 + lambda |w|^2
/// in closed form (bias unregularized). alpha_row is normalized to sum 1
/// internally; groups with zero weight are skipped. With lambda = 0 a
/// singular system gets a 1e-10 diagonal jitter.
linear_model train_weighted_ridge(const task_collection& coll,
                                  const std::vector<labeled_subset>& subsets,
                                  const Eigen::VectorXd& alpha_row, double lambda);

/// 5 seeded shufflings x `folds` label-stratified folds per task; returns the
/// lambda with the lowest mean alpha-weighted 0/1 validation error, ties to
/// the smallest lambda. Fold streams are keyed by (seed, repeat, task), so a
/// task's folds do not depend on which other tasks participate. The winner's
/// mean validation error is written to `mean_error_out` when non-null.
double cv_select_lambda(const task_collection& coll, const std::vector<labeled_subset>& subsets,
                        const Eigen::VectorXd& alpha_row, const cv_config& cv,
                        double* mean_error_out = nullptr);

struct evaluation {
    std::vector<double> per_task;  // 0/1 error on each task's test set
    double average = 0.0;
};

/// Mean 0/1 test error per task and their average.
evaluation evaluate(const std::vector<linear_model>& models, const task_collection& coll);

/// Shared predictor plus per-labeled-task deviations, from the joint
/// objective
///   C(|w|^2 + (1/k) sum_t |v_t|^2)
///   + ((1-gamma)/N) sum (w.x + b - y)^2
///   + (gamma/N) sum ((w+v_t).x + (b+b_t) - y)^2
/// solved by block coordinate descent with exact per-block solves.
struct multitask_model {
    linear_model shared;
    std::vector<int> labeled;
    std::vector<linear_model> deviations;  // aligned with labeled
    std::vector<double> trace;             // objective after each sweep

    /// (w,b) for unlabeled tasks, (w+v_t, b+b_t) for labeled ones.
    linear_model predictor_for(int task) const;
};

multitask_model train_multitask_baseline(const task_collection& coll,
                                         const std::vector<labeled_subset>& subsets, double gamma,
                                         double c_reg, double rel_tol = 1e-8, int max_sweeps = 500);

/// CV for the multitask regularizer C over the positive part of the lambda
/// grid; validation error is the plain 0/1 mean over all held-out points.
double cv_select_multitask_c(const task_collection& coll,
                             const std::vector<labeled_subset>& subsets, double gamma,
                             const cv_config& cv);

/// Independent per-task ridge with CV, using `labels_per_task` revealed
/// labels for every task. Covers both the fully labeled reference
/// (labels_per_task = m) and the spread-thin reference (m*k/T).
std::vector<linear_model> train_fully_labeled_reference(const task_collection& coll,
                                                        int labels_per_task, const cv_config& cv,
                                                        std::uint64_t subset_seed);

/// Model file: one line per task: id, b, then the dim entries of w.
void save_models(const std::vector<linear_model>& models, const std::filesystem::path& path);
std::vector<linear_model> load_models(const std::filesystem::path& path);

} // namespace mtask

#endif
