#ifndef MTASK_SELECTION_HPP
#define MTASK_SELECTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtask/discrepancy.hpp"
#include "mtask/rng.hpp"

namespace mtask {

/// Row-stochastic transfer weights with column support restricted to the
/// labeled set. Stored as a dense T x k block over the sorted labeled
/// indices; entries outside those columns are implicitly exact zeros.
struct weight_matrix {
    std::vector<int> labeled;   // sorted, distinct task indices (the set I)
    Eigen::MatrixXd weights;    // T x |labeled|

    int task_count() const { return static_cast<int>(weights.rows()); }
    int labeled_count() const { return static_cast<int>(labeled.size()); }

    /// Full-matrix access: alpha(t, i) for any task index i.
    double alpha(int t, int i) const;

    /// Weights of row t in labeled-column order.
    Eigen::VectorXd row(int t) const { return weights.row(t).transpose(); }

    /// Row sums within `tol` of 1, nonnegative entries, sorted distinct support.
    void validate(double tol = 1e-9) const;

    static weight_matrix uniform(int T, std::vector<int> I);
};

/// Constants and solver knobs for the unlabeled-data objective
///   (1/T) sum_t sum_{i in I} alpha_i^t disc(t,i)
///   + (A/T) |alpha|_{2,1} + (B/T) |alpha|_{1,2}.
struct objective_config {
    double a_coeff = 0.0;
    double b_coeff = 0.0;
    double tolerance = 1e-6;        // relative objective decrease
    int max_iterations = 500;       // projected gradient steps
    int max_outer_iterations = 50;  // support-pursuit outer loop
    double smoothing = 1e-12;       // norm subgradients at zero rows/columns
};

/// Sum of row 2-norms.
double mixed_norm_21(const weight_matrix& alpha);
/// 2-norm of the vector of column sums.
double mixed_norm_12(const weight_matrix& alpha);

double objective_value(const weight_matrix& alpha, const discrepancy_matrix& disc,
                       const objective_config& cfg);

/// Euclidean projection onto {x >= 0, sum x = 1} (sort-based).
Eigen::VectorXd project_row_to_simplex(const Eigen::VectorXd& v);

struct optimize_result {
    weight_matrix alpha;
    std::vector<double> trace;  // objective at init and after each accepted step
};

/// Projected gradient descent with Armijo backtracking over the rows'
/// simplices, restricted to the columns in I. The trace is non-increasing.
/// With a_coeff = b_coeff = 0 the objective is linear and the exact vertex
/// minimizer (nearest labeled column, ties to the lowest index) is returned
/// directly.
optimize_result optimize_weights(const discrepancy_matrix& disc, const std::vector<int>& I,
                                 const objective_config& cfg,
                                 const weight_matrix* init = nullptr);

struct selection_outcome {
    std::vector<int> labeled;
    weight_matrix alpha;
    double objective = 0.0;
};

/// Group-sparse pursuit of the objective where a group is a column: k-means++
/// seeding on the discrepancies, then iterate (rank columns by gradient norm,
/// merge top 2k with the support, optimize, prune to the k heaviest columns,
/// re-optimize) until the support is stable.
selection_outcome select_active_grasp(const discrepancy_matrix& disc, int k,
                                      const objective_config& cfg, std::uint64_t seed);

struct kmedoids_outcome {
    std::vector<int> medoids;      // sorted, size k
    std::vector<int> assignment;   // T entries, each a medoid index
    double objective = 0.0;        // (1/T) sum_t disc(t, medoid(t))
    double seed_objective = 0.0;   // objective of the k-means++ initialization
};

/// k-medoids on the discrepancy matrix: k-means++ seeding followed by
/// alternating assignment and within-cluster medoid swaps until stable.
kmedoids_outcome select_active_kmedoids(const discrepancy_matrix& disc, int k, std::uint64_t seed);

/// One-hot rows on the nearest labeled task (ties to the lowest index);
/// labeled tasks are assigned to themselves.
weight_matrix assign_nearest_source(const discrepancy_matrix& disc, const std::vector<int>& I);

/// k-means++ style seeding: first index uniform, then indices sampled with
/// probability proportional to the squared discrepancy to the nearest chosen
/// one. Returns a sorted set of k distinct indices.
std::vector<int> kmeanspp_seed(const discrepancy_matrix& disc, int k, rng& stream);

/// Persisted selection: selection.json naming {method, k, seed, I, alpha_file}
/// next to the alpha file with T rows of (column,value) pairs.
struct selection_record {
    std::string method;
    int k = 0;
    std::uint64_t seed = 0;
    weight_matrix alpha;
};

void save_selection(const selection_record& rec, const std::filesystem::path& json_path,
                    const std::string& alpha_filename = "alpha.txt");
selection_record load_selection(const std::filesystem::path& json_path);

} // namespace mtask

#endif
