#ifndef MTASK_DISCREPANCY_HPP
#define MTASK_DISCREPANCY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>

#include "mtask/tasks.hpp"

namespace mtask {

/// Hypothesis class used throughout: linear predictors with a bias term.
struct hypothesis_spec {
    int dim = 0;
    int vc_dimension() const { return dim + 1; }
};

/// Symmetric T x T matrix of empirical discrepancies in [0,1] with zero
/// diagonal, plus the metadata needed to reproduce it.
struct discrepancy_matrix {
    Eigen::MatrixXd values;
    int n = 0;
    std::string estimator = "sep-sq";
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(values.rows()); }
    void validate() const;
};

/// Empirical discrepancy between two equally sized samples, estimated by a
/// separation classifier: label the first sample +1 and the second -1, fit a
/// linear model with bias by least squares, take its 0/1 error eps on the
/// combined points and return clamp(1 - 2*eps, 0, 1). The seed is recorded
/// for provenance; the least-squares fit itself is deterministic.
double estimate_discrepancy(const Eigen::MatrixXd& sample_t, const Eigen::MatrixXd& sample_i,
                            std::uint64_t seed);

/// Test oracle: grid enumeration of the discrepancy's defining max over
/// hypothesis pairs. Directions are angle_grid points on the circle, offsets
/// are bias_grid points spanning slightly beyond the combined data range so
/// the two constant hypotheses are included. Intended for dim=2, small n.
double discrepancy_bruteforce(const Eigen::MatrixXd& sample_t, const Eigen::MatrixXd& sample_i,
                              int angle_grid, int bias_grid);

/// Estimates all unordered pairs (one estimate per pair, its stream keyed by
/// (seed, t, i)), symmetrizes by construction and zeroes the diagonal.
/// `threads` > 1 splits the pair list; results do not depend on it.
discrepancy_matrix build_matrix(const task_collection& coll, std::uint64_t seed, int threads = 1);

void save_matrix(const discrepancy_matrix& mat, const std::filesystem::path& path);
discrepancy_matrix load_matrix(const std::filesystem::path& path);

} // namespace mtask

#endif
