#ifndef MTASK_LINALG_HPP
#define MTASK_LINALG_HPP

#include <Eigen/Dense>

namespace mtask {

/// Solves the normal-equation system G x = r for symmetric positive
/// semidefinite G. Rank-deficient systems are solved with a ridge jitter
/// of `jitter` added to the diagonal.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram,
                                              const Eigen::VectorXd& rhs,
                                              double jitter = 1e-10) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() == gram.rows()) return lu.solve(rhs);
    Eigen::MatrixXd jittered = gram;
    jittered.diagonal().array() += jitter;
    return jittered.ldlt().solve(rhs);
}

/// sign(w.x + b) with sign(0) := -1, the prediction rule used everywhere.
inline int predict_sign(double score) { return score > 0.0 ? 1 : -1; }

} // namespace mtask

#endif
