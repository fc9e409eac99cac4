#ifndef MTASK_TASKS_HPP
#define MTASK_TASKS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mtask {

/// One task: an unlabeled sample, optional ground-truth labels for those
/// points, and an optional held-out test set.
struct task_data {
    Eigen::MatrixXd points;        // n x dim
    std::vector<int> labels;       // empty, or size n with values in {-1,+1}
    Eigen::MatrixXd test_points;   // n_test x dim (0 rows if absent)
    std::vector<int> test_labels;  // size n_test

    bool has_labels() const { return !labels.empty(); }
    bool has_test() const { return test_points.rows() > 0; }
};

/// Mean of a synthetic task; the covariance is always the identity.
struct synthetic_task_spec {
    double mean_x = 0.0;
    double mean_y = 0.0;
};

/// A collection of tasks sharing the feature dimension, the unlabeled sample
/// size n, and the labeled-subset size m. Immutable after construction.
struct task_collection {
    int dim = 0;
    int n = 0;
    int m = 0;
    std::vector<task_data> tasks;
    std::vector<synthetic_task_spec> synthetic_specs;  // empty unless generated

    int count() const { return static_cast<int>(tasks.size()); }

    /// Checks all structural invariants; throws validation_error.
    void validate() const;
};

/// The m row indices of a task that are revealed as labeled.
struct labeled_subset {
    int task = 0;
    std::vector<int> rows;
};

/// Synthetic labeling rule: +1 iff the counter-clockwise angle from `mean`
/// to `x` is in (0, pi), i.e. the 2-D cross product mean x point is positive.
/// The measure-zero boundary maps to -1.
int angle_label(double mean_x, double mean_y, double x0, double x1);

/// Generates T binary tasks in R^2: means uniform on [-5,5]^2, samples from
/// unit-variance Gaussians around them, labels from angle_label. Test sets
/// are n_test fresh draws per task. Deterministic in `seed`; each task uses
/// its own stream keyed by (seed, task index).
task_collection generate_synthetic(int T, int n, int m, int n_test, std::uint64_t seed);

/// Same generator with caller-chosen means (|means| tasks).
task_collection generate_synthetic_from_means(const std::vector<synthetic_task_spec>& means,
                                              int n, int m, int n_test, std::uint64_t seed);

/// Reads a dataset directory through its manifest.json. Shapes, row counts
/// and label domains are checked against the manifest; errors name the file
/// and row.
task_collection load_collection(const std::filesystem::path& manifest_path);

/// Writes manifest.json plus per-task CSV files into `dir`.
void save_collection(const task_collection& coll, const std::filesystem::path& dir);

/// For each task in I, draws m distinct row indices uniformly without
/// replacement. Per-task streams keyed by (seed, task), so the draw for a
/// task does not depend on which other tasks are in I.
std::vector<labeled_subset> draw_labeled_subsets(const task_collection& coll,
                                                 const std::vector<int>& I,
                                                 std::uint64_t seed);

/// Generalization used by the reference baselines: draws `count` indices per
/// task instead of m. Streams are shared with draw_labeled_subsets.
std::vector<labeled_subset> draw_subsets(const task_collection& coll,
                                         const std::vector<int>& I, int count,
                                         std::uint64_t seed);

} // namespace mtask

#endif
