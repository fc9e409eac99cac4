#ifndef MTASK_EXPERIMENT_HPP
#define MTASK_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtask/bound.hpp"
#include "mtask/discrepancy.hpp"
#include "mtask/learners.hpp"
#include "mtask/selection.hpp"
#include "mtask/tasks.hpp"

namespace mtask {

/// Methods of the benchmark sweep. The active variants choose the labeled
/// set from the data; the passive ones get a random set; the references see
/// labels for every task.
inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> methods = {
        "da", "active-da", "da-ss", "active-da-ss", "multitask", "fully-labeled", "partial-labeled"};
    return methods;
}

struct experiment_config {
    std::string data = "synthetic";  // "synthetic" or "manifest"
    std::filesystem::path manifest;  // used when data == "manifest"
    int T = 0;
    int n = 0;
    int m = 0;
    int n_test = 1000;
    std::vector<std::string> methods;
    std::vector<int> ks;
    std::vector<std::uint64_t> seeds;
    double delta = 0.05;
    std::filesystem::path output;
    int threads = 1;

    void validate() const;
};

/// Flat key=value file; method, k and seed may repeat to form lists.
experiment_config parse_experiment_config(const std::filesystem::path& path);

struct experiment_cell {
    std::string method;
    int k = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double mean_test_error = 0.0;
    double std_test_error = 0.0;  // over tasks
    double bound_total = 0.0;     // NaN for methods without a bound
    double wall_seconds = 0.0;
};

/// One pipeline pass for a single (method, k, seed) against an existing
/// collection and discrepancy matrix. `passive_I` is the shared random
/// labeled set used by the passive methods.
experiment_cell run_experiment_cell(const std::string& method, int k, std::uint64_t seed,
                                    const task_collection& coll, const discrepancy_matrix& disc,
                                    const std::vector<int>& passive_I, double delta);

/// Runs the sweep, caching discrepancy matrices per seed under the output
/// directory, and writes results.csv plus results_summary.csv there. Failed
/// cells carry NaN statistics and are listed in failures.log.
std::vector<experiment_cell> run_experiment(const experiment_config& cfg);

/// The random labeled set shared by the passive methods for (seed, k).
std::vector<int> passive_labeled_set(int T, int k, std::uint64_t seed);

} // namespace mtask

#endif
