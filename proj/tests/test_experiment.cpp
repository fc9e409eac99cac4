#include <doctest.h>

#include <cmath>
#include <fstream>

#include "mtask/errors.hpp"
#include "mtask/experiment.hpp"
#include "mtask/io_util.hpp"
#include "mtask/rng.hpp"
#include "test_util.hpp"

using namespace mtask;
using mtask_test::temp_dir;

namespace {

experiment_config tiny_config(const std::filesystem::path& out) {
    experiment_config cfg;
    cfg.data = "synthetic";
    cfg.T = 6;
    cfg.n = 40;
    cfg.m = 20;
    cfg.n_test = 30;
    cfg.methods = {"da", "active-da"};
    cfg.ks = {2, 3};
    cfg.seeds = {1, 2, 3};
    cfg.output = out;
    return cfg;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
    std::vector<std::string> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

/// results.csv with the wall_seconds column blanked out.
std::string masked_results(const std::filesystem::path& p) {
    std::string masked;
    for (const auto& line : lines_of(p)) {
        const auto last_comma = line.rfind(',');
        masked += line.substr(0, last_comma) + "\n";
    }
    return masked;
}

} // namespace

TEST_CASE("config parsing") {
    temp_dir dir("exp_cfg");
    const auto path = dir.path() / "cfg.txt";

    SUBCASE("repeated keys build lists") {
        write_text_file(path,
                        "data=synthetic\nT=6\nn=40\nm=20\nn_test=30\n"
                        "method=da\nmethod=active-da\nk=2\nk=3\nseed=1\nseed=2\nseed=3\n"
                        "delta=0.1\noutput=" + (dir.path() / "out").string() + "\nthreads=2\n");
        const auto cfg = parse_experiment_config(path);
        CHECK(cfg.methods == std::vector<std::string>{"da", "active-da"});
        CHECK(cfg.ks == std::vector<int>{2, 3});
        CHECK(cfg.seeds.size() == 3);
        CHECK(cfg.delta == 0.1);
        CHECK(cfg.threads == 2);
    }

    SUBCASE("comments and blank lines are ignored") {
        write_text_file(path, "# a comment\n\ndata=synthetic\nT=4\nn=20\nm=10\n"
                              "method=da\nk=2\nseed=1\noutput=" + (dir.path() / "o").string() + "\n");
        CHECK_NOTHROW(parse_experiment_config(path));
    }

    SUBCASE("unknown keys and methods are rejected") {
        write_text_file(path, "bogus=1\n");
        CHECK_THROWS_AS(parse_experiment_config(path), validation_error);
        write_text_file(path, "data=synthetic\nT=4\nn=20\nm=10\nmethod=zapdos\nk=2\nseed=1\noutput=o\n");
        CHECK_THROWS_AS(parse_experiment_config(path), validation_error);
    }

    SUBCASE("missing config file is an io error") {
        CHECK_THROWS_AS(parse_experiment_config(dir.path() / "nope.txt"), io_error);
    }
}

TEST_CASE("sweep arithmetic and summary shape") {
    temp_dir dir("exp_sweep");
    const auto cfg = tiny_config(dir.path() / "out");
    const auto rows = run_experiment(cfg);
    CHECK(rows.size() == 12);  // 2 methods x 2 k x 3 seeds

    const auto results = lines_of(cfg.output / "results.csv");
    CHECK(results.size() == 13);  // header + rows
    CHECK(results[0] == "method,k,seed,mean_test_error,std_test_error,bound_total,wall_seconds");

    const auto summary = lines_of(cfg.output / "results_summary.csv");
    CHECK(summary.size() == 5);  // header + 2 methods x 2 k
    CHECK(summary[0] == "method,k,mean,stderr");

    for (const auto& row : rows) {
        CHECK(!row.failed);
        CHECK(row.mean_test_error >= 0.0);
        CHECK(row.mean_test_error <= 1.0);
        CHECK(std::isfinite(row.bound_total));
    }
}

TEST_CASE("passive methods share the random labeled set within a seed") {
    const auto coll = generate_synthetic(8, 30, 10, 20, 5);
    const auto disc = build_matrix(coll, 5);
    const auto I1 = passive_labeled_set(8, 3, 42);
    const auto I2 = passive_labeled_set(8, 3, 42);
    CHECK(I1 == I2);
    CHECK(passive_labeled_set(8, 3, 43) != I1);  // different seed, most likely different set

    const auto da = run_experiment_cell("da", 3, 42, coll, disc, I1, 0.05);
    const auto dass = run_experiment_cell("da-ss", 3, 42, coll, disc, I1, 0.05);
    CHECK(!da.failed);
    CHECK(!dass.failed);
}

TEST_CASE("failed cells are recorded and the sweep continues") {
    temp_dir dir("exp_fail");
    auto cfg = tiny_config(dir.path() / "out");
    // mk/T = 20*2/6 = 6 >= 5 folds for k=2? 6 >= 5 ok; use k=1 -> 3 < 5 folds -> fails
    cfg.methods = {"partial-labeled", "da"};
    cfg.ks = {1};
    cfg.seeds = {1};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].failed);
    CHECK(std::isnan(rows[0].mean_test_error));
    CHECK(!rows[1].failed);
    CHECK(std::filesystem::exists(cfg.output / "failures.log"));

    // summary for the failed cell is NaN but the file still parses
    const auto summary = lines_of(cfg.output / "results_summary.csv");
    CHECK(summary.size() == 3);
    CHECK(mtask_test::contains(summary[1], "nan"));
}

TEST_CASE("experiment reruns are deterministic") {
    temp_dir dir("exp_det");
    auto cfg = tiny_config(dir.path() / "a");
    cfg.methods = {"da", "da-ss", "active-da-ss"};
    cfg.ks = {2};
    cfg.seeds = {4, 5};
    run_experiment(cfg);
    auto cfg2 = cfg;
    cfg2.output = dir.path() / "b";
    run_experiment(cfg2);

    CHECK(masked_results(cfg.output / "results.csv") == masked_results(cfg2.output / "results.csv"));
    CHECK(read_text_file(cfg.output / "results_summary.csv") ==
          read_text_file(cfg2.output / "results_summary.csv"));
    CHECK(read_text_file(cfg.output / "disc_seed4.csv") ==
          read_text_file(cfg2.output / "disc_seed4.csv"));

    SUBCASE("a rerun on the same directory reuses the cached matrices") {
        run_experiment(cfg);  // disc_seed files already exist
        CHECK(masked_results(cfg.output / "results.csv") ==
              masked_results(cfg2.output / "results.csv"));
    }
}

TEST_CASE("manifest data source drives the sweep from files on disk") {
    temp_dir dir("exp_manifest");
    const auto coll = generate_synthetic(5, 30, 10, 20, 6);
    save_collection(coll, dir.path() / "data");

    experiment_config cfg;
    cfg.data = "manifest";
    cfg.manifest = dir.path() / "data" / "manifest.json";
    cfg.methods = {"da-ss"};
    cfg.ks = {2};
    cfg.seeds = {1, 2};
    cfg.output = dir.path() / "out";
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(!row.failed);
        CHECK(row.mean_test_error >= 0.0);
        CHECK(row.mean_test_error <= 1.0);
    }
    // the collection is fixed, so the two seeds share the cached matrix shape
    CHECK(std::filesystem::exists(cfg.output / "disc_seed1.csv"));
    CHECK(std::filesystem::exists(cfg.output / "disc_seed2.csv"));

    SUBCASE("k above the file-backed task count is rejected up front") {
        auto bad = cfg;
        bad.ks = {9};
        bad.output = dir.path() / "out2";
        CHECK_THROWS_AS(run_experiment(bad), validation_error);
    }
}

TEST_CASE("higher-dimensional collections flow through the whole pipeline") {
    // labels from a random hyperplane in R^5, mimicking ingested real data
    const int T = 5, n = 60, dim = 5;
    task_collection coll;
    coll.dim = dim;
    coll.n = n;
    coll.m = 20;
    coll.tasks.resize(T);
    rng stream(99);
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd w(dim);
        for (int c = 0; c < dim; ++c) w(c) = stream.next_normal();
        auto& task = coll.tasks[t];
        task.points.resize(n, dim);
        task.labels.resize(n);
        task.test_points.resize(30, dim);
        task.test_labels.resize(30);
        const double shift = static_cast<double>(t);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < dim; ++c) task.points(r, c) = shift + stream.next_normal();
            task.labels[r] = w.dot(task.points.row(r)) > 0 ? 1 : -1;
        }
        for (int r = 0; r < 30; ++r) {
            for (int c = 0; c < dim; ++c) task.test_points(r, c) = shift + stream.next_normal();
            task.test_labels[r] = w.dot(task.test_points.row(r)) > 0 ? 1 : -1;
        }
    }
    coll.validate();

    temp_dir dir("exp_dim5");
    save_collection(coll, dir.path() / "data");
    const auto loaded = load_collection(dir.path() / "data" / "manifest.json");
    CHECK(loaded.dim == 5);

    const auto disc = build_matrix(loaded, 4);
    disc.validate();
    const auto cell = run_experiment_cell("active-da", 2, 4, loaded, disc,
                                          passive_labeled_set(T, 2, 4), 0.05);
    CHECK(!cell.failed);
    CHECK(cell.mean_test_error >= 0.0);
    CHECK(cell.mean_test_error <= 1.0);
    CHECK(std::isfinite(cell.bound_total));
}

TEST_CASE("reference methods run end to end") {
    const auto coll = generate_synthetic(5, 30, 10, 20, 9);
    const auto disc = build_matrix(coll, 9);
    const auto I = passive_labeled_set(5, 5, 9);

    const auto fully = run_experiment_cell("fully-labeled", 5, 9, coll, disc, I, 0.05);
    CHECK(!fully.failed);
    CHECK(std::isnan(fully.bound_total));  // no bound for the reference

    const auto mt = run_experiment_cell("multitask", 5, 9, coll, disc, I, 0.05);
    CHECK(!mt.failed);
    CHECK(mt.mean_test_error >= 0.0);
    CHECK(mt.mean_test_error <= 1.0);
}
