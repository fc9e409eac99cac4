#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtask/discrepancy.hpp"
#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/selection.hpp"
#include "mtask/tasks.hpp"
#include "test_util.hpp"

using namespace mtask;
using mtask_test::temp_dir;

namespace {

discrepancy_matrix matrix_from(const Eigen::MatrixXd& values) {
    discrepancy_matrix mat;
    mat.values = values;
    mat.n = 1;
    mat.validate();
    return mat;
}

weight_matrix one_hot_rows(int T, const std::vector<int>& I, const std::vector<int>& column_of_row) {
    weight_matrix alpha;
    alpha.labeled = I;
    alpha.weights = Eigen::MatrixXd::Zero(T, static_cast<Eigen::Index>(I.size()));
    for (int t = 0; t < T; ++t) {
        const auto pos = std::find(I.begin(), I.end(), column_of_row[t]) - I.begin();
        alpha.weights(t, static_cast<Eigen::Index>(pos)) = 1.0;
    }
    return alpha;
}

/// Random feasible weight matrix: rows are simplex projections of noise.
weight_matrix random_feasible(int T, const std::vector<int>& I, rng& stream) {
    weight_matrix alpha;
    alpha.labeled = I;
    alpha.weights.resize(T, static_cast<Eigen::Index>(I.size()));
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(I.size()));
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = stream.next_double() * 2.0 - 0.5;
        alpha.weights.row(t) = project_row_to_simplex(v).transpose();
    }
    return alpha;
}

} // namespace

TEST_CASE("mixed norms") {
    SUBCASE("all rows one-hot on a single column: both norms are T") {
        const auto alpha = one_hot_rows(4, {1}, {1, 1, 1, 1});
        CHECK(mixed_norm_21(alpha) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(mixed_norm_12(alpha) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("one-hot rows keep the 2,1 norm at T regardless of columns") {
        const auto alpha = one_hot_rows(4, {0, 1, 2, 3}, {0, 1, 2, 3});
        CHECK(mixed_norm_21(alpha) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(mixed_norm_12(alpha) == doctest::Approx(2.0).epsilon(1e-12));  // sqrt(4 columns of sum 1)
    }
    SUBCASE("uniform rows with T=k=4: both norms are T/sqrt(k)") {
        const auto alpha = weight_matrix::uniform(4, {0, 1, 2, 3});
        CHECK(mixed_norm_21(alpha) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(mixed_norm_12(alpha) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("single row (0.6, 0.4)") {
        weight_matrix alpha;
        alpha.labeled = {0, 1};
        alpha.weights.resize(1, 2);
        alpha.weights << 0.6, 0.4;
        CHECK(mixed_norm_21(alpha) == doctest::Approx(std::sqrt(0.52)).epsilon(1e-12));
    }
}

TEST_CASE("objective value") {
    SUBCASE("hand-evaluated two-task instance") {
        Eigen::MatrixXd d(2, 2);
        d << 0.0, 0.3, 0.3, 0.0;
        const auto disc = matrix_from(d);
        const auto alpha = one_hot_rows(2, {0}, {0, 0});
        objective_config cfg;
        cfg.a_coeff = 0.6;
        cfg.b_coeff = 0.1;
        CHECK(objective_value(alpha, disc, cfg) == doctest::Approx(0.85).epsilon(1e-12));
    }
    SUBCASE("A=B=0 one-hot nearest assignment gives the mean nearest discrepancy") {
        rng stream(5);
        const auto values = mtask_test::random_discrepancy_values(6, stream);
        const auto disc = matrix_from(values);
        const std::vector<int> I{1, 4};
        const auto alpha = assign_nearest_source(disc, I);
        double expect = 0.0;
        for (int t = 0; t < 6; ++t) expect += std::min(values(t, 1), values(t, 4));
        expect /= 6.0;
        objective_config cfg;  // A = B = 0
        CHECK(objective_value(alpha, disc, cfg) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("zero matrix with uniform weights leaves only the norm terms") {
        const auto disc = matrix_from(Eigen::MatrixXd::Zero(4, 4));
        const auto alpha = weight_matrix::uniform(4, {0, 1, 2, 3});
        objective_config cfg;
        cfg.a_coeff = 0.8;
        cfg.b_coeff = 0.2;
        CHECK(objective_value(alpha, disc, cfg) ==
              doctest::Approx(0.8 / 2.0 + 0.2 / 2.0).epsilon(1e-12));  // A/sqrt(k)+B/sqrt(k), k=4
    }
}

TEST_CASE("simplex projection") {
    SUBCASE("feasible points are fixed") {
        Eigen::VectorXd v(2);
        v << 0.5, 0.5;
        CHECK(project_row_to_simplex(v) == v);
    }
    SUBCASE("vertex projection") {
        Eigen::VectorXd v(2);
        v << 2.0, 0.0;
        const Eigen::VectorXd p = project_row_to_simplex(v);
        CHECK(p(0) == 1.0);
        CHECK(p(1) == 0.0);
    }
    SUBCASE("interior shift") {
        Eigen::VectorXd v(2);
        v << 0.4, 0.1;
        const Eigen::VectorXd p = project_row_to_simplex(v);
        CHECK(p(0) == doctest::Approx(0.65).epsilon(1e-12));
        CHECK(p(1) == doctest::Approx(0.35).epsilon(1e-12));
        const Eigen::VectorXd oracle = mtask_test::project_simplex_oracle(v);
        CHECK((p - oracle).norm() <= 1e-12);
    }
    SUBCASE("matches the KKT enumeration oracle on random vectors") {
        rng stream(99);
        for (int rep = 0; rep < 300; ++rep) {
            const int k = 2 + static_cast<int>(stream.next_below(9));
            Eigen::VectorXd v(k);
            const double scale = std::pow(10.0, static_cast<double>(stream.next_below(5)) - 2.0);
            for (int i = 0; i < k; ++i) v(i) = (stream.next_double() * 2.0 - 1.0) * scale;
            const Eigen::VectorXd p = project_row_to_simplex(v);
            const Eigen::VectorXd q = mtask_test::project_simplex_oracle(v);
            REQUIRE((p - q).norm() <= 1e-8);
            REQUIRE(std::abs(p.sum() - 1.0) <= 1e-12);
            REQUIRE(p.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("optimize_weights") {
    rng stream(3);
    const auto values = mtask_test::random_discrepancy_values(7, stream);
    const auto disc = matrix_from(values);
    const std::vector<int> I{0, 3, 5};

    SUBCASE("linear objective lands on one-hot nearest rows with low-index ties") {
        Eigen::MatrixXd tied = values;
        tied(2, 3) = tied(2, 5) = 0.2;  // tie between labeled columns 3 and 5
        tied(3, 2) = tied(5, 2) = 0.2;
        const auto disc_tied = matrix_from(tied);
        objective_config cfg;  // A = B = 0
        const auto res = optimize_weights(disc_tied, I, cfg);
        res.alpha.validate();
        for (int t = 0; t < 7; ++t) {
            const Eigen::VectorXd row = res.alpha.row(t);
            CHECK(row.maxCoeff() == 1.0);
        }
        // row 2: tie -> lowest index among {3,5} unless 0 is closer
        if (tied(2, 0) > 0.2) CHECK(res.alpha.alpha(2, 3) == 1.0);
        // labeled rows pick themselves (zero diagonal)
        CHECK(res.alpha.alpha(0, 0) == 1.0);
        CHECK(res.alpha.alpha(3, 3) == 1.0);
        CHECK(res.alpha.alpha(5, 5) == 1.0);
    }

    SUBCASE("zero discrepancies with T=k pull towards uniform weights") {
        const auto dzero = matrix_from(Eigen::MatrixXd::Zero(4, 4));
        objective_config cfg;
        cfg.a_coeff = 0.5;
        cfg.b_coeff = 0.25;
        cfg.max_iterations = 2000;
        const auto res = optimize_weights(dzero, {0, 1, 2, 3}, cfg);
        const double f_uniform =
            objective_value(weight_matrix::uniform(4, {0, 1, 2, 3}), dzero, cfg);
        CHECK(res.trace.back() <= f_uniform + 1e-10);
        CHECK((res.alpha.weights.array() - 0.25).abs().maxCoeff() <= 1e-5);

        // uniform beats ten thousand random feasible matrices
        rng rnd(17);
        for (int rep = 0; rep < 10000; ++rep) {
            const auto cand = random_feasible(4, {0, 1, 2, 3}, rnd);
            CHECK(objective_value(cand, dzero, cfg) >= f_uniform - 1e-12);
        }
    }

    SUBCASE("objective trace is non-increasing and final <= init") {
        objective_config cfg;
        cfg.a_coeff = 0.3;
        cfg.b_coeff = 0.2;
        const auto res = optimize_weights(disc, I, cfg);
        for (std::size_t j = 1; j < res.trace.size(); ++j) CHECK(res.trace[j] <= res.trace[j - 1]);
        CHECK(res.trace.back() <= res.trace.front());
        res.alpha.validate();
    }

    SUBCASE("linear objective value equals the nearest-source assignment value") {
        objective_config cfg;  // A = B = 0
        const auto res = optimize_weights(disc, I, cfg);
        const auto assigned = assign_nearest_source(disc, I);
        CHECK(std::abs(res.trace.back() - objective_value(assigned, disc, cfg)) <= 1e-6);
    }

    SUBCASE("warm start with mismatched support is rejected") {
        objective_config cfg;
        cfg.a_coeff = 0.1;
        const auto init = weight_matrix::uniform(7, {0, 3});
        CHECK_THROWS_AS(optimize_weights(disc, I, cfg, &init), validation_error);
    }

    SUBCASE("empty support is rejected") {
        objective_config cfg;
        CHECK_THROWS_AS(optimize_weights(disc, {}, cfg), validation_error);
    }
}

TEST_CASE("norm bounds hold for feasible weight matrices") {
    rng stream(31);
    for (int rep = 0; rep < 50; ++rep) {
        const int T = 3 + static_cast<int>(stream.next_below(8));
        const int k = 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(T)));
        std::vector<int> I = stream.sample_without_replacement(T, k);
        std::sort(I.begin(), I.end());
        const auto alpha = random_feasible(T, I, stream);
        const double n21 = mixed_norm_21(alpha);
        const double n12 = mixed_norm_12(alpha);
        const double Td = static_cast<double>(T);
        CHECK(n21 >= Td / std::sqrt(static_cast<double>(k)) - 1e-9);
        CHECK(n21 <= Td + 1e-9);
        CHECK(n12 <= Td + 1e-9);
    }
}

TEST_CASE("k-means++ seeding returns k distinct indices") {
    rng stream(8);
    const auto values = mtask_test::random_discrepancy_values(9, stream);
    const auto disc = matrix_from(values);
    for (int k : {1, 3, 9}) {
        rng s2(44);
        const auto picks = kmeanspp_seed(disc, k, s2);
        CHECK(static_cast<int>(picks.size()) == k);
        CHECK(std::is_sorted(picks.begin(), picks.end()));
        CHECK(std::adjacent_find(picks.begin(), picks.end()) == picks.end());
    }
    rng s3(1);
    const auto zero = matrix_from(Eigen::MatrixXd::Zero(4, 4));
    const auto picks = kmeanspp_seed(zero, 3, s3);
    CHECK(static_cast<int>(picks.size()) == 3);
}

TEST_CASE("grasp selection") {
    SUBCASE("k = T keeps the full support and matches plain optimization") {
        rng stream(12);
        const auto disc = matrix_from(mtask_test::random_discrepancy_values(5, stream));
        objective_config cfg;
        cfg.a_coeff = 0.4;
        cfg.b_coeff = 0.1;
        const auto full = optimize_weights(disc, {0, 1, 2, 3, 4}, cfg);
        const auto sel = select_active_grasp(disc, 5, cfg, 7);
        CHECK(sel.labeled == std::vector<int>{0, 1, 2, 3, 4});
        CHECK(sel.objective <= full.trace.back() + 1e-9);
        sel.alpha.validate();
    }

    SUBCASE("two tight clusters: grasp finds the enumerated optimum") {
        const std::vector<synthetic_task_spec> means = {{-3.0, -3.0}, {-3.05, -2.95}, {-2.95, -3.05},
                                                        {3.0, 3.0},   {3.05, 2.95},   {2.95, 3.05}};
        const auto coll = generate_synthetic_from_means(means, 80, 40, 10, 5);
        const auto disc = build_matrix(coll, 1);
        objective_config cfg;
        cfg.a_coeff = 0.8;
        cfg.b_coeff = 0.23;

        double best_enum = std::numeric_limits<double>::infinity();
        std::vector<int> best_I;
        for (const auto& I : mtask_test::all_subsets(6, 2)) {
            const auto res = optimize_weights(disc, I, cfg);
            if (res.trace.back() < best_enum) {
                best_enum = res.trace.back();
                best_I = I;
            }
        }
        const auto sel = select_active_grasp(disc, 2, cfg, 3);
        CHECK(std::abs(sel.objective - best_enum) <= 1e-6);
        // one labeled task per cluster
        CHECK(sel.labeled.size() == 2);
        CHECK(sel.labeled[0] <= 2);
        CHECK(sel.labeled[1] >= 3);
    }

    SUBCASE("|I| = k for random instances") {
        rng stream(77);
        for (int rep = 0; rep < 10; ++rep) {
            const int T = 4 + static_cast<int>(stream.next_below(6));
            const int k = 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(T)));
            const auto disc = matrix_from(mtask_test::random_discrepancy_values(T, stream));
            objective_config cfg;
            cfg.a_coeff = 0.2;
            cfg.b_coeff = 0.1;
            const auto sel = select_active_grasp(disc, k, cfg, rep);
            CHECK(static_cast<int>(sel.labeled.size()) == k);
            sel.alpha.validate();
        }
    }

    SUBCASE("k out of range is rejected") {
        rng stream(1);
        const auto disc = matrix_from(mtask_test::random_discrepancy_values(4, stream));
        objective_config cfg;
        CHECK_THROWS_AS(select_active_grasp(disc, 0, cfg, 1), validation_error);
        CHECK_THROWS_AS(select_active_grasp(disc, 5, cfg, 1), validation_error);
    }
}

TEST_CASE("k-medoids selection") {
    SUBCASE("k = T: every task its own medoid, objective zero") {
        rng stream(2);
        const auto disc = matrix_from(mtask_test::random_discrepancy_values(5, stream));
        const auto out = select_active_kmedoids(disc, 5, 3);
        CHECK(out.medoids == std::vector<int>{0, 1, 2, 3, 4});
        CHECK(out.objective == 0.0);
        for (int t = 0; t < 5; ++t) CHECK(out.assignment[t] == t);
    }

    SUBCASE("three-task chain picks the middle medoid") {
        Eigen::MatrixXd d(3, 3);
        d << 0.0, 0.2, 0.4, 0.2, 0.0, 0.2, 0.4, 0.2, 0.0;
        const auto disc = matrix_from(d);
        double best = std::numeric_limits<double>::infinity();
        int best_medoid = -1;
        for (int c = 0; c < 3; ++c) {
            const double cost = (d(0, c) + d(1, c) + d(2, c)) / 3.0;
            if (cost < best) {
                best = cost;
                best_medoid = c;
            }
        }
        CHECK(best_medoid == 1);  // the enumeration oracle itself
        const auto out = select_active_kmedoids(disc, 1, 5);
        CHECK(out.medoids == std::vector<int>{1});
        CHECK(out.objective == doctest::Approx(best).epsilon(1e-12));
    }

    SUBCASE("local search matches exhaustive enumeration on most small instances") {
        int optimal_hits = 0;
        const int runs = 100;
        rng meta(123);
        for (int rep = 0; rep < runs; ++rep) {
            const int T = 4 + static_cast<int>(meta.next_below(5));  // 4..8
            const int k = 1 + static_cast<int>(meta.next_below(3));  // 1..3
            if (k > T) continue;
            rng gen(1000 + rep);
            const auto disc = matrix_from(mtask_test::random_discrepancy_values(T, gen));
            double best = std::numeric_limits<double>::infinity();
            for (const auto& I : mtask_test::all_subsets(T, k)) {
                double cost = 0.0;
                for (int t = 0; t < T; ++t) {
                    double mn = disc.values(t, I[0]);
                    for (int c : I) mn = std::min(mn, disc.values(t, c));
                    cost += mn;
                }
                best = std::min(best, cost / T);
            }
            const auto out = select_active_kmedoids(disc, k, rep);
            CHECK(out.objective >= best - 1e-12);          // enumeration is a lower bound
            CHECK(out.objective <= out.seed_objective + 1e-15);  // never worse than its start
            if (out.objective <= best + 1e-12) ++optimal_hits;
        }
        CHECK(optimal_hits >= 80);
    }

    SUBCASE("k out of range is rejected") {
        rng stream(1);
        const auto disc = matrix_from(mtask_test::random_discrepancy_values(4, stream));
        CHECK_THROWS_AS(select_active_kmedoids(disc, 0, 1), validation_error);
        CHECK_THROWS_AS(select_active_kmedoids(disc, 9, 1), validation_error);
    }
}

TEST_CASE("nearest-source assignment") {
    Eigen::MatrixXd d(3, 3);
    d << 0.0, 0.0, 0.1, 0.0, 0.0, 0.3, 0.1, 0.3, 0.0;
    const auto disc = matrix_from(d);

    SUBCASE("labeled tasks are assigned to themselves even under ties") {
        const auto alpha = assign_nearest_source(disc, {0, 1});
        CHECK(alpha.alpha(0, 0) == 1.0);
        CHECK(alpha.alpha(1, 1) == 1.0);  // despite disc(1,0)=0 tie
    }
    SUBCASE("single candidate takes every row") {
        const auto alpha = assign_nearest_source(disc, {0});
        for (int t = 0; t < 3; ++t) CHECK(alpha.alpha(t, 0) == 1.0);
    }
    SUBCASE("direct argmin with tie to the lowest index") {
        const auto alpha = assign_nearest_source(disc, {0, 1});
        CHECK(alpha.alpha(2, 0) == 1.0);  // 0.1 < 0.3
    }
    SUBCASE("empty I is rejected") {
        CHECK_THROWS_AS(assign_nearest_source(disc, {}), validation_error);
    }
}

TEST_CASE("selection persistence round trip") {
    temp_dir dir("selection_io");
    rng stream(21);
    const auto disc = matrix_from(mtask_test::random_discrepancy_values(5, stream));
    objective_config cfg;
    cfg.a_coeff = 0.3;
    cfg.b_coeff = 0.1;
    selection_record rec;
    rec.method = "active-da";
    rec.k = 2;
    rec.seed = 17;
    rec.alpha = select_active_grasp(disc, 2, cfg, 17).alpha;

    save_selection(rec, dir.path() / "selection.json");
    const auto loaded = load_selection(dir.path() / "selection.json");
    CHECK(loaded.method == rec.method);
    CHECK(loaded.k == rec.k);
    CHECK(loaded.seed == rec.seed);
    CHECK(loaded.alpha.labeled == rec.alpha.labeled);
    CHECK(loaded.alpha.weights == rec.alpha.weights);

    SUBCASE("alpha rows violating the support are rejected") {
        // tamper: point the json at a file with a wrong column id
        std::string alpha_text;
        for (int t = 0; t < 5; ++t) alpha_text += "(0,0.5),(4,0.5)\n";
        write_text_file(dir.path() / "alpha.txt", alpha_text);
        if (rec.alpha.labeled != std::vector<int>{0, 4})
            CHECK_THROWS_AS(load_selection(dir.path() / "selection.json"), validation_error);
    }
}
