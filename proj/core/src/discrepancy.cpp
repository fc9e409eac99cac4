#include "mtask/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/linalg.hpp"
#include "mtask/rng.hpp"

namespace mtask {

namespace {

struct sample_moments {
    Eigen::MatrixXd gram;  // (dim+1) x (dim+1), over augmented points [x;1]
    Eigen::VectorXd sum;   // dim+1
};

sample_moments moments_of(const Eigen::MatrixXd& pts) {
    const Eigen::Index n = pts.rows();
    const Eigen::Index p = pts.cols() + 1;
    Eigen::MatrixXd aug(n, p);
    aug.leftCols(pts.cols()) = pts;
    aug.col(p - 1).setOnes();
    sample_moments m;
    m.gram = aug.transpose() * aug;
    m.sum = aug.colwise().sum();
    return m;
}

/// Separation fit from precomputed moments; returns clamp(1 - 2 eps, 0, 1).
double separation_discrepancy(const Eigen::MatrixXd& pts_t, const Eigen::MatrixXd& pts_i,
                              const sample_moments& mom_t, const sample_moments& mom_i) {
    const Eigen::Index n = pts_t.rows();
    const Eigen::Index dim = pts_t.cols();
    const Eigen::MatrixXd gram = mom_t.gram + mom_i.gram;
    const Eigen::VectorXd rhs = mom_t.sum - mom_i.sum;
    const Eigen::VectorXd theta = solve_normal_equations(gram, rhs);

    const Eigen::VectorXd w = theta.head(dim);
    const double b = theta(dim);
    Eigen::Index wrong = 0;
    const Eigen::VectorXd score_t = pts_t * w;
    const Eigen::VectorXd score_i = pts_i * w;
    for (Eigen::Index r = 0; r < n; ++r)
        if (predict_sign(score_t(r) + b) != 1) ++wrong;
    for (Eigen::Index r = 0; r < n; ++r)
        if (predict_sign(score_i(r) + b) != -1) ++wrong;
    const double eps = static_cast<double>(wrong) / static_cast<double>(2 * n);
    return std::clamp(1.0 - 2.0 * eps, 0.0, 1.0);
}

void check_pair_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() == 0 || b.rows() == 0) throw validation_error("discrepancy: empty sample");
    if (a.rows() != b.rows())
        throw validation_error("discrepancy: samples must have equal row counts, got " +
                               std::to_string(a.rows()) + " and " + std::to_string(b.rows()));
    if (a.cols() != b.cols())
        throw validation_error("discrepancy: dimension mismatch, got " + std::to_string(a.cols()) +
                               " and " + std::to_string(b.cols()));
}

} // namespace

void discrepancy_matrix::validate() const {
    const int T = count();
    if (T < 1 || values.cols() != T) throw validation_error("discrepancy matrix must be square");
    for (int t = 0; t < T; ++t) {
        if (values(t, t) != 0.0)
            throw validation_error("discrepancy matrix diagonal must be zero at " + std::to_string(t));
        for (int i = 0; i < T; ++i) {
            const double v = values(t, i);
            if (!(v >= 0.0 && v <= 1.0))
                throw validation_error("discrepancy out of [0,1] at (" + std::to_string(t) + "," +
                                       std::to_string(i) + "): " + format_double(v));
            if (values(t, i) != values(i, t))
                throw validation_error("discrepancy matrix asymmetric at (" + std::to_string(t) +
                                       "," + std::to_string(i) + ")");
        }
    }
}

double estimate_discrepancy(const Eigen::MatrixXd& sample_t, const Eigen::MatrixXd& sample_i,
                            std::uint64_t seed) {
    (void)seed;  // recorded upstream; the separation fit is deterministic
    check_pair_shapes(sample_t, sample_i);
    return separation_discrepancy(sample_t, sample_i, moments_of(sample_t), moments_of(sample_i));
}

double discrepancy_bruteforce(const Eigen::MatrixXd& sample_t, const Eigen::MatrixXd& sample_i,
                              int angle_grid, int bias_grid) {
    check_pair_shapes(sample_t, sample_i);
    if (sample_t.cols() != 2) throw validation_error("discrepancy_bruteforce expects dim = 2");
    if (angle_grid < 1 || bias_grid < 2)
        throw validation_error("discrepancy_bruteforce needs angle_grid >= 1, bias_grid >= 2");

    const Eigen::Index n = sample_t.rows();
    Eigen::MatrixXd combined(2 * n, 2);
    combined.topRows(n) = sample_t;
    combined.bottomRows(n) = sample_i;

    // Enumerate hypotheses h(x) = sign(w.x - c); predictions stored as bytes.
    std::vector<std::vector<std::uint8_t>> preds;
    preds.reserve(static_cast<std::size_t>(angle_grid) * static_cast<std::size_t>(bias_grid));
    for (int a = 0; a < angle_grid; ++a) {
        const double theta = 2.0 * std::numbers::pi * a / angle_grid;
        const Eigen::Vector2d w(std::cos(theta), std::sin(theta));
        const Eigen::VectorXd proj = combined * w;
        const double lo = proj.minCoeff();
        const double hi = proj.maxCoeff();
        // Pad past the data range so both constant hypotheses appear.
        const double pad = (hi > lo) ? (hi - lo) / bias_grid : 1.0;
        for (int j = 0; j < bias_grid; ++j) {
            const double c = (lo - pad) + (hi + pad - (lo - pad)) * j / (bias_grid - 1);
            std::vector<std::uint8_t> p(static_cast<std::size_t>(2 * n));
            for (Eigen::Index r = 0; r < 2 * n; ++r)
                p[static_cast<std::size_t>(r)] = proj(r) - c > 0.0 ? 1 : 0;
            preds.push_back(std::move(p));
        }
    }

    double best = 0.0;
    const std::size_t H = preds.size();
    for (std::size_t h1 = 0; h1 < H; ++h1) {
        for (std::size_t h2 = h1 + 1; h2 < H; ++h2) {
            int dis_t = 0, dis_i = 0;
            const auto& a = preds[h1];
            const auto& b = preds[h2];
            for (Eigen::Index r = 0; r < n; ++r)
                dis_t += a[static_cast<std::size_t>(r)] != b[static_cast<std::size_t>(r)];
            for (Eigen::Index r = n; r < 2 * n; ++r)
                dis_i += a[static_cast<std::size_t>(r)] != b[static_cast<std::size_t>(r)];
            const double diff = std::abs(static_cast<double>(dis_t) - static_cast<double>(dis_i)) /
                                static_cast<double>(n);
            best = std::max(best, diff);
        }
    }
    return best;
}

discrepancy_matrix build_matrix(const task_collection& coll, std::uint64_t seed, int threads) {
    coll.validate();
    const int T = coll.count();
    discrepancy_matrix mat;
    mat.values = Eigen::MatrixXd::Zero(T, T);
    mat.n = coll.n;
    mat.seed = seed;

    std::vector<sample_moments> moments(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t)
        moments[static_cast<std::size_t>(t)] = moments_of(coll.tasks[static_cast<std::size_t>(t)].points);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(T) * (T - 1) / 2);
    for (int t = 0; t < T; ++t)
        for (int i = t + 1; i < T; ++i) pairs.emplace_back(t, i);

    std::mutex error_mutex;
    std::string first_error;
    const auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const auto [t, i] = pairs[idx];
            try {
                const auto& pt = coll.tasks[static_cast<std::size_t>(t)].points;
                const auto& pi = coll.tasks[static_cast<std::size_t>(i)].points;
                const double v = separation_discrepancy(pt, pi, moments[static_cast<std::size_t>(t)],
                                                        moments[static_cast<std::size_t>(i)]);
                mat.values(t, i) = v;
                mat.values(i, t) = v;
            } catch (const std::exception& e) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty())
                    first_error = "pair (" + std::to_string(t) + "," + std::to_string(i) + "): " +
                                  e.what();
                return;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(pairs.size())));
    if (workers == 1) {
        run_range(0, pairs.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (pairs.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(pairs.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw validation_error("build_matrix: " + first_error);
    mat.validate();
    return mat;
}

void save_matrix(const discrepancy_matrix& mat, const std::filesystem::path& path) {
    mat.validate();
    std::string out = "T=" + std::to_string(mat.count()) + ",n=" + std::to_string(mat.n) +
                      ",seed=" + std::to_string(mat.seed) + ",estimator=" + mat.estimator + "\n";
    for (int t = 0; t < mat.count(); ++t) {
        for (int i = 0; i < mat.count(); ++i) {
            if (i > 0) out += ',';
            out += format_double(mat.values(t, i));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

discrepancy_matrix load_matrix(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw io_error("matrix file not found: " + path.string());
    const std::string text = read_text_file(path);
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty()) throw validation_error(path.string() + ": empty matrix file");

    discrepancy_matrix mat;
    int T = -1;
    bool seen_n = false, seen_seed = false, seen_estimator = false;
    for (const auto field : split(lines[0], ',')) {
        const auto kv = split(field, '=');
        if (kv.size() != 2)
            throw validation_error(path.string() + ": malformed header field '" + std::string(field) + "'");
        const std::string key(kv[0]);
        if (key == "T") {
            T = static_cast<int>(parse_int(kv[1], path.string() + ": header T"));
        } else if (key == "n") {
            mat.n = static_cast<int>(parse_int(kv[1], path.string() + ": header n"));
            seen_n = true;
        } else if (key == "seed") {
            mat.seed = static_cast<std::uint64_t>(parse_int(kv[1], path.string() + ": header seed"));
            seen_seed = true;
        } else if (key == "estimator") {
            mat.estimator = std::string(kv[1]);
            seen_estimator = true;
        } else {
            throw validation_error(path.string() + ": unknown header field '" + key + "'");
        }
    }
    if (T < 1) throw validation_error(path.string() + ": header must declare T >= 1");
    if (!seen_n || !seen_seed || !seen_estimator)
        throw validation_error(path.string() + ": header must declare T, n, seed and estimator");
    if (static_cast<int>(lines.size()) != T + 1)
        throw validation_error(path.string() + ": expected " + std::to_string(T) + " rows, got " +
                               std::to_string(lines.size() - 1));
    mat.values.resize(T, T);
    for (int t = 0; t < T; ++t) {
        const auto fields = split(lines[static_cast<std::size_t>(t + 1)], ',');
        const std::string where = path.string() + ": row " + std::to_string(t + 1);
        if (static_cast<int>(fields.size()) != T)
            throw validation_error(where + ": expected " + std::to_string(T) + " entries");
        for (int i = 0; i < T; ++i)
            mat.values(t, i) = parse_double(fields[static_cast<std::size_t>(i)], where);
    }
    mat.validate();
    return mat;
}

} // namespace mtask
