#include "mtask/bound.hpp"

#include <cmath>
#include <map>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/linalg.hpp"

namespace mtask {

void bound_config::validate() const {
    if (d < 1) throw validation_error("bound config: VC dimension must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw validation_error("bound config: delta must be in (0,1)");
    if (k < 1 || m < 1 || n < 1 || T < 1) throw validation_error("bound config: counts must be >= 1");
    if (m > n) throw validation_error("bound config: m must not exceed n");
    if (k > T) throw validation_error("bound config: k must not exceed T");
}

bound_constants complexity_terms(const bound_config& cfg) {
    cfg.validate();
    const double d = cfg.d, k = cfg.k, m = cfg.m, n = cfg.n, T = cfg.T;
    const double e = std::exp(1.0);
    const double log_km = std::log(e * k * m / d);
    const double log_nt = std::log(e * n * T / d);
    if (log_km <= 0.0 || log_nt <= 0.0)
        throw validation_error("complexity terms: logarithm argument <= 1 (need km >= d and nT >= d)");
    bound_constants c;
    c.a = std::sqrt(2.0 * d * log_km / m);
    c.b = std::sqrt(std::log(4.0 / cfg.delta) / (2.0 * m));
    c.c = std::sqrt(8.0 * (std::log(T) + d * log_nt) / n) + std::sqrt(2.0 / n * std::log(4.0 / cfg.delta));
    c.d = 2.0 * std::sqrt((2.0 * d * std::log(2.0 * n) + 2.0 * std::log(T) + std::log(4.0 / cfg.delta)) / n);
    return c;
}

bound_report make_bound_report(const task_collection& coll, const discrepancy_matrix& disc,
                               const weight_matrix& alpha, const std::vector<linear_model>& models,
                               const std::vector<labeled_subset>& subsets, const bound_config& cfg) {
    const int T = coll.count();
    if (disc.count() != T || alpha.task_count() != T || static_cast<int>(models.size()) != T)
        throw validation_error("bound report: inconsistent shapes");
    alpha.validate();
    const bound_constants constants = complexity_terms(cfg);

    // alpha-weighted 0/1 training error of each task's model on the revealed
    // labeled points, averaged over tasks.
    std::map<int, const labeled_subset*> by_task;
    for (const auto& sub : subsets) by_task[sub.task] = &sub;
    double train_sum = 0.0;
    double disc_sum = 0.0;
    for (int t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < alpha.labeled.size(); ++j) {
            const double a = alpha.weights(t, static_cast<Eigen::Index>(j));
            if (a == 0.0) continue;
            const int src = alpha.labeled[j];
            disc_sum += a * disc.values(t, src);
            const auto it = by_task.find(src);
            if (it == by_task.end())
                throw validation_error("bound report: no labeled subset for task " +
                                       std::to_string(src));
            const auto& data = coll.tasks[static_cast<std::size_t>(src)];
            if (!data.has_labels())
                throw validation_error("bound report: task " + std::to_string(src) + " has no labels");
            int wrong = 0;
            for (int r : it->second->rows) {
                const int pred = models[static_cast<std::size_t>(t)].predict(data.points.row(r).transpose());
                if (pred != data.labels[static_cast<std::size_t>(r)]) ++wrong;
            }
            train_sum += a * static_cast<double>(wrong) / static_cast<double>(it->second->rows.size());
        }
    }

    bound_report report;
    report.a_term = constants.a;
    report.b_term = constants.b;
    report.c_term = constants.c;
    report.d_term = constants.d;
    report.norm21 = mixed_norm_21(alpha);
    report.norm12 = mixed_norm_12(alpha);
    report.weighted_disc = disc_sum / static_cast<double>(T);
    report.weighted_train_error = train_sum / static_cast<double>(T);
    report.total_computable = report.weighted_train_error + report.weighted_disc +
                              report.a_term / T * report.norm21 + report.b_term / T * report.norm12 +
                              report.c_term + report.d_term;
    return report;
}

double lambda_diagnostic(const task_collection& coll, int t, int i) {
    if (t < 0 || t >= coll.count() || i < 0 || i >= coll.count())
        throw validation_error("lambda diagnostic: task index out of range");
    const auto& task_t = coll.tasks[static_cast<std::size_t>(t)];
    const auto& task_i = coll.tasks[static_cast<std::size_t>(i)];
    if (!task_t.has_labels() || !task_i.has_labels())
        throw validation_error("lambda diagnostic: both tasks need ground-truth labels");
    if (!task_t.has_test() || !task_i.has_test())
        throw validation_error("lambda diagnostic: both tasks need test sets");

    const int dim = coll.dim;
    const Eigen::Index p = dim + 1;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd aug(p);
    for (const auto* task : {&task_t, &task_i}) {
        for (Eigen::Index r = 0; r < task->points.rows(); ++r) {
            aug.head(dim) = task->points.row(r).transpose();
            aug(p - 1) = 1.0;
            gram.noalias() += aug * aug.transpose();
            rhs += static_cast<double>(task->labels[static_cast<std::size_t>(r)]) * aug;
        }
    }
    const Eigen::VectorXd theta = solve_normal_equations(gram, rhs);
    linear_model model;
    model.w = theta.head(dim);
    model.b = theta(p - 1);

    double total = 0.0;
    for (const auto* task : {&task_t, &task_i}) {
        int wrong = 0;
        for (Eigen::Index r = 0; r < task->test_points.rows(); ++r)
            if (model.predict(task->test_points.row(r).transpose()) !=
                task->test_labels[static_cast<std::size_t>(r)])
                ++wrong;
        total += static_cast<double>(wrong) / static_cast<double>(task->test_points.rows());
    }
    return total;
}

namespace {
constexpr const char* kReportKeys[] = {"A", "B", "C", "D", "norm21", "norm12", "weighted_disc",
                                       "weighted_train_error", "total_computable"};
}

void save_report(const bound_report& report, const std::filesystem::path& path) {
    const double values[] = {report.a_term,       report.b_term,        report.c_term,
                             report.d_term,       report.norm21,        report.norm12,
                             report.weighted_disc, report.weighted_train_error,
                             report.total_computable};
    std::string out;
    for (std::size_t j = 0; j < std::size(values); ++j)
        out += std::string(kReportKeys[j]) + "=" + format_double(values[j]) + "\n";
    if (report.lambda_estimate)
        out += "lambda_estimate=" + format_double(*report.lambda_estimate) + "\n";
    write_text_file(path, out);
}

bound_report load_report(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw io_error("report file not found: " + path.string());
    const std::string text = read_text_file(path);
    std::map<std::string, double> kv;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw validation_error(path.string() + ": malformed line '" + std::string(line) + "'");
        kv[std::string(line.substr(0, eq))] =
            parse_double(line.substr(eq + 1), path.string());
    }
    bound_report report;
    const auto require = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw validation_error(path.string() + ": missing key '" + std::string(key) + "'");
        return it->second;
    };
    report.a_term = require("A");
    report.b_term = require("B");
    report.c_term = require("C");
    report.d_term = require("D");
    report.norm21 = require("norm21");
    report.norm12 = require("norm12");
    report.weighted_disc = require("weighted_disc");
    report.weighted_train_error = require("weighted_train_error");
    report.total_computable = require("total_computable");
    if (kv.count("lambda_estimate")) report.lambda_estimate = kv["lambda_estimate"];
    return report;
}

} // namespace mtask
