#include "mtask/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/rng.hpp"

namespace mtask {

namespace {

/// Sufficient statistics of one training group (a task's revealed rows).
struct group_stats {
    int task = -1;
    Eigen::MatrixXd gram;  // sum of [x;1][x;1]^T
    Eigen::VectorXd rhs;   // sum of y [x;1]
    int count = 0;
};

group_stats stats_of_rows(const task_collection& coll, int task, const std::vector<int>& rows) {
    const auto& data = coll.tasks[static_cast<std::size_t>(task)];
    const Eigen::Index p = coll.dim + 1;
    group_stats g;
    g.task = task;
    g.gram = Eigen::MatrixXd::Zero(p, p);
    g.rhs = Eigen::VectorXd::Zero(p);
    g.count = static_cast<int>(rows.size());
    Eigen::VectorXd aug(p);
    for (int r : rows) {
        if (r < 0 || r >= coll.n)
            throw validation_error("labeled subset row out of range for task " + std::to_string(task));
        aug.head(coll.dim) = data.points.row(r).transpose();
        aug(p - 1) = 1.0;
        g.gram.noalias() += aug * aug.transpose();
        g.rhs += static_cast<double>(data.labels[static_cast<std::size_t>(r)]) * aug;
    }
    return g;
}

/// Closed-form weighted ridge from per-group statistics. Weights must be
/// normalized; groups with zero weight must already be filtered out.
linear_model ridge_from_stats(const std::vector<group_stats>& groups,
                              const std::vector<double>& weights, int dim, double lambda) {
    const Eigen::Index p = dim + 1;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const double scale = weights[j] / static_cast<double>(groups[j].count);
        gram.noalias() += scale * groups[j].gram;
        rhs += scale * groups[j].rhs;
    }
    Eigen::VectorXd theta;
    if (lambda == 0.0) {
        theta = solve_normal_equations(gram, rhs);
    } else {
        gram.topLeftCorner(dim, dim).diagonal().array() += lambda;
        theta = gram.ldlt().solve(rhs);
    }
    linear_model model;
    model.w = theta.head(dim);
    model.b = theta(p - 1);
    return model;
}

/// Filters to groups with positive weight and normalizes the weights.
void effective_groups(const task_collection& coll, const std::vector<labeled_subset>& subsets,
                      const Eigen::VectorXd& alpha_row, std::vector<const labeled_subset*>& used,
                      std::vector<double>& weights) {
    if (alpha_row.size() != static_cast<Eigen::Index>(subsets.size()))
        throw validation_error("alpha_row length does not match the subset list");
    double total = 0.0;
    for (Eigen::Index j = 0; j < alpha_row.size(); ++j) {
        const double a = alpha_row(j);
        if (!(a >= 0.0)) throw validation_error("alpha_row entries must be nonnegative");
        if (a > 0.0 && !subsets[static_cast<std::size_t>(j)].rows.empty()) total += a;
    }
    if (total <= 0.0)
        throw validation_error("empty effective training set: no positive-weight group has data");
    used.clear();
    weights.clear();
    for (Eigen::Index j = 0; j < alpha_row.size(); ++j) {
        const double a = alpha_row(j);
        const auto& sub = subsets[static_cast<std::size_t>(j)];
        if (a > 0.0 && !sub.rows.empty()) {
            if (!coll.tasks[static_cast<std::size_t>(sub.task)].has_labels())
                throw validation_error("task " + std::to_string(sub.task) + " has no labels");
            used.push_back(&sub);
            weights.push_back(a / total);
        }
    }
}

/// Label-stratified fold assignment for one task's subset: shuffled positives
/// dealt round-robin, negatives continuing the deal.
std::vector<int> fold_assignment(const task_collection& coll, const labeled_subset& sub, int folds,
                                 std::uint64_t cv_seed, int repeat) {
    const auto& labels = coll.tasks[static_cast<std::size_t>(sub.task)].labels;
    std::vector<int> pos, neg;
    for (std::size_t j = 0; j < sub.rows.size(); ++j) {
        if (labels[static_cast<std::size_t>(sub.rows[j])] > 0)
            pos.push_back(static_cast<int>(j));
        else
            neg.push_back(static_cast<int>(j));
    }
    rng stream = rng::derive(cv_seed, stream::cv_folds, static_cast<std::uint64_t>(repeat),
                             static_cast<std::uint64_t>(sub.task));
    stream.shuffle(pos);
    stream.shuffle(neg);
    std::vector<int> fold(sub.rows.size());
    int deal = 0;
    for (int j : pos) fold[static_cast<std::size_t>(j)] = deal++ % folds;
    for (int j : neg) fold[static_cast<std::size_t>(j)] = deal++ % folds;
    return fold;
}

double zero_one_error(const linear_model& model, const task_collection& coll, int task,
                      const std::vector<int>& rows) {
    const auto& data = coll.tasks[static_cast<std::size_t>(task)];
    int wrong = 0;
    for (int r : rows) {
        const int pred = model.predict(data.points.row(r).transpose());
        if (pred != data.labels[static_cast<std::size_t>(r)]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(rows.size());
}

/// Squared loss of theta against group stats: theta'G theta - 2 theta'r + count.
double quadratic_loss(const group_stats& g, const Eigen::VectorXd& theta) {
    return theta.dot(g.gram * theta) - 2.0 * theta.dot(g.rhs) + static_cast<double>(g.count);
}

struct multitask_state {
    Eigen::VectorXd shared;               // [w; b]
    std::vector<Eigen::VectorXd> devs;    // [v_t; b_t] per group
};

double multitask_objective(const std::vector<group_stats>& groups, const multitask_state& s,
                           double gamma, double c_reg, int dim, double total) {
    const int k = static_cast<int>(groups.size());
    double reg = s.shared.head(dim).squaredNorm();
    for (const auto& d : s.devs) reg += d.head(dim).squaredNorm() / static_cast<double>(k);
    double data = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (gamma < 1.0) data += (1.0 - gamma) / total * quadratic_loss(groups[j], s.shared);
        if (gamma > 0.0) {
            const Eigen::VectorXd combined = s.shared + s.devs[j];
            data += gamma / total * quadratic_loss(groups[j], combined);
        }
    }
    return c_reg * reg + data;
}

} // namespace

cv_config::cv_config() : lambdas(default_lambda_grid()) {}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.push_back(0.0);
    for (int e = -17; e <= 8; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

linear_model train_weighted_ridge(const task_collection& coll,
                                  const std::vector<labeled_subset>& subsets,
                                  const Eigen::VectorXd& alpha_row, double lambda) {
    if (lambda < 0.0) throw validation_error("ridge coefficient must be nonnegative");
    std::vector<const labeled_subset*> used;
    std::vector<double> weights;
    effective_groups(coll, subsets, alpha_row, used, weights);
    std::vector<group_stats> groups;
    groups.reserve(used.size());
    for (const auto* sub : used) groups.push_back(stats_of_rows(coll, sub->task, sub->rows));
    return ridge_from_stats(groups, weights, coll.dim, lambda);
}

double cv_select_lambda(const task_collection& coll, const std::vector<labeled_subset>& subsets,
                        const Eigen::VectorXd& alpha_row, const cv_config& cv,
                        double* mean_error_out) {
    if (cv.lambdas.empty()) throw validation_error("cv: empty lambda grid");
    if (cv.repeats < 1 || cv.folds < 2) throw validation_error("cv: need repeats >= 1, folds >= 2");
    std::vector<const labeled_subset*> used;
    std::vector<double> weights;
    effective_groups(coll, subsets, alpha_row, used, weights);
    for (const auto* sub : used)
        if (static_cast<int>(sub->rows.size()) < cv.folds)
            throw validation_error("cv: task " + std::to_string(sub->task) + " has fewer than " +
                                   std::to_string(cv.folds) + " labeled points");

    std::vector<double> mean_error(cv.lambdas.size(), 0.0);
    const int cells = cv.repeats * cv.folds;

    for (int r = 0; r < cv.repeats; ++r) {
        std::vector<std::vector<int>> folds_per_group;
        folds_per_group.reserve(used.size());
        for (const auto* sub : used)
            folds_per_group.push_back(fold_assignment(coll, *sub, cv.folds, cv.seed, r));

        for (int f = 0; f < cv.folds; ++f) {
            std::vector<group_stats> train_stats;
            std::vector<std::vector<int>> val_rows(used.size());
            train_stats.reserve(used.size());
            for (std::size_t j = 0; j < used.size(); ++j) {
                std::vector<int> train;
                for (std::size_t q = 0; q < used[j]->rows.size(); ++q) {
                    if (folds_per_group[j][q] == f)
                        val_rows[j].push_back(used[j]->rows[q]);
                    else
                        train.push_back(used[j]->rows[q]);
                }
                train_stats.push_back(stats_of_rows(coll, used[j]->task, train));
            }
            for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
                const linear_model model =
                    ridge_from_stats(train_stats, weights, coll.dim, cv.lambdas[l]);
                double err = 0.0;
                for (std::size_t j = 0; j < used.size(); ++j)
                    err += weights[j] * zero_one_error(model, coll, used[j]->task, val_rows[j]);
                mean_error[l] += err / static_cast<double>(cells);
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t l = 1; l < cv.lambdas.size(); ++l)
        if (mean_error[l] < mean_error[best]) best = l;
    if (mean_error_out) *mean_error_out = mean_error[best];
    return cv.lambdas[best];
}

evaluation evaluate(const std::vector<linear_model>& models, const task_collection& coll) {
    if (static_cast<int>(models.size()) != coll.count())
        throw validation_error("evaluate: one model per task required");
    evaluation ev;
    ev.per_task.resize(models.size());
    double sum = 0.0;
    for (int t = 0; t < coll.count(); ++t) {
        const auto& task = coll.tasks[static_cast<std::size_t>(t)];
        if (!task.has_test())
            throw validation_error("evaluate: task " + std::to_string(t) + " has no test set");
        const auto& model = models[static_cast<std::size_t>(t)];
        int wrong = 0;
        for (Eigen::Index r = 0; r < task.test_points.rows(); ++r) {
            const int pred = model.predict(task.test_points.row(r).transpose());
            if (pred != task.test_labels[static_cast<std::size_t>(r)]) ++wrong;
        }
        ev.per_task[static_cast<std::size_t>(t)] =
            static_cast<double>(wrong) / static_cast<double>(task.test_points.rows());
        sum += ev.per_task[static_cast<std::size_t>(t)];
    }
    ev.average = sum / static_cast<double>(coll.count());
    return ev;
}

linear_model multitask_model::predictor_for(int task) const {
    const auto it = std::lower_bound(labeled.begin(), labeled.end(), task);
    if (it != labeled.end() && *it == task) {
        const auto j = static_cast<std::size_t>(it - labeled.begin());
        linear_model combined;
        combined.w = shared.w + deviations[j].w;
        combined.b = shared.b + deviations[j].b;
        return combined;
    }
    return shared;
}

multitask_model train_multitask_baseline(const task_collection& coll,
                                         const std::vector<labeled_subset>& subsets, double gamma,
                                         double c_reg, double rel_tol, int max_sweeps) {
    if (subsets.empty()) throw validation_error("multitask baseline: empty labeled set");
    if (c_reg <= 0.0) throw validation_error("multitask baseline: C must be positive");
    if (rel_tol <= 0.0 || max_sweeps < 1)
        throw validation_error("multitask baseline: invalid solver settings");
    const double steps = gamma * 10.0;
    if (gamma < 0.0 || gamma > 1.0 || std::abs(steps - std::round(steps)) > 1e-9)
        throw validation_error("multitask baseline: gamma must lie on the 0,0.1,...,1 grid");

    // Subsets must be sorted by task for predictor lookup.
    std::vector<labeled_subset> ordered = subsets;
    std::sort(ordered.begin(), ordered.end(),
              [](const labeled_subset& a, const labeled_subset& b) { return a.task < b.task; });

    const int dim = coll.dim;
    const Eigen::Index p = dim + 1;
    const int k = static_cast<int>(ordered.size());
    std::vector<group_stats> groups;
    groups.reserve(ordered.size());
    double total = 0.0;
    for (const auto& sub : ordered) {
        if (sub.rows.empty())
            throw validation_error("multitask baseline: empty subset for task " +
                                   std::to_string(sub.task));
        groups.push_back(stats_of_rows(coll, sub.task, sub.rows));
        total += static_cast<double>(sub.rows.size());
    }

    multitask_state state;
    state.shared = Eigen::VectorXd::Zero(p);
    state.devs.assign(groups.size(), Eigen::VectorXd::Zero(p));

    Eigen::MatrixXd gram_all = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs_all = Eigen::VectorXd::Zero(p);
    for (const auto& g : groups) {
        gram_all += g.gram;
        rhs_all += g.rhs;
    }

    multitask_model out;
    out.labeled.reserve(groups.size());
    for (const auto& g : groups) out.labeled.push_back(g.task);

    double f = multitask_objective(groups, state, gamma, c_reg, dim, total);
    out.trace.push_back(f);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        multitask_state next = state;

        // Shared block: (1/N sum G_t + C P) theta = 1/N sum r_t - gamma/N sum G_t dev_t.
        Eigen::MatrixXd lhs = gram_all / total;
        lhs.topLeftCorner(dim, dim).diagonal().array() += c_reg;
        Eigen::VectorXd rhs = rhs_all / total;
        if (gamma > 0.0)
            for (std::size_t j = 0; j < groups.size(); ++j)
                rhs -= gamma / total * (groups[j].gram * next.devs[j]);
        next.shared = lhs.ldlt().solve(rhs);

        // Deviation blocks.
        if (gamma == 0.0) {
            for (auto& d : next.devs) d.setZero();
        } else {
            for (std::size_t j = 0; j < groups.size(); ++j) {
                Eigen::MatrixXd dev_lhs = gamma / total * groups[j].gram;
                dev_lhs.topLeftCorner(dim, dim).diagonal().array() += c_reg / static_cast<double>(k);
                const Eigen::VectorXd dev_rhs =
                    gamma / total * (groups[j].rhs - groups[j].gram * next.shared);
                next.devs[j] = dev_lhs.ldlt().solve(dev_rhs);
            }
        }

        const double fn = multitask_objective(groups, next, gamma, c_reg, dim, total);
        if (fn > f) break;  // numerical noise floor reached; keep the better iterate
        const double rel = (f - fn) / std::max(std::abs(f), 1e-300);
        state = std::move(next);
        f = fn;
        out.trace.push_back(f);
        if (rel < rel_tol) break;
    }

    out.shared.w = state.shared.head(dim);
    out.shared.b = state.shared(p - 1);
    out.deviations.resize(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
        out.deviations[j].w = state.devs[j].head(dim);
        out.deviations[j].b = state.devs[j](p - 1);
    }
    return out;
}

double cv_select_multitask_c(const task_collection& coll,
                             const std::vector<labeled_subset>& subsets, double gamma,
                             const cv_config& cv) {
    if (subsets.empty()) throw validation_error("multitask cv: empty labeled set");
    for (const auto& sub : subsets)
        if (static_cast<int>(sub.rows.size()) < cv.folds)
            throw validation_error("multitask cv: task " + std::to_string(sub.task) +
                                   " has fewer than " + std::to_string(cv.folds) + " labeled points");
    std::vector<double> c_grid;
    for (double l : cv.lambdas)
        if (l > 0.0) c_grid.push_back(l);
    if (c_grid.empty()) throw validation_error("multitask cv: no positive C in the grid");

    std::vector<double> mean_error(c_grid.size(), 0.0);
    const int cells = cv.repeats * cv.folds;

    for (int r = 0; r < cv.repeats; ++r) {
        std::vector<std::vector<int>> folds_per_group;
        folds_per_group.reserve(subsets.size());
        for (const auto& sub : subsets)
            folds_per_group.push_back(fold_assignment(coll, sub, cv.folds, cv.seed, r));

        for (int f = 0; f < cv.folds; ++f) {
            std::vector<labeled_subset> train_subsets(subsets.size());
            std::vector<std::vector<int>> val_rows(subsets.size());
            int val_total = 0;
            for (std::size_t j = 0; j < subsets.size(); ++j) {
                train_subsets[j].task = subsets[j].task;
                for (std::size_t q = 0; q < subsets[j].rows.size(); ++q) {
                    if (folds_per_group[j][q] == f)
                        val_rows[j].push_back(subsets[j].rows[q]);
                    else
                        train_subsets[j].rows.push_back(subsets[j].rows[q]);
                }
                val_total += static_cast<int>(val_rows[j].size());
            }
            for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                const multitask_model model =
                    train_multitask_baseline(coll, train_subsets, gamma, c_grid[ci]);
                int wrong = 0;
                for (std::size_t j = 0; j < subsets.size(); ++j) {
                    const linear_model pred = model.predictor_for(subsets[j].task);
                    const auto& data = coll.tasks[static_cast<std::size_t>(subsets[j].task)];
                    for (int row : val_rows[j])
                        if (pred.predict(data.points.row(row).transpose()) !=
                            data.labels[static_cast<std::size_t>(row)])
                            ++wrong;
                }
                mean_error[ci] +=
                    static_cast<double>(wrong) / static_cast<double>(val_total) / cells;
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t ci = 1; ci < c_grid.size(); ++ci)
        if (mean_error[ci] < mean_error[best]) best = ci;
    return c_grid[best];
}

std::vector<linear_model> train_fully_labeled_reference(const task_collection& coll,
                                                        int labels_per_task, const cv_config& cv,
                                                        std::uint64_t subset_seed) {
    if (labels_per_task < cv.folds)
        throw validation_error("reference baseline: " + std::to_string(labels_per_task) +
                               " labels per task cannot support " + std::to_string(cv.folds) +
                               "-fold cross validation");
    std::vector<int> all(static_cast<std::size_t>(coll.count()));
    for (int t = 0; t < coll.count(); ++t) all[static_cast<std::size_t>(t)] = t;
    const auto subsets = draw_subsets(coll, all, labels_per_task, subset_seed);

    std::vector<linear_model> models(static_cast<std::size_t>(coll.count()));
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    for (int t = 0; t < coll.count(); ++t) {
        const std::vector<labeled_subset> own{subsets[static_cast<std::size_t>(t)]};
        const double lambda = cv_select_lambda(coll, own, one, cv);
        models[static_cast<std::size_t>(t)] = train_weighted_ridge(coll, own, one, lambda);
    }
    return models;
}

void save_models(const std::vector<linear_model>& models, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t t = 0; t < models.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += format_double(models[t].b);
        for (Eigen::Index j = 0; j < models[t].w.size(); ++j) {
            out += ',';
            out += format_double(models[t].w(j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<linear_model> load_models(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw io_error("model file not found: " + path.string());
    const std::string text = read_text_file(path);
    std::vector<linear_model> models;
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) continue;
        ++line_no;
        const std::string where = path.string() + ": row " + std::to_string(line_no);
        const auto fields = split(line, ',');
        if (fields.size() < 3) throw validation_error(where + ": expected id, b and weights");
        const auto id = parse_int(fields[0], where);
        if (id != line_no - 1)
            throw validation_error(where + ": task ids must be 0,1,... in order");
        linear_model model;
        model.b = parse_double(fields[1], where);
        model.w.resize(static_cast<Eigen::Index>(fields.size() - 2));
        for (std::size_t j = 2; j < fields.size(); ++j)
            model.w(static_cast<Eigen::Index>(j - 2)) = parse_double(fields[j], where);
        if (!model.w.allFinite() || !std::isfinite(model.b))
            throw validation_error(where + ": non-finite model entries");
        models.push_back(std::move(model));
    }
    if (models.empty()) throw validation_error(path.string() + ": no models in file");
    for (const auto& m : models)
        if (m.w.size() != models.front().w.size())
            throw validation_error(path.string() + ": inconsistent weight dimensions");
    return models;
}

} // namespace mtask
