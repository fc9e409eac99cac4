#include "mtask/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"

namespace mtask {

namespace {

std::vector<int> canonical_support(std::vector<int> I, int T, const char* who) {
    if (I.empty()) throw validation_error(std::string(who) + ": labeled set is empty");
    std::sort(I.begin(), I.end());
    I.erase(std::unique(I.begin(), I.end()), I.end());
    if (I.front() < 0 || I.back() >= T)
        throw validation_error(std::string(who) + ": labeled index out of range");
    return I;
}

/// Cached T x k view of the discrepancy columns for a support.
Eigen::MatrixXd submatrix(const discrepancy_matrix& disc, const std::vector<int>& I) {
    Eigen::MatrixXd sub(disc.count(), static_cast<Eigen::Index>(I.size()));
    for (std::size_t j = 0; j < I.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = disc.values.col(I[j]);
    return sub;
}

double objective_of_block(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& disc_sub,
                          double a_coeff, double b_coeff) {
    const double T = static_cast<double>(weights.rows());
    const double linear = weights.cwiseProduct(disc_sub).sum() / T;
    double n21 = 0.0;
    for (Eigen::Index t = 0; t < weights.rows(); ++t) n21 += weights.row(t).norm();
    const double n12 = weights.colwise().sum().norm();
    return linear + a_coeff / T * n21 + b_coeff / T * n12;
}

Eigen::MatrixXd block_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& disc_sub,
                               const objective_config& cfg) {
    const double T = static_cast<double>(weights.rows());
    Eigen::MatrixXd grad = disc_sub / T;
    for (Eigen::Index t = 0; t < weights.rows(); ++t) {
        const double rn = weights.row(t).norm();
        grad.row(t) += (cfg.a_coeff / T) * weights.row(t) / (rn + cfg.smoothing);
    }
    const Eigen::RowVectorXd colsum = weights.colwise().sum();
    const double cn = colsum.norm();
    grad.rowwise() += (cfg.b_coeff / T) * colsum / (cn + cfg.smoothing);
    return grad;
}

void project_rows_in_place(Eigen::MatrixXd& weights) {
    for (Eigen::Index t = 0; t < weights.rows(); ++t)
        weights.row(t) = project_row_to_simplex(weights.row(t).transpose()).transpose();
}

/// Exact minimizer of the linear part restricted to columns I: one-hot rows
/// on the nearest column, ties to the lowest task index, labeled tasks on
/// themselves.
weight_matrix nearest_vertex(const discrepancy_matrix& disc, const std::vector<int>& I) {
    const int T = disc.count();
    weight_matrix alpha;
    alpha.labeled = I;
    alpha.weights = Eigen::MatrixXd::Zero(T, static_cast<Eigen::Index>(I.size()));
    for (int t = 0; t < T; ++t) {
        std::size_t best = 0;
        const auto self = std::lower_bound(I.begin(), I.end(), t);
        if (self != I.end() && *self == t) {
            best = static_cast<std::size_t>(self - I.begin());
        } else {
            for (std::size_t j = 1; j < I.size(); ++j)
                if (disc.values(t, I[j]) < disc.values(t, I[best])) best = j;
        }
        alpha.weights(t, static_cast<Eigen::Index>(best)) = 1.0;
    }
    return alpha;
}

} // namespace

double weight_matrix::alpha(int t, int i) const {
    const auto it = std::lower_bound(labeled.begin(), labeled.end(), i);
    if (it == labeled.end() || *it != i) return 0.0;
    return weights(t, static_cast<Eigen::Index>(it - labeled.begin()));
}

void weight_matrix::validate(double tol) const {
    if (labeled.empty()) throw validation_error("weight matrix: empty labeled set");
    if (!std::is_sorted(labeled.begin(), labeled.end()) ||
        std::adjacent_find(labeled.begin(), labeled.end()) != labeled.end())
        throw validation_error("weight matrix: labeled set must be sorted and distinct");
    if (weights.cols() != static_cast<Eigen::Index>(labeled.size()))
        throw validation_error("weight matrix: column count does not match labeled set");
    if (labeled.front() < 0 || labeled.back() >= task_count())
        throw validation_error("weight matrix: labeled index out of range");
    for (Eigen::Index t = 0; t < weights.rows(); ++t) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < weights.cols(); ++j) {
            const double v = weights(t, j);
            if (!(v >= 0.0))
                throw validation_error("weight matrix: negative entry in row " + std::to_string(t));
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw validation_error("weight matrix: row " + std::to_string(t) + " sums to " +
                                   format_double(sum));
    }
}

weight_matrix weight_matrix::uniform(int T, std::vector<int> I) {
    weight_matrix alpha;
    alpha.labeled = canonical_support(std::move(I), T, "weight_matrix::uniform");
    const auto k = static_cast<Eigen::Index>(alpha.labeled.size());
    alpha.weights = Eigen::MatrixXd::Constant(T, k, 1.0 / static_cast<double>(k));
    return alpha;
}

double mixed_norm_21(const weight_matrix& alpha) {
    double sum = 0.0;
    for (Eigen::Index t = 0; t < alpha.weights.rows(); ++t) sum += alpha.weights.row(t).norm();
    return sum;
}

double mixed_norm_12(const weight_matrix& alpha) {
    return alpha.weights.colwise().sum().norm();
}

double objective_value(const weight_matrix& alpha, const discrepancy_matrix& disc,
                       const objective_config& cfg) {
    if (alpha.task_count() != disc.count())
        throw validation_error("objective_value: weight matrix and discrepancy matrix disagree on T");
    return objective_of_block(alpha.weights, submatrix(disc, alpha.labeled), cfg.a_coeff,
                              cfg.b_coeff);
}

Eigen::VectorXd project_row_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index k = v.size();
    std::vector<double> sorted(v.data(), v.data() + k);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        cumsum += sorted[static_cast<std::size_t>(j)];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0)
            tau = candidate;
        else
            break;
    }
    return (v.array() - tau).max(0.0);
}

optimize_result optimize_weights(const discrepancy_matrix& disc, const std::vector<int>& I,
                                 const objective_config& cfg, const weight_matrix* init) {
    const int T = disc.count();
    const auto support = canonical_support(I, T, "optimize_weights");
    if (cfg.tolerance <= 0.0 || cfg.a_coeff < 0.0 || cfg.b_coeff < 0.0)
        throw validation_error("optimize_weights: invalid objective config");

    const Eigen::MatrixXd disc_sub = submatrix(disc, support);

    weight_matrix alpha = init ? *init : weight_matrix::uniform(T, support);
    if (init) {
        if (alpha.labeled != support)
            throw validation_error("optimize_weights: init support does not match I");
        alpha.validate();
    }

    optimize_result res;
    double f = objective_of_block(alpha.weights, disc_sub, cfg.a_coeff, cfg.b_coeff);
    res.trace.push_back(f);

    if (cfg.a_coeff == 0.0 && cfg.b_coeff == 0.0) {
        // Linear objective: the minimum sits at a vertex of each row simplex.
        weight_matrix vertex = nearest_vertex(disc, support);
        const double fv = objective_of_block(vertex.weights, disc_sub, 0.0, 0.0);
        if (fv <= f) {
            alpha = std::move(vertex);
            f = fv;
        }
        res.trace.push_back(f);
        res.alpha = std::move(alpha);
        return res;
    }

    constexpr double armijo = 1e-4;
    constexpr double min_step = 1e-18;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const Eigen::MatrixXd grad = block_gradient(alpha.weights, disc_sub, cfg);
        double step = 1.0;
        bool accepted = false;
        Eigen::MatrixXd candidate;
        double fc = f;
        while (step > min_step) {
            candidate = alpha.weights - step * grad;
            project_rows_in_place(candidate);
            fc = objective_of_block(candidate, disc_sub, cfg.a_coeff, cfg.b_coeff);
            const double dist2 = (candidate - alpha.weights).squaredNorm();
            if (dist2 > 0.0 && fc <= f - armijo / step * dist2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double rel = (f - fc) / std::abs(f);
        alpha.weights = std::move(candidate);
        f = fc;
        res.trace.push_back(f);
        if (rel < cfg.tolerance) break;
    }
    res.alpha = std::move(alpha);
    return res;
}

std::vector<int> kmeanspp_seed(const discrepancy_matrix& disc, int k, rng& stream) {
    const int T = disc.count();
    if (k < 1 || k > T)
        throw validation_error("kmeanspp_seed: need 1 <= k <= T, got k=" + std::to_string(k));
    std::vector<bool> chosen(static_cast<std::size_t>(T), false);
    std::vector<int> picks;
    picks.reserve(static_cast<std::size_t>(k));

    const int first = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(T)));
    picks.push_back(first);
    chosen[static_cast<std::size_t>(first)] = true;
    Eigen::VectorXd nearest = disc.values.col(first);

    while (static_cast<int>(picks.size()) < k) {
        double total = 0.0;
        for (int t = 0; t < T; ++t)
            if (!chosen[static_cast<std::size_t>(t)]) total += nearest(t) * nearest(t);
        int pick = -1;
        if (total <= 0.0) {
            for (int t = 0; t < T; ++t)
                if (!chosen[static_cast<std::size_t>(t)]) { pick = t; break; }
        } else {
            const double u = stream.next_double() * total;
            double cum = 0.0;
            for (int t = 0; t < T; ++t) {
                if (chosen[static_cast<std::size_t>(t)]) continue;
                cum += nearest(t) * nearest(t);
                if (cum > u) { pick = t; break; }
            }
            if (pick < 0) {  // u landed on the accumulated total
                for (int t = T - 1; t >= 0; --t)
                    if (!chosen[static_cast<std::size_t>(t)]) { pick = t; break; }
            }
        }
        picks.push_back(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
        nearest = nearest.cwiseMin(disc.values.col(pick));
    }
    std::sort(picks.begin(), picks.end());
    return picks;
}

namespace {

/// Columns ranked by how strongly the rows are pulled towards them: the l2
/// norm over rows of the positive part of (current linearized row value -
/// column gradient entry). Zero for columns no row wants. Used to shortlist
/// swap candidates; ties break to the lowest index.
std::vector<int> attraction_ranked_columns(const discrepancy_matrix& disc,
                                           const std::vector<int>& support,
                                           const weight_matrix& alpha,
                                           const objective_config& cfg) {
    const int T = disc.count();
    const double Td = static_cast<double>(T);
    const Eigen::MatrixXd grad_sup =
        block_gradient(alpha.weights, submatrix(disc, support), cfg);
    Eigen::VectorXd row_value(T);
    for (int t = 0; t < T; ++t) row_value(t) = alpha.weights.row(t).dot(grad_sup.row(t));

    std::vector<std::pair<double, int>> scored;
    scored.reserve(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i) {
        if (std::binary_search(support.begin(), support.end(), i)) continue;
        double sq = 0.0;
        for (int t = 0; t < T; ++t) {
            const double pull = row_value(t) - disc.values(t, i) / Td;
            if (pull > 0.0) sq += pull * pull;
        }
        scored.emplace_back(std::sqrt(sq), i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    out.reserve(scored.size());
    for (const auto& [s, i] : scored) out.push_back(i);
    return out;
}

} // namespace

selection_outcome select_active_grasp(const discrepancy_matrix& disc, int k,
                                      const objective_config& cfg, std::uint64_t seed) {
    const int T = disc.count();
    if (k < 1 || k > T)
        throw validation_error("select_active_grasp: need 1 <= k <= T, got k=" + std::to_string(k) +
                               ", T=" + std::to_string(T));
    rng stream = rng::derive(seed, stream::seeding, 1);
    std::vector<int> support = kmeanspp_seed(disc, k, stream);
    optimize_result cur = optimize_weights(disc, support, cfg);

    selection_outcome best{support, cur.alpha, cur.trace.back()};

    // Support pursuit: widen by the top gradient columns, optimize, prune by
    // column mass, re-optimize.
    for (int outer = 0; outer < cfg.max_outer_iterations; ++outer) {
        const double Td = static_cast<double>(T);
        Eigen::VectorXd row_norms(T);
        for (int t = 0; t < T; ++t) row_norms(t) = cur.alpha.weights.row(t).norm();
        const Eigen::RowVectorXd colsum = cur.alpha.weights.colwise().sum();
        const double cn = colsum.norm();

        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(static_cast<std::size_t>(T));
        for (int i = 0; i < T; ++i) {
            Eigen::VectorXd g = disc.values.col(i) / Td;
            const auto it = std::lower_bound(support.begin(), support.end(), i);
            if (it != support.end() && *it == i) {
                const auto j = static_cast<Eigen::Index>(it - support.begin());
                g += (cfg.a_coeff / Td) *
                     (cur.alpha.weights.col(j).array() / (row_norms.array() + cfg.smoothing)).matrix();
                g.array() += (cfg.b_coeff / Td) * colsum(j) / (cn + cfg.smoothing);
            }
            ranked.emplace_back(g.norm(), i);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        std::vector<int> merged = support;
        for (int j = 0; j < std::min(2 * k, T); ++j)
            merged.push_back(ranked[static_cast<std::size_t>(j)].second);
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

        const optimize_result widened = optimize_weights(disc, merged, cfg);

        // Prune to the k heaviest columns, ties to the lowest task index.
        std::vector<std::pair<double, int>> mass;
        mass.reserve(merged.size());
        for (std::size_t j = 0; j < merged.size(); ++j)
            mass.emplace_back(widened.alpha.weights.col(static_cast<Eigen::Index>(j)).sum(), merged[j]);
        std::sort(mass.begin(), mass.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<int> pruned;
        pruned.reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) pruned.push_back(mass[static_cast<std::size_t>(j)].second);
        std::sort(pruned.begin(), pruned.end());

        optimize_result next = optimize_weights(disc, pruned, cfg);
        const double f = next.trace.back();
        if (f < best.objective) best = {pruned, next.alpha, f};

        const bool stable = pruned == support;
        support = std::move(pruned);
        cur = std::move(next);
        if (stable) break;
    }

    // Swap polish: the mass pruning above cannot separate nearly collinear
    // columns (for tight task clusters it keeps an arbitrary cluster member),
    // so finish with single-column swaps scored by their restricted optima.
    // Candidates come from the attraction ranking; small problems consider
    // every column.
    if (k < T) {
        const int candidate_count = T <= 64 ? T - k : std::min(T - k, 4);
        for (int round = 0; round < cfg.max_outer_iterations; ++round) {
            const auto ranked =
                attraction_ranked_columns(disc, best.labeled, best.alpha, cfg);
            selection_outcome improved = best;
            for (std::size_t ci = 0; ci < best.labeled.size(); ++ci) {
                for (int cj = 0; cj < std::min<int>(candidate_count, static_cast<int>(ranked.size()));
                     ++cj) {
                    std::vector<int> candidate = best.labeled;
                    candidate[ci] = ranked[static_cast<std::size_t>(cj)];
                    std::sort(candidate.begin(), candidate.end());
                    const optimize_result res = optimize_weights(disc, candidate, cfg);
                    if (res.trace.back() < improved.objective)
                        improved = {candidate, res.alpha, res.trace.back()};
                }
            }
            if (improved.objective >= best.objective) break;
            best = std::move(improved);
        }
    }
    return best;
}

kmedoids_outcome select_active_kmedoids(const discrepancy_matrix& disc, int k, std::uint64_t seed) {
    const int T = disc.count();
    if (k < 1 || k > T)
        throw validation_error("select_active_kmedoids: need 1 <= k <= T, got k=" +
                               std::to_string(k) + ", T=" + std::to_string(T));
    rng stream = rng::derive(seed, stream::seeding, 2);
    std::vector<int> medoids = kmeanspp_seed(disc, k, stream);

    const auto assign_to = [&](const std::vector<int>& meds) {
        std::vector<int> assignment(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            const auto self = std::lower_bound(meds.begin(), meds.end(), t);
            if (self != meds.end() && *self == t) {
                assignment[static_cast<std::size_t>(t)] = t;
                continue;
            }
            int best = meds[0];
            for (int c : meds)
                if (disc.values(t, c) < disc.values(t, best)) best = c;
            assignment[static_cast<std::size_t>(t)] = best;
        }
        return assignment;
    };
    const auto cost_of = [&](const std::vector<int>& meds) {
        double sum = 0.0;
        for (int t = 0; t < T; ++t) {
            double m = disc.values(t, meds[0]);
            for (int c : meds) m = std::min(m, disc.values(t, c));
            sum += m;
        }
        return sum / static_cast<double>(T);
    };

    double cost = cost_of(medoids);
    const double seed_cost = cost;
    const int max_rounds = 100 + 10 * T;
    for (int round = 0; round < max_rounds; ++round) {
        // Within-cluster medoid updates.
        const std::vector<int> assignment = assign_to(medoids);
        std::vector<int> updated;
        updated.reserve(medoids.size());
        for (int c : medoids) {
            std::vector<int> members;
            for (int t = 0; t < T; ++t)
                if (assignment[static_cast<std::size_t>(t)] == c) members.push_back(t);
            int best = c;
            double best_sum = std::numeric_limits<double>::infinity();
            for (int j : members) {
                double s = 0.0;
                for (int t : members) s += disc.values(t, j);
                if (s < best_sum) {
                    best_sum = s;
                    best = j;
                }
            }
            updated.push_back(best);
        }
        std::sort(updated.begin(), updated.end());
        const double updated_cost = cost_of(updated);
        if (updated != medoids && updated_cost < cost) {
            medoids = std::move(updated);
            cost = updated_cost;
            continue;
        }

        // Cluster updates stalled; take the best improving global swap of a
        // medoid against a non-medoid, if any, and resume.
        std::vector<int> best_swap;
        double best_swap_cost = cost;
        for (std::size_t ci = 0; ci < medoids.size(); ++ci) {
            for (int j = 0; j < T; ++j) {
                if (std::binary_search(medoids.begin(), medoids.end(), j)) continue;
                std::vector<int> candidate = medoids;
                candidate[ci] = j;
                std::sort(candidate.begin(), candidate.end());
                const double candidate_cost = cost_of(candidate);
                if (candidate_cost < best_swap_cost) {
                    best_swap_cost = candidate_cost;
                    best_swap = std::move(candidate);
                }
            }
        }
        if (best_swap.empty()) break;
        medoids = std::move(best_swap);
        cost = best_swap_cost;
    }

    kmedoids_outcome out;
    out.assignment = assign_to(medoids);
    out.medoids = std::move(medoids);
    out.objective = cost;
    out.seed_objective = seed_cost;
    return out;
}

weight_matrix assign_nearest_source(const discrepancy_matrix& disc, const std::vector<int>& I) {
    return nearest_vertex(disc, canonical_support(I, disc.count(), "assign_nearest_source"));
}

void save_selection(const selection_record& rec, const std::filesystem::path& json_path,
                    const std::string& alpha_filename) {
    rec.alpha.validate();
    if (static_cast<int>(rec.alpha.labeled.size()) != rec.k)
        throw validation_error("save_selection: |I| does not match k");
    nlohmann::ordered_json doc;
    doc["method"] = rec.method;
    doc["k"] = rec.k;
    doc["seed"] = rec.seed;
    doc["I"] = rec.alpha.labeled;
    doc["alpha_file"] = alpha_filename;
    write_text_file(json_path, doc.dump(2) + "\n");

    std::string out;
    for (Eigen::Index t = 0; t < rec.alpha.weights.rows(); ++t) {
        for (std::size_t j = 0; j < rec.alpha.labeled.size(); ++j) {
            if (j > 0) out += ',';
            out += '(';
            out += std::to_string(rec.alpha.labeled[j]);
            out += ',';
            out += format_double(rec.alpha.weights(t, static_cast<Eigen::Index>(j)));
            out += ')';
        }
        out += '\n';
    }
    write_text_file(json_path.parent_path() / alpha_filename, out);
}

selection_record load_selection(const std::filesystem::path& json_path) {
    if (!std::filesystem::exists(json_path))
        throw io_error("selection file not found: " + json_path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(json_path.string() + ": invalid JSON: " + e.what());
    }
    selection_record rec;
    std::filesystem::path alpha_path;
    try {
        rec.method = doc.at("method").get<std::string>();
        rec.k = doc.at("k").get<int>();
        rec.seed = doc.at("seed").get<std::uint64_t>();
        rec.alpha.labeled = doc.at("I").get<std::vector<int>>();
        alpha_path = json_path.parent_path() / doc.at("alpha_file").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(json_path.string() + ": " + e.what());
    }
    if (static_cast<int>(rec.alpha.labeled.size()) != rec.k)
        throw validation_error(json_path.string() + ": |I| does not match k");
    if (!std::filesystem::exists(alpha_path))
        throw io_error("alpha file not found: " + alpha_path.string());

    const std::string text = read_text_file(alpha_path);
    std::vector<Eigen::RowVectorXd> rows;
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
        const std::string where = alpha_path.string() + ": row " + std::to_string(line_no);

        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(rec.alpha.labeled.size()));
        std::size_t pos = 0;
        std::size_t pair_idx = 0;
        while (pos < line.size()) {
            if (line[pos] != '(') throw validation_error(where + ": expected '('");
            const std::size_t close = line.find(')', pos);
            if (close == std::string_view::npos) throw validation_error(where + ": missing ')'");
            const auto inner = line.substr(pos + 1, close - pos - 1);
            const auto comma = inner.find(',');
            if (comma == std::string_view::npos) throw validation_error(where + ": malformed pair");
            const int col = static_cast<int>(parse_int(inner.substr(0, comma), where));
            const double val = parse_double(inner.substr(comma + 1), where);
            if (pair_idx >= rec.alpha.labeled.size() || rec.alpha.labeled[pair_idx] != col)
                throw validation_error(where + ": column " + std::to_string(col) +
                                       " does not match the labeled set");
            row(static_cast<Eigen::Index>(pair_idx)) = val;
            ++pair_idx;
            pos = close + 1;
            if (pos < line.size()) {
                if (line[pos] != ',') throw validation_error(where + ": expected ',' between pairs");
                ++pos;
            }
        }
        if (pair_idx != rec.alpha.labeled.size())
            throw validation_error(where + ": expected " + std::to_string(rec.alpha.labeled.size()) +
                                   " pairs");
        rows.push_back(std::move(row));
    }
    rec.alpha.weights.resize(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(rec.alpha.labeled.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        rec.alpha.weights.row(static_cast<Eigen::Index>(t)) = rows[t];
    rec.alpha.validate();
    return rec;
}

} // namespace mtask
