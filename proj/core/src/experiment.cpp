#include "mtask/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/rng.hpp"

namespace mtask {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

/// Trains one model per task from (I, alpha) with per-task CV over lambda.
/// One-hot rows share a per-source model cache; the cached computation is
/// identical to the uncached one.
std::vector<linear_model> train_per_task(const task_collection& coll,
                                         const std::vector<labeled_subset>& subsets,
                                         const weight_matrix& alpha, const cv_config& cv) {
    const int T = coll.count();
    std::vector<linear_model> models(static_cast<std::size_t>(T));
    std::map<int, linear_model> one_hot_cache;
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd row = alpha.row(t);
        int hot = -1;
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            if (row(j) == 1.0 && hot < 0)
                hot = static_cast<int>(j);
            else if (row(j) != 0.0 && row(j) != 1.0)
                hot = -2;
        }
        if (hot >= 0) {
            const int source = alpha.labeled[static_cast<std::size_t>(hot)];
            const auto it = one_hot_cache.find(source);
            if (it != one_hot_cache.end()) {
                models[static_cast<std::size_t>(t)] = it->second;
                continue;
            }
            const double lambda = cv_select_lambda(coll, subsets, row, cv);
            models[static_cast<std::size_t>(t)] = train_weighted_ridge(coll, subsets, row, lambda);
            one_hot_cache.emplace(source, models[static_cast<std::size_t>(t)]);
        } else {
            const double lambda = cv_select_lambda(coll, subsets, row, cv);
            models[static_cast<std::size_t>(t)] = train_weighted_ridge(coll, subsets, row, lambda);
        }
    }
    return models;
}

objective_config objective_from_bound(const bound_config& bcfg) {
    const bound_constants c = complexity_terms(bcfg);
    objective_config ocfg;
    ocfg.a_coeff = c.a;
    ocfg.b_coeff = c.b;
    return ocfg;
}

} // namespace

std::vector<int> passive_labeled_set(int T, int k, std::uint64_t seed) {
    if (k < 1 || k > T)
        throw validation_error("passive labeled set: need 1 <= k <= T, got k=" + std::to_string(k) +
                               ", T=" + std::to_string(T));
    rng stream = rng::derive(seed, stream::passive_set, static_cast<std::uint64_t>(k));
    std::vector<int> I = stream.sample_without_replacement(T, k);
    std::sort(I.begin(), I.end());
    return I;
}

void experiment_config::validate() const {
    if (data != "synthetic" && data != "manifest")
        throw validation_error("experiment config: data must be 'synthetic' or 'manifest'");
    if (data == "synthetic") {
        if (T < 1 || n < 1 || m < 1 || n_test < 1)
            throw validation_error("experiment config: synthetic data needs T, n, m, n_test >= 1");
        if (m > n) throw validation_error("experiment config: m must not exceed n");
    } else if (manifest.empty()) {
        throw validation_error("experiment config: manifest path required for data=manifest");
    }
    if (methods.empty()) throw validation_error("experiment config: no methods listed");
    for (const auto& m_ : methods)
        if (std::find(known_methods().begin(), known_methods().end(), m_) == known_methods().end())
            throw validation_error("experiment config: unknown method '" + m_ + "'");
    if (ks.empty()) throw validation_error("experiment config: no k values listed");
    for (int k : ks)
        if (k < 1) throw validation_error("experiment config: k values must be >= 1");
    if (seeds.empty()) throw validation_error("experiment config: at least one seed required");
    if (!(delta > 0.0 && delta < 1.0))
        throw validation_error("experiment config: delta must be in (0,1)");
    if (output.empty()) throw validation_error("experiment config: output directory required");
    if (threads < 1) throw validation_error("experiment config: threads must be >= 1");
}

experiment_config parse_experiment_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw io_error("config not found: " + path.string());
    const std::string text = read_text_file(path);
    experiment_config cfg;
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        ++line_no;
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.empty() || line.front() == '#') continue;
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw validation_error(where + ": expected key=value");
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
            return s;
        };
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key == "data")
            cfg.data = std::string(value);
        else if (key == "manifest")
            cfg.manifest = std::string(value);
        else if (key == "T")
            cfg.T = static_cast<int>(parse_int(value, where));
        else if (key == "n")
            cfg.n = static_cast<int>(parse_int(value, where));
        else if (key == "m")
            cfg.m = static_cast<int>(parse_int(value, where));
        else if (key == "n_test")
            cfg.n_test = static_cast<int>(parse_int(value, where));
        else if (key == "method")
            cfg.methods.push_back(std::string(value));
        else if (key == "k")
            cfg.ks.push_back(static_cast<int>(parse_int(value, where)));
        else if (key == "seed")
            cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int(value, where)));
        else if (key == "delta")
            cfg.delta = parse_double(value, where);
        else if (key == "output")
            cfg.output = std::string(value);
        else if (key == "threads")
            cfg.threads = static_cast<int>(parse_int(value, where));
        else
            throw validation_error(where + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

experiment_cell run_experiment_cell(const std::string& method, int k, std::uint64_t seed,
                                    const task_collection& coll, const discrepancy_matrix& disc,
                                    const std::vector<int>& passive_I, double delta) {
    experiment_cell cell;
    cell.method = method;
    cell.k = k;
    cell.seed = seed;
    cell.bound_total = kNaN;
    const auto t0 = std::chrono::steady_clock::now();

    const int T = coll.count();
    if (k > T)
        throw validation_error("k=" + std::to_string(k) + " exceeds the task count T=" +
                               std::to_string(T));
    bound_config bcfg;
    bcfg.d = hypothesis_spec{coll.dim}.vc_dimension();
    bcfg.k = k;
    bcfg.m = coll.m;
    bcfg.n = coll.n;
    bcfg.T = T;
    bcfg.delta = delta;

    cv_config cv;
    cv.seed = seed;

    evaluation ev;
    if (method == "da" || method == "active-da" || method == "da-ss" || method == "active-da-ss") {
        weight_matrix alpha;
        if (method == "da") {
            alpha = optimize_weights(disc, passive_I, objective_from_bound(bcfg)).alpha;
        } else if (method == "active-da") {
            alpha = select_active_grasp(disc, k, objective_from_bound(bcfg), seed).alpha;
        } else if (method == "da-ss") {
            alpha = assign_nearest_source(disc, passive_I);
        } else {
            const kmedoids_outcome med = select_active_kmedoids(disc, k, seed);
            alpha = assign_nearest_source(disc, med.medoids);
        }
        const auto subsets = draw_labeled_subsets(coll, alpha.labeled, seed);
        const auto models = train_per_task(coll, subsets, alpha, cv);
        ev = evaluate(models, coll);
        cell.bound_total = make_bound_report(coll, disc, alpha, models, subsets, bcfg).total_computable;
    } else if (method == "multitask") {
        const auto subsets = draw_labeled_subsets(coll, passive_I, seed);
        double best_err = std::numeric_limits<double>::infinity();
        for (int g = 0; g <= 10; ++g) {
            const double gamma = static_cast<double>(g) / 10.0;
            const double c_reg = cv_select_multitask_c(coll, subsets, gamma, cv);
            const multitask_model model = train_multitask_baseline(coll, subsets, gamma, c_reg);
            std::vector<linear_model> models;
            models.reserve(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) models.push_back(model.predictor_for(t));
            const evaluation cand = evaluate(models, coll);
            if (cand.average < best_err) {
                best_err = cand.average;
                ev = cand;
            }
        }
    } else if (method == "fully-labeled") {
        ev = evaluate(train_fully_labeled_reference(coll, coll.m, cv, seed), coll);
    } else if (method == "partial-labeled") {
        const int labels = static_cast<int>(
            (static_cast<long long>(coll.m) * static_cast<long long>(k)) / T);
        ev = evaluate(train_fully_labeled_reference(coll, labels, cv, seed), coll);
    } else {
        throw validation_error("unknown method '" + method + "'");
    }

    cell.mean_test_error = ev.average;
    cell.std_test_error = sample_std(ev.per_task, ev.average);
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

std::vector<experiment_cell> run_experiment(const experiment_config& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output);

    std::map<std::tuple<std::string, int, std::uint64_t>, experiment_cell> cells;
    std::string failures;

    for (const std::uint64_t seed : cfg.seeds) {
        task_collection coll;
        if (cfg.data == "synthetic")
            coll = generate_synthetic(cfg.T, cfg.n, cfg.m, cfg.n_test, seed);
        else
            coll = load_collection(cfg.manifest);
        for (const int k : cfg.ks)
            if (k > coll.count())
                throw validation_error("experiment config: k=" + std::to_string(k) +
                                       " exceeds the task count T=" + std::to_string(coll.count()));

        const auto disc_path = cfg.output / ("disc_seed" + std::to_string(seed) + ".csv");
        discrepancy_matrix disc;
        if (std::filesystem::exists(disc_path)) {
            disc = load_matrix(disc_path);
            if (disc.count() != coll.count() || disc.n != coll.n)
                throw validation_error(disc_path.string() + ": cached matrix does not match the data");
        } else {
            disc = build_matrix(coll, seed, cfg.threads);
            save_matrix(disc, disc_path);
        }

        for (const int k : cfg.ks) {
            const std::vector<int> passive_I = passive_labeled_set(coll.count(), k, seed);
            for (const auto& method : cfg.methods) {
                experiment_cell cell;
                try {
                    cell = run_experiment_cell(method, k, seed, coll, disc, passive_I, cfg.delta);
                } catch (const std::exception& e) {
                    cell.method = method;
                    cell.k = k;
                    cell.seed = seed;
                    cell.failed = true;
                    cell.error = e.what();
                    cell.mean_test_error = kNaN;
                    cell.std_test_error = kNaN;
                    cell.bound_total = kNaN;
                    cell.wall_seconds = 0.0;
                    failures += method + "," + std::to_string(k) + "," + std::to_string(seed) +
                                ": " + cell.error + "\n";
                }
                cells[{method, k, seed}] = std::move(cell);
            }
        }
    }

    // Rows in (method, k, seed) order regardless of computation order.
    std::vector<experiment_cell> rows;
    rows.reserve(cells.size());
    std::string results = "method,k,seed,mean_test_error,std_test_error,bound_total,wall_seconds\n";
    for (const auto& method : cfg.methods) {
        for (const int k : cfg.ks) {
            for (const std::uint64_t seed : cfg.seeds) {
                const auto& cell = cells.at({method, k, seed});
                results += cell.method + "," + std::to_string(cell.k) + "," +
                           std::to_string(cell.seed) + "," + format_double(cell.mean_test_error) +
                           "," + format_double(cell.std_test_error) + "," +
                           format_double(cell.bound_total) + "," +
                           format_double(cell.wall_seconds) + "\n";
                rows.push_back(cell);
            }
        }
    }
    write_text_file(cfg.output / "results.csv", results);

    std::string summary = "method,k,mean,stderr\n";
    for (const auto& method : cfg.methods) {
        for (const int k : cfg.ks) {
            std::vector<double> means;
            for (const std::uint64_t seed : cfg.seeds) {
                const auto& cell = cells.at({method, k, seed});
                if (!cell.failed) means.push_back(cell.mean_test_error);
            }
            double mean = kNaN, se = kNaN;
            if (!means.empty()) {
                mean = 0.0;
                for (double v : means) mean += v;
                mean /= static_cast<double>(means.size());
                se = sample_std(means, mean) / std::sqrt(static_cast<double>(means.size()));
            }
            summary += method + "," + std::to_string(k) + "," + format_double(mean) + "," +
                       format_double(se) + "\n";
        }
    }
    write_text_file(cfg.output / "results_summary.csv", summary);

    if (!failures.empty()) write_text_file(cfg.output / "failures.log", failures);
    return rows;
}

} // namespace mtask
