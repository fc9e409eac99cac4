#include "mtask/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mtask/errors.hpp"
#include "mtask/io_util.hpp"
#include "mtask/rng.hpp"

namespace mtask {

namespace {

constexpr double kMeanRange = 5.0;  // means are uniform on [-5,5]^2

void sample_gaussian_task(rng& stream, const synthetic_task_spec& spec, int rows,
                          Eigen::MatrixXd& points, std::vector<int>& labels) {
    points.resize(rows, 2);
    labels.resize(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        const double x0 = spec.mean_x + stream.next_normal();
        const double x1 = spec.mean_y + stream.next_normal();
        points(r, 0) = x0;
        points(r, 1) = x1;
        labels[static_cast<std::size_t>(r)] = angle_label(spec.mean_x, spec.mean_y, x0, x1);
    }
}

std::string manifest_data_name(int id) { return "task_" + std::to_string(id) + ".csv"; }
std::string manifest_test_name(int id) { return "test_" + std::to_string(id) + ".csv"; }

void append_csv_matrix(std::string& out, const Eigen::MatrixXd& pts, const std::vector<int>& labels) {
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        for (Eigen::Index c = 0; c < pts.cols(); ++c) {
            if (c > 0) out += ',';
            out += format_double(pts(r, c));
        }
        if (!labels.empty()) {
            out += ',';
            out += labels[static_cast<std::size_t>(r)] > 0 ? "1" : "-1";
        }
        out += '\n';
    }
}

/// Parses a per-task CSV with `rows` data rows of `dim` features and,
/// if `want_labels`, one trailing label column in {-1,+1}.
void parse_csv_matrix(const std::filesystem::path& file, int rows, int dim, bool want_labels,
                      Eigen::MatrixXd& pts, std::vector<int>& labels) {
    const std::string text = read_text_file(file);
    const int cols = dim + (want_labels ? 1 : 0);
    pts.resize(rows, dim);
    labels.clear();
    if (want_labels) labels.reserve(static_cast<std::size_t>(rows));

    int row = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) continue;

        if (row >= rows)
            throw validation_error(file.string() + ": expected " + std::to_string(rows) +
                                   " rows, found more");
        const auto fields = split(line, ',');
        const std::string where = file.string() + ": row " + std::to_string(row + 1);
        if (static_cast<int>(fields.size()) != cols)
            throw validation_error(where + ": expected " + std::to_string(cols) +
                                   " columns, got " + std::to_string(fields.size()));
        for (int c = 0; c < dim; ++c) {
            const double v = parse_double(fields[static_cast<std::size_t>(c)], where);
            if (!std::isfinite(v))
                throw validation_error(where + ": non-finite feature value");
            pts(row, c) = v;
        }
        if (want_labels) {
            const double y = parse_double(fields.back(), where);
            if (y != 1.0 && y != -1.0)
                throw validation_error(where + ": label must be -1 or +1, got " +
                                       std::string(fields.back()));
            labels.push_back(y > 0 ? 1 : -1);
        }
        ++row;
    }
    if (row != rows)
        throw validation_error(file.string() + ": expected " + std::to_string(rows) +
                               " rows, got " + std::to_string(row));
}

int count_csv_rows(const std::filesystem::path& file) {
    const std::string text = read_text_file(file);
    int rows = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) ++rows;
        start = end + 1;
    }
    return rows;
}

} // namespace

int angle_label(double mean_x, double mean_y, double x0, double x1) {
    const double cross = mean_x * x1 - mean_y * x0;
    return cross > 0.0 ? 1 : -1;
}

void task_collection::validate() const {
    if (count() < 1) throw validation_error("collection has no tasks");
    if (dim < 1) throw validation_error("feature dimension must be >= 1");
    if (n < 1) throw validation_error("unlabeled sample size n must be >= 1");
    if (m < 1 || m > n)
        throw validation_error("labeled-subset size m must satisfy 1 <= m <= n, got m=" +
                               std::to_string(m) + ", n=" + std::to_string(n));
    for (int t = 0; t < count(); ++t) {
        const auto& task = tasks[static_cast<std::size_t>(t)];
        const std::string where = "task " + std::to_string(t);
        if (task.points.rows() != n || task.points.cols() != dim)
            throw validation_error(where + ": sample matrix has wrong shape");
        if (!task.labels.empty() && static_cast<int>(task.labels.size()) != n)
            throw validation_error(where + ": labels present but not one per sample row");
        for (int v : task.labels)
            if (v != 1 && v != -1) throw validation_error(where + ": label outside {-1,+1}");
        if (task.test_points.rows() > 0 && task.test_points.cols() != dim)
            throw validation_error(where + ": test set has wrong dimension");
        if (static_cast<int>(task.test_labels.size()) != task.test_points.rows())
            throw validation_error(where + ": test labels do not match test rows");
        for (int v : task.test_labels)
            if (v != 1 && v != -1) throw validation_error(where + ": test label outside {-1,+1}");
    }
}

task_collection generate_synthetic(int T, int n, int m, int n_test, std::uint64_t seed) {
    if (T < 1 || n < 1 || m < 1 || n_test < 1)
        throw validation_error("generate_synthetic: T, n, m, n_test must all be >= 1");
    if (m > n) throw validation_error("generate_synthetic: m must not exceed n");

    task_collection coll;
    coll.dim = 2;
    coll.n = n;
    coll.m = m;
    coll.synthetic_specs.resize(static_cast<std::size_t>(T));
    coll.tasks.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        // Mean and samples come from one per-task stream, so a task is a
        // pure function of (seed, t) no matter how generation is scheduled.
        rng stream = rng::derive(seed, stream::task_gen, static_cast<std::uint64_t>(t));
        auto& spec = coll.synthetic_specs[static_cast<std::size_t>(t)];
        spec.mean_x = (stream.next_double() * 2.0 - 1.0) * kMeanRange;
        spec.mean_y = (stream.next_double() * 2.0 - 1.0) * kMeanRange;
        auto& task = coll.tasks[static_cast<std::size_t>(t)];
        sample_gaussian_task(stream, spec, n, task.points, task.labels);
        sample_gaussian_task(stream, spec, n_test, task.test_points, task.test_labels);
    }
    coll.validate();
    return coll;
}

task_collection generate_synthetic_from_means(const std::vector<synthetic_task_spec>& means,
                                              int n, int m, int n_test, std::uint64_t seed) {
    if (means.empty() || n < 1 || m < 1 || n_test < 1)
        throw validation_error("generate_synthetic_from_means: empty means or counts < 1");
    if (m > n) throw validation_error("generate_synthetic_from_means: m must not exceed n");
    task_collection coll;
    coll.dim = 2;
    coll.n = n;
    coll.m = m;
    coll.synthetic_specs = means;
    coll.tasks.resize(means.size());
    for (std::size_t t = 0; t < means.size(); ++t) {
        rng stream = rng::derive(seed, stream::task_gen, static_cast<std::uint64_t>(t));
        auto& task = coll.tasks[t];
        sample_gaussian_task(stream, means[t], n, task.points, task.labels);
        sample_gaussian_task(stream, means[t], n_test, task.test_points, task.test_labels);
    }
    coll.validate();
    return coll;
}

task_collection load_collection(const std::filesystem::path& manifest_path) {
    if (!std::filesystem::exists(manifest_path))
        throw io_error("manifest not found: " + manifest_path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(manifest_path.string() + ": invalid JSON: " + e.what());
    }
    const auto dir = manifest_path.parent_path();
    task_collection coll;
    try {
        const int T = doc.at("T").get<int>();
        coll.dim = doc.at("dim").get<int>();
        coll.n = doc.at("n").get<int>();
        coll.m = doc.at("m").get<int>();
        const auto& tasks = doc.at("tasks");
        if (!tasks.is_array() || static_cast<int>(tasks.size()) != T)
            throw validation_error(manifest_path.string() + ": tasks array must have T=" +
                                   std::to_string(T) + " entries");
        coll.tasks.resize(static_cast<std::size_t>(T));
        std::vector<bool> seen(static_cast<std::size_t>(T), false);
        for (const auto& entry : tasks) {
            const int id = entry.at("id").get<int>();
            if (id < 0 || id >= T || seen[static_cast<std::size_t>(id)])
                throw validation_error(manifest_path.string() + ": task ids must be a permutation of 0.." +
                                       std::to_string(T - 1));
            seen[static_cast<std::size_t>(id)] = true;
            auto& task = coll.tasks[static_cast<std::size_t>(id)];
            const bool labeled = entry.at("labeled").get<bool>();
            const auto data_file = dir / entry.at("data").get<std::string>();
            if (!std::filesystem::exists(data_file))
                throw io_error("task file not found: " + data_file.string());
            parse_csv_matrix(data_file, coll.n, coll.dim, labeled, task.points, task.labels);
            if (!entry.at("test").is_null()) {
                const auto test_file = dir / entry.at("test").get<std::string>();
                if (!std::filesystem::exists(test_file))
                    throw io_error("test file not found: " + test_file.string());
                const int rows = count_csv_rows(test_file);
                if (rows < 1)
                    throw validation_error(test_file.string() + ": empty test set");
                parse_csv_matrix(test_file, rows, coll.dim, true, task.test_points, task.test_labels);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(manifest_path.string() + ": " + e.what());
    }
    coll.validate();
    return coll;
}

void save_collection(const task_collection& coll, const std::filesystem::path& dir) {
    coll.validate();
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json doc;
    doc["T"] = coll.count();
    doc["dim"] = coll.dim;
    doc["n"] = coll.n;
    doc["m"] = coll.m;
    doc["tasks"] = nlohmann::ordered_json::array();
    for (int t = 0; t < coll.count(); ++t) {
        const auto& task = coll.tasks[static_cast<std::size_t>(t)];
        nlohmann::ordered_json entry;
        entry["id"] = t;
        entry["data"] = manifest_data_name(t);
        entry["labeled"] = task.has_labels();
        if (task.has_test())
            entry["test"] = manifest_test_name(t);
        else
            entry["test"] = nullptr;
        doc["tasks"].push_back(entry);

        std::string csv;
        append_csv_matrix(csv, task.points, task.labels);
        write_text_file(dir / manifest_data_name(t), csv);
        if (task.has_test()) {
            std::string test_csv;
            append_csv_matrix(test_csv, task.test_points, task.test_labels);
            write_text_file(dir / manifest_test_name(t), test_csv);
        }
    }
    write_text_file(dir / "manifest.json", doc.dump(2) + "\n");
}

std::vector<labeled_subset> draw_subsets(const task_collection& coll, const std::vector<int>& I,
                                         int count, std::uint64_t seed) {
    if (count < 1 || count > coll.n)
        throw validation_error("subset size must satisfy 1 <= count <= n, got " +
                               std::to_string(count));
    std::vector<labeled_subset> out;
    out.reserve(I.size());
    for (int i : I) {
        if (i < 0 || i >= coll.count())
            throw validation_error("task index out of range: " + std::to_string(i));
        if (!coll.tasks[static_cast<std::size_t>(i)].has_labels())
            throw validation_error("task " + std::to_string(i) + " has no labels to reveal");
        rng stream = rng::derive(seed, stream::subsets, static_cast<std::uint64_t>(i));
        out.push_back({i, stream.sample_without_replacement(coll.n, count)});
    }
    return out;
}

std::vector<labeled_subset> draw_labeled_subsets(const task_collection& coll,
                                                 const std::vector<int>& I, std::uint64_t seed) {
    return draw_subsets(coll, I, coll.m, seed);
}

} // namespace mtask
