// mtask: multi-task learning with labeled and unlabeled tasks.
//
// Pipeline subcommands (each reads the artifacts of the previous ones):
//   gen        generate a synthetic benchmark dataset directory
//   disc       estimate the pairwise discrepancy matrix
//   select     choose the labeled set and transfer weights
//   train      train per-task predictors by weighted ridge with CV
//   eval       report 0/1 test errors
//   bound      report the computable generalization-bound terms
//   experiment run a full (method, k, seed) sweep from a config file
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtask/bound.hpp"
#include "mtask/discrepancy.hpp"
#include "mtask/errors.hpp"
#include "mtask/experiment.hpp"
#include "mtask/io_util.hpp"
#include "mtask/learners.hpp"
#include "mtask/rng.hpp"
#include "mtask/selection.hpp"
#include "mtask/tasks.hpp"

namespace {

namespace fs = std::filesystem;

struct gen_options {
    bool synthetic = false;
    int T = 0, n = 0, m = 0, n_test = 1000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_gen(const gen_options& opt) {
    if (!opt.synthetic)
        throw mtask::validation_error("gen: only --synthetic generation is supported");
    const auto coll = mtask::generate_synthetic(opt.T, opt.n, opt.m, opt.n_test, opt.seed);
    mtask::save_collection(coll, opt.out);
    std::cout << "wrote " << opt.T << " tasks to " << opt.out << "\n";
}

struct disc_options {
    std::string input;
    std::string output;
    std::uint64_t seed = 0;
    int threads = 1;
};

void run_disc(const disc_options& opt) {
    const auto coll = mtask::load_collection(fs::path(opt.input) / "manifest.json");
    const auto mat = mtask::build_matrix(coll, opt.seed, opt.threads);
    const fs::path out = opt.output.empty() ? fs::path(opt.input) / "disc.csv" : fs::path(opt.output);
    mtask::save_matrix(mat, out);
    std::cout << "wrote " << out.string() << "\n";
}

struct select_options {
    std::string input;
    std::string disc_file;
    std::string method;
    int k = 0;
    std::uint64_t seed = 0;
    double delta = 0.05;
    double a_override = -1.0;  // <0 means "derive from the bound"
    double b_override = -1.0;
    std::string out;
};

void run_select(const select_options& opt) {
    const auto coll = mtask::load_collection(fs::path(opt.input) / "manifest.json");
    const fs::path disc_path =
        opt.disc_file.empty() ? fs::path(opt.input) / "disc.csv" : fs::path(opt.disc_file);
    const auto disc = mtask::load_matrix(disc_path);
    if (disc.count() != coll.count())
        throw mtask::validation_error("select: matrix T=" + std::to_string(disc.count()) +
                                      " does not match dataset T=" + std::to_string(coll.count()));
    if (opt.k < 1 || opt.k > coll.count())
        throw mtask::validation_error("select: need 1 <= k <= T, got k=" + std::to_string(opt.k) +
                                      ", T=" + std::to_string(coll.count()));

    mtask::bound_config bcfg;
    bcfg.d = mtask::hypothesis_spec{coll.dim}.vc_dimension();
    bcfg.k = opt.k;
    bcfg.m = coll.m;
    bcfg.n = coll.n;
    bcfg.T = coll.count();
    bcfg.delta = opt.delta;
    const auto constants = mtask::complexity_terms(bcfg);
    mtask::objective_config ocfg;
    ocfg.a_coeff = opt.a_override >= 0.0 ? opt.a_override : constants.a;
    ocfg.b_coeff = opt.b_override >= 0.0 ? opt.b_override : constants.b;

    mtask::selection_record rec;
    rec.method = opt.method;
    rec.k = opt.k;
    rec.seed = opt.seed;
    if (opt.method == "da") {
        const auto I = mtask::passive_labeled_set(coll.count(), opt.k, opt.seed);
        rec.alpha = mtask::optimize_weights(disc, I, ocfg).alpha;
    } else if (opt.method == "active-da") {
        rec.alpha = mtask::select_active_grasp(disc, opt.k, ocfg, opt.seed).alpha;
    } else if (opt.method == "da-ss") {
        const auto I = mtask::passive_labeled_set(coll.count(), opt.k, opt.seed);
        rec.alpha = mtask::assign_nearest_source(disc, I);
    } else if (opt.method == "active-da-ss") {
        const auto med = mtask::select_active_kmedoids(disc, opt.k, opt.seed);
        rec.alpha = mtask::assign_nearest_source(disc, med.medoids);
    } else {
        throw mtask::validation_error(
            "select: method must be one of da, active-da, da-ss, active-da-ss");
    }
    fs::create_directories(opt.out);
    mtask::save_selection(rec, fs::path(opt.out) / "selection.json");
    std::cout << "wrote " << (fs::path(opt.out) / "selection.json").string() << "\n";
}

struct train_options {
    std::string input;
    std::string selection;
    std::uint64_t seed = 0;
    std::string out;
};

void run_train(const train_options& opt) {
    const auto coll = mtask::load_collection(fs::path(opt.input) / "manifest.json");
    const auto rec = mtask::load_selection(opt.selection);
    if (rec.alpha.task_count() != coll.count())
        throw mtask::validation_error("train: selection T does not match dataset T");
    const auto subsets = mtask::draw_labeled_subsets(coll, rec.alpha.labeled, opt.seed);
    mtask::cv_config cv;
    cv.seed = opt.seed;

    std::vector<mtask::linear_model> models(static_cast<std::size_t>(coll.count()));
    for (int t = 0; t < coll.count(); ++t) {
        const Eigen::VectorXd row = rec.alpha.row(t);
        const double lambda = mtask::cv_select_lambda(coll, subsets, row, cv);
        models[static_cast<std::size_t>(t)] = mtask::train_weighted_ridge(coll, subsets, row, lambda);
    }
    mtask::save_models(models, opt.out);
    std::cout << "wrote " << opt.out << "\n";
}

struct eval_options {
    std::string input;
    std::string models;
    std::string out;
};

void run_eval(const eval_options& opt) {
    const auto coll = mtask::load_collection(fs::path(opt.input) / "manifest.json");
    const auto models = mtask::load_models(opt.models);
    if (static_cast<int>(models.size()) != coll.count())
        throw mtask::validation_error("eval: model count does not match dataset T");
    if (!models.empty() && models.front().w.size() != coll.dim)
        throw mtask::validation_error("eval: model dimension does not match dataset dim");
    const auto ev = mtask::evaluate(models, coll);
    std::string out;
    for (std::size_t t = 0; t < ev.per_task.size(); ++t)
        out += std::to_string(t) + "," + mtask::format_double(ev.per_task[t]) + "\n";
    out += "average," + mtask::format_double(ev.average) + "\n";
    if (!opt.out.empty()) mtask::write_text_file(opt.out, out);
    std::cout << "average_test_error=" << mtask::format_double(ev.average) << "\n";
}

struct bound_options {
    std::string input;
    std::string disc_file;
    std::string selection;
    std::string models;
    std::uint64_t seed = 0;
    double delta = 0.05;
    std::vector<int> lambda_pair;
    std::string out;
};

void run_bound(const bound_options& opt) {
    const auto coll = mtask::load_collection(fs::path(opt.input) / "manifest.json");
    const auto disc = mtask::load_matrix(opt.disc_file);
    const auto rec = mtask::load_selection(opt.selection);
    const auto models = mtask::load_models(opt.models);
    if (disc.count() != coll.count() || rec.alpha.task_count() != coll.count())
        throw mtask::validation_error("bound: artifact shapes do not match the dataset");
    const auto subsets = mtask::draw_labeled_subsets(coll, rec.alpha.labeled, opt.seed);

    mtask::bound_config bcfg;
    bcfg.d = mtask::hypothesis_spec{coll.dim}.vc_dimension();
    bcfg.k = rec.k;
    bcfg.m = coll.m;
    bcfg.n = coll.n;
    bcfg.T = coll.count();
    bcfg.delta = opt.delta;
    auto report = mtask::make_bound_report(coll, disc, rec.alpha, models, subsets, bcfg);
    if (!opt.lambda_pair.empty()) {
        if (opt.lambda_pair.size() != 2)
            throw mtask::validation_error("bound: --lambda-pair needs exactly two task indices");
        report.lambda_estimate = mtask::lambda_diagnostic(coll, opt.lambda_pair[0], opt.lambda_pair[1]);
    }
    mtask::save_report(report, opt.out);
    std::cout << "total_computable=" << mtask::format_double(report.total_computable) << "\n";
}

void run_experiment_cmd(const std::string& config_path) {
    const auto cfg = mtask::parse_experiment_config(config_path);
    const auto rows = mtask::run_experiment(cfg);
    int failed = 0;
    for (const auto& row : rows) failed += row.failed ? 1 : 0;
    std::cout << "wrote " << (cfg.output / "results.csv").string() << " (" << rows.size()
              << " rows, " << failed << " failed)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-task learning with labeled and unlabeled tasks"};
    app.require_subcommand(1);

    gen_options gen;
    auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic dataset directory");
    cmd_gen->add_flag("--synthetic", gen.synthetic, "synthetic 2-D Gaussian benchmark");
    cmd_gen->add_option("-T,--tasks", gen.T, "number of tasks")->required();
    cmd_gen->add_option("-n,--samples", gen.n, "unlabeled samples per task")->required();
    cmd_gen->add_option("-m,--labels", gen.m, "labeled subset size per chosen task")->required();
    cmd_gen->add_option("--n-test", gen.n_test, "test points per task (default 1000)");
    cmd_gen->add_option("--seed", gen.seed, "generation seed")->required();
    cmd_gen->add_option("-o,--output", gen.out, "output directory")->required();

    disc_options disc;
    auto* cmd_disc = app.add_subcommand("disc", "estimate the pairwise discrepancy matrix");
    cmd_disc->add_option("-i,--input", disc.input, "dataset directory")->required();
    cmd_disc->add_option("-o,--output", disc.output, "matrix file (default <input>/disc.csv)");
    cmd_disc->add_option("--seed", disc.seed, "estimation seed (recorded in the header)");
    cmd_disc->add_option("--threads", disc.threads, "worker threads for the pair sweep");

    select_options sel;
    auto* cmd_select = app.add_subcommand("select", "choose the labeled set and transfer weights");
    cmd_select->add_option("-i,--input", sel.input, "dataset directory")->required();
    cmd_select->add_option("--disc", sel.disc_file, "discrepancy matrix (default <input>/disc.csv)");
    cmd_select->add_option("--method", sel.method, "da | active-da | da-ss | active-da-ss")->required();
    cmd_select->add_option("-k", sel.k, "number of labeled tasks")->required();
    cmd_select->add_option("--seed", sel.seed, "selection seed")->required();
    cmd_select->add_option("--delta", sel.delta, "bound confidence for the A,B coefficients");
    cmd_select->add_option("--a-coeff", sel.a_override, "override the 2,1-norm coefficient");
    cmd_select->add_option("--b-coeff", sel.b_override, "override the 1,2-norm coefficient");
    cmd_select->add_option("-o,--output", sel.out, "output directory for selection.json")->required();

    train_options train;
    auto* cmd_train = app.add_subcommand("train", "train per-task predictors");
    cmd_train->add_option("-i,--input", train.input, "dataset directory")->required();
    cmd_train->add_option("--selection", train.selection, "selection.json path")->required();
    cmd_train->add_option("--seed", train.seed, "labeled-subset draw seed")->required();
    cmd_train->add_option("-o,--output", train.out, "model file")->required();

    eval_options eval;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate per-task 0/1 test error");
    cmd_eval->add_option("-i,--input", eval.input, "dataset directory")->required();
    cmd_eval->add_option("--models", eval.models, "model file")->required();
    cmd_eval->add_option("-o,--output", eval.out, "per-task error file (optional)");

    bound_options bnd;
    auto* cmd_bound = app.add_subcommand("bound", "compute the bound terms");
    cmd_bound->add_option("-i,--input", bnd.input, "dataset directory")->required();
    cmd_bound->add_option("--disc", bnd.disc_file, "discrepancy matrix")->required();
    cmd_bound->add_option("--selection", bnd.selection, "selection.json path")->required();
    cmd_bound->add_option("--models", bnd.models, "model file")->required();
    cmd_bound->add_option("--seed", bnd.seed, "subset draw seed (same as train)")->required();
    cmd_bound->add_option("--delta", bnd.delta, "bound confidence");
    cmd_bound->add_option("--lambda-pair", bnd.lambda_pair,
                          "two task indices for the label-compatibility diagnostic")
        ->expected(2);
    cmd_bound->add_option("-o,--output", bnd.out, "report file")->required();

    std::string config_path;
    auto* cmd_exp = app.add_subcommand("experiment", "run a full benchmark sweep");
    cmd_exp->add_option("--config", config_path, "key=value config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (cmd_gen->parsed()) run_gen(gen);
        if (cmd_disc->parsed()) run_disc(disc);
        if (cmd_select->parsed()) run_select(sel);
        if (cmd_train->parsed()) run_train(train);
        if (cmd_eval->parsed()) run_eval(eval);
        if (cmd_bound->parsed()) run_bound(bnd);
        if (cmd_exp->parsed()) run_experiment_cmd(config_path);
    } catch (const mtask::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
