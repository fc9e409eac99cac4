#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "mtask/discrepancy.hpp"
#include "mtask/io_util.hpp"
#include "test_util.hpp"

using mtask_test::temp_dir;

namespace {

const std::string cli = MTASK_CLI_PATH;

/// Runs the CLI, returns the exit code; stderr lands in `err_file`.
int run_cli(const std::string& args, const std::filesystem::path& err_file) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace

TEST_CASE("pipeline contract: gen then disc") {
    temp_dir dir("cli_pipeline");
    const auto err = dir.path() / "err.txt";
    const auto run = (dir.path() / "run").string();

    REQUIRE(run_cli("gen --synthetic -T 6 -n 50 -m 20 --n-test 30 --seed 7 -o " + run, err) == 0);
    CHECK(std::filesystem::exists(run + "/manifest.json"));
    CHECK(std::filesystem::exists(run + "/task_0.csv"));
    CHECK(std::filesystem::exists(run + "/test_5.csv"));

    REQUIRE(run_cli("disc -i " + run + " --seed 7", err) == 0);
    REQUIRE(std::filesystem::exists(run + "/disc.csv"));
    const auto mat = mtask::load_matrix(run + "/disc.csv");  // validates symmetry, range, diagonal
    CHECK(mat.count() == 6);
}

TEST_CASE("select validates k against T") {
    temp_dir dir("cli_kcheck");
    const auto err = dir.path() / "err.txt";
    const auto run = (dir.path() / "run").string();
    REQUIRE(run_cli("gen --synthetic -T 4 -n 30 -m 10 --n-test 10 --seed 3 -o " + run, err) == 0);
    REQUIRE(run_cli("disc -i " + run + " --seed 3", err) == 0);

    CHECK(run_cli("select -i " + run + " --method active-da-ss -k 9 --seed 1 -o " + run, err) == 1);
    const auto message = slurp(err);
    CHECK(mtask_test::contains(message, "9"));
    CHECK(mtask_test::contains(message, "4"));
}

TEST_CASE("missing prerequisites exit with the io code and name the file") {
    temp_dir dir("cli_missing");
    const auto err = dir.path() / "err.txt";
    CHECK(run_cli("disc -i " + (dir.path() / "nowhere").string(), err) == 2);
    CHECK(mtask_test::contains(slurp(err), "manifest"));
}

TEST_CASE("full pipeline and byte-identical reruns") {
    temp_dir dir("cli_determinism");
    const auto err = dir.path() / "err.txt";
    const auto run = (dir.path() / "run").string();

    REQUIRE(run_cli("gen --synthetic -T 6 -n 40 -m 20 --n-test 25 --seed 11 -o " + run, err) == 0);
    REQUIRE(run_cli("disc -i " + run + " --seed 11", err) == 0);
    REQUIRE(run_cli("select -i " + run + " --method active-da -k 2 --seed 11 -o " + run, err) == 0);
    REQUIRE(run_cli("train -i " + run + " --selection " + run + "/selection.json --seed 11 -o " +
                        run + "/models.csv",
                    err) == 0);
    REQUIRE(run_cli("eval -i " + run + " --models " + run + "/models.csv -o " + run + "/eval.csv",
                    err) == 0);
    REQUIRE(run_cli("bound -i " + run + " --disc " + run + "/disc.csv --selection " + run +
                        "/selection.json --models " + run + "/models.csv --seed 11 -o " + run +
                        "/bound.txt",
                    err) == 0);

    const std::vector<std::string> artifacts = {"disc.csv",  "selection.json", "alpha.txt",
                                                "models.csv", "eval.csv",      "bound.txt"};
    std::vector<std::string> before;
    for (const auto& name : artifacts) before.push_back(slurp(run + "/" + name));

    // rerun every stage over the same inputs
    REQUIRE(run_cli("gen --synthetic -T 6 -n 40 -m 20 --n-test 25 --seed 11 -o " + run, err) == 0);
    REQUIRE(run_cli("disc -i " + run + " --seed 11", err) == 0);
    REQUIRE(run_cli("select -i " + run + " --method active-da -k 2 --seed 11 -o " + run, err) == 0);
    REQUIRE(run_cli("train -i " + run + " --selection " + run + "/selection.json --seed 11 -o " +
                        run + "/models.csv",
                    err) == 0);
    REQUIRE(run_cli("eval -i " + run + " --models " + run + "/models.csv -o " + run + "/eval.csv",
                    err) == 0);
    REQUIRE(run_cli("bound -i " + run + " --disc " + run + "/disc.csv --selection " + run +
                        "/selection.json --models " + run + "/models.csv --seed 11 -o " + run +
                        "/bound.txt",
                    err) == 0);

    for (std::size_t j = 0; j < artifacts.size(); ++j)
        CHECK(slurp(run + "/" + artifacts[j]) == before[j]);
}

TEST_CASE("passive selection methods accept the same artifacts") {
    temp_dir dir("cli_passive");
    const auto err = dir.path() / "err.txt";
    const auto run = (dir.path() / "run").string();
    REQUIRE(run_cli("gen --synthetic -T 5 -n 30 -m 10 --n-test 10 --seed 2 -o " + run, err) == 0);
    REQUIRE(run_cli("disc -i " + run + " --seed 2", err) == 0);
    for (const std::string method : {"da", "da-ss", "active-da-ss"}) {
        CHECK(run_cli("select -i " + run + " --method " + method + " -k 2 --seed 5 -o " + run,
                      err) == 0);
    }
    CHECK(run_cli("select -i " + run + " --method multitask -k 2 --seed 5 -o " + run, err) == 1);
}

TEST_CASE("experiment subcommand writes the results files") {
    temp_dir dir("cli_experiment");
    const auto err = dir.path() / "err.txt";
    const auto out = (dir.path() / "out").string();
    const auto cfg = dir.path() / "cfg.txt";
    mtask::write_text_file(cfg, "data=synthetic\nT=5\nn=30\nm=10\nn_test=20\n"
                                "method=da-ss\nmethod=active-da-ss\nk=2\nseed=1\nseed=2\n"
                                "output=" + out + "\n");
    REQUIRE(run_cli("experiment --config " + cfg.string(), err) == 0);
    CHECK(std::filesystem::exists(out + "/results.csv"));
    CHECK(std::filesystem::exists(out + "/results_summary.csv"));
    const auto lines = slurp(out + "/results.csv");
    CHECK(mtask_test::contains(lines, "da-ss,2,1,"));
    CHECK(mtask_test::contains(lines, "active-da-ss,2,2,"));
}

TEST_CASE("unknown flags and missing subcommands fail with exit 1") {
    temp_dir dir("cli_usage");
    const auto err = dir.path() / "err.txt";
    CHECK(run_cli("", err) == 1);
    CHECK(run_cli("gen --bogus", err) == 1);
}
