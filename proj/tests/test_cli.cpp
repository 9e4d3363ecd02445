// End-to-end checks of the command-line binary: exit codes, output files,
// config file precedence.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef DDCE_CLI_PATH
#error "DDCE_CLI_PATH must point at the ddce binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(DDCE_CLI_PATH) + " " + args + " 2>&1";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 256> buf;
    while (fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string strip_wall_time(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(','));
        out += '\n';
    }
    return out;
}

int count_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int rows = -1;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    return rows;
}

} // namespace

TEST_CASE("flops prints a single integer") {
    const RunResult res = run_cli("flops --predictor dl-dd --nt 2 --nr 2 --np 10");
    CHECK(res.exit_code == 0);
    CHECK(res.output == "119342\n");
}

TEST_CASE("simulate without a model path names the missing key") {
    const RunResult res =
        run_cli("simulate --predictor dl-dd --trials 1 --nb 2 --np 4 --no-calibration");
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("model_path") != std::string::npos);
}

TEST_CASE("a bad config key is a config error") {
    const std::string cfg_path = "cli_bad_config.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "trails = 100\n"; // typo
    }
    const RunResult res = run_cli("sweep --config " + cfg_path);
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("trails") != std::string::npos);
    std::filesystem::remove(cfg_path);
}

TEST_CASE("sweep then report keeps one row per point, and reruns are identical") {
    const std::string cfg_path = "cli_sweep.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "predictors = genie,cc\n"
            << "scenario = cars,trains\n"
            << "snr_db = 10,20\n"
            << "trials = 25\n"
            << "np = 6\n"
            << "nb = 6\n"
            << "seed = 77\n";
    }
    const RunResult s1 = run_cli("sweep --config " + cfg_path + " --no-calibration --out cli_out1.csv");
    CHECK(s1.exit_code == 0);
    const RunResult s2 = run_cli("sweep --config " + cfg_path +
                                 " --no-calibration --workers 3 --out cli_out2.csv");
    CHECK(s2.exit_code == 0);

    const std::string a = read_file("cli_out1.csv");
    CHECK(count_rows(a) == 2 * 2 * 2);
    CHECK(strip_wall_time(a) == strip_wall_time(read_file("cli_out2.csv")));
    CHECK(std::filesystem::exists("cli_out1.csv.manifest"));

    const RunResult rep = run_cli("report --in cli_out1.csv --out cli_report.csv");
    CHECK(rep.exit_code == 0);
    CHECK(count_rows(read_file("cli_report.csv")) == 2 * 2 * 2);

    for (const char* f : {"cli_sweep.cfg", "cli_out1.csv", "cli_out2.csv", "cli_out1.csv.manifest",
                          "cli_out2.csv.manifest", "cli_report.csv"})
        std::filesystem::remove(f);
}

TEST_CASE("flags override config file values") {
    const std::string cfg_path = "cli_override.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "predictor = dl-dd\nnp = 10\n";
    }
    // flag wins: wiener-np => flops formula for the Wiener predictor
    const RunResult res =
        run_cli("flops --config " + cfg_path + " --predictor dd-cc --nt 1 --nr 1 --np 1");
    CHECK(res.exit_code == 0);
    CHECK(res.output == "23\n");
    std::filesystem::remove(cfg_path);
}

TEST_CASE("gen-data, train and track round trip") {
    const RunResult gen = run_cli(
        "gen-data --code alamouti --nr 1 --np 4 --n-samples 20 --rho-min 0 --rho-max 0.05 "
        "--out cli_data.csv");
    CHECK(gen.exit_code == 0);
    CHECK(count_rows(read_file("cli_data.csv")) == 40);

    const RunResult train = run_cli(
        "train --code alamouti --nr 1 --np 4 --n-samples 150 --epochs 2 --rho-min 0 --rho-max 0.05 "
        "--model-path cli_model.txt --out cli_loss.csv --seed 5");
    CHECK(train.exit_code == 0);
    CHECK(std::filesystem::exists("cli_model.txt"));
    CHECK(count_rows(read_file("cli_loss.csv")) == 2 * 2);

    const RunResult track = run_cli(
        "track --predictor dl-dd --code alamouti --nr 1 --np 4 --nb 6 --rho 0.02 --rho-min 0 "
        "--rho-max 0.05 --snr 20 --model-path cli_model.txt --out cli_track.csv");
    CHECK(track.exit_code == 0);
    const std::string t = read_file("cli_track.csv");
    CHECK(t.rfind("k,rx,tx,", 0) == 0);
    CHECK(count_rows(t) == 6 * 2 * 1 * 2);

    for (const char* f : {"cli_data.csv", "cli_model.txt", "cli_loss.csv", "cli_track.csv",
                          "cli_track.csv.manifest"})
        std::filesystem::remove(f);
}
