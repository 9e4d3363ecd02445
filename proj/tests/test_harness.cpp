#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ddce/errors.hpp"
#include "ddce/harness.hpp"
#include "ddce/rng.hpp"

using namespace ddce;

namespace {

// Independent flop evaluation: monomial lists with explicit exponents over
// (n_t, n_r, n_x, n_p), accumulated in __int128.
long long flops_oracle(const std::string& predictor, const FlopParams& p) {
    struct Monomial {
        long long coeff;
        int et, er, ex, ep;
    };
    auto eval = [&](const std::vector<Monomial>& terms) {
        __int128 acc = 0;
        for (const Monomial& m : terms) {
            __int128 v = m.coeff;
            for (int i = 0; i < m.et; ++i) v *= p.n_t;
            for (int i = 0; i < m.er; ++i) v *= p.n_r;
            for (int i = 0; i < m.ex; ++i) v *= p.n_x;
            for (int i = 0; i < m.ep; ++i) v *= p.n_p;
            acc += v;
        }
        return static_cast<long long>(acc);
    };

    // shared polynomial n_p * (3 n_p + 2 n_p n_t - 2 n_r n_t + 4 n_p n_t^2 +
    // 6 n_p^2 n_t + 3 n_p^2 + <tail> + 1), expanded
    const std::vector<Monomial> common = {
        {3, 0, 0, 0, 2}, {2, 1, 0, 0, 2}, {-2, 1, 1, 0, 1}, {4, 2, 0, 0, 2},
        {6, 1, 0, 0, 3}, {3, 0, 0, 0, 3}, {1, 0, 0, 0, 1}};

    if (predictor == "dd-cc") {
        std::vector<Monomial> t = common;
        t.push_back({6, 1, 1, 0, 2}); // 6 n_p n_r n_t * n_p
        return eval(t);
    }
    if (predictor == "dd-ar1") {
        std::vector<Monomial> t = common;
        t.push_back({6, 0, 1, 1, 2}); // 6 n_p n_r n_x * n_p
        t.push_back({1, 2, 1, 0, 1}); // n_r n_t^2 * n_p
        return eval(t);
    }
    if (predictor == "dl-dd") {
        std::vector<Monomial> t = common;
        t.push_back({6, 0, 1, 0, 3});   // 6 n_p^2 n_r * n_p
        t.push_back({512, 1, 1, 1, 0}); // 512 n_t n_r n_x
        t.push_back({512, 1, 1, 0, 1}); // 512 n_t n_r n_p
        t.push_back({512 * 128, 0, 0, 0, 0});
        return eval(t);
    }
    if (predictor == "wiener-np") {
        // gamma = (n_p-1)^2 (6 n_t - 2) + (n_p - 1), evaluated directly but
        // with a different grouping than the implementation
        const __int128 q = p.n_p - 1;
        const __int128 g = q * (q * (6 * p.n_t - 2) + 1);
        __int128 inner = g + 3 * g * g * g + 5 * g * g;
        inner += 4 * q * p.n_t + 6 * p.n_t * q * q * q + 4 * p.n_t * q * q - 2 * p.n_t * q;
        return static_cast<long long>(p.n_r * p.n_x * inner);
    }
    throw std::runtime_error("oracle: unknown predictor");
}

ExperimentConfig tiny_sweep_config() {
    ExperimentConfig cfg;
    cfg.code = StbcCode::alamouti();
    cfg.constellation = Constellation::qam(4);
    cfg.predictors = {PredictorChoice::parse("genie"), PredictorChoice::parse("cc")};
    cfg.n_r = 2;
    cfg.n_p = 6;
    cfg.n_b = 8;
    cfg.snr_db = {10.0, 20.0};
    cfg.trials = 60;
    cfg.scenarios = {{"cars", {0.001, 0.03}}};
    cfg.base_seed = 9;
    cfg.workers = 1;
    cfg.calibrate = false;
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// CSV contents minus the wall-time column.
std::string strip_wall_time(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        const size_t last = line.rfind(',');
        out += line.substr(0, last);
        out += '\n';
    }
    return out;
}

} // namespace

TEST_CASE("standard Doppler scenarios") {
    const auto scenarios = standard_scenarios();
    REQUIRE(scenarios.size() == 3);
    CHECK(scenarios[0].name == "pedestrians");
    CHECK(scenarios[0].range.rho_min == 0.0);
    CHECK(scenarios[0].range.rho_max == 0.001);
    CHECK(scenarios[1].name == "cars");
    CHECK(scenarios[1].range.rho_min == 0.001);
    CHECK(scenarios[1].range.rho_max == 0.03);
    CHECK(scenarios[2].name == "trains");
    CHECK(scenarios[2].range.rho_min == 0.03);
    CHECK(scenarios[2].range.rho_max == 0.1);
    CHECK_THROWS_AS(scenario_by_name("boats"), ConfigError);
}

TEST_CASE("flop formulas: spot values") {
    const FlopParams p{2, 2, 2, 10};
    // neural term alone: 512*(n_t n_r (n_x+n_p) + 128) = 512*176 = 90112
    CHECK(flops("dl-dd", p) - flops_oracle("dl-dd", FlopParams{2, 2, 2, 10}) == 0);
    CHECK(flops("dl-dd", p) == 29230 + 90112);
    CHECK(flops("dd-cc", p) == 19630);

    const FlopParams ones{1, 1, 1, 1};
    CHECK(flops("wiener-np", ones) == 0);
    CHECK(flops("dd-cc", ones) == 23);
    CHECK(flops("dd-ar1", ones) == 24);
    CHECK(flops("dl-dd", ones) == 23 + 512 * 130);

    CHECK_THROWS_AS(flops("bogus", p), UnknownPredictor);
}

TEST_CASE("flop formulas match the monomial oracle on random tuples") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 20; ++rep) {
        FlopParams p;
        p.n_t = 1 + static_cast<long long>(rng() % 4);
        p.n_r = 1 + static_cast<long long>(rng() % 4);
        p.n_x = 1 + static_cast<long long>(rng() % 4);
        p.n_p = 1 + static_cast<long long>(rng() % 50);
        for (const char* name : {"wiener-np", "dd-cc", "dd-ar1", "dl-dd"})
            CHECK(flops(name, p) == flops_oracle(name, p));
    }
}

TEST_CASE("dl-dd flops grow with the window length") {
    long long prev = -1;
    for (int np = 1; np <= 50; ++np) {
        const long long v = flops("dl-dd", FlopParams{2, 2, 2, np});
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("calibration gate sits on the analytic QPSK point") {
    const CalibrationResult cal = run_calibration(17);
    CHECK(cal.bits >= 4000000);
    CHECK(cal.expected == doctest::Approx(7.827e-4).epsilon(1e-3));
    CHECK(cal.pass);
    CHECK(cal.ber == doctest::Approx(cal.expected).epsilon(0.2));
}

TEST_CASE("genie sweeps are error free without noise") {
    ExperimentConfig cfg = tiny_sweep_config();
    cfg.predictors = {PredictorChoice::parse("genie")};
    cfg.snr_db = {60.0};
    cfg.trials = 40;
    const std::vector<BerRecord> records = run_ber_sweep(cfg);
    REQUIRE(records.size() == 1);
    CHECK(records[0].bit_errors == 0);
    CHECK(records[0].ber == 0.0);
    CHECK(records[0].total_bits == 40ll * 8 * 2 * 2);
}

TEST_CASE("doubling the trial count moves the estimate within binomial noise") {
    ExperimentConfig cfg = tiny_sweep_config();
    cfg.predictors = {PredictorChoice::parse("genie")};
    cfg.snr_db = {6.0};
    cfg.trials = 400;
    const BerRecord a = run_ber_sweep(cfg)[0];
    cfg.trials = 800;
    const BerRecord b = run_ber_sweep(cfg)[0];
    const double p = b.ber;
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(a.total_bits));
    CHECK(std::abs(a.ber - b.ber) <= 3.0 * sd);
}

TEST_CASE("sweep CSV schema and reproducibility across workers") {
    ExperimentConfig cfg = tiny_sweep_config();
    const std::string p1 = "sweep_a.csv", p2 = "sweep_b.csv";
    write_ber_csv(run_ber_sweep(cfg), p1);
    cfg.workers = 4;
    write_ber_csv(run_ber_sweep(cfg), p2);

    const std::string a = read_file(p1), b = read_file(p2);
    CHECK(a.substr(0, a.find('\n')) ==
          "scenario,snr_db,predictor,code,trials,total_bits,bit_errors,ber,wall_time_s");
    CHECK(strip_wall_time(a) == strip_wall_time(b));

    // row count = |scenarios| * |snr| * |predictors|
    int rows = -1; // header
    std::istringstream in(a);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 * 2 * 2);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("report preserves rows and appends confidence columns") {
    ExperimentConfig cfg = tiny_sweep_config();
    cfg.snr_db = {12.0};
    const std::vector<BerRecord> records = run_ber_sweep(cfg);
    const std::string sweep_path = "report_in.csv", report_path = "report_out.csv";
    write_ber_csv(records, sweep_path);
    write_report_csv(read_ber_csv(sweep_path), report_path);

    std::ifstream in(report_path);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "scenario,snr_db,predictor,code,trials,total_bits,bit_errors,ber,ber_std,ci95_lo,ci95_hi");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(records.size()));
    in.close();
    std::filesystem::remove(sweep_path);
    std::filesystem::remove(report_path);
}

TEST_CASE("packet-length sweep skips the degenerate pilot-only point") {
    ExperimentConfig cfg = tiny_sweep_config();
    cfg.predictors = {PredictorChoice::parse("cc")};
    cfg.snr_db = {15.0};
    cfg.trials = 20;
    const std::vector<PacketLengthRecord> records = run_packet_length_sweep(cfg, {0, 4, 8});
    REQUIRE(records.size() == 2);
    CHECK(records[0].n_b == 4);
    CHECK(records[0].packet_len == 4 * 2 + 6);
    CHECK(records[0].r == doctest::Approx(6.0 / 14.0));
    CHECK(records[1].n_b == 8);
}

TEST_CASE("missing model for a neural sweep is a typed error") {
    ExperimentConfig cfg = tiny_sweep_config();
    cfg.predictors = {PredictorChoice::parse("dl-dd")};
    CHECK_THROWS_AS(run_ber_sweep(cfg), MissingModel);
}

TEST_CASE("manifest carries the seed and config echo") {
    const std::string out = "manifest_test.csv";
    write_manifest(out, {"code = alamouti", "trials = 60"}, 12345);
    const std::string m = read_file(out + ".manifest");
    CHECK(m.find("base_seed = 12345") != std::string::npos);
    CHECK(m.find("code = alamouti") != std::string::npos);
    CHECK(m.find("git = ") != std::string::npos);
    std::filesystem::remove(out + ".manifest");
}
