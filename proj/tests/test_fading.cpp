#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "ddce/errors.hpp"
#include "ddce/fading.hpp"
#include "oracles.hpp"

using namespace ddce;

TEST_CASE("autocorrelation at zero lag is the channel power") {
    const FadingSpec s = FadingSpec::rayleigh(0.05);
    CHECK(jakes_autocorr(s, 0).real() == doctest::Approx(1.0));
    CHECK(jakes_autocorr(s, 0).imag() == 0.0);
}

TEST_CASE("Rayleigh autocorrelation matches the series evaluation") {
    const FadingSpec s = FadingSpec::rayleigh(0.05);
    const double expected = oracle::j0_series(2.0 * M_PI * 0.05); // 0.97547777407524949
    CHECK(jakes_autocorr(s, 1).real() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(jakes_autocorr(s, 1).imag() == 0.0);
    CHECK(jakes_autocorr(s, -1) == jakes_autocorr(s, 1)); // real process, even in lag
}

TEST_CASE("Rician autocorrelation splits LOS and diffuse power") {
    // K = 2, f_los = 0: LOS term is a constant 2/3, diffuse is J0/3.
    const FadingSpec s = FadingSpec::rician(0.05, 2.0, 0.0);
    const cd r = jakes_autocorr(s, 5);
    const double expected = 2.0 / 3.0 + oracle::j0_series(M_PI / 2.0) / 3.0;
    CHECK(r.real() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.imag() == doctest::Approx(0.0));
}

TEST_CASE("Rician LOS ray rotates with lag and conjugates with its sign") {
    const FadingSpec s = FadingSpec::rician(0.05, 2.0, 0.03, 0.4);
    const cd plus = jakes_autocorr(s, 3);
    const cd minus = jakes_autocorr(s, -3);
    CHECK(std::abs(minus - std::conj(plus)) < 1e-15);
}

TEST_CASE("corr_matrix is Hermitian Toeplitz with unit diagonal") {
    const FadingSpec s = FadingSpec::rayleigh(0.05);
    CHECK(corr_matrix(s, 1)(0, 0).real() == doctest::Approx(1.0));

    const CMatrix r2 = corr_matrix(s, 2);
    const double off = oracle::j0_series(2.0 * M_PI * 0.05);
    CHECK(r2(0, 1).real() == doctest::Approx(off).epsilon(1e-12));
    CHECK(r2(1, 0).real() == doctest::Approx(off).epsilon(1e-12));
    CHECK(is_hermitian(r2));

    const CMatrix r3 = corr_matrix(FadingSpec::rayleigh(0.0), 3);
    for (const cd& v : r3.data) CHECK(v.real() == doctest::Approx(1.0));
}

TEST_CASE("corr_vector orders lags from v down to u") {
    CHECK(corr_vector(FadingSpec::rayleigh(0.0), 1, 1).size() == 1);
    CHECK(corr_vector(FadingSpec::rayleigh(0.0), 1, 1)[0].real() == doctest::Approx(1.0));

    const CVector r = corr_vector(FadingSpec::rayleigh(0.05), 1, 2);
    REQUIRE(r.size() == 2);
    CHECK(r[0].real() == doctest::Approx(oracle::j0_series(0.2 * M_PI)).epsilon(1e-12));
    CHECK(r[1].real() == doctest::Approx(oracle::j0_series(0.1 * M_PI)).epsilon(1e-12));

    CHECK(corr_vector(FadingSpec::rayleigh(0.02), 2, 4).size() == 3);
}

TEST_CASE("static channel traces are constant in time") {
    const ChannelTrace t = generate_trace(FadingSpec::rayleigh(0.0), 1, 1, 64, 99);
    for (int k = 1; k < t.len; ++k) CHECK(std::abs(t.at(0, 0, k) - t.at(0, 0, 0)) < 1e-5);
}

TEST_CASE("trace generation is deterministic given the seed") {
    const ChannelTrace a = generate_trace(FadingSpec::rayleigh(0.03), 2, 2, 50, 1234);
    const ChannelTrace b = generate_trace(FadingSpec::rayleigh(0.03), 2, 2, 50, 1234);
    REQUIRE(a.h.size() == b.h.size());
    for (size_t i = 0; i < a.h.size(); ++i) CHECK(a.h[i] == b.h[i]);

    const ChannelTrace c = generate_trace(FadingSpec::rayleigh(0.03), 2, 2, 50, 1235);
    bool any_diff = false;
    for (size_t i = 0; i < a.h.size(); ++i) any_diff |= a.h[i] != c.h[i];
    CHECK(any_diff);
}

TEST_CASE("long traces reproduce the Jakes autocorrelation and unit power") {
    // A single 1e5-sample stream has an autocorrelation-estimator std of
    // about 0.015 at this Doppler rate, right at the tolerance; averaging
    // the normalized estimate over the four independent antenna pairs of a
    // 2x2 trace brings it down to ~0.007.
    const int len = 100000;
    const ChannelTrace t = generate_trace(FadingSpec::rayleigh(0.05), 2, 2, len, 2024);

    std::vector<double> pair_power;
    for (int rx = 0; rx < 2; ++rx)
        for (int tx = 0; tx < 2; ++tx) {
            double p = 0.0;
            for (int k = 0; k < len; ++k) p += std::norm(t.at(rx, tx, k));
            pair_power.push_back(p / len);
        }
    const double power = (pair_power[0] + pair_power[1] + pair_power[2] + pair_power[3]) / 4.0;
    CHECK(power == doctest::Approx(1.0).epsilon(0.02));

    for (int lag = 0; lag <= 20; ++lag) {
        double re = 0.0, im = 0.0;
        int pair = 0;
        for (int rx = 0; rx < 2; ++rx)
            for (int tx = 0; tx < 2; ++tx, ++pair) {
                cd acc = 0.0;
                for (int k = lag; k < len; ++k) acc += t.at(rx, tx, k) * std::conj(t.at(rx, tx, k - lag));
                acc /= static_cast<double>(len - lag) * pair_power[pair];
                re += acc.real() / 4.0;
                im += acc.imag() / 4.0;
            }
        const double expected = oracle::j0_series(2.0 * M_PI * 0.05 * lag);
        CHECK(std::abs(re - expected) < 0.02);
        CHECK(std::abs(im) < 0.02);
    }
}

TEST_CASE("distinct antenna pairs are uncorrelated") {
    const int len = 100000;
    const ChannelTrace t = generate_trace(FadingSpec::rayleigh(0.05), 2, 2, len, 2024);
    const std::pair<int, int> pairs[4] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    double sum2 = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            cd acc = 0.0;
            double pa = 0.0, pb = 0.0;
            for (int k = 0; k < len; ++k) {
                const cd va = t.at(pairs[a].first, pairs[a].second, k);
                const cd vb = t.at(pairs[b].first, pairs[b].second, k);
                acc += va * std::conj(vb);
                pa += std::norm(va);
                pb += std::norm(vb);
            }
            const double cross = std::abs(acc) / std::sqrt(pa * pb);
            CHECK(cross < 0.04); // ~2.6 sigma of the estimator at this length
            sum2 += cross * cross;
        }
    CHECK(std::sqrt(sum2 / 6.0) < 0.022); // estimator RMS, not process correlation
}

TEST_CASE("Rician trace carries the configured LOS power") {
    const int len = 50000;
    const double k_factor = 4.0;
    const ChannelTrace t = generate_trace(FadingSpec::rician(0.05, k_factor), 1, 1, len, 31);
    cd mean_phasor = 0.0;
    double power = 0.0;
    const double step = 2.0 * M_PI * 0.05; // LOS phase advance per sample
    for (int k = 0; k < len; ++k) {
        power += std::norm(t.at(0, 0, k));
        mean_phasor += t.at(0, 0, k) * cd{std::cos(step * k), std::sin(step * k)};
    }
    power /= len;
    mean_phasor /= static_cast<double>(len);
    CHECK(power == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(mean_phasor) == doctest::Approx(std::sqrt(k_factor / (k_factor + 1.0))).epsilon(0.05));
}

TEST_CASE("doppler range from speed and carrier") {
    // 200 m/s at 10 GHz with 15 us sampling: rho = v f_c T_c / c = 0.1.
    const DopplerRangeSpec r = DopplerRangeSpec::from_speed(0.0, 200.0, 10e9, 1.5e-5);
    CHECK(r.rho_min == doctest::Approx(0.0));
    CHECK(r.rho_max == doctest::Approx(0.1));
    r.validate();
    CHECK_THROWS_AS((DopplerRangeSpec{0.05, 0.2}.validate()), ConfigError);
}

TEST_CASE("trace export writes one row per coefficient") {
    const ChannelTrace t = generate_trace(FadingSpec::rayleigh(0.02), 2, 1, 4, 5);
    const std::string path = "trace_test.csv";
    export_trace_csv(t, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "rx,tx,k,re,im");
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2 * 4);
    in.close();
    std::filesystem::remove(path);
}
