// Time-varying MIMO fading traces with Jakes-model temporal correlation,
// Rayleigh or Rician, plus the autocorrelation function every model-based
// estimator conditions on.
#ifndef DDCE_FADING_HPP
#define DDCE_FADING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ddce/cmatrix.hpp"

namespace ddce {

enum class FadingKind { Rayleigh, Rician };

struct FadingSpec {
    FadingKind kind = FadingKind::Rayleigh;
    double rho = 0.0;      // Doppler rate per sample
    double k_factor = 0.0; // Rician K, 0 for Rayleigh
    double f_los = 0.0;    // LOS normalized Doppler per sample
    double alpha0 = 0.0;   // LOS arrival angle [rad]
    double sigma_h2 = 1.0; // diffuse (NLOS) average power

    static FadingSpec rayleigh(double rho, double sigma_h2 = 1.0);
    // Unspecified LOS parameters default to a single ray at maximum Doppler.
    static FadingSpec rician(double rho, double k_factor, double f_los = -1.0, double alpha0 = 0.0,
                             double sigma_h2 = 1.0);

    void validate() const; // throws ConfigError
};

struct DopplerRangeSpec {
    double rho_min = 0.0;
    double rho_max = 0.0;

    double midpoint() const { return 0.5 * (rho_min + rho_max); }
    static DopplerRangeSpec from_speed(double v_min_mps, double v_max_mps, double carrier_hz,
                                       double sample_time_s);
    void validate() const;
};

// h[ (rx*n_t + tx)*len + k ]: fading coefficient for receive antenna rx,
// transmit antenna tx, time index k. Pairs are generated from independent
// random streams.
struct ChannelTrace {
    int n_t = 0;
    int n_r = 0;
    int len = 0;
    double rho_used = 0.0;
    std::vector<cd> h;

    cd at(int rx, int tx, int k) const { return h[(static_cast<size_t>(rx) * n_t + tx) * len + k]; }
    cd& at(int rx, int tx, int k) { return h[(static_cast<size_t>(rx) * n_t + tx) * len + k]; }
};

using AutocorrFn = std::function<cd(int lag)>;

// E{h_{k} h_{k-lag}^*} for the spec'd model: the diffuse part follows
// J0(2*pi*rho*|lag|), a Rician LOS ray adds a rotating phasor of power
// K/(K+1).
cd jakes_autocorr(const FadingSpec& spec, int lag);

AutocorrFn autocorr_of(const FadingSpec& spec);

// n x n Hermitian Toeplitz matrix, entry (i,j) = R(i-j).
CMatrix corr_matrix(const AutocorrFn& r, int n);
CMatrix corr_matrix(const FadingSpec& spec, int n);

// [R(v), R(v-1), ..., R(u)] with 1 <= u <= v (descending lag order).
CVector corr_vector(const AutocorrFn& r, int u, int v);
CVector corr_vector(const FadingSpec& spec, int u, int v);

// Stationary trace generation, deterministic given the seed. Coefficients
// for distinct antenna pairs come from independent streams derived from the
// same seed.
ChannelTrace generate_trace(const FadingSpec& spec, int n_t, int n_r, int len, uint64_t seed);

// All-ones trace; AWGN-only calibration channel.
ChannelTrace unit_trace(int n_t, int n_r, int len);

// CSV with header rx,tx,k,re,im.
void export_trace_csv(const ChannelTrace& trace, const std::string& path);

} // namespace ddce

#endif
