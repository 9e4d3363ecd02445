// Monte Carlo experiment driver: BER sweeps over SNR/Doppler scenarios,
// the packet-length study, the AWGN calibration gate, per-predictor flop
// counts and CSV reporting.
#ifndef DDCE_HARNESS_HPP
#define DDCE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ddce/pipeline.hpp"

namespace ddce {

struct DopplerScenario {
    std::string name;
    DopplerRangeSpec range;
};

// pedestrians [0, 0.001], cars [0.001, 0.03], trains [0.03, 0.1].
std::vector<DopplerScenario> standard_scenarios();
DopplerScenario scenario_by_name(const std::string& name);

// Predictor selection for a sweep point; "genie" runs the decoder with the
// true channel.
struct PredictorChoice {
    PredictorKind kind = PredictorKind::DlDd;
    bool genie = false;

    static PredictorChoice parse(const std::string& name);
    std::string label() const { return genie ? "genie" : to_string(kind); }
};

struct ExperimentConfig {
    StbcCode code = StbcCode::alamouti();
    Constellation constellation = Constellation::qam(4);
    std::vector<PredictorChoice> predictors;
    DecoderKind decoder = DecoderKind::MlGaussian;
    int n_r = 2;
    int n_p = 10;
    int n_b = 45;
    std::vector<double> snr_db{0, 5, 10, 15, 20};
    long trials = 2000; // packets per point
    std::vector<DopplerScenario> scenarios;
    ChannelTemplate channel;
    uint64_t base_seed = 1;
    int workers = 1;
    bool calibrate = true; // run the AWGN gate before any comparative sweep
    const MlpModelPair* model = nullptr;
};

struct BerRecord {
    std::string scenario;
    double snr_db = 0.0;
    std::string predictor;
    std::string code;
    long trials = 0;
    long long total_bits = 0;
    long long bit_errors = 0;
    double ber = 0.0;
    double wall_time_s = 0.0;
};

struct CalibrationResult {
    double ber = 0.0;
    double expected = 0.0; // Q(sqrt(10)) at 10 dB
    long long bits = 0;
    bool pass = false;
};

// Genie-CSI QPSK over a unit SISO channel at 10 dB; the measured BER must
// sit within +-20% of the analytic value before comparative sweeps run.
CalibrationResult run_calibration(uint64_t seed, long long min_bits = 4000000);

// One record per (scenario, snr, predictor). Throws ConfigError if the
// calibration gate fails.
std::vector<BerRecord> run_ber_sweep(const ExperimentConfig& cfg);

struct PacketLengthRecord {
    double r = 0.0; // n_p / L
    int packet_len = 0;
    int n_b = 0;
    BerRecord ber;
};

// Fixed n_p, varying block count; n_b = 0 rows are skipped with a warning.
std::vector<PacketLengthRecord> run_packet_length_sweep(const ExperimentConfig& cfg,
                                                        const std::vector<int>& n_b_list);

void write_ber_csv(const std::vector<BerRecord>& records, const std::string& path);
std::vector<BerRecord> read_ber_csv(const std::string& path);
void write_packet_length_csv(const std::vector<PacketLengthRecord>& records, const std::string& path);

// Adds binomial std and 95% interval columns; row count is preserved.
void write_report_csv(const std::vector<BerRecord>& records, const std::string& path);

// Config echo + seed + git describe, next to the CSV.
void write_manifest(const std::string& out_path, const std::vector<std::string>& config_lines,
                    uint64_t base_seed);

struct FlopParams {
    long long n_t = 2, n_r = 2, n_x = 2, n_p = 10;
};

// Exact integer flop counts per block prediction for the four predictor
// families: "wiener-np", "dd-cc", "dd-ar1", "dl-dd".
long long flops(const std::string& predictor, const FlopParams& p);

// Single-packet tracking run for the tracking CSV.
struct TrackingConfig {
    PredictorChoice predictor;
    DecoderKind decoder = DecoderKind::MlGaussian;
    StbcCode code = StbcCode::alamouti();
    Constellation constellation = Constellation::qam(4);
    int n_r = 2, n_p = 10, n_b = 45;
    double rho = 0.05;
    DopplerRangeSpec rho_range{0.0, 0.1};
    ChannelTemplate channel;
    double snr_db = 20.0;
    uint64_t seed = 1;
    const MlpModelPair* model = nullptr;
};

void run_tracking(const TrackingConfig& cfg, const std::string& out_path);

} // namespace ddce

#endif
