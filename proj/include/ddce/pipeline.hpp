// Per-packet decision-directed channel estimation loop: pilot-based
// initialization, predictor-driven k-step prediction, block decoding, and
// the reduced-MMSE update that refreshes the sliding window after every
// decoded block. Predictor and decoder are pluggable.
//
// Knowledge protocol: the neural predictor path only ever sees the Doppler
// *range* (its midpoint drives the update covariance), while the model-based
// baselines receive the exact per-packet Doppler rate.
#ifndef DDCE_PIPELINE_HPP
#define DDCE_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ddce/classical.hpp"
#include "ddce/decoder.hpp"
#include "ddce/mlp.hpp"
#include "ddce/stbc.hpp"

namespace ddce {

enum class PredictorKind { DlDd, WienerNp, KalmanAr1, ConstantChannel };
enum class DecoderKind { MlGaussian, LsEuclidean, AlamoutiLs };

PredictorKind predictor_by_name(const std::string& name);
DecoderKind decoder_by_name(const std::string& name);
std::string to_string(PredictorKind kind);
std::string to_string(DecoderKind kind);

struct PipelineConfig {
    StbcCode code = StbcCode::alamouti();
    Constellation constellation = Constellation::qam(4);
    PredictorKind predictor = PredictorKind::DlDd;
    DecoderKind decoder = DecoderKind::MlGaussian;
    int n_r = 2;
    int n_p = 10;
    int n_b = 45;
    DopplerRangeSpec rho_range{0.0, 0.1}; // what the neural path knows
    double rho_true = 0.0;                // what baselines are given
    ChannelTemplate channel;
    double sigma_w2 = 0.0;
    uint64_t seed = 0;           // noise stream (and bits when none are passed)
    bool genie_csi = false;      // decoder sees the true channel
    bool full_history_wiener = false;
    const MlpModelPair* model = nullptr; // required for PredictorKind::DlDd

    int packet_length() const { return n_b * code.n_x + n_p; }
};

// Last n_p updated channel estimates, time-major with receive antennas
// before transmit antennas inside each index. start_index is the absolute
// packet time of the window head; the window for block k (0-based) covers
// indices k*n_x .. k*n_x + n_p - 1.
struct SlidingWindow {
    int start_index = 0;
    int n_p = 0, n_r = 0, n_t = 0;
    std::vector<cd> estimates;

    cd at(int t_rel, int rx, int tx) const {
        return estimates[(static_cast<size_t>(t_rel) * n_r + rx) * n_t + tx];
    }
};

struct PacketResult {
    std::vector<uint8_t> decoded_bits;
    long bit_errors = 0;
    std::vector<double> block_metrics;
    // Per data index predictions, time-major rx-major tx-minor: entry
    // ((k*n_x + x)*n_r + rx)*n_t + tx for block k slot x.
    std::vector<cd> predicted;
    int n_t = 0, n_r = 0, n_x = 0, n_b = 0, n_p = 0;

    cd predicted_at(int data_index, int rx, int tx) const {
        return predicted[(static_cast<size_t>(data_index) * n_r + rx) * n_t + tx];
    }
};

// MMSE estimate of the channel at each pilot index from the pilot
// observations; the window covariance is built from the supplied
// autocorrelation (midpoint rate for the neural path, exact rate for
// baselines).
SlidingWindow init_from_pilot(const CMatrix& y_pilot, const CMatrix& pilot, const AutocorrFn& r,
                              double sigma_w2);

// One reduced-MMSE refresh: re-estimates the n_p window indices starting at
// new_start from the raw observations and decided symbols over that span.
SlidingWindow rmmse_update(const SlidingWindow& window, const CMatrix& y_window,
                           const CMatrix& decided_window, const AutocorrFn& r, double sigma_w2,
                           int new_start);

// Neural k-step prediction from a full window (both parts recombined).
ChannelPredictionBlock predict_block_dl(const SlidingWindow& window, const MlpModelPair& model, int n_x);

PacketResult run_packet(const PipelineConfig& cfg, const ChannelTrace& trace,
                        const std::vector<uint8_t>& bits);

// Tracking export: per data index true vs predicted coefficients.
// Columns k,rx,tx,true_re,true_im,pred_re,pred_im,amp_true,amp_pred,
// phase_true,phase_pred.
void export_tracking_csv(const PacketResult& result, const ChannelTrace& trace, const std::string& path);

} // namespace ddce

#endif
