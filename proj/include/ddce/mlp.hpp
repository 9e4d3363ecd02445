// Two-hidden-layer real-valued regressors for k-step channel prediction:
// one network for real parts, one for imaginary parts. Everything here is
// self-contained double precision: forward, reverse-mode gradients, Adam,
// dataset synthesis and a versioned text model format.
#ifndef DDCE_MLP_HPP
#define DDCE_MLP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ddce/fading.hpp"

namespace ddce {

// The clipped reading of the unit f(a)=a u(a)+(a-1) u(a-1) saturates at 1;
// the literal sum keeps growing with slope 2 past a=1. Both are supported
// because the printed definition is ambiguous; Clipped is the default.
enum class Activation { Clipped, Literal };

double crelu(double a, Activation act);
double crelu_deriv(double a, Activation act);

struct MlpModel {
    std::vector<int> dims; // layer widths, dims.front() inputs, dims.back() outputs
    Activation activation = Activation::Clipped;
    // Inputs are mapped x -> (x - norm_offset)/norm_scale before the first
    // layer and the inverse is applied after the output layer, so a
    // [0,1]-clipped hidden unit can still pass negative fading values.
    double norm_offset = -3.0;
    double norm_scale = 6.0;
    // Flat parameter vector, per layer W (row-major) then b.
    std::vector<double> params;

    int input_width() const { return dims.front(); }
    int output_width() const { return dims.back(); }
    int layers() const { return static_cast<int>(dims.size()) - 1; }
    size_t w_offset(int layer) const;
    size_t b_offset(int layer) const;

    // Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
    static MlpModel init(std::vector<int> dims, Activation act, uint64_t seed);
};

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x);

// Scratch buffers reused across backward calls.
struct MlpWorkspace {
    std::vector<std::vector<double>> act;   // post-activation per layer (act[0] = normalized input)
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<double> delta_a, delta_b;
};

// Accumulates d(0.5*||forward(x)-target||^2)/dparams into grad (same layout
// as model.params) and returns the loss value.
double backward(const MlpModel& model, const std::vector<double>& x, const std::vector<double>& target,
                std::vector<double>& grad, MlpWorkspace& ws);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainConfig {
    int n_samples = 10000;
    int batch_size = 10;
    int epochs = 200;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    DopplerRangeSpec rho_range{0.001, 0.1};
    uint64_t seed = 1;
};

struct PredictorDims {
    int n_t = 2, n_r = 2, n_p = 10, n_x = 2;
    int input_width() const { return n_t * n_r * n_p; }
    int target_width() const { return n_t * n_r * n_x; }
};

enum class Part { Real, Imag };

// Row j: one channel realization of length n_p+n_x at a Doppler rate drawn
// uniformly from the configured range; inputs are the first n_p time
// indices, targets the final n_x, stacked time-major with receive antennas
// before transmit antennas inside each index.
struct Dataset {
    int input_width = 0;
    int target_width = 0;
    int rows = 0;
    Part part = Part::Real;
    std::vector<double> inputs;  // rows x input_width
    std::vector<double> targets; // rows x target_width

    const double* input_row(int j) const { return inputs.data() + static_cast<size_t>(j) * input_width; }
    const double* target_row(int j) const { return targets.data() + static_cast<size_t>(j) * target_width; }
};

struct ChannelTemplate {
    FadingKind kind = FadingKind::Rayleigh;
    double k_factor = 0.0;
    double f_los = -1.0; // negative: LOS Doppler tracks the drawn rho
    double alpha0 = 0.0;
    double sigma_h2 = 1.0;

    FadingSpec at_rho(double rho) const;
};

Dataset make_dataset(const TrainConfig& cfg, const PredictorDims& dims, const ChannelTemplate& channel,
                     Part part, uint64_t seed);

struct TrainResult {
    MlpModel model;
    std::vector<double> train_loss; // per-epoch mean squared error
    std::vector<double> val_loss;
};

// Mini-batch Adam on a 90/10 train/validation split; deterministic given
// cfg.seed.
TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg);

// Mean squared error of predicting every target entry with the last
// observed value of the same antenna pair. The trained networks must beat
// this to be worth anything.
double zero_order_hold_mse(const Dataset& data, const PredictorDims& dims);

double dataset_mse(const MlpModel& model, const Dataset& data);

struct MlpModelPair {
    MlpModel real_net;
    MlpModel imag_net;
};

// Line-oriented text format, magic "MLPCHPRED v1"; weights with 17
// significant digits so a round trip is bit exact.
void save_model(const MlpModelPair& pair, const std::string& path);
MlpModelPair load_model(const std::string& path);

} // namespace ddce

#endif
