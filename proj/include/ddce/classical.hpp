// Model-based channel predictors: linear-MMSE (Wiener) one-step and k-step
// prediction from a window of noisy observations with decided symbols, the
// AR(1) Kalman tracker, and the constant-channel hold.
#ifndef DDCE_CLASSICAL_HPP
#define DDCE_CLASSICAL_HPP

#include "ddce/cmatrix.hpp"
#include "ddce/fading.hpp"

namespace ddce {

// Prediction context over a window of `order` consecutive time indices.
// `decided` holds the transmitted (pilot or decision-fed) symbol column for
// each window index. The autocorrelation carries the channel power, so the
// same machinery serves Rayleigh, Rician and injected test processes.
struct WienerContext {
    AutocorrFn autocorr;
    double sigma_w2 = 0.0;
    CMatrix decided; // n_t x order, column per window time index

    int order() const { return decided.cols; }
    int n_t() const { return decided.rows; }

    static WienerContext from_spec(const FadingSpec& spec, double sigma_w2, CMatrix decided);
};

// y holds one observation column per receive antenna (order x n_r). Returns
// the prediction of the channel one index past the window, n_t x n_r.
CMatrix wiener_one_step(const WienerContext& ctx, const CMatrix& y);

// Prediction-error covariance of wiener_one_step, n_t x n_t.
CMatrix wiener_mmse_cov(const WienerContext& ctx);

// Joint prediction of the next `steps` channel vectors; rows are stacked
// time-major (slot 1 antennas, slot 2 antennas, ...). steps = 1 reduces to
// wiener_one_step.
CMatrix wiener_k_step(const WienerContext& ctx, const CMatrix& y, int steps);

// AR(1) tracker state for one receive antenna: h_{k+1} = a h_k + v_k with
// stationary power preserved by the process noise.
struct KalmanState {
    CVector h_hat;  // one-step prediction for the next time index, length n_t
    CMatrix sigma;  // prediction covariance, n_t x n_t
    cd a = 0.0;     // R(1)/R(0)
    double p0 = 1.0; // channel power R(0)
    double sigma_w2 = 0.0;
};

// Pilot-based start: Wiener prediction and covariance over the pilot window.
KalmanState kalman_init_from_pilot(const AutocorrFn& r, double sigma_w2, const CMatrix& pilot,
                                   const CVector& y_pilot);

// Consumes one scalar observation y = c^T h + w and returns the state
// predicting the following time index.
KalmanState kalman_predict_update(const KalmanState& state, cd y, const CVector& decided_c);

// Stacked predictions for the next `steps` indices: [h, a h, a^2 h, ...].
CVector kalman_extrapolate(const KalmanState& state, int steps);

// Zero-order hold across blocks.
CVector cc_predict(const CVector& last_block_estimate);

// Constant-channel MMSE re-estimate over one block: y_block = C^T h + w with
// h held fixed for the block and prior power p0 per coefficient.
CVector cc_block_estimate(const CMatrix& c_block, const CVector& y_block, double sigma_w2, double p0);

} // namespace ddce

#endif
