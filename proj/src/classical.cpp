#include "ddce/classical.hpp"

#include <cmath>

#include "ddce/errors.hpp"

namespace ddce {

WienerContext WienerContext::from_spec(const FadingSpec& spec, double sigma_w2, CMatrix decided) {
    WienerContext ctx;
    ctx.autocorr = autocorr_of(spec);
    ctx.sigma_w2 = sigma_w2;
    ctx.decided = std::move(decided);
    return ctx;
}

namespace {

constexpr double kZeroColumnTol = 1e-300;

// Window indices whose decided column is usable; an all-zero column carries
// no information and would make the observation covariance singular at
// sigma_w2 = 0.
std::vector<int> active_indices(const CMatrix& decided) {
    std::vector<int> idx;
    for (int t = 0; t < decided.cols; ++t) {
        double mag = 0.0;
        for (int m = 0; m < decided.rows; ++m) mag += std::abs(decided(m, t));
        if (mag > kZeroColumnTol) idx.push_back(t);
    }
    return idx;
}

// Observation covariance over the active window rows:
// M(i,j) = R(t_i - t_j) * c_{t_i}^T conj(c_{t_j}) + sigma_w2 * delta_ij.
CMatrix observation_cov(const WienerContext& ctx, const std::vector<int>& act) {
    const int w = static_cast<int>(act.size());
    CMatrix m(w, w);
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
            cd dot = 0.0;
            for (int mm = 0; mm < ctx.n_t(); ++mm)
                dot += ctx.decided(mm, act[i]) * std::conj(ctx.decided(mm, act[j]));
            m(i, j) = ctx.autocorr(act[i] - act[j]) * dot;
        }
        m(i, i) += ctx.sigma_w2;
    }
    return m;
}

// Cross covariance between stacked targets (time-major, antennas within a
// slot) and the active observations:
// B(p, j) = R(target_time(p) - t_j) * conj(c_{m(p), t_j}),
// target_time(p) = order + s for target slot s.
CMatrix cross_cov(const WienerContext& ctx, const std::vector<int>& act, int steps) {
    const int n_t = ctx.n_t();
    CMatrix b(steps * n_t, static_cast<int>(act.size()));
    for (int s = 0; s < steps; ++s) {
        const int target_time = ctx.order() + s;
        for (int m = 0; m < n_t; ++m)
            for (size_t j = 0; j < act.size(); ++j)
                b(s * n_t + m, static_cast<int>(j)) =
                    ctx.autocorr(target_time - act[j]) * std::conj(ctx.decided(m, act[j]));
    }
    return b;
}

} // namespace

CMatrix wiener_k_step(const WienerContext& ctx, const CMatrix& y, int steps) {
    if (steps < 1) throw BadDims("wiener_k_step: steps must be >= 1");
    if (y.rows != ctx.order()) throw DimMismatch("wiener_k_step: observation rows != window length");
    const std::vector<int> act = active_indices(ctx.decided);
    const int n_t = ctx.n_t();
    if (act.empty()) return CMatrix(steps * n_t, y.cols); // no information: prior mean

    const CMatrix m = observation_cov(ctx, act);
    const CMatrix b = cross_cov(ctx, act, steps);
    // gain^H = M^{-1} B^H, so prediction = gain * y = (M^{-1} B^H)^H y.
    const CMatrix gain_h = hermitian_solve(m, adjoint(b));

    CMatrix y_act(static_cast<int>(act.size()), y.cols);
    for (size_t i = 0; i < act.size(); ++i)
        for (int c = 0; c < y.cols; ++c) y_act(static_cast<int>(i), c) = y(act[i], c);
    return mul(adjoint(gain_h), y_act);
}

CMatrix wiener_one_step(const WienerContext& ctx, const CMatrix& y) { return wiener_k_step(ctx, y, 1); }

CMatrix wiener_mmse_cov(const WienerContext& ctx) {
    const int n_t = ctx.n_t();
    CMatrix prior(n_t, n_t);
    const cd p0 = ctx.autocorr(0);
    for (int i = 0; i < n_t; ++i) prior(i, i) = p0;

    const std::vector<int> act = active_indices(ctx.decided);
    if (act.empty()) return prior;

    const CMatrix m = observation_cov(ctx, act);
    const CMatrix b = cross_cov(ctx, act, 1);
    const CMatrix bh = adjoint(b);
    const CMatrix s = hermitian_solve(m, bh); // M^{-1} B^H
    const CMatrix red = mul(b, s);            // B M^{-1} B^H
    for (int i = 0; i < n_t; ++i)
        for (int j = 0; j < n_t; ++j) prior(i, j) -= red(i, j);
    return prior;
}

KalmanState kalman_init_from_pilot(const AutocorrFn& r, double sigma_w2, const CMatrix& pilot,
                                   const CVector& y_pilot) {
    WienerContext ctx;
    ctx.autocorr = r;
    ctx.sigma_w2 = sigma_w2;
    ctx.decided = pilot;

    CMatrix y(pilot.cols, 1);
    if (static_cast<int>(y_pilot.size()) != pilot.cols)
        throw DimMismatch("kalman_init_from_pilot: observation length != pilot length");
    for (int t = 0; t < pilot.cols; ++t) y(t, 0) = y_pilot[t];

    KalmanState st;
    const CMatrix h = wiener_one_step(ctx, y);
    st.h_hat.resize(pilot.rows);
    for (int m = 0; m < pilot.rows; ++m) st.h_hat[m] = h(m, 0);
    st.sigma = wiener_mmse_cov(ctx);
    st.p0 = r(0).real();
    st.a = st.p0 != 0.0 ? r(1) / st.p0 : cd{0.0, 0.0};
    st.sigma_w2 = sigma_w2;
    return st;
}

KalmanState kalman_predict_update(const KalmanState& state, cd y, const CVector& decided_c) {
    const int n_t = static_cast<int>(state.h_hat.size());
    if (static_cast<int>(decided_c.size()) != n_t)
        throw DimMismatch("kalman_predict_update: decided symbol length != n_t");

    // u = Sigma c*, innovation variance s = c^T Sigma c* + sigma_w2.
    CVector u(n_t, cd{0.0, 0.0});
    for (int i = 0; i < n_t; ++i)
        for (int j = 0; j < n_t; ++j) u[i] += state.sigma(i, j) * std::conj(decided_c[j]);
    cd s_c = state.sigma_w2;
    for (int i = 0; i < n_t; ++i) s_c += decided_c[i] * u[i];
    const double s = s_c.real();
    if (!(s > 0.0)) throw NotPositiveDefinite("kalman_predict_update: nonpositive innovation variance");

    cd innovation = y;
    for (int i = 0; i < n_t; ++i) innovation -= decided_c[i] * state.h_hat[i];

    KalmanState next = state;
    for (int i = 0; i < n_t; ++i) next.h_hat[i] = state.a * (state.h_hat[i] + u[i] / s * innovation);

    const double a2 = std::norm(state.a);
    const double q = state.p0 * (1.0 - a2); // keeps stationary channel power
    next.sigma = CMatrix(n_t, n_t);
    for (int i = 0; i < n_t; ++i) {
        for (int j = 0; j < n_t; ++j)
            next.sigma(i, j) = a2 * (state.sigma(i, j) - u[i] * std::conj(u[j]) / s);
        next.sigma(i, i) += q;
    }
    return next;
}

CVector kalman_extrapolate(const KalmanState& state, int steps) {
    const int n_t = static_cast<int>(state.h_hat.size());
    CVector out(static_cast<size_t>(steps) * n_t);
    cd scale = 1.0;
    for (int s = 0; s < steps; ++s) {
        for (int m = 0; m < n_t; ++m) out[static_cast<size_t>(s) * n_t + m] = scale * state.h_hat[m];
        scale *= state.a;
    }
    return out;
}

CVector cc_predict(const CVector& last_block_estimate) { return last_block_estimate; }

CVector cc_block_estimate(const CMatrix& c_block, const CVector& y_block, double sigma_w2, double p0) {
    const int n_t = c_block.rows;
    const int n_x = c_block.cols;
    if (static_cast<int>(y_block.size()) != n_x)
        throw DimMismatch("cc_block_estimate: observation length != block length");

    // y = M h + w with M = C^T; MMSE with prior CN(0, p0 I):
    // h = p0 M^H (p0 M M^H + sigma_w2 I)^{-1} y.
    CMatrix gram(n_x, n_x);
    for (int i = 0; i < n_x; ++i) {
        for (int j = 0; j < n_x; ++j) {
            cd dot = 0.0;
            for (int m = 0; m < n_t; ++m) dot += c_block(m, i) * std::conj(c_block(m, j));
            gram(i, j) = p0 * dot;
        }
        gram(i, i) += sigma_w2;
    }
    const CVector t = hermitian_solve(gram, y_block);
    CVector h(n_t, cd{0.0, 0.0});
    for (int m = 0; m < n_t; ++m) {
        cd acc = 0.0;
        for (int i = 0; i < n_x; ++i) acc += std::conj(c_block(m, i)) * t[i];
        h[m] = p0 * acc;
    }
    return h;
}

} // namespace ddce
