#include "ddce/pipeline.hpp"

#include <cassert>
#include <cmath>
#include <fstream>

#include "ddce/errors.hpp"
#include "ddce/rng.hpp"

namespace ddce {

PredictorKind predictor_by_name(const std::string& name) {
    if (name == "dl-dd") return PredictorKind::DlDd;
    if (name == "wiener-np") return PredictorKind::WienerNp;
    if (name == "kalman-ar1" || name == "dd-ar1") return PredictorKind::KalmanAr1;
    if (name == "cc" || name == "dd-cc") return PredictorKind::ConstantChannel;
    throw UnknownPredictor("unknown predictor: " + name);
}

DecoderKind decoder_by_name(const std::string& name) {
    if (name == "ml-gaussian") return DecoderKind::MlGaussian;
    if (name == "ls-euclidean") return DecoderKind::LsEuclidean;
    if (name == "alamouti-ls") return DecoderKind::AlamoutiLs;
    throw ConfigError("unknown decoder: " + name);
}

std::string to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::DlDd: return "dl-dd";
        case PredictorKind::WienerNp: return "wiener-np";
        case PredictorKind::KalmanAr1: return "dd-ar1";
        case PredictorKind::ConstantChannel: return "dd-cc";
    }
    return "?";
}

std::string to_string(DecoderKind kind) {
    switch (kind) {
        case DecoderKind::MlGaussian: return "ml-gaussian";
        case DecoderKind::LsEuclidean: return "ls-euclidean";
        case DecoderKind::AlamoutiLs: return "alamouti-ls";
    }
    return "?";
}

namespace {

// Window MMSE for one receive antenna. With the stacked window channel
// (time-major, transmit within an index) the covariance is
// Omega = R_time (x) I_{n_t} and the observation map is block diagonal over
// indices with rows c_t^T, so everything reduces to small closed-form
// assemblies:
//   M(t,t')        = R(t-t') c_t^T conj(c_t') + sigma_w2 delta
//   (Omega E^H)(t m, t') = R(t-t') conj(c_{m,t'}).
// Receive antennas are independent and share M, so the factorization is
// reused across them.
struct WindowMmse {
    // decided: n_t x w, y: w x n_r. Returns (w*n_t) x n_r estimates.
    static CMatrix estimate(const CMatrix& decided, const CMatrix& y, const AutocorrFn& r,
                            double sigma_w2) {
        const int w = decided.cols;
        const int n_t = decided.rows;
        std::vector<cd> rlag(w);
        for (int lag = 0; lag < w; ++lag) rlag[lag] = r(lag);
        auto rr = [&](int lag) { return lag >= 0 ? rlag[lag] : std::conj(rlag[-lag]); };

        CMatrix m(w, w);
        for (int i = 0; i < w; ++i) {
            for (int j = 0; j < w; ++j) {
                cd dot = 0.0;
                for (int mm = 0; mm < n_t; ++mm) dot += decided(mm, i) * std::conj(decided(mm, j));
                m(i, j) = rr(i - j) * dot;
            }
            m(i, i) += sigma_w2;
        }
        const CMatrix sol = hermitian_solve(m, y); // w x n_r

        CMatrix est(w * n_t, y.cols);
        for (int t = 0; t < w; ++t)
            for (int mm = 0; mm < n_t; ++mm)
                for (int tp = 0; tp < w; ++tp) {
                    const cd g = rr(t - tp) * std::conj(decided(mm, tp));
                    if (g == cd{}) continue;
                    for (int n = 0; n < y.cols; ++n) est(t * n_t + mm, n) += g * sol(tp, n);
                }
        return est;
    }
};

} // namespace

SlidingWindow init_from_pilot(const CMatrix& y_pilot, const CMatrix& pilot, const AutocorrFn& r,
                              double sigma_w2) {
    if (y_pilot.cols != pilot.cols) throw DimMismatch("init_from_pilot: pilot spans disagree");
    const int n_p = pilot.cols;
    const int n_t = pilot.rows;
    const int n_r = y_pilot.rows;

    CMatrix y(n_p, n_r); // time rows, antenna columns
    for (int n = 0; n < n_r; ++n)
        for (int t = 0; t < n_p; ++t) y(t, n) = y_pilot(n, t);
    const CMatrix est = WindowMmse::estimate(pilot, y, r, sigma_w2);

    SlidingWindow win;
    win.start_index = 0;
    win.n_p = n_p;
    win.n_r = n_r;
    win.n_t = n_t;
    win.estimates.resize(static_cast<size_t>(n_p) * n_r * n_t);
    for (int t = 0; t < n_p; ++t)
        for (int n = 0; n < n_r; ++n)
            for (int m = 0; m < n_t; ++m)
                win.estimates[(static_cast<size_t>(t) * n_r + n) * n_t + m] = est(t * n_t + m, n);
    return win;
}

SlidingWindow rmmse_update(const SlidingWindow& window, const CMatrix& y_window,
                           const CMatrix& decided_window, const AutocorrFn& r, double sigma_w2,
                           int new_start) {
    if (decided_window.cols != window.n_p || y_window.cols != window.n_p)
        throw DimMismatch("rmmse_update: window spans disagree");
    const int n_p = window.n_p;
    const int n_t = window.n_t;
    const int n_r = window.n_r;

    CMatrix y(n_p, n_r);
    for (int n = 0; n < n_r; ++n)
        for (int t = 0; t < n_p; ++t) y(t, n) = y_window(n, t);
    const CMatrix est = WindowMmse::estimate(decided_window, y, r, sigma_w2);

    SlidingWindow next = window;
    next.start_index = new_start;
    for (int t = 0; t < n_p; ++t)
        for (int n = 0; n < n_r; ++n)
            for (int m = 0; m < n_t; ++m)
                next.estimates[(static_cast<size_t>(t) * n_r + n) * n_t + m] = est(t * n_t + m, n);
    return next;
}

ChannelPredictionBlock predict_block_dl(const SlidingWindow& window, const MlpModelPair& model, int n_x) {
    const size_t u = window.estimates.size();
    std::vector<double> re(u), im(u);
    for (size_t i = 0; i < u; ++i) {
        re[i] = window.estimates[i].real();
        im[i] = window.estimates[i].imag();
    }
    const std::vector<double> pre = forward(model.real_net, re);
    const std::vector<double> pim = forward(model.imag_net, im);

    ChannelPredictionBlock block;
    block.upsilon.resize(static_cast<size_t>(n_x) * window.n_r * window.n_t);
    if (pre.size() != block.upsilon.size() || pim.size() != block.upsilon.size())
        throw ShapeMismatch("predict_block_dl: model output width != n_t*n_r*n_x");
    for (size_t i = 0; i < block.upsilon.size(); ++i) block.upsilon[i] = cd{pre[i], pim[i]};
    return block;
}

namespace {

struct WienerWindow {
    std::vector<int> times;       // absolute packet time per entry
    bool full_history = false;
    int n_p = 0;

    void push_time(int t) {
        times.push_back(t);
        if (!full_history && static_cast<int>(times.size()) > n_p)
            times.erase(times.begin(), times.end() - n_p);
    }
};

CVector column_of(const CMatrix& m, int col) {
    CVector v(m.rows);
    for (int i = 0; i < m.rows; ++i) v[i] = m(i, col);
    return v;
}

} // namespace

PacketResult run_packet(const PipelineConfig& cfg, const ChannelTrace& trace,
                        const std::vector<uint8_t>& bits) {
    const StbcCode& code = cfg.code;
    const int n_x = code.n_x;
    const int n_r = cfg.n_r;
    const int l = cfg.packet_length();
    if (trace.n_t != code.n_t || trace.n_r != n_r || trace.len != l)
        throw DimMismatch("run_packet: trace does not match configuration");
    if (cfg.predictor == PredictorKind::DlDd && !cfg.genie_csi && cfg.model == nullptr)
        throw MissingModel("run_packet: dl-dd predictor requires model_path");

    const Packet packet = build_packet(code, cfg.constellation, cfg.n_b, cfg.n_p, bits,
                                       mix_seed(cfg.seed, 0x62ull));
    const CMatrix y = apply_channel(packet, trace, cfg.sigma_w2, mix_seed(cfg.seed, 0x77ull));

    // The neural path must stay unreachable from the exact Doppler rate;
    // only baselines build their statistics from rho_true.
    const bool is_dl = cfg.predictor == PredictorKind::DlDd;
    const AutocorrFn r_update = autocorr_of(
        cfg.channel.at_rho(is_dl ? cfg.rho_range.midpoint() : cfg.rho_true));

    // Decided symbol matrix; pilot columns are known, data columns are
    // filled in as blocks are decoded.
    CMatrix decided(code.n_t, l);
    for (int m = 0; m < code.n_t; ++m)
        for (int t = 0; t < cfg.n_p; ++t) decided(m, t) = packet.pilot(m, t);

    PacketResult result;
    result.n_t = code.n_t;
    result.n_r = n_r;
    result.n_x = n_x;
    result.n_b = cfg.n_b;
    result.n_p = cfg.n_p;
    result.predicted.resize(static_cast<size_t>(cfg.n_b) * n_x * n_r * code.n_t);
    result.decoded_bits.reserve(packet.bits.size());
    result.block_metrics.reserve(cfg.n_b);

    // Predictor state.
    SlidingWindow window;
    WienerWindow wiener_win;
    std::vector<KalmanState> kalman(n_r);
    std::vector<CVector> cc_hat(n_r);

    CMatrix y_pilot(n_r, cfg.n_p);
    for (int n = 0; n < n_r; ++n)
        for (int t = 0; t < cfg.n_p; ++t) y_pilot(n, t) = y(n, t);

    if (!cfg.genie_csi) {
        switch (cfg.predictor) {
            case PredictorKind::DlDd:
                window = init_from_pilot(y_pilot, packet.pilot, r_update, cfg.sigma_w2);
                break;
            case PredictorKind::WienerNp:
                wiener_win.full_history = cfg.full_history_wiener;
                wiener_win.n_p = cfg.n_p;
                for (int t = 0; t < cfg.n_p; ++t) wiener_win.times.push_back(t);
                break;
            case PredictorKind::KalmanAr1:
                for (int n = 0; n < n_r; ++n) {
                    CVector yp(cfg.n_p);
                    for (int t = 0; t < cfg.n_p; ++t) yp[t] = y(n, t);
                    kalman[n] = kalman_init_from_pilot(r_update, cfg.sigma_w2, packet.pilot, yp);
                }
                break;
            case PredictorKind::ConstantChannel:
                for (int n = 0; n < n_r; ++n) {
                    CVector yp(cfg.n_p);
                    for (int t = 0; t < cfg.n_p; ++t) yp[t] = y(n, t);
                    cc_hat[n] = cc_block_estimate(packet.pilot, yp, cfg.sigma_w2,
                                                  r_update(0).real());
                }
                break;
        }
    }

    const int bits_per_block = code.n_s * cfg.constellation.bits_per_symbol;
    for (int k = 0; k < cfg.n_b; ++k) {
        const int t0 = cfg.n_p + k * n_x;

        // Prediction for the block's n_x slots.
        ChannelPredictionBlock pred;
        pred.upsilon.assign(static_cast<size_t>(n_x) * n_r * code.n_t, cd{0.0, 0.0});
        if (cfg.genie_csi) {
            for (int x = 0; x < n_x; ++x)
                for (int n = 0; n < n_r; ++n)
                    for (int m = 0; m < code.n_t; ++m)
                        pred.upsilon[(static_cast<size_t>(x) * n_r + n) * code.n_t + m] =
                            trace.at(n, m, t0 + x);
        } else {
            switch (cfg.predictor) {
                case PredictorKind::DlDd:
                    pred = predict_block_dl(window, *cfg.model, n_x);
                    break;
                case PredictorKind::WienerNp: {
                    const int w = static_cast<int>(wiener_win.times.size());
                    WienerContext ctx;
                    ctx.autocorr = r_update;
                    ctx.sigma_w2 = cfg.sigma_w2;
                    ctx.decided = CMatrix(code.n_t, w);
                    CMatrix yw(w, n_r);
                    for (int j = 0; j < w; ++j) {
                        const int t = wiener_win.times[j];
                        for (int m = 0; m < code.n_t; ++m) ctx.decided(m, j) = decided(m, t);
                        for (int n = 0; n < n_r; ++n) yw(j, n) = y(n, t);
                    }
                    const CMatrix g = wiener_k_step(ctx, yw, n_x); // (n_t*n_x) x n_r
                    for (int x = 0; x < n_x; ++x)
                        for (int n = 0; n < n_r; ++n)
                            for (int m = 0; m < code.n_t; ++m)
                                pred.upsilon[(static_cast<size_t>(x) * n_r + n) * code.n_t + m] =
                                    g(x * code.n_t + m, n);
                    break;
                }
                case PredictorKind::KalmanAr1:
                    for (int n = 0; n < n_r; ++n) {
                        const CVector g = kalman_extrapolate(kalman[n], n_x);
                        for (int x = 0; x < n_x; ++x)
                            for (int m = 0; m < code.n_t; ++m)
                                pred.upsilon[(static_cast<size_t>(x) * n_r + n) * code.n_t + m] =
                                    g[static_cast<size_t>(x) * code.n_t + m];
                    }
                    break;
                case PredictorKind::ConstantChannel:
                    for (int n = 0; n < n_r; ++n) {
                        const CVector hold = cc_predict(cc_hat[n]);
                        for (int x = 0; x < n_x; ++x)
                            for (int m = 0; m < code.n_t; ++m)
                                pred.upsilon[(static_cast<size_t>(x) * n_r + n) * code.n_t + m] = hold[m];
                    }
                    break;
            }
        }
        std::copy(pred.upsilon.begin(), pred.upsilon.end(),
                  result.predicted.begin() + static_cast<size_t>(k) * n_x * n_r * code.n_t);

        // Decode the block.
        BlockObservation obs;
        obs.sigma_w2 = cfg.sigma_w2;
        obs.y_tilde.resize(static_cast<size_t>(n_x) * n_r);
        for (int x = 0; x < n_x; ++x)
            for (int n = 0; n < n_r; ++n) obs.y_tilde[static_cast<size_t>(x) * n_r + n] = y(n, t0 + x);

        DecodeResult dec;
        switch (cfg.decoder) {
            case DecoderKind::MlGaussian:
                dec = decode_ml_gaussian(obs, pred, code, cfg.constellation);
                break;
            case DecoderKind::LsEuclidean:
                dec = decode_ls_euclidean(obs, pred, code, cfg.constellation);
                break;
            case DecoderKind::AlamoutiLs:
                dec = decode_alamouti_ls(obs, pred, code, cfg.constellation);
                break;
        }
        result.block_metrics.push_back(dec.metric);

        for (int i = 0; i < code.n_s; ++i) {
            const auto sb = symbol_bits(cfg.constellation, dec.symbol_indices[i]);
            result.decoded_bits.insert(result.decoded_bits.end(), sb.begin(), sb.end());
        }
        for (size_t i = static_cast<size_t>(k) * bits_per_block;
             i < static_cast<size_t>(k + 1) * bits_per_block; ++i)
            if (result.decoded_bits[i] != packet.bits[i]) ++result.bit_errors;

        // Feed the decision back.
        const CMatrix cbar = stbc_encode(code, dec.symbols);
        for (int m = 0; m < code.n_t; ++m)
            for (int x = 0; x < n_x; ++x) decided(m, t0 + x) = cbar(m, x);

        if (cfg.genie_csi) continue;

        // Update stage: refresh the window covering the n_p indices that end
        // with this block.
        int ustart = (k + 1) * n_x;
        if (ustart + cfg.n_p > l) ustart = l - cfg.n_p; // tail clamp
        switch (cfg.predictor) {
            case PredictorKind::DlDd: {
                CMatrix yw(n_r, cfg.n_p), dw(code.n_t, cfg.n_p);
                for (int t = 0; t < cfg.n_p; ++t) {
                    for (int n = 0; n < n_r; ++n) yw(n, t) = y(n, ustart + t);
                    for (int m = 0; m < code.n_t; ++m) dw(m, t) = decided(m, ustart + t);
                }
                window = rmmse_update(window, yw, dw, r_update, cfg.sigma_w2, ustart);
                assert(window.start_index == ustart);
                break;
            }
            case PredictorKind::WienerNp:
                for (int x = 0; x < n_x; ++x) wiener_win.push_time(t0 + x);
                break;
            case PredictorKind::KalmanAr1:
                for (int x = 0; x < n_x; ++x)
                    for (int n = 0; n < n_r; ++n)
                        kalman[n] = kalman_predict_update(kalman[n], y(n, t0 + x),
                                                          column_of(decided, t0 + x));
                break;
            case PredictorKind::ConstantChannel: {
                CMatrix cblk(code.n_t, n_x);
                for (int m = 0; m < code.n_t; ++m)
                    for (int x = 0; x < n_x; ++x) cblk(m, x) = decided(m, t0 + x);
                for (int n = 0; n < n_r; ++n) {
                    CVector yb(n_x);
                    for (int x = 0; x < n_x; ++x) yb[x] = y(n, t0 + x);
                    cc_hat[n] = cc_block_estimate(cblk, yb, cfg.sigma_w2, r_update(0).real());
                }
                break;
            }
        }
    }
    return result;
}

void export_tracking_csv(const PacketResult& result, const ChannelTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open tracking output: " + path);
    out << "k,rx,tx,true_re,true_im,pred_re,pred_im,amp_true,amp_pred,phase_true,phase_pred\n";
    char buf[256];
    const int data_len = result.n_b * result.n_x;
    for (int d = 0; d < data_len; ++d) {
        const int k = result.n_p + d;
        for (int rx = 0; rx < result.n_r; ++rx)
            for (int tx = 0; tx < result.n_t; ++tx) {
                const cd t = trace.at(rx, tx, k);
                const cd p = result.predicted_at(d, rx, tx);
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                              k, rx, tx, t.real(), t.imag(), p.real(), p.imag(), std::abs(t), std::abs(p),
                              std::arg(t), std::arg(p));
                out << buf;
            }
    }
}

} // namespace ddce
