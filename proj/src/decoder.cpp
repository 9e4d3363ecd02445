#include "ddce/decoder.hpp"

#include <cmath>

#include "ddce/errors.hpp"

namespace ddce {

namespace {

int infer_n_r(const BlockObservation& obs, const ChannelPredictionBlock& pred, const StbcCode& code) {
    if (obs.y_tilde.size() % code.n_x != 0)
        throw DimMismatch("decode: observation length not a multiple of n_x");
    const int n_r = static_cast<int>(obs.y_tilde.size()) / code.n_x;
    if (pred.upsilon.size() != static_cast<size_t>(code.n_t) * n_r * code.n_x)
        throw DimMismatch("decode: prediction length != n_t*n_r*n_x");
    return n_r;
}

void check_budget(const StbcCode& code, const Constellation& constellation) {
    long long candidates = 1;
    for (int i = 0; i < code.n_s; ++i) {
        candidates *= constellation.order;
        if (candidates > kSearchBudget)
            throw SearchBudgetExceeded("decode: |D|^n_s exceeds the search budget");
    }
}

// Noiseless block for a candidate: v[x*n_r + n] = sum_m C(m,x) u[(x*n_r+n)*n_t + m].
void signal_for(const CMatrix& c, const CVector& upsilon, int n_r, CVector& v) {
    const int n_t = c.rows;
    const int n_x = c.cols;
    v.assign(static_cast<size_t>(n_x) * n_r, cd{0.0, 0.0});
    for (int x = 0; x < n_x; ++x)
        for (int n = 0; n < n_r; ++n) {
            cd acc = 0.0;
            const size_t base = (static_cast<size_t>(x) * n_r + n) * n_t;
            for (int m = 0; m < n_t; ++m) acc += c(m, x) * upsilon[base + m];
            v[static_cast<size_t>(x) * n_r + n] = acc;
        }
}

template <typename MetricFn>
DecodeResult exhaustive_argmin(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                               const StbcCode& code, const Constellation& constellation,
                               MetricFn&& metric_of) {
    const int n_r = infer_n_r(obs, pred, code);
    check_budget(code, constellation);

    std::vector<int> idx(code.n_s, 0);
    CVector s(code.n_s);
    CVector v;
    DecodeResult best;
    best.metric = 0.0;
    bool first = true;

    for (;;) {
        for (int i = 0; i < code.n_s; ++i) s[i] = constellation.points[idx[i]];
        const CMatrix c = stbc_encode(code, s);
        signal_for(c, pred.upsilon, n_r, v);
        const double m = metric_of(v);
        if (first || m < best.metric) {
            first = false;
            best.metric = m;
            best.symbol_indices = idx;
            best.symbols = s;
        }
        // next candidate, last symbol fastest
        int pos = code.n_s - 1;
        while (pos >= 0 && ++idx[pos] == constellation.order) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return best;
}

} // namespace

CMatrix build_block_matrix(const StbcCode& code, const CVector& candidate_symbols, int n_r) {
    const CMatrix c = stbc_encode(code, candidate_symbols);
    std::vector<CMatrix> blocks;
    blocks.reserve(code.n_x);
    CMatrix eye_r = CMatrix::identity(n_r);
    for (int x = 0; x < code.n_x; ++x) {
        CMatrix col_t(1, code.n_t);
        for (int m = 0; m < code.n_t; ++m) col_t(0, m) = c(m, x);
        blocks.push_back(kron(eye_r, col_t));
    }
    return block_diag(blocks);
}

DecodeResult decode_ml_gaussian(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                const StbcCode& code, const Constellation& constellation) {
    const int d = static_cast<int>(obs.y_tilde.size());
    return exhaustive_argmin(obs, pred, code, constellation, [&](const CVector& v) {
        CMatrix gamma(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) gamma(i, j) = v[i] * std::conj(v[j]);
            gamma(i, i) += obs.sigma_w2;
        }
        CVector r(d);
        for (int i = 0; i < d; ++i) r[i] = obs.y_tilde[i] - v[i];
        const CMatrix l = cholesky(gamma, 0.0);
        // r^H Gamma^{-1} r = ||L^{-1} r||^2, one forward substitution.
        CVector z = r;
        double logdet = 0.0;
        for (int i = 0; i < d; ++i) {
            cd acc = z[i];
            for (int k = 0; k < i; ++k) acc -= l(i, k) * z[k];
            z[i] = acc / l(i, i);
            logdet += 2.0 * std::log(l(i, i).real());
        }
        double quad = 0.0;
        for (int i = 0; i < d; ++i) quad += std::norm(z[i]);
        return quad + logdet;
    });
}

DecodeResult decode_ls_euclidean(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                 const StbcCode& code, const Constellation& constellation) {
    const int d = static_cast<int>(obs.y_tilde.size());
    return exhaustive_argmin(obs, pred, code, constellation, [&](const CVector& v) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) acc += std::norm(obs.y_tilde[i] - v[i]);
        return acc;
    });
}

DecodeResult decode_alamouti_ls(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                const StbcCode& code, const Constellation& constellation) {
    if (code.name != StbcName::Alamouti) throw WrongCode("decode_alamouti_ls: code must be Alamouti");
    const int n_r = infer_n_r(obs, pred, code);
    check_budget(code, constellation);

    // Rearranged observation: y_breve = [y_slot1; conj(y_slot2)], with
    //   y_slot1^(n)       = h1 s1 + h2 s2
    //   conj(y_slot2^(n)) = conj(h2') s1 - conj(h1') s2
    // where h = slot-1 predictions and h' = slot-2 predictions.
    CVector yb(2 * static_cast<size_t>(n_r));
    CMatrix b(2 * n_r, 2);
    for (int n = 0; n < n_r; ++n) {
        yb[n] = obs.y_tilde[n];
        yb[n_r + n] = std::conj(obs.y_tilde[n_r + n]);
        const size_t s1_base = static_cast<size_t>(n) * code.n_t;                  // slot 1, rx n
        const size_t s2_base = (static_cast<size_t>(n_r) + n) * code.n_t;          // slot 2, rx n
        b(n, 0) = pred.upsilon[s1_base + 0];
        b(n, 1) = pred.upsilon[s1_base + 1];
        b(n_r + n, 0) = std::conj(pred.upsilon[s2_base + 1]);
        b(n_r + n, 1) = -std::conj(pred.upsilon[s2_base + 0]);
    }

    DecodeResult best;
    bool first = true;
    for (int i0 = 0; i0 < constellation.order; ++i0)
        for (int i1 = 0; i1 < constellation.order; ++i1) {
            const cd s1 = constellation.points[i0];
            const cd s2 = constellation.points[i1];
            double m = 0.0;
            for (int row = 0; row < 2 * n_r; ++row)
                m += std::norm(yb[row] - b(row, 0) * s1 - b(row, 1) * s2);
            if (first || m < best.metric) {
                first = false;
                best.metric = m;
                best.symbol_indices = {i0, i1};
                best.symbols = {s1, s2};
            }
        }
    return best;
}

} // namespace ddce
