// Joint decoding of one STBC block from per-slot channel predictions:
// exhaustive Gaussian ML metric, plain Euclidean LS, and the rearranged
// Alamouti LS form.
#ifndef DDCE_DECODER_HPP
#define DDCE_DECODER_HPP

#include "ddce/cmatrix.hpp"
#include "ddce/modulation.hpp"
#include "ddce/stbc.hpp"

namespace ddce {

// Received samples of one block stacked slot-major, receive antennas within
// a slot: y_tilde[x*n_r + n] = y(n, slot x).
struct BlockObservation {
    CVector y_tilde;
    double sigma_w2 = 0.0;
};

// Per-slot channel predictions stacked slot-major, receive-major, transmit
// within: upsilon[(x*n_r + n)*n_t + m].
struct ChannelPredictionBlock {
    CVector upsilon;
};

// E(s): block diagonal over slots of I_{n_r} (x) C_{:,slot}^T, so that
// E(s) * upsilon reproduces the noiseless received block.
CMatrix build_block_matrix(const StbcCode& code, const CVector& candidate_symbols, int n_r);

struct DecodeResult {
    std::vector<int> symbol_indices; // n_s constellation labels
    CVector symbols;
    double metric = 0.0;
};

// Candidate spaces larger than this throw SearchBudgetExceeded.
constexpr long long kSearchBudget = 1ll << 20;

// argmin over all |D|^{n_s} candidates of
//   (y - E(s) u)^H Gamma(s)^{-1} (y - E(s) u) + ln|Gamma(s)|,
//   Gamma(s) = E(s) u u^H E(s)^H + sigma_w2 I.
// Ties break toward the lowest candidate enumeration index.
DecodeResult decode_ml_gaussian(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                const StbcCode& code, const Constellation& constellation);

// argmin ||y - E(s) u||^2, same enumeration and tie-breaking.
DecodeResult decode_ls_euclidean(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                 const StbcCode& code, const Constellation& constellation);

// Alamouti only: conjugate-rearranged LS over [y_slot1; conj(y_slot2)].
// Decision-equivalent to decode_ls_euclidean restricted to Alamouti.
DecodeResult decode_alamouti_ls(const BlockObservation& obs, const ChannelPredictionBlock& pred,
                                const StbcCode& code, const Constellation& constellation);

} // namespace ddce

#endif
