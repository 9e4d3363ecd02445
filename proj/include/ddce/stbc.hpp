// Space-time block codes, pilot construction and packet assembly.
//
// Code matrices are stored n_t x n_x so that column k is the antenna vector
// sent in slot k, matching the per-sample system model
// y_k = C_{:,k}^T h_k + w_k.
#ifndef DDCE_STBC_HPP
#define DDCE_STBC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ddce/cmatrix.hpp"
#include "ddce/fading.hpp"
#include "ddce/modulation.hpp"

namespace ddce {

enum class StbcName { Alamouti, Tarokh34, Rate34, SpatialMux };

struct StbcCode {
    StbcName name = StbcName::Alamouti;
    int n_t = 2;
    int n_x = 2;
    int n_s = 2; // information symbols per block

    static StbcCode alamouti();
    static StbcCode tarokh34();
    static StbcCode rate34();
    static StbcCode spatial_mux(int n_t);
};

StbcCode code_by_name(const std::string& name);
std::string to_string(StbcName name);

// s must hold exactly n_s symbols.
CMatrix stbc_encode(const StbcCode& code, const CVector& s);

// First n_t rows of the n_p-point DFT matrix; P*P^H = n_p*I and every entry
// has unit modulus. Requires n_p >= n_t.
CMatrix build_pilot(int n_t, int n_p);

struct Packet {
    StbcCode code;
    int n_p = 0;
    int n_b = 0;
    CMatrix pilot;             // n_t x n_p
    CMatrix c;                 // n_t x L, L = n_b*n_x + n_p
    std::vector<uint8_t> bits; // source bits, n_b*n_s*log2(M)

    int length() const { return c.cols; }
};

// bits must have length n_b*n_s*log2(M); an empty vector means "draw random
// bits from the seed".
Packet build_packet(const StbcCode& code, const Constellation& constellation, int n_b, int n_p,
                    std::vector<uint8_t> bits, uint64_t seed);

// Received samples y(rx, k) = C_{:,k}^T h_k^(rx) + w, w ~ CN(0, sigma_w2),
// deterministic given the seed.
CMatrix apply_channel(const Packet& packet, const ChannelTrace& trace, double sigma_w2, uint64_t seed);

// Debug dump of the transmitted matrix, columns tx,k,re,im.
void export_packet_csv(const Packet& packet, const std::string& path);

} // namespace ddce

#endif
