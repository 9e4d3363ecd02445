#include "ddce/stbc.hpp"

#include <cmath>
#include <fstream>

#include "ddce/errors.hpp"
#include "ddce/rng.hpp"

namespace ddce {

StbcCode StbcCode::alamouti() { return {StbcName::Alamouti, 2, 2, 2}; }
StbcCode StbcCode::tarokh34() { return {StbcName::Tarokh34, 3, 4, 3}; }
StbcCode StbcCode::rate34() { return {StbcName::Rate34, 3, 4, 3}; }
StbcCode StbcCode::spatial_mux(int n_t) { return {StbcName::SpatialMux, n_t, 1, n_t}; }

StbcCode code_by_name(const std::string& name) {
    if (name == "alamouti") return StbcCode::alamouti();
    if (name == "tarokh34") return StbcCode::tarokh34();
    if (name == "rate34") return StbcCode::rate34();
    if (name == "smux1") return StbcCode::spatial_mux(1);
    if (name == "smux2") return StbcCode::spatial_mux(2);
    if (name == "smux3") return StbcCode::spatial_mux(3);
    if (name == "smux4") return StbcCode::spatial_mux(4);
    throw ConfigError("unknown code: " + name);
}

std::string to_string(StbcName name) {
    switch (name) {
        case StbcName::Alamouti: return "alamouti";
        case StbcName::Tarokh34: return "tarokh34";
        case StbcName::Rate34: return "rate34";
        case StbcName::SpatialMux: return "smux";
    }
    return "?";
}

CMatrix stbc_encode(const StbcCode& code, const CVector& s) {
    if (static_cast<int>(s.size()) != code.n_s) throw BadLength("stbc_encode: need n_s symbols");
    CMatrix c(code.n_t, code.n_x);
    const double rs2 = 1.0 / std::sqrt(2.0);
    switch (code.name) {
        case StbcName::Alamouti:
            c(0, 0) = s[0];
            c(1, 0) = s[1];
            c(0, 1) = -std::conj(s[1]);
            c(1, 1) = std::conj(s[0]);
            break;
        case StbcName::Tarokh34: {
            const cd s1 = s[0], s2 = s[1], s3 = s[2];
            // slot 1
            c(0, 0) = s1;
            c(1, 0) = s2;
            c(2, 0) = s3 * rs2;
            // slot 2
            c(0, 1) = -std::conj(s2);
            c(1, 1) = std::conj(s1);
            c(2, 1) = s3 * rs2;
            // slot 3
            c(0, 2) = std::conj(s3) * rs2;
            c(1, 2) = std::conj(s3) * rs2;
            c(2, 2) = (-s1 - std::conj(s1) + s2 - std::conj(s2)) * 0.5;
            // slot 4
            c(0, 3) = std::conj(s3) * rs2;
            c(1, 3) = -std::conj(s3) * rs2;
            c(2, 3) = (s2 + std::conj(s2) + s1 - std::conj(s1)) * 0.5;
            break;
        }
        case StbcName::Rate34: {
            const cd s1 = s[0], s2 = s[1], s3 = s[2];
            c(0, 0) = s1;
            c(1, 0) = s2;
            c(2, 0) = s3;
            c(0, 1) = -std::conj(s2);
            c(1, 1) = std::conj(s1);
            c(2, 1) = 0.0;
            c(0, 2) = std::conj(s3);
            c(1, 2) = 0.0;
            c(2, 2) = std::conj(s1);
            c(0, 3) = 0.0;
            c(1, 3) = -std::conj(s3);
            c(2, 3) = std::conj(s2);
            break;
        }
        case StbcName::SpatialMux:
            for (int m = 0; m < code.n_t; ++m) c(m, 0) = s[m];
            break;
    }
    return c;
}

CMatrix build_pilot(int n_t, int n_p) {
    if (n_p < n_t) throw BadDims("build_pilot: need n_p >= n_t");
    // DFT rows with stride floor(n_p/n_t). Any distinct rows satisfy
    // P P^H = n_p I; the spread matters because each row frequency-shifts
    // its antenna's Doppler band, and adjacent rows would leave fast
    // channels unseparable during pilot estimation.
    const int stride = std::max(n_p / n_t, 1);
    CMatrix p(n_t, n_p);
    for (int m = 0; m < n_t; ++m)
        for (int k = 0; k < n_p; ++k) {
            const double phase = -2.0 * M_PI * (static_cast<double>(m) * stride) * k / n_p;
            p(m, k) = cd{std::cos(phase), std::sin(phase)};
        }
    return p;
}

Packet build_packet(const StbcCode& code, const Constellation& constellation, int n_b, int n_p,
                    std::vector<uint8_t> bits, uint64_t seed) {
    const size_t need = static_cast<size_t>(n_b) * code.n_s * constellation.bits_per_symbol;
    if (bits.empty() && need > 0) bits = random_bits(need, seed);
    if (bits.size() != need) throw BadLength("build_packet: bit count must be n_b*n_s*log2(M)");

    Packet pkt;
    pkt.code = code;
    pkt.n_p = n_p;
    pkt.n_b = n_b;
    pkt.pilot = build_pilot(code.n_t, n_p);
    pkt.bits = std::move(bits);

    const CVector symbols = need > 0 ? qam_mod(constellation, pkt.bits) : CVector{};
    const int l = n_b * code.n_x + n_p;
    pkt.c = CMatrix(code.n_t, l);
    for (int m = 0; m < code.n_t; ++m)
        for (int k = 0; k < n_p; ++k) pkt.c(m, k) = pkt.pilot(m, k);
    for (int b = 0; b < n_b; ++b) {
        CVector s(symbols.begin() + static_cast<size_t>(b) * code.n_s,
                  symbols.begin() + static_cast<size_t>(b + 1) * code.n_s);
        const CMatrix block = stbc_encode(code, s);
        for (int m = 0; m < code.n_t; ++m)
            for (int x = 0; x < code.n_x; ++x) pkt.c(m, n_p + b * code.n_x + x) = block(m, x);
    }
    return pkt;
}

CMatrix apply_channel(const Packet& packet, const ChannelTrace& trace, double sigma_w2, uint64_t seed) {
    const int l = packet.length();
    if (trace.n_t != packet.code.n_t || trace.len != l)
        throw DimMismatch("apply_channel: trace dimensions do not match packet");
    CMatrix y(trace.n_r, l);
    const double noise_amp = std::sqrt(sigma_w2);
    for (int rx = 0; rx < trace.n_r; ++rx) {
        std::mt19937_64 rng(mix_seed(seed, 0x6E6F697365ull, rx));
        for (int k = 0; k < l; ++k) {
            cd acc = 0.0;
            for (int m = 0; m < packet.code.n_t; ++m) acc += packet.c(m, k) * trace.at(rx, m, k);
            if (noise_amp > 0.0) acc += noise_amp * cgaussian(rng);
            y(rx, k) = acc;
        }
    }
    return y;
}

void export_packet_csv(const Packet& packet, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open packet output: " + path);
    out << "tx,k,re,im\n";
    char buf[96];
    for (int m = 0; m < packet.code.n_t; ++m)
        for (int k = 0; k < packet.length(); ++k) {
            const cd v = packet.c(m, k);
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", m, k, v.real(), v.imag());
            out << buf;
        }
}

} // namespace ddce
