#include "ddce/modulation.hpp"

#include <cmath>

#include "ddce/errors.hpp"
#include "ddce/rng.hpp"

namespace ddce {

namespace {

// Gray-coded axis bits to amplitude level: pattern 0...0 maps to the most
// positive level and single-bit changes step to the adjacent level.
int gray_to_level(unsigned bits, int width) {
    unsigned g = 0, b = 0;
    for (int i = 0; i < width; ++i) {
        const unsigned a = (bits >> (width - 1 - i)) & 1u;
        b ^= a;
        g = (g << 1) | b;
    }
    const int side = 1 << width;
    return side - 1 - 2 * static_cast<int>(g);
}

} // namespace

Constellation Constellation::qam(int order) {
    if (order != 4 && order != 16 && order != 64) throw ConfigError("qam: order must be 4, 16, or 64");
    Constellation c;
    c.order = order;
    c.bits_per_symbol = static_cast<int>(std::lround(std::log2(order)));
    const int half = c.bits_per_symbol / 2;
    const int side = 1 << half;
    const double scale = std::sqrt(3.0 / (2.0 * (side * side - 1)));
    c.points.resize(order);
    for (int label = 0; label < order; ++label) {
        const unsigned ibits = static_cast<unsigned>(label) >> half;
        const unsigned qbits = static_cast<unsigned>(label) & ((1u << half) - 1);
        c.points[label] = scale * cd(gray_to_level(ibits, half), gray_to_level(qbits, half));
    }
    return c;
}

Constellation Constellation::custom(std::vector<cd> points, int bits_per_symbol) {
    Constellation c;
    c.order = static_cast<int>(points.size());
    c.bits_per_symbol = bits_per_symbol;
    c.points = std::move(points);
    return c;
}

CVector qam_mod(const Constellation& c, const std::vector<uint8_t>& bits) {
    if (c.bits_per_symbol <= 0) throw BadLength("qam_mod: constellation has no bit labeling");
    if (bits.size() % c.bits_per_symbol != 0)
        throw BadLength("qam_mod: bit count not a multiple of bits per symbol");
    CVector out;
    out.reserve(bits.size() / c.bits_per_symbol);
    for (size_t i = 0; i < bits.size(); i += c.bits_per_symbol) {
        int label = 0;
        for (int b = 0; b < c.bits_per_symbol; ++b) label = (label << 1) | (bits[i + b] & 1);
        out.push_back(c.points[label]);
    }
    return out;
}

int nearest_point(const Constellation& c, cd y) {
    int best = 0;
    double best_d2 = std::norm(y - c.points[0]);
    for (int i = 1; i < c.order; ++i) {
        const double d2 = std::norm(y - c.points[i]);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

std::vector<uint8_t> symbol_bits(const Constellation& c, int index) {
    std::vector<uint8_t> bits(c.bits_per_symbol);
    for (int b = 0; b < c.bits_per_symbol; ++b)
        bits[b] = static_cast<uint8_t>((index >> (c.bits_per_symbol - 1 - b)) & 1);
    return bits;
}

std::vector<uint8_t> qam_demod_hard(const Constellation& c, const CVector& symbols) {
    std::vector<uint8_t> bits;
    bits.reserve(symbols.size() * c.bits_per_symbol);
    for (cd y : symbols) {
        const auto sb = symbol_bits(c, nearest_point(c, y));
        bits.insert(bits.end(), sb.begin(), sb.end());
    }
    return bits;
}

std::vector<uint8_t> random_bits(size_t count, uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x62697473ull));
    std::vector<uint8_t> bits(count);
    for (size_t i = 0; i < count; ++i) bits[i] = static_cast<uint8_t>(rng() & 1u);
    return bits;
}

} // namespace ddce
