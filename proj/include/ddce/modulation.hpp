// Square QAM constellations with per-axis Gray labeling, unit average energy.
#ifndef DDCE_MODULATION_HPP
#define DDCE_MODULATION_HPP

#include <cstdint>
#include <vector>

#include "ddce/cmatrix.hpp"

namespace ddce {

struct Constellation {
    int order = 0;           // M
    int bits_per_symbol = 0; // log2(M)
    std::vector<cd> points;  // indexed by the bit label, MSB first

    // Supported orders: 4, 16, 64.
    static Constellation qam(int order);
    // Arbitrary point set (test hook); label width may be zero.
    static Constellation custom(std::vector<cd> points, int bits_per_symbol);
};

// Bit count must be a multiple of bits_per_symbol.
CVector qam_mod(const Constellation& c, const std::vector<uint8_t>& bits);
std::vector<uint8_t> qam_demod_hard(const Constellation& c, const CVector& symbols);

// Index of the nearest constellation point.
int nearest_point(const Constellation& c, cd y);

std::vector<uint8_t> symbol_bits(const Constellation& c, int index);

std::vector<uint8_t> random_bits(size_t count, uint64_t seed);

} // namespace ddce

#endif
