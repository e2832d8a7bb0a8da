#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xaffine/image.hpp"

namespace xaffine {

struct Keypoint {
    float x = 0;
    float y = 0;
    float response = 0;
    float orientation = 0;     // radians
    float octave_scale = 1.f;  // pyramid scale factor (corners) or sigma (scale space)
};

/// 256-bit binary signature stored as four 64-bit words.
struct BinaryDescriptor {
    std::array<uint64_t, 4> bits{};

    void set_bit(int i) { bits[i >> 6] |= (uint64_t{1} << (i & 63)); }
    bool get_bit(int i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
};

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b);

/// 128-value gradient-histogram signature, L2 norm 512 after the
/// normalize / clip(0.2) / renormalize / x512 convention.
struct GradientDescriptor {
    std::array<float, 128> values{};
};

struct MatchPair {
    int idx_a = 0;
    int idx_b = 0;
    float distance = 0;  // Hamming count (binary) or Euclidean (gradient)
};

}  // namespace xaffine
