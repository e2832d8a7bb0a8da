#pragma once

#include <array>
#include <cstdint>

namespace xaffine {

struct PatternPair {
    int8_t x1, y1, x2, y2;
};

extern const std::array<PatternPair, 256> kOrbPattern;

/// FNV-1a over the pattern entries as little-endian int32 quadruples; pinned
/// by the test suite to guard against accidental edits.
uint64_t orb_pattern_checksum();

}  // namespace xaffine
