#pragma once

#include <cstdint>
#include <string_view>

namespace fdpas {

constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(seed ^ mix64(a)) ^ mix64(b + 0x51ed27ULL));
}

constexpr std::uint64_t stream_id(std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
        h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    }
    return h;
}

// Counter-based draw: the value for (stream, index) never depends on earlier draws.
inline double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return static_cast<double>(derive_seed(seed, stream, index) >> 11) * 0x1.0p-53;
}

}  // namespace fdpas
