#ifndef FEPINN_UTIL_HPP
#define FEPINN_UTIL_HPP

#include <cstdint>
#include <cstdio>
#include <string>

namespace fepinn {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent RNG seed from a base seed and a stream tag, so that
/// e.g. initialization and sampling never share a draw sequence.
inline uint64_t seed_stream(uint64_t base, uint64_t tag) {
    return splitmix64(base ^ splitmix64(tag));
}

/// Round-trip-exact decimal formatting for doubles. Used everywhere a double
/// ends up in a CSV so that reruns produce byte-identical files.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

} // namespace fepinn

#endif
