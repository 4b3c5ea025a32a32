#include "ssplab/rng.hpp"

namespace ssplab {

uint32_t Rng::below(uint32_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below bound 0");
    // rejection sampling over the top of the 64-bit stream
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
        v = gen_();
    } while (v >= limit);
    return static_cast<uint32_t>(v % bound);
}

uint8_t Rng::u8_range(uint8_t lo, uint8_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::u8_range empty range");
    return static_cast<uint8_t>(lo + below(static_cast<uint32_t>(hi - lo) + 1));
}

Nonce128 Rng::nonce128() {
    Nonce128 n;
    for (size_t i = 0; i < n.size(); i += 8) {
        uint64_t v = gen_();
        for (size_t j = 0; j < 8; ++j) n[i + j] = static_cast<uint8_t>(v >> (56 - 8 * j));
    }
    return n;
}

Bytes Rng::bytes(size_t n) {
    Bytes out(n);
    size_t i = 0;
    while (i < n) {
        uint64_t v = gen_();
        for (size_t j = 0; j < 8 && i < n; ++j, ++i) out[i] = static_cast<uint8_t>(v >> (56 - 8 * j));
    }
    return out;
}

}  // namespace ssplab
