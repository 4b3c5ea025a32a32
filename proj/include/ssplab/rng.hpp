#ifndef SSPLAB_RNG_HPP
#define SSPLAB_RNG_HPP

#include <cstdint>
#include <random>

#include "ssplab/bytes.hpp"

namespace ssplab {

// Deterministic seeded PRNG. All "randomly generated" protocol values come
// from here so that sessions, attacks and experiments replay bit-for-bit.
// Range reduction is done by rejection sampling rather than
// std::uniform_int_distribution, whose output is implementation defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, bound), bound > 0.
    uint32_t below(uint32_t bound);

    // Uniform in [lo, hi], defaults to the protocol's position range 1..255.
    uint8_t u8_range(uint8_t lo = 1, uint8_t hi = 255);

    // Uniform passkey in [0, space).
    uint32_t passkey(uint32_t space = 1000000) { return below(space); }

    Nonce128 nonce128();
    Bytes bytes(size_t n);

private:
    std::mt19937_64 gen_;
};

}  // namespace ssplab

#endif
