#ifndef SSPLAB_BYTES_HPP
#define SSPLAB_BYTES_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssplab {

using Bytes = std::vector<uint8_t>;

using Digest256 = std::array<uint8_t, 32>;
using Block16 = std::array<uint8_t, 16>;
using Nonce128 = Block16;
using Commitment128 = Block16;
using LinkKey = Block16;

std::string to_hex(const uint8_t* data, size_t len);
Bytes from_hex(const std::string& hex);

template <typename C>
std::string to_hex(const C& c) {
    return to_hex(c.data(), c.size());
}

inline void append(Bytes& out, const uint8_t* data, size_t len) {
    out.insert(out.end(), data, data + len);
}

template <typename C>
void append(Bytes& out, const C& c) {
    out.insert(out.end(), c.begin(), c.end());
}

// 4-byte big-endian encoding; used for the 20-bit passkey everywhere.
inline Bytes be32(uint32_t v) {
    return {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
            static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
}

}  // namespace ssplab

#endif
