#ifndef SSPLAB_CRYPTO_HPP
#define SSPLAB_CRYPTO_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ssplab/bytes.hpp"
#include "ssplab/rng.hpp"

namespace ssplab {

enum class CurveId { P192, P256 };

inline size_t coord_width(CurveId c) { return c == CurveId::P192 ? 24 : 32; }
const char* curve_name(CurveId c);

struct DHKey {
    Bytes x;  // shared-secret x-coordinate, big-endian, curve-width bytes
    CurveId curve = CurveId::P256;
};

struct KeyPair {
    CurveId curve = CurveId::P256;
    Bytes priv;   // scalar, big-endian, curve-width bytes
    Bytes pub_x;  // affine coordinates, big-endian, curve-width bytes
    Bytes pub_y;
};

struct EcdhError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Digest256 hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> msg);

// Reusable HMAC-SHA256 context: the inner and outer pad states are hashed
// once at construction and copied per message, which roughly halves the cost
// of the brute-force candidate scans.
class HmacSha256 {
public:
    explicit HmacSha256(std::span<const uint8_t> key);
    ~HmacSha256();
    HmacSha256(const HmacSha256&) = delete;
    HmacSha256& operator=(const HmacSha256&) = delete;

    Digest256 compute(std::span<const uint8_t> msg);

private:
    void* inner_;  // EVP_MD_CTX primed with key ^ ipad
    void* outer_;  // EVP_MD_CTX primed with key ^ opad
    void* scratch_;
};

// Single-bit protocol values on the wire: 0x80 for bit 0, 0x81 for bit 1.
inline uint8_t encode_bit(int bit) { return static_cast<uint8_t>(0x80 | (bit & 1)); }

// Commitment: 16 most significant bytes of HMAC-SHA256(key = nonce, U || V || Z).
Commitment128 f1(const Bytes& own_x, const Bytes& peer_x, const Nonce128& nonce, uint8_t z);

// Link key: 16 MSBs of HMAC-SHA256(key = DHKey, N1 || N2 || "btlk" || A1 || A2).
LinkKey f2_link_key(const DHKey& w, const Nonce128& n1, const Nonce128& n2,
                    const std::array<uint8_t, 6>& a1, const std::array<uint8_t, 6>& a2);

// Untruncated HMAC-SHA256(key = DHKey, concat(parts)). Seeds the SM r* and
// the enhanced protocol's 256-bit r'.
Digest256 f2_seed(const DHKey& w, const std::vector<Bytes>& parts);

// Phase-3 check value: 16 MSBs of HMAC-SHA256(key = DHKey,
// N1 || N2 || R || IOcap || A1 || A2).
Commitment128 f3(const DHKey& w, const Nonce128& n1, const Nonce128& n2, const Bytes& r,
                 const std::array<uint8_t, 3>& iocap, const std::array<uint8_t, 6>& a1,
                 const std::array<uint8_t, 6>& a2);

// Running count of f1/f2/f3 invocations; the cost accountant snapshots it
// around phase 2 of an instrumented session.
uint64_t f_invocations();

KeyPair ecdh_keygen(Rng& rng, CurveId curve);

// Shared-secret x-coordinate. Throws EcdhError for off-curve or identity
// peer points.
DHKey ecdh_shared(CurveId curve, const Bytes& priv, const Bytes& peer_x, const Bytes& peer_y);

}  // namespace ssplab

#endif
