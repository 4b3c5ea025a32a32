#include "ssplab/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>

#include <atomic>
#include <cstring>
#include <memory>

namespace ssplab {

namespace {

std::atomic<uint64_t> g_f_invocations{0};

void bump_counter() { g_f_invocations.fetch_add(1, std::memory_order_relaxed); }

struct BnDeleter {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct CtxDeleter {
    void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
using BnCtxPtr = std::unique_ptr<BN_CTX, CtxDeleter>;

struct PointDeleter {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

const EC_GROUP* group_for(CurveId curve) {
    static EC_GROUP* p192 = EC_GROUP_new_by_curve_name(NID_X9_62_prime192v1);
    static EC_GROUP* p256 = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    return curve == CurveId::P192 ? p192 : p256;
}

Bytes bn_to_bytes(const BIGNUM* bn, size_t width) {
    Bytes out(width);
    if (BN_bn2binpad(bn, out.data(), static_cast<int>(width)) < 0)
        throw std::runtime_error("BN_bn2binpad failed");
    return out;
}

}  // namespace

const char* curve_name(CurveId c) { return c == CurveId::P192 ? "p192" : "p256"; }

uint64_t f_invocations() { return g_f_invocations.load(std::memory_order_relaxed); }

HmacSha256::HmacSha256(std::span<const uint8_t> key) {
    constexpr size_t kBlock = 64;
    std::array<uint8_t, kBlock> k0{};
    if (key.size() > kBlock) {
        Digest256 kd;
        unsigned int len = 0;
        if (EVP_Digest(key.data(), key.size(), kd.data(), &len, EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA256 key digest failed");
        std::memcpy(k0.data(), kd.data(), kd.size());
    } else {
        std::memcpy(k0.data(), key.data(), key.size());
    }

    std::array<uint8_t, kBlock> pad;
    auto prime = [&](uint8_t xor_byte) {
        for (size_t i = 0; i < kBlock; ++i) pad[i] = k0[i] ^ xor_byte;
        EVP_MD_CTX* ctx = EVP_MD_CTX_new();
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
            EVP_DigestUpdate(ctx, pad.data(), pad.size()) != 1)
            throw std::runtime_error("HMAC pad init failed");
        return ctx;
    };
    inner_ = prime(0x36);
    outer_ = prime(0x5c);
    scratch_ = EVP_MD_CTX_new();
    if (!scratch_) throw std::runtime_error("EVP_MD_CTX_new failed");
}

HmacSha256::~HmacSha256() {
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(inner_));
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(outer_));
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(scratch_));
}

Digest256 HmacSha256::compute(std::span<const uint8_t> msg) {
    auto* work = static_cast<EVP_MD_CTX*>(scratch_);
    Digest256 out;
    unsigned int len = 0;
    if (EVP_MD_CTX_copy_ex(work, static_cast<EVP_MD_CTX*>(inner_)) != 1 ||
        EVP_DigestUpdate(work, msg.data(), msg.size()) != 1 ||
        EVP_DigestFinal_ex(work, out.data(), &len) != 1 || len != out.size())
        throw std::runtime_error("HMAC inner hash failed");
    if (EVP_MD_CTX_copy_ex(work, static_cast<EVP_MD_CTX*>(outer_)) != 1 ||
        EVP_DigestUpdate(work, out.data(), out.size()) != 1 ||
        EVP_DigestFinal_ex(work, out.data(), &len) != 1 || len != out.size())
        throw std::runtime_error("HMAC outer hash failed");
    return out;
}

Digest256 hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> msg) {
    HmacSha256 h(key);
    return h.compute(msg);
}

Commitment128 f1(const Bytes& own_x, const Bytes& peer_x, const Nonce128& nonce, uint8_t z) {
    bump_counter();
    Bytes msg;
    msg.reserve(own_x.size() + peer_x.size() + 1);
    append(msg, own_x);
    append(msg, peer_x);
    msg.push_back(z);
    Digest256 d = hmac_sha256(nonce, msg);
    Commitment128 out;
    std::memcpy(out.data(), d.data(), out.size());
    return out;
}

LinkKey f2_link_key(const DHKey& w, const Nonce128& n1, const Nonce128& n2,
                    const std::array<uint8_t, 6>& a1, const std::array<uint8_t, 6>& a2) {
    bump_counter();
    Bytes msg;
    append(msg, n1);
    append(msg, n2);
    const char btlk[4] = {'b', 't', 'l', 'k'};
    append(msg, reinterpret_cast<const uint8_t*>(btlk), sizeof btlk);
    append(msg, a1);
    append(msg, a2);
    Digest256 d = hmac_sha256(w.x, msg);
    LinkKey out;
    std::memcpy(out.data(), d.data(), out.size());
    return out;
}

Digest256 f2_seed(const DHKey& w, const std::vector<Bytes>& parts) {
    bump_counter();
    Bytes msg;
    for (const auto& p : parts) append(msg, p);
    return hmac_sha256(w.x, msg);
}

Commitment128 f3(const DHKey& w, const Nonce128& n1, const Nonce128& n2, const Bytes& r,
                 const std::array<uint8_t, 3>& iocap, const std::array<uint8_t, 6>& a1,
                 const std::array<uint8_t, 6>& a2) {
    bump_counter();
    Bytes msg;
    append(msg, n1);
    append(msg, n2);
    append(msg, r);
    append(msg, iocap);
    append(msg, a1);
    append(msg, a2);
    Digest256 d = hmac_sha256(w.x, msg);
    Commitment128 out;
    std::memcpy(out.data(), d.data(), out.size());
    return out;
}

KeyPair ecdh_keygen(Rng& rng, CurveId curve) {
    const EC_GROUP* group = group_for(curve);
    BnCtxPtr ctx(BN_CTX_new());
    const BIGNUM* order = EC_GROUP_get0_order(group);

    // priv = (seed mod (n-1)) + 1, so it is never 0
    Bytes seed = rng.bytes(coord_width(curve) + 8);
    BnPtr seed_bn(BN_bin2bn(seed.data(), static_cast<int>(seed.size()), nullptr));
    BnPtr nm1(BN_dup(order));
    BN_sub_word(nm1.get(), 1);
    BnPtr priv(BN_new());
    if (BN_mod(priv.get(), seed_bn.get(), nm1.get(), ctx.get()) != 1)
        throw std::runtime_error("BN_mod failed");
    BN_add_word(priv.get(), 1);

    PointPtr pub(EC_POINT_new(group));
    if (EC_POINT_mul(group, pub.get(), priv.get(), nullptr, nullptr, ctx.get()) != 1)
        throw std::runtime_error("EC_POINT_mul failed");

    BnPtr x(BN_new()), y(BN_new());
    if (EC_POINT_get_affine_coordinates(group, pub.get(), x.get(), y.get(), ctx.get()) != 1)
        throw std::runtime_error("get_affine failed");

    KeyPair kp;
    kp.curve = curve;
    kp.priv = bn_to_bytes(priv.get(), coord_width(curve));
    kp.pub_x = bn_to_bytes(x.get(), coord_width(curve));
    kp.pub_y = bn_to_bytes(y.get(), coord_width(curve));
    return kp;
}

DHKey ecdh_shared(CurveId curve, const Bytes& priv, const Bytes& peer_x, const Bytes& peer_y) {
    const EC_GROUP* group = group_for(curve);
    size_t w = coord_width(curve);
    if (peer_x.size() != w || peer_y.size() != w)
        throw EcdhError("peer coordinate width mismatch");

    BnCtxPtr ctx(BN_CTX_new());
    BnPtr x(BN_bin2bn(peer_x.data(), static_cast<int>(w), nullptr));
    BnPtr y(BN_bin2bn(peer_y.data(), static_cast<int>(w), nullptr));
    PointPtr peer(EC_POINT_new(group));
    if (EC_POINT_set_affine_coordinates(group, peer.get(), x.get(), y.get(), ctx.get()) != 1)
        throw EcdhError("peer point not on curve");
    if (EC_POINT_is_on_curve(group, peer.get(), ctx.get()) != 1)
        throw EcdhError("peer point not on curve");
    if (EC_POINT_is_at_infinity(group, peer.get()))
        throw EcdhError("peer point is the identity");

    BnPtr k(BN_bin2bn(priv.data(), static_cast<int>(priv.size()), nullptr));
    PointPtr shared(EC_POINT_new(group));
    if (EC_POINT_mul(group, shared.get(), nullptr, peer.get(), k.get(), ctx.get()) != 1)
        throw EcdhError("scalar multiplication failed");
    if (EC_POINT_is_at_infinity(group, shared.get()))
        throw EcdhError("shared point is the identity");

    BnPtr sx(BN_new()), sy(BN_new());
    if (EC_POINT_get_affine_coordinates(group, shared.get(), sx.get(), sy.get(), ctx.get()) != 1)
        throw EcdhError("get_affine failed");

    DHKey out;
    out.curve = curve;
    out.x = bn_to_bytes(sx.get(), w);
    return out;
}

}  // namespace ssplab
