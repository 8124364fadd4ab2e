// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_HASH_HPP
#define XCHX_HASH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "xchx/common.hpp"

namespace xchx {

using Digest256 = std::array<std::uint8_t, 32>;

inline Digest256 sha256(std::string_view data) {
    Digest256 out{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

inline std::string hex(const Digest256& digest) {
    static const char* alphabet = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t byte : digest) {
        out.push_back(alphabet[byte >> 4]);
        out.push_back(alphabet[byte & 0x0f]);
    }
    return out;
}

/// Digest bytes read as a big-endian 256-bit integer.
inline U256 digest_to_u256(const Digest256& digest) {
    U256 value = 0;
    for (std::uint8_t byte : digest) value = (value << 8) | byte;
    return value;
}

inline void append_u64_le(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

/// H(epoch_id || candidate || nonce) as an integer, for puzzle checks.
inline U256 pow_hash(std::uint64_t epoch_id, std::string_view candidate, std::uint64_t nonce) {
    std::string buf;
    buf.reserve(16 + candidate.size());
    append_u64_le(buf, epoch_id);
    buf.append(candidate);
    append_u64_le(buf, nonce);
    return digest_to_u256(sha256(buf));
}

}  // namespace xchx

#endif  // XCHX_HASH_HPP
