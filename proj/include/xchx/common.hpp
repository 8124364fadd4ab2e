// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_COMMON_HPP
#define XCHX_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace xchx {

using Amount = std::int64_t;   // smallest indivisible unit of a chain
using Account = std::string;
using TxId = std::string;
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using U256 = boost::multiprecision::uint256_t;

inline U256 u256_max() {
    return ~U256(0);
}

/// Scenario/CLI input that cannot be acted on. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A broken internal invariant. Aborts the run; maps to exit code 1.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& name) : std::runtime_error(name) {}
};

// Rejected protocol operations are ordinary outcomes, not exceptions: the
// simulation records them in the trace and carries on.
template <typename T = void>
class Outcome {
public:
    static Outcome accepted(T value) { return Outcome(true, std::move(value), {}); }
    static Outcome rejected(std::string reason) { return Outcome(false, T{}, std::move(reason)); }

    explicit operator bool() const { return ok_; }
    bool ok() const { return ok_; }
    const T& value() const { return value_; }
    const std::string& reason() const { return reason_; }

private:
    Outcome(bool ok, T value, std::string reason)
        : ok_(ok), value_(std::move(value)), reason_(std::move(reason)) {}

    bool ok_;
    T value_;
    std::string reason_;
};

template <>
class Outcome<void> {
public:
    static Outcome accepted() { return Outcome(true, {}); }
    static Outcome rejected(std::string reason) { return Outcome(false, std::move(reason)); }

    explicit operator bool() const { return ok_; }
    bool ok() const { return ok_; }
    const std::string& reason() const { return reason_; }

private:
    Outcome(bool ok, std::string reason) : ok_(ok), reason_(std::move(reason)) {}

    bool ok_;
    std::string reason_;
};

/// Parse a plain decimal literal ("0.25", "130", "-1.5") into an exact rational.
inline Rat parse_decimal(const std::string& text) {
    if (text.empty()) throw ConfigError("empty decimal literal");
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    BigInt digits = 0;
    BigInt scale = 1;
    bool seen_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == '.') {
            if (seen_dot) throw ConfigError("malformed decimal literal: " + text);
            seen_dot = true;
        } else if (ch >= '0' && ch <= '9') {
            digits = digits * 10 + (ch - '0');
            if (seen_dot) scale *= 10;
            seen_digit = true;
        } else {
            throw ConfigError("malformed decimal literal: " + text);
        }
    }
    if (!seen_digit) throw ConfigError("malformed decimal literal: " + text);
    Rat value(digits, scale);
    return negative ? -value : value;
}

/// Fixed-point rendering of a rational, rounding half away from zero.
inline std::string format_fixed(const Rat& value, int places) {
    BigInt pow10 = 1;
    for (int i = 0; i < places; ++i) pow10 *= 10;
    BigInt num = boost::multiprecision::numerator(value) * pow10;
    BigInt den = boost::multiprecision::denominator(value);
    bool negative = num < 0;
    if (negative) num = -num;
    BigInt scaled = (2 * num + den) / (2 * den);  // round half away from zero
    BigInt whole = scaled / pow10;
    BigInt frac = scaled % pow10;
    std::string out = negative && scaled != 0 ? "-" : "";
    out += whole.str();
    if (places > 0) {
        std::string f = frac.str();
        out += "." + std::string(places - f.size(), '0') + f;
    }
    return out;
}

/// Truncate toward zero at two decimals; the convention behind published
/// per-call USD figures.
inline std::string format_usd_truncated(const Rat& value) {
    BigInt num = boost::multiprecision::numerator(value) * 100;
    BigInt den = boost::multiprecision::denominator(value);
    BigInt cents = num / den;  // cpp_int division truncates toward zero
    bool negative = cents < 0;
    if (negative) cents = -cents;
    BigInt whole = cents / 100;
    BigInt frac = cents % 100;
    std::string f = frac.str();
    return (negative ? "-" : "") + whole.str() + "." + std::string(2 - f.size(), '0') + f;
}

}  // namespace xchx

#endif  // XCHX_COMMON_HPP
