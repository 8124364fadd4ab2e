// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_ANALYSIS_HPP
#define XCHX_ANALYSIS_HPP

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xchx/common.hpp"

namespace xchx::analysis {

/// C(n, k) over arbitrary-precision integers.
inline BigInt binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt result = 1;
    for (int i = 1; i <= k; ++i) {
        result *= n - k + i;
        result /= i;
    }
    return result;
}

/// P[X <= c] for X ~ Binomial(w, p), computed exactly: the whole sum stays
/// rational, no floating point anywhere.
inline Rat binomial_cdf(int w, int c, const Rat& p) {
    if (w < 1) throw std::invalid_argument("binomial_cdf: w must be >= 1");
    if (c < 0 || c > w) throw std::invalid_argument("binomial_cdf: c out of [0, w]");
    if (p < 0 || p > 1) throw std::invalid_argument("binomial_cdf: p out of [0, 1]");
    Rat q = 1 - p;
    Rat sum = 0;
    // Running powers instead of pow() per term: p^k ascending, q^(w-k) descending.
    Rat pk = 1;
    std::vector<Rat> qpow(static_cast<std::size_t>(w) + 1);
    qpow[0] = 1;
    for (int i = 1; i <= w; ++i) qpow[static_cast<std::size_t>(i)] = qpow[static_cast<std::size_t>(i - 1)] * q;
    for (int k = 0; k <= c; ++k) {
        sum += Rat(binomial_coefficient(w, k)) * pk * qpow[static_cast<std::size_t>(w - k)];
        pk *= p;
    }
    return sum;
}

struct SafetyQuery {
    int w = 10;           // committee size
    Rat t = Rat(1, 2);    // tolerated malicious fraction
    Rat p = Rat(1, 4);    // per-draw Byzantine probability

    void validate() const {
        if (w < 1) throw std::invalid_argument("safety query: w must be >= 1");
        if (t < 0 || t > 1) throw std::invalid_argument("safety query: t out of [0, 1]");
        if (p < 0 || p > 1) throw std::invalid_argument("safety query: p out of [0, 1]");
    }
};

struct SafetyResult {
    int c = 0;
    Rat probability;

    std::string decimal(int places = 6) const { return format_fixed(probability, places); }
};

/// floor(w * t) with exact rational arithmetic.
inline int tolerated_count(int w, const Rat& t) {
    BigInt num = boost::multiprecision::numerator(t) * w;
    BigInt den = boost::multiprecision::denominator(t);
    return static_cast<int>(num / den);  // both non-negative, so division floors
}

inline SafetyResult committee_confidence(const SafetyQuery& query) {
    query.validate();
    SafetyResult result;
    result.c = tolerated_count(query.w, query.t);
    result.probability = binomial_cdf(query.w, result.c, query.p);
    return result;
}

struct Table3Cell {
    Rat t;
    int w;
    Rat computed;
    Rat paper;
    Rat delta;     // computed - paper
    bool flagged;  // |delta| > 5e-4
};

/// The published security-level grid, kept verbatim as the comparison
/// baseline. Cells that exact summation contradicts are reported, never
/// silently corrected.
inline const std::vector<std::pair<Rat, std::vector<Rat>>>& table3_baseline() {
    static const std::vector<std::pair<Rat, std::vector<Rat>>> baseline = {
        {Rat(7, 10), {Rat(9997, 10000), Rat(1), Rat(1), Rat(1)}},
        {Rat(6, 10), {Rat(9965, 10000), Rat(1), Rat(1), Rat(1)}},
        {Rat(5, 10), {Rat(9957, 10000), Rat(9992, 10000), Rat(1), Rat(1)}},
        {Rat(4, 10), {Rat(9219, 10000), Rat(9784, 10000), Rat(9937, 10000), Rat(9997, 10000)}},
        {Rat(3, 10), {Rat(7759, 10000), Rat(8034, 10000), Rat(8369, 10000), Rat(8962, 10000)}},
    };
    return baseline;
}

inline const std::vector<int>& table3_sizes() {
    static const std::vector<int> sizes = {10, 20, 50, 100};
    return sizes;
}

/// Recompute the whole grid at p = 1/4 and diff it against the baseline.
inline std::vector<Table3Cell> reproduce_table3() {
    const Rat p(1, 4);
    const Rat tolerance(5, 10000);
    std::vector<Table3Cell> cells;
    for (const auto& [t, paper_row] : table3_baseline()) {
        for (std::size_t i = 0; i < table3_sizes().size(); ++i) {
            int w = table3_sizes()[i];
            Table3Cell cell;
            cell.t = t;
            cell.w = w;
            cell.computed = binomial_cdf(w, tolerated_count(w, t), p);
            cell.paper = paper_row[i];
            cell.delta = cell.computed - cell.paper;
            cell.flagged = boost::multiprecision::abs(cell.delta) > tolerance;
            cells.push_back(cell);
        }
    }
    return cells;
}

inline std::string table3_csv(const std::vector<Table3Cell>& cells) {
    std::ostringstream out;
    out << "t,w,probability,paper_value,delta\n";
    for (const auto& cell : cells) {
        out << format_fixed(cell.t, 1) << ',' << cell.w << ',' << format_fixed(cell.computed, 4)
            << ',' << format_fixed(cell.paper, 4) << ',' << format_fixed(cell.delta, 4) << '\n';
    }
    return out.str();
}

/// Smallest vote threshold a (valid thresholds are 0 <= a < w, a verdict
/// needs strictly more than a votes) such that the adversary has probability
/// >= confidence of holding at most a seats, i.e. P[X <= a] >= confidence.
/// No valid threshold reaches the confidence -> nullopt.
inline std::optional<int> min_vote_threshold(int w, const Rat& p, const Rat& confidence) {
    if (w < 1) throw std::invalid_argument("min_vote_threshold: w must be >= 1");
    if (confidence <= 0 || confidence >= 1)
        throw std::invalid_argument("min_vote_threshold: confidence must be in (0, 1)");
    for (int a = 0; a < w; ++a) {
        if (binomial_cdf(w, a, p) >= confidence) return a;
    }
    return std::nullopt;
}

}  // namespace xchx::analysis

#endif  // XCHX_ANALYSIS_HPP
