// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "xchx/analysis.hpp"

using namespace xchx;
using namespace xchx::analysis;

namespace {

// Independent floating-point summation; used only to cross-check the exact
// rational route.
double float_binom_cdf(int w, int c, double p) {
    double sum = 0.0;
    for (int k = 0; k <= c; ++k) {
        double term = 1.0;
        for (int i = 1; i <= k; ++i) term *= static_cast<double>(w - k + i) / i;
        term *= std::pow(p, k) * std::pow(1.0 - p, w - k);
        sum += term;
    }
    return sum;
}

}  // namespace

TEST_CASE("binomial_cdf matches hand-frozen exact rationals at w=10, p=1/4") {
    const Rat quarter(1, 4);
    CHECK(binomial_cdf(10, 3, quarter) == Rat(203391, 262144));
    CHECK(binomial_cdf(10, 4, quarter) == Rat(483327, 524288));
    CHECK(binomial_cdf(10, 5, quarter) == Rat(513945, 524288));
    CHECK(binomial_cdf(10, 6, quarter) == Rat(261225, 262144));
}

TEST_CASE("binomial_cdf degenerate cases") {
    CHECK(binomial_cdf(7, 7, Rat(1, 3)) == 1);   // full support
    CHECK(binomial_cdf(10, 0, Rat(0)) == 1);     // no Byzantine mass
    CHECK(binomial_cdf(10, 0, Rat(1)) == 0);
    CHECK_THROWS_AS(binomial_cdf(5, 6, Rat(1, 4)), std::invalid_argument);
    CHECK_THROWS_AS(binomial_cdf(5, -1, Rat(1, 4)), std::invalid_argument);
    CHECK_THROWS_AS(binomial_cdf(5, 2, Rat(3, 2)), std::invalid_argument);
}

TEST_CASE("exact result agrees with independent floating summation") {
    for (int w : {1, 2, 5, 10, 20, 50, 100}) {
        for (int c = 0; c <= w; c += std::max(1, w / 7)) {
            Rat exact = binomial_cdf(w, c, Rat(1, 4));
            double approx = float_binom_cdf(w, c, 0.25);
            double rendered = std::stod(format_fixed(exact, 15));
            CHECK(std::abs(rendered - approx) < 1e-12);
        }
    }
}

TEST_CASE("complement identity holds exactly") {
    const Rat p(1, 4);
    for (int w : {3, 10, 25}) {
        for (int c = 0; c <= w; ++c) {
            Rat upper = 0;
            Rat q = 1 - p;
            for (int k = c + 1; k <= w; ++k) {
                Rat term = Rat(binomial_coefficient(w, k));
                for (int i = 0; i < k; ++i) term *= p;
                for (int i = 0; i < w - k; ++i) term *= q;
                upper += term;
            }
            CHECK(binomial_cdf(w, c, p) + upper == 1);
        }
    }
}

TEST_CASE("monotonicity in c") {
    const Rat p(1, 4);
    for (int c = 0; c < 20; ++c) {
        CHECK(binomial_cdf(20, c + 1, p) >= binomial_cdf(20, c, p));
    }
}

TEST_CASE("committee_confidence computes c = floor(w*t)") {
    SafetyResult r = committee_confidence({10, Rat(3, 10), Rat(1, 4)});
    CHECK(r.c == 3);
    CHECK(r.decimal(6) == "0.775875");

    r = committee_confidence({10, Rat(6, 10), Rat(1, 4)});
    CHECK(r.c == 6);
    CHECK(r.decimal(6) == "0.996494");

    r = committee_confidence({10, Rat(5, 10), Rat(1, 4)});
    CHECK(r.c == 5);
    CHECK(r.decimal(6) == "0.980272");

    r = committee_confidence({10, Rat(4, 10), Rat(1, 4)});
    CHECK(r.c == 4);
    CHECK(r.decimal(6) == "0.921873");
}

TEST_CASE("monotonicity in t across the published grid") {
    for (int w : table3_sizes()) {
        Rat prev = -1;
        for (auto t : {Rat(3, 10), Rat(4, 10), Rat(5, 10), Rat(6, 10), Rat(7, 10)}) {
            Rat cur = committee_confidence({w, t, Rat(1, 4)}).probability;
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("table3 reproduction flags exactly the divergent cells") {
    auto cells = reproduce_table3();
    REQUIRE(cells.size() == 20);

    std::set<std::pair<std::string, int>> flagged;
    for (const auto& cell : cells) {
        if (cell.flagged) flagged.insert({format_fixed(cell.t, 1), cell.w});
    }
    // Exact summation contradicts the published (0.5, 10) cell and three of
    // the w=20 ones; everything else agrees within 5e-4.
    std::set<std::pair<std::string, int>> expected = {
        {"0.5", 10}, {"0.5", 20}, {"0.4", 20}, {"0.3", 20}};
    CHECK(flagged == expected);

    for (const auto& cell : cells) {
        if (cell.w == 10 && cell.t == Rat(5, 10)) {
            CHECK(format_fixed(cell.computed, 4) == "0.9803");
            CHECK(format_fixed(cell.paper, 4) == "0.9957");
        }
        if (cell.w == 100 && cell.t == Rat(3, 10)) CHECK(format_fixed(cell.computed, 4) == "0.8962");
        if (cell.w == 50 && cell.t == Rat(4, 10)) CHECK(format_fixed(cell.computed, 4) == "0.9937");
    }
}

TEST_CASE("table3 CSV shape") {
    auto csv = table3_csv(reproduce_table3());
    CHECK(csv.rfind("t,w,probability,paper_value,delta\n", 0) == 0);
    std::size_t rows = 0;
    for (char ch : csv) rows += ch == '\n' ? 1 : 0;
    CHECK(rows == 21);  // header + 20 cells
    CHECK(csv.find("0.4,10,0.9219,0.9219,0.0000") != std::string::npos);
    CHECK(csv.find("0.5,10,0.9803,0.9957,-0.0154") != std::string::npos);
}

TEST_CASE("min_vote_threshold sweeps to the smallest safe threshold") {
    // Frozen from an exhaustive sweep: P[X <= 35] = 0.99059... is the first
    // crossing of 0.99 at w=100, p=1/4. A threshold of 40 (4/10 of members)
    // therefore more than suffices.
    auto a = min_vote_threshold(100, Rat(1, 4), Rat(99, 100));
    REQUIRE(a.has_value());
    CHECK(*a == 35);
    CHECK(*a <= 40);
    CHECK(binomial_cdf(100, 40, Rat(1, 4)) >= Rat(99, 100));
    CHECK(format_fixed(binomial_cdf(100, 40, Rat(1, 4)), 4) == "0.9997");

    CHECK(min_vote_threshold(10, Rat(0), Rat(1, 2)) == 0);       // no adversary
    CHECK(!min_vote_threshold(10, Rat(1), Rat(1, 2)).has_value());  // certain adversary
}

TEST_CASE("decimal rendering") {
    CHECK(format_fixed(Rat(1, 2), 4) == "0.5000");
    CHECK(format_fixed(Rat(1), 4) == "1.0000");
    CHECK(format_fixed(Rat(-3, 200), 4) == "-0.0150");
    CHECK(format_fixed(Rat(15, 1000), 2) == "0.02");  // half away from zero
    CHECK(format_usd_truncated(Rat(3690283) * Rat(3, 1000000000) * 130) == "1.43");
    CHECK(format_usd_truncated(Rat(398525) * Rat(3, 1000000000) * 130) == "0.15");
}
