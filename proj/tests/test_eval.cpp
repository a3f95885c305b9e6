#include "ciqa/eval.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ciqa/errors.hpp"
#include "ciqa/reference.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciqa;

TEST_CASE("srocc basics") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> up(x);
    for (auto& v : up) v = std::exp(v);  // strictly increasing map
    CHECK(eval::srocc(x, up) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> down(x);
    for (auto& v : down) v = -v;
    CHECK(eval::srocc(x, down) == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK(eval::srocc(x, std::vector<double>{1, 3, 2, 5, 4}) ==
          doctest::Approx(0.8).epsilon(1e-12));

    CHECK_THROWS_AS(eval::srocc(x, std::vector<double>{1, 2}), LengthMismatch);
    CHECK_THROWS_AS(eval::srocc(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    LengthMismatch);
    CHECK_THROWS_AS(eval::srocc(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    DegenerateVariance);
}

TEST_CASE("srocc matches the reference on tied data") {
    for (int i = 0; i < 300; ++i) {
        const auto x = testutil::random_tied_vector(5 + i % 40, 100 + i);
        const auto y = testutil::random_tied_vector(5 + i % 40, 5000 + i);
        try {
            const double fast = eval::srocc(x, y);
            CHECK(fast == doctest::Approx(ref::srocc(x, y)).epsilon(1e-12));
        } catch (const DegenerateVariance&) {
        }
    }
}

TEST_CASE("srocc is invariant under strictly increasing transforms") {
    const auto x = testutil::random_vector(64, 1);
    const auto y = testutil::random_vector(64, 2);
    std::vector<double> tx(x), ty(y);
    for (auto& v : tx) v = std::atan(v) * 3.0 + 1.0;
    for (auto& v : ty) v = std::exp(0.2 * v);
    CHECK(eval::srocc(tx, ty) == doctest::Approx(eval::srocc(x, y)).epsilon(1e-12));
}

TEST_CASE("krocc basics") {
    CHECK(eval::krocc(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}) ==
          doctest::Approx(1.0));
    CHECK(eval::krocc(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) ==
          doctest::Approx(-1.0));
    CHECK_THROWS_AS(eval::krocc(std::vector<double>{1}, std::vector<double>{1}),
                    LengthMismatch);
    CHECK_THROWS_AS(eval::krocc(std::vector<double>{1, 1}, std::vector<double>{1, 2}),
                    DegenerateVariance);
}

TEST_CASE("krocc fast path equals all-pairs on random tied data") {
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 5 + i % 60;
        const auto x = testutil::random_tied_vector(n, 300 + i);
        const auto y = testutil::random_tied_vector(n, 9000 + i);
        try {
            const double fast = eval::krocc(x, y);
            CHECK(fast == doctest::Approx(ref::kendall_allpairs(x, y)).epsilon(1e-12));
        } catch (const DegenerateVariance&) {
        }
    }
    // and once at the 200-point size called out for the fast path
    const auto x = testutil::random_vector(200, 777);
    const auto y = testutil::random_vector(200, 778);
    CHECK(eval::krocc(x, y) == doctest::Approx(ref::kendall_allpairs(x, y)).epsilon(1e-12));
}

TEST_CASE("accuracy") {
    CHECK(eval::accuracy(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3}) == 1.0);
    CHECK(eval::accuracy(std::vector<int>{1, 2, 3}, std::vector<int>{2, 3, 1}) == 0.0);
    CHECK(eval::accuracy(std::vector<int>{1, 2, 3, 4}, std::vector<int>{1, 2, 3, 0}) == 0.75);
    CHECK(eval::accuracy(std::vector<std::string>{"wn", "jpeg"},
                         std::vector<std::string>{"wn", "jp2k"}) == 0.5);
    CHECK_THROWS_AS(eval::accuracy(std::vector<int>{}, std::vector<int>{}), LengthMismatch);
}

TEST_CASE("wilcoxon trivial cases") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK_THROWS_AS(eval::wilcoxon_paired(a, a), AllZeroDifferences);

    std::vector<double> big(30), small(30);
    for (int i = 0; i < 30; ++i) {
        small[i] = i;
        big[i] = i + 1.0;
    }
    const auto out = eval::wilcoxon_paired(big, small);
    CHECK(out.reject);
    CHECK(out.direction == +1);
    CHECK(out.n_effective == 30);
    CHECK(out.p_value < 0.05);
}

TEST_CASE("wilcoxon exact path matches full enumeration") {
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 4 + i % 9;  // up to 12 pairs
        auto a = testutil::random_tied_vector(n, 40 + i, 6);
        auto b = testutil::random_tied_vector(n, 1040 + i, 6);
        try {
            const auto out = eval::wilcoxon_paired(a, b);
            const double pref = ref::wilcoxon_exact_enum(a, b);
            CHECK(out.p_value == doctest::Approx(pref).epsilon(1e-12));
        } catch (const AllZeroDifferences&) {
        }
    }
}

namespace {

// the approximate path's formula, applied directly to the same data
double normal_approx_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
    const int n = static_cast<int>(diff.size());
    std::vector<double> mag;
    for (double d : diff) mag.push_back(std::abs(d));
    std::vector<double> sorted(mag);
    std::sort(sorted.begin(), sorted.end());
    double wplus = 0.0, tie_term = 0.0;
    for (int i = 0; i < n; ++i) {
        if (diff[i] <= 0) continue;
        double smaller = 0, equal = 0;
        for (int j = 0; j < n; ++j) {
            smaller += mag[j] < mag[i];
            equal += mag[j] == mag[i];
        }
        wplus += smaller + (equal + 1.0) / 2.0;
    }
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double mu = n * (n + 1) / 4.0;
    const double var = n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_term / 48.0;
    double z = wplus - mu;
    z -= 0.5 * (z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0));
    z /= std::sqrt(var);
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace

TEST_CASE("wilcoxon exact and approximate paths agree at the crossover size") {
    std::mt19937_64 rng(131);
    std::normal_distribution<double> gauss(0.1, 1.0);
    for (int i = 0; i < 40; ++i) {
        std::vector<double> a(25), b(25);
        for (int t = 0; t < 25; ++t) {
            a[t] = gauss(rng);
            b[t] = gauss(rng);
        }
        const auto exact = eval::wilcoxon_paired(a, b);  // n = 25: exact path
        CHECK(std::abs(exact.p_value - normal_approx_p(a, b)) < 0.01);
    }
}

TEST_CASE("compare_models") {
    std::vector<eval::RoundResult> a, b;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 0.01);
    for (int r = 0; r < 200; ++r) {
        for (const std::string ts : {"live_holdout", "tid2013"}) {
            eval::RoundResult ra, rb;
            ra.round = rb.round = r;
            ra.test_set = rb.test_set = ts;
            const double base = 0.8 + gauss(rng);
            rb.srocc = base;
            ra.srocc = base + 0.05;  // uniform dominance on srocc
            ra.krocc = rb.krocc = 0.6 + gauss(rng);
            ra.accuracy = rb.accuracy = 0.85;
            a.push_back(ra);
            b.push_back(rb);
        }
    }

    const auto rows = eval::compare_models(a, b);
    CHECK(rows.size() == 6);  // 2 test sets x 3 metrics
    int srocc_rejections = 0;
    for (const auto& row : rows) {
        if (row.metric == "srocc") {
            CHECK(row.reject);
            CHECK(row.winner == +1);
            ++srocc_rejections;
        }
        if (row.metric == "accuracy") CHECK_FALSE(row.reject);  // identical
    }
    CHECK(srocc_rejections == 2);

    // identical result sets: nothing rejected anywhere
    const auto self_rows = eval::compare_models(a, a);
    for (const auto& row : self_rows) CHECK_FALSE(row.reject);

    // antisymmetry
    const auto swapped = eval::compare_models(b, a);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(swapped[i].winner == -rows[i].winner);
        if (rows[i].n_effective > 0)
            CHECK(swapped[i].p_value == doctest::Approx(rows[i].p_value).epsilon(1e-12));
    }

    b.pop_back();
    CHECK_THROWS_AS(eval::compare_models(a, b), UnpairedRounds);
}

TEST_CASE("results csv round trip") {
    testutil::TempDir dir("eval");
    std::vector<eval::RoundResult> rows;
    for (int r = 0; r < 3; ++r) {
        eval::RoundResult rr;
        rr.round = r;
        rr.test_set = "synthetic_holdout";
        rr.srocc = 0.9 - 0.01 * r;
        rr.krocc = 0.7;
        rr.accuracy = 0.95;
        rr.per_class_srocc["wn"] = 0.99;
        rr.per_class_krocc["wn"] = 0.97;
        rows.push_back(rr);
    }
    {
        std::ofstream os(dir.file("r.csv"));
        eval::write_results_csv_header(os);
        for (const auto& r : rows) eval::write_results_csv_row(os, r);
    }
    const auto back = eval::read_results_csv(dir.file("r.csv"));
    REQUIRE(back.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(back[r].round == rows[r].round);
        CHECK(back[r].test_set == rows[r].test_set);
        CHECK(back[r].srocc == rows[r].srocc);
        CHECK(back[r].per_class_srocc.at("wn") == 0.99);
        CHECK(back[r].per_class_srocc.count("jpeg") == 0);
    }

    std::stringstream cmp;
    eval::write_comparison_text(cmp, eval::compare_models(back, back), "m1", "m1");
    CHECK(cmp.str().find("synthetic_holdout") != std::string::npos);
}
