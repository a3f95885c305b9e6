#include "ciqa/svm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ciqa/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciqa;

namespace {

struct Blobs {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

// well-separated Gaussian blobs in 2-D, `per_class` points each
Blobs make_blobs(int n_classes, int per_class, double spread, std::uint64_t seed) {
    static const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spread);
    Blobs b;
    for (int c = 0; c < n_classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            b.x.push_back({centers[c][0] + gauss(rng), centers[c][1] + gauss(rng)});
            b.y.push_back(c);
        }
    return b;
}

}  // namespace

TEST_CASE("standardizer") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss(5.0, 3.0);
    std::vector<std::vector<double>> x(200, std::vector<double>(4));
    for (auto& row : x) {
        for (auto& v : row) v = gauss(rng);
        row[2] = 1.25;  // constant column
    }
    const auto s = svm::fit_standardizer(x);
    auto z = x;
    s.apply_inplace(z);
    for (int j = 0; j < 4; ++j) {
        double mean = 0, var = 0;
        for (const auto& row : z) mean += row[j];
        mean /= z.size();
        for (const auto& row : z) var += (row[j] - mean) * (row[j] - mean);
        var /= z.size();
        CHECK(std::abs(mean) < 1e-10);
        if (j == 2) {
            CHECK(var == 0.0);  // constant column maps to zeros
        } else {
            CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    const auto round = s.unapply(s.apply(x[7]));
    for (int j = 0; j < 4; ++j) CHECK(round[j] == doctest::Approx(x[7][j]).epsilon(1e-12));

    CHECK_THROWS_AS(svm::fit_standardizer({{1.0}}), EmptyInput);
}

TEST_CASE("rbf kernel") {
    const std::vector<double> a{1.0, 2.0}, b{0.5, -1.0};
    CHECK(svm::rbf_kernel(a, a, 0.7) == 1.0);
    CHECK(svm::rbf_kernel(a, b, 0.7) == svm::rbf_kernel(b, a, 0.7));
    CHECK(svm::rbf_kernel(a, b, 0.7) > 0.0);
    CHECK(svm::rbf_kernel(a, b, 0.7) <= 1.0);

    const std::vector<double> zero{0.0, 0.0}, one{1.0, 1.0};
    CHECK(svm::rbf_kernel(zero, one, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK_THROWS_AS(svm::rbf_kernel(a, std::vector<double>{1.0}, 0.7), DimensionMismatch);

    const auto k = svm::rbf_kernel_matrix({{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}}, 0.25);
    for (int i = 0; i < 3; ++i) {
        CHECK(k[i][i] == 1.0);
        for (int j = 0; j < 3; ++j) CHECK(k[i][j] == k[j][i]);
    }
}

TEST_CASE("svc separates two blobs") {
    const auto blobs = make_blobs(2, 40, 0.5, 2);
    const auto model = svm::train_svc(blobs.x, blobs.y, 8.0, 0.5);
    int hits = 0;
    for (std::size_t i = 0; i < blobs.x.size(); ++i)
        hits += svm::predict_class(model, blobs.x[i]) == blobs.y[i];
    CHECK(hits == static_cast<int>(blobs.x.size()));

    for (const auto& pair : model.pairs) {
        CHECK(pair.kkt_gap <= 1e-3);
        double signed_sum = 0.0;
        for (std::size_t i = 0; i < pair.coef.size(); ++i) {
            CHECK(std::abs(pair.coef[i]) <= 8.0 + 1e-12);
            signed_sum += pair.coef[i];
        }
        CHECK(std::abs(signed_sum) <= 1e-9);
    }
}

TEST_CASE("svc probabilities are calibrated and sum to one") {
    const auto blobs = make_blobs(4, 50, 0.6, 3);
    const auto model = svm::train_svc(blobs.x, blobs.y, 8.0, 0.25);

    for (int c = 0; c < 4; ++c) {
        // a point deep inside blob c
        static const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
        const std::vector<double> probe{centers[c][0], centers[c][1]};
        const auto p = model;
        const auto probs = svm::predict_proba(p, probe);
        REQUIRE(probs.size() == 4);
        double sum = 0;
        for (double v : probs) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(probs[c] > 0.9);
    }
}

TEST_CASE("svc held-out accuracy on four distant blobs") {
    const auto train = make_blobs(4, 50, 0.8, 4);
    const auto test = make_blobs(4, 25, 0.8, 5);
    const auto model = svm::train_svc(train.x, train.y, 32.0, 0.25);
    int hits = 0;
    for (std::size_t i = 0; i < test.x.size(); ++i)
        hits += svm::predict_class(model, test.x[i]) == test.y[i];
    CHECK(static_cast<double>(hits) / test.x.size() >= 0.95);
}

TEST_CASE("svc is invariant to training sample permutation") {
    auto blobs = make_blobs(3, 30, 0.7, 6);
    const auto model_a = svm::train_svc(blobs.x, blobs.y, 8.0, 0.5);

    std::vector<std::size_t> perm(blobs.x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(99);
    std::shuffle(perm.begin(), perm.end(), rng);
    Blobs shuffled;
    for (auto i : perm) {
        shuffled.x.push_back(blobs.x[i]);
        shuffled.y.push_back(blobs.y[i]);
    }
    const auto model_b = svm::train_svc(shuffled.x, shuffled.y, 8.0, 0.5);

    const std::vector<double> probe{3.0, 4.0};
    const auto pa = svm::predict_proba(model_a, probe);
    const auto pb = svm::predict_proba(model_b, probe);
    for (int c = 0; c < 3; ++c) CHECK(pa[c] == doctest::Approx(pb[c]).epsilon(1e-6));
}

TEST_CASE("svc decision flips sign under label swap") {
    const auto blobs = make_blobs(2, 30, 0.5, 7);
    std::vector<int> swapped(blobs.y);
    for (auto& v : swapped) v = 1 - v;
    const auto model_a = svm::train_svc(blobs.x, blobs.y, 8.0, 0.5);
    const auto model_b = svm::train_svc(blobs.x, swapped, 8.0, 0.5);
    for (const std::vector<double>& probe : {std::vector<double>{5.0, 0.0},
                                            std::vector<double>{2.0, 1.0},
                                            std::vector<double>{8.0, -1.0}}) {
        const double da = svm::decision_value(model_a, model_a.pairs[0], probe);
        const double db = svm::decision_value(model_b, model_b.pairs[0], probe);
        CHECK(da == -db);  // the dual problem is invariant, so the mirror is exact
    }
}

TEST_CASE("svc input validation") {
    CHECK_THROWS_AS(svm::train_svc({{1.0}, {2.0}}, {0, 0}, 1.0, 1.0), SingleClass);
    CHECK_THROWS_AS(svm::train_svc({{1.0}, {std::nan("")}}, {0, 1}, 1.0, 1.0), NonFinite);
    CHECK_THROWS_AS(svm::train_svc({{1.0}, {2.0}}, {0, 1}, -1.0, 1.0), NonFinite);
    svm::SvcModel untrained;
    CHECK_THROWS_AS(svm::predict_proba(untrained, std::vector<double>{1.0}), UntrainedModel);
}

TEST_CASE("svr fits a constant") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        x.push_back({static_cast<double>(i) / 20.0});
        y.push_back(4.25);
    }
    const auto model = svm::train_svr(x, y, 8.0, 1.0, 0.5);
    for (const auto& xi : x) CHECK(svm::predict(model, xi) == doctest::Approx(4.25).epsilon(1e-3));
    CHECK(model.kkt_gap <= 1e-3);
}

TEST_CASE("svr fits noiseless monotone data") {
    std::vector<std::vector<double>> xtr, xte;
    std::vector<double> ytr;
    for (int i = 0; i < 50; ++i) {
        const double t = static_cast<double>(i) / 49.0;
        xtr.push_back({t});
        ytr.push_back(2.0 * t);
    }
    for (int i = 0; i < 33; ++i) xte.push_back({(i + 0.5) / 33.0});

    const auto model = svm::train_svr(xtr, ytr, 8.0, 1.0, 0.5);
    double se = 0.0;
    for (const auto& xi : xte) {
        const double err = svm::predict(model, xi) - 2.0 * xi[0];
        se += err * err;
    }
    CHECK(std::sqrt(se / xte.size()) <= 0.05);
}

TEST_CASE("svr nu property and dual bounds") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    const int n = 80;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        x.push_back({t});
        y.push_back(std::sin(6.0 * t) + noise(rng));
    }
    const double nu = 0.5, c = 0.2;
    const auto model = svm::train_svr(x, y, c, 2.0, nu);

    for (double coef : model.coef) CHECK(std::abs(coef) <= c + 1e-12);

    CHECK(model.n_dual_active >= static_cast<int>(std::floor(nu * n)) - 2);

    int margin_errors = 0;
    for (int i = 0; i < n; ++i)
        margin_errors += std::abs(svm::predict(model, x[i]) - y[i]) > model.epsilon + 1e-9;
    CHECK(margin_errors <= static_cast<int>(std::ceil(nu * n)) + 2);
}

TEST_CASE("svr duals scale under sample duplication") {
    std::vector<std::vector<double>> x, x2;
    std::vector<double> y, y2;
    for (int i = 0; i < 25; ++i) {
        const double t = static_cast<double>(i) / 24.0;
        x.push_back({t});
        y.push_back(1.0 + t * t);
    }
    x2 = x; y2 = y;
    x2.insert(x2.end(), x.begin(), x.end());
    y2.insert(y2.end(), y.begin(), y.end());

    // duplicating every sample and halving the penalty is an exact
    // re-parameterization of the dual in this box convention
    const auto a = svm::train_svr(x, y, 8.0, 1.0, 0.5, 1e-8);
    const auto b = svm::train_svr(x2, y2, 4.0, 1.0, 0.5, 1e-8);
    for (const auto& xi : x)
        CHECK(svm::predict(a, xi) == doctest::Approx(svm::predict(b, xi)).epsilon(1e-6));
}

TEST_CASE("svr input validation") {
    CHECK_THROWS_AS(svm::train_svr({{1.0}}, {1.0}, 1.0, 1.0, 0.5), EmptyInput);
    CHECK_THROWS_AS(svm::train_svr({{1.0}, {2.0}}, {1.0, 2.0}, 1.0, 1.0, 1.5), NonFinite);
    CHECK_THROWS_AS(svm::train_svr({{1.0}, {2.0}}, {1.0, std::nan("")}, 1.0, 1.0, 0.5),
                    NonFinite);
}

TEST_CASE("model serialization round-trips") {
    const auto blobs = make_blobs(3, 20, 0.6, 9);
    const auto svc = svm::train_svc(blobs.x, blobs.y, 8.0, 0.5);
    std::stringstream ss;
    svm::write_svc(ss, svc);
    const auto svc2 = svm::read_svc(ss);
    const std::vector<double> probe{1.0, 2.0};
    const auto pa = svm::predict_proba(svc, probe);
    const auto pb = svm::predict_proba(svc2, probe);
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        x.push_back({i * 0.05});
        y.push_back(std::cos(i * 0.3));
    }
    const auto svr = svm::train_svr(x, y, 8.0, 1.0, 0.5);
    std::stringstream ss2;
    svm::write_svr(ss2, svr);
    const auto svr2 = svm::read_svr(ss2);
    for (const auto& xi : x) CHECK(svm::predict(svr, xi) == svm::predict(svr2, xi));
}
