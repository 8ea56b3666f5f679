#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "quakedrill/cohort.hpp"
#include "quakedrill/stats.hpp"
#include "shapiro_reference.hpp"

using namespace quakedrill;
using namespace quakedrill::stats;

TEST(Descriptives, Examples) {
    const std::vector<double> same{2, 2, 2};
    auto d = descriptives(same);
    EXPECT_EQ(d.mean, 2.0);
    EXPECT_EQ(d.sd, 0.0);
    const std::vector<double> four{1, 2, 3, 4};
    d = descriptives(four);
    EXPECT_DOUBLE_EQ(d.mean, 2.5);
    EXPECT_NEAR(d.sd, std::sqrt(5.0 / 3.0), 1e-12);
    EXPECT_DOUBLE_EQ(d.q1, 1.75);
    EXPECT_DOUBLE_EQ(d.median, 2.5);
    EXPECT_DOUBLE_EQ(d.q3, 3.25);
    EXPECT_THROW(descriptives(std::vector<double>{}), StatsError);
    const std::vector<double> one{7};
    EXPECT_TRUE(std::isnan(descriptives(one).sd));
}

TEST(Descriptives, TranslationAndOrder) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(3, 2);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(2 + t % 30);
        for (auto& v : x) v = normal(rng);
        const double c = normal(rng) * 10;
        std::vector<double> y(x);
        for (auto& v : y) v += c;
        const auto dx = descriptives(x), dy = descriptives(y);
        EXPECT_NEAR(dy.mean, dx.mean + c, 1e-9);
        EXPECT_NEAR(dy.sd, dx.sd, 1e-9);
        EXPECT_NEAR(dx.mean, oracle::mean(x), 1e-12);
        EXPECT_LE(dx.min, dx.q1);
        EXPECT_LE(dx.q1, dx.median);
        EXPECT_LE(dx.median, dx.q3);
        EXPECT_LE(dx.q3, dx.max);
    }
}

TEST(ShapiroWilk, MatchesReferenceImplementation) {
    for (const auto& ref : quakedrill::testing::shapiro_references()) {
        const auto r = shapiro_wilk(ref.samples);
        EXPECT_NEAR(r.w, ref.w, 1e-4) << ref.name;
        EXPECT_NEAR(r.p, ref.p, 1e-3) << ref.name;
    }
}

TEST(ShapiroWilk, Errors) {
    EXPECT_THROW(shapiro_wilk(std::vector<double>{1, 2}), StatsError);
    EXPECT_THROW(shapiro_wilk(std::vector<double>{3, 3, 3, 3}), StatsError);
    EXPECT_THROW(shapiro_wilk(std::vector<double>(5001, 1.0)), StatsError);
}

TEST(ShapiroWilk, RejectsUniformDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> x(500);
    for (auto& v : x) v = u(rng);
    EXPECT_LT(shapiro_wilk(x).p, 0.05);
}

TEST(ShapiroWilk, ScaleAndLocationInvariance) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0, 1);
    std::uniform_real_distribution<double> scale(0.01, 100), shift(-1000, 1000);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(3 + t * 7 % 200);
        for (auto& v : x) v = normal(rng);
        const double a = scale(rng), b = shift(rng);
        std::vector<double> y(x);
        for (auto& v : y) v = a * v + b;
        const auto rx = shapiro_wilk(x), ry = shapiro_wilk(y);
        EXPECT_NEAR(rx.w, ry.w, 1e-9);
        EXPECT_GT(rx.w, 0.0);
        EXPECT_LE(rx.w, 1.0);
    }
}

TEST(Wilcoxon, ExactExample) {
    const std::vector<double> pre{1, 1, 1, 1, 1}, post{2, 3, 4, 5, 6};
    const auto r = wilcoxon_signed_rank(pre, post);
    EXPECT_EQ(r.w_minus, 0.0);
    EXPECT_EQ(r.w_plus, 15.0);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.p, 2.0 / 32.0);
    EXPECT_LT(r.z, 0.0);
}

TEST(Wilcoxon, AllZeroAndLengthErrors) {
    const std::vector<double> a{1, 2, 3}, b{1, 2};
    EXPECT_THROW(wilcoxon_signed_rank(a, a), StatsError);
    EXPECT_THROW(wilcoxon_signed_rank(a, b), StatsError);
    try {
        wilcoxon_signed_rank(a, a);
    } catch (const StatsError& e) {
        EXPECT_NE(std::string(e.what()).find("all differences zero"), std::string::npos);
    }
}

TEST(Wilcoxon, ExactMatchesBruteForce) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0.3, 1);
    for (std::size_t n = 1; n <= 14; ++n)
        for (int t = 0; t < 60; ++t) {
            std::vector<double> pre(n), post(n);
            for (std::size_t i = 0; i < n; ++i) pre[i] = normal(rng), post[i] = normal(rng);
            const auto r = wilcoxon_signed_rank(pre, post);
            ASSERT_TRUE(r.exact);
            EXPECT_NEAR(r.p, oracle::signed_rank_p_bruteforce(pre, post), 1e-12) << n;
            EXPECT_DOUBLE_EQ(r.w_plus + r.w_minus, n * (n + 1) / 2.0);
        }
}

TEST(Wilcoxon, SwapFlipsZKeepsP) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0, 1);
    for (std::size_t n : {4u, 9u, 30u, 60u}) {
        std::vector<double> pre(n), post(n);
        for (std::size_t i = 0; i < n; ++i) pre[i] = std::round(normal(rng) * 2), post[i] = std::round(normal(rng) * 2);
        if (pre == post) post[0] += 1;
        const auto a = wilcoxon_signed_rank(pre, post), b = wilcoxon_signed_rank(post, pre);
        EXPECT_NEAR(a.z, -b.z, 1e-12);
        EXPECT_NEAR(a.p, b.p, 1e-12);
    }
}

TEST(Wilcoxon, TiesUseNormalApproximationWithTieCorrection) {
    // differences: +1 x4, -1 x1, +2 x2 -> ranks avg; tie groups of 5 and 2
    const std::vector<double> pre{0, 0, 0, 0, 1, 0, 0}, post{1, 1, 1, 1, 0, 2, 2};
    const auto r = wilcoxon_signed_rank(pre, post, {false, 25});
    EXPECT_FALSE(r.exact);
    EXPECT_DOUBLE_EQ(r.w_minus, 3.0);
    const double n = 7, mean = n * (n + 1) / 4;
    const double var = n * (n + 1) * (2 * n + 1) / 24 - ((125 - 5) + (8 - 2)) / 48.0;
    EXPECT_NEAR(r.z, (3.0 - mean) / std::sqrt(var), 1e-12);
    EXPECT_NEAR(r.p, 2 * 0.5 * std::erfc(std::fabs(r.z) / std::sqrt(2.0)), 1e-12);
}

TEST(Wilcoxon, ContinuityCorrectionShrinksZ) {
    std::vector<double> pre(40), post(40);
    for (int i = 0; i < 40; ++i) pre[i] = i, post[i] = i + ((i % 3) ? 1.5 + i * 0.01 : -0.7 - i * 0.02);
    const auto plain = wilcoxon_signed_rank(pre, post, {false, 25});
    const auto corrected = wilcoxon_signed_rank(pre, post, {true, 25});
    EXPECT_FALSE(plain.exact);
    EXPECT_NEAR(std::fabs(plain.z) - std::fabs(corrected.z),
                0.5 / std::sqrt(40.0 * 41 * 81 / 24), 1e-12);
}

TEST(Wilcoxon, ApproximationTracksExact) {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> normal(0, 1);
    double worst = 0;
    for (std::size_t n = 6; n <= 12; ++n)
        for (int t = 0; t < 200; ++t) {
            std::vector<double> pre(n), post(n);
            for (std::size_t i = 0; i < n; ++i) pre[i] = normal(rng), post[i] = normal(rng) + 0.5;
            const auto r = wilcoxon_signed_rank(pre, post);
            worst = std::max(worst, std::fabs(r.p_normal - *r.p_exact));
        }
    EXPECT_LE(worst, 0.05);
}

TEST(Wilcoxon, LocationShiftCannotRaiseWMinus) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0, 1);
    std::uniform_real_distribution<double> shift(0.001, 3);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 3 + t % 20;
        std::vector<double> pre(n), post(n);
        for (std::size_t i = 0; i < n; ++i) pre[i] = normal(rng), post[i] = normal(rng);
        std::vector<double> shifted(post);
        const double c = shift(rng);
        for (auto& v : shifted) v += c;
        EXPECT_LE(wilcoxon_signed_rank(pre, shifted).w_minus, wilcoxon_signed_rank(pre, post).w_minus + 1e-12);
    }
}

TEST(Wilcoxon, ExactPDistribution) {
    // n = 3: W+ takes 0..6 with counts 1,1,1,2,1,1,1
    EXPECT_DOUBLE_EQ(wilcoxon_exact_p(3, 0), 2.0 / 8);
    EXPECT_DOUBLE_EQ(wilcoxon_exact_p(3, 6), 2.0 / 8);
    EXPECT_DOUBLE_EQ(wilcoxon_exact_p(3, 1), 4.0 / 8);
    EXPECT_DOUBLE_EQ(wilcoxon_exact_p(3, 3), 1.0);
}

TEST(Format, ReportStyle) {
    WilcoxonResult w;
    w.z = -2.4523;
    w.p = 0.01419;
    EXPECT_EQ(format_z_p(w), "Z = -2.452, p = 0.014");
    Descriptives d;
    d.mean = 2.4444;
    d.sd = 1.1611;
    EXPECT_EQ(format_mean_sd(d), "M = 2.44 SD = 1.16");
    EXPECT_EQ(format_p(0.0004), "0.000");
    EXPECT_EQ(format_p(0.0496), "0.050");
}

// ---- factor scores -----------------------------------------------------------

namespace {

struct OneFactorSample {
    Eigen::MatrixXd x;
    std::vector<double> f;
};

OneFactorSample one_factor(int n, int items, double loading, double noise_sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0, 1);
    OneFactorSample s{Eigen::MatrixXd(n, items), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        s.f[i] = normal(rng);
        for (int j = 0; j < items; ++j) s.x(i, j) = loading * s.f[i] + noise_sd * normal(rng);
    }
    return s;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(Factor, ScoresAreCenteredAndTrackTheFactor) {
    const auto s = one_factor(500, 6, 0.7, std::sqrt(0.51), 2026);
    const auto fs = factor_scores(s.x);
    EXPECT_NEAR(oracle::mean(as_vector(fs.scores)), 0.0, 1e-9);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(fs.loadings[j], 0.7, 0.08);
    // Ceiling for six items at loading 0.7 is about 0.923.
    EXPECT_GT(oracle::correlation(as_vector(fs.scores), s.f), 0.90);
}

TEST(Factor, MoreItemsRecoverTheFactorClosely) {
    const auto s = one_factor(500, 12, 0.7, std::sqrt(0.51), 7);
    const auto fs = factor_scores(s.x);
    EXPECT_GE(oracle::correlation(as_vector(fs.scores), s.f), 0.95);
}

TEST(Factor, NegatingColumnsNegatesScores) {
    const auto s = one_factor(120, 6, 0.7, 0.7, 3);
    const auto a = factor_scores(s.x);
    const auto b = factor_scores(-s.x);
    for (Eigen::Index i = 0; i < a.scores.size(); ++i) EXPECT_NEAR(a.scores[i], -b.scores[i], 1e-9);
    EXPECT_GE(a.loadings.sum(), 0.0);
    EXPECT_GE(b.loadings.sum(), 0.0);
}

TEST(Factor, EqualLoadingsPreserveSumOrder) {
    // Every row appears with all six cyclic shifts, so the correlation matrix
    // is circulant and the fitted loadings and weights are exactly equal.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0, 1);
    const int bases = 30;
    Eigen::MatrixXd x(bases * 6, 6);
    for (int b = 0; b < bases; ++b) {
        const double f = normal(rng);
        double row[6];
        for (double& v : row) v = f + 0.5 * normal(rng);
        for (int shift = 0; shift < 6; ++shift)
            for (int j = 0; j < 6; ++j) x(b * 6 + shift, j) = row[(j + shift) % 6];
    }
    const auto fs = factor_scores(x);
    EXPECT_LT(fs.loadings.maxCoeff() - fs.loadings.minCoeff(), 1e-9);
    std::vector<int> idx(x.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x.row(a).sum() < x.row(b).sum(); });
    for (std::size_t k = 1; k < idx.size(); ++k) EXPECT_LE(fs.scores[idx[k - 1]], fs.scores[idx[k]] + 1e-9);
}

TEST(Factor, SumOrderHoldsOnExchangeableData) {
    // Compound-symmetric data: item j = f + e_j with all e_j equally scaled,
    // standardised per column before fitting so loadings are essentially equal.
    const auto s = one_factor(300, 6, 0.8, 0.6, 21);
    const auto fs = factor_scores(s.x);
    const double spread = fs.loadings.maxCoeff() - fs.loadings.minCoeff();
    EXPECT_LT(spread, 0.15);
    EXPECT_GT(oracle::correlation(as_vector(fs.scores), [&] {
                  std::vector<double> sums(300);
                  for (int i = 0; i < 300; ++i) sums[i] = s.x.row(i).sum();
                  return sums;
              }()),
              0.99);
}

TEST(Factor, Errors) {
    Eigen::MatrixXd same = Eigen::MatrixXd::Constant(20, 6, 1.0);
    EXPECT_THROW(factor_scores(same), StatsError);
    Eigen::MatrixXd few = Eigen::MatrixXd::Random(5, 6);
    EXPECT_THROW(factor_scores(few), StatsError);
}
