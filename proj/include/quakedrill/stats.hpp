#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace quakedrill::stats {

class StatsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n - 1); NaN when n == 1
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Mean, sample SD and type-7 (linear interpolation) quartiles.
Descriptives descriptives(std::span<const double> samples);

/// Type-7 quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double prob);

struct ShapiroWilkResult {
    double w = 1.0;
    double p = 1.0;
};

/// Shapiro-Wilk W and p-value via Royston's AS R94 approximation.
/// Requires 3 <= n <= 5000 and a nonzero range.
ShapiroWilkResult shapiro_wilk(std::span<const double> samples);

struct WilcoxonOptions {
    /// Shift |W - n(n+1)/4| toward zero by 0.5 in the normal approximation.
    bool continuity_correction = true;
    /// Largest tie-free effective sample size for which p is computed exactly.
    std::size_t exact_max_n = 25;
};

struct WilcoxonResult {
    std::size_t n_effective = 0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    double z = 0.0;
    double p = 1.0;       // exact p when `exact`, else p_normal
    bool exact = false;
    double p_normal = 1.0;
    std::optional<double> p_exact;
};

/// Paired signed-rank test on post - pre differences. Zero differences are
/// dropped; ties get average ranks. Z follows W_minus - E[W], so post > pre
/// gives negative Z.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> pre, std::span<const double> post,
                                    const WilcoxonOptions& options = {});

/// Two-sided exact p for a tie-free signed-rank statistic over n ranks,
/// from the null distribution of W+ (counted by dynamic programming).
double wilcoxon_exact_p(std::size_t n, double w_plus);

struct FactorModelOptions {
    double tolerance = 1e-6;
    int max_iterations = 200;
};

struct FactorScores {
    Eigen::VectorXd loadings;
    Eigen::VectorXd scores;
    Eigen::VectorXd communalities;
    int iterations = 0;
};

/// One-factor principal-axis factoring on the correlation matrix, scored by
/// the regression (Thomson) method. Rows are respondents, columns items.
FactorScores factor_scores(const Eigen::MatrixXd& responses, const FactorModelOptions& options = {});

double pearson_correlation(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace quakedrill::stats
