#include "quakedrill/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace quakedrill::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw StatsError("normal quantile needs 0 < p < 1");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw StatsError("quantile of empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Descriptives descriptives(std::span<const double> samples) {
    if (samples.empty()) throw StatsError("descriptives of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    Descriptives d;
    d.n = sorted.size();
    const double n = static_cast<double>(d.n);
    d.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    if (d.n >= 2) {
        double ss = 0.0;
        for (double x : sorted) ss += (x - d.mean) * (x - d.mean);
        d.sd = std::sqrt(ss / (n - 1.0));
    } else {
        d.sd = std::numeric_limits<double>::quiet_NaN();
    }
    d.min = sorted.front();
    d.max = sorted.back();
    d.q1 = quantile_sorted(sorted, 0.25);
    d.median = quantile_sorted(sorted, 0.5);
    d.q3 = quantile_sorted(sorted, 0.75);
    return d;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw StatsError("correlation needs two equal samples, n >= 2");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk, AS R94

namespace {

// c[0] + c[1] x + ... + c[k-1] x^(k-1)
template <std::size_t K>
double poly(const double (&c)[K], double x) {
    double result = 0.0;
    for (std::size_t i = K; i-- > 0;) result = result * x + c[i];
    return result;
}

constexpr double kSmall = 1e-19;

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> samples) {
    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

    const std::size_t n = samples.size();
    if (n < 3 || n > 5000) throw StatsError("Shapiro-Wilk needs 3 <= n <= 5000");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range >= kSmall)) throw StatsError("Shapiro-Wilk needs nonzero variance");

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);  // upper-half coefficients, largest first
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_scaled = 1;
        double fac = 0.0;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first_scaled = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
    }

    // Full antisymmetric coefficient vector over the sorted sample.
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }

    // W as the squared correlation of coefficients and range-scaled data;
    // w1 = 1 - W computed directly to keep precision when W is near 1.
    double sa = 0.0, sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += coef[i];
        sx += x[i] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef[i] - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    ShapiroWilkResult result;
    result.w = 1.0 - w1;

    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;   // 6 / pi
        constexpr double stqr = 1.04719755119660;  // asin(sqrt(3/4))
        result.p = std::max(0.0, pi6 * (std::asin(std::sqrt(result.w)) - stqr));
        return result;
    }

    double y = std::log(w1);
    double mean = 0.0, sd = 1.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) {
            result.p = 1e-99;
            return result;
        }
        y = -std::log(gamma - y);
        mean = poly(c3, an);
        sd = std::exp(poly(c4, an));
    } else {
        const double xx = std::log(an);
        mean = poly(c5, xx);
        sd = std::exp(poly(c6, xx));
    }
    result.p = 1.0 - normal_cdf((y - mean) / sd);
    return result;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

double wilcoxon_exact_p(std::size_t n, double w_plus) {
    if (n == 0) return 1.0;
    const std::size_t total = n * (n + 1) / 2;
    // counts[w] = number of sign assignments with W+ == w
    std::vector<double> counts(total + 1, 0.0);
    counts[0] = 1.0;
    for (std::size_t rank = 1; rank <= n; ++rank)
        for (std::size_t w = total; w >= rank; --w) counts[w] += counts[w - rank];
    const double w_minus = static_cast<double>(total) - w_plus;
    const auto tail = static_cast<std::size_t>(std::floor(std::min(w_plus, w_minus) + 1e-9));
    double below = 0.0;
    for (std::size_t w = 0; w <= tail && w <= total; ++w) below += counts[w];
    return std::min(1.0, 2.0 * below / std::ldexp(1.0, static_cast<int>(n)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> pre, std::span<const double> post,
                                    const WilcoxonOptions& options) {
    if (pre.size() != post.size()) throw StatsError("pre and post must have equal length");
    if (pre.empty()) throw StatsError("Wilcoxon needs at least one pair");

    std::vector<double> diffs;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const double d = post[i] - pre[i];
        if (!std::isfinite(d)) throw StatsError("non-finite paired difference");
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw StatsError("all differences zero");

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::fabs(diffs[a]) < std::fabs(diffs[b]); });

    std::vector<double> ranks(n);
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    bool ties = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }

    WilcoxonResult r;
    r.n_effective = n;
    for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];

    const double nn = static_cast<double>(n);
    const double expected = nn * (nn + 1.0) / 4.0;
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    double deviation = r.w_minus - expected;
    if (options.continuity_correction) {
        const double shrunk = std::max(0.0, std::fabs(deviation) - 0.5);
        deviation = std::copysign(shrunk, deviation);
    }
    r.z = variance > 0.0 ? deviation / std::sqrt(variance) : 0.0;
    r.p_normal = std::min(1.0, std::erfc(std::fabs(r.z) / std::sqrt(2.0)));

    if (!ties && n <= options.exact_max_n) {
        r.p_exact = wilcoxon_exact_p(n, r.w_plus);
        r.exact = true;
        r.p = *r.p_exact;
    } else {
        r.p = r.p_normal;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Factor scores

FactorScores factor_scores(const Eigen::MatrixXd& responses, const FactorModelOptions& options) {
    const auto n = responses.rows();
    const auto items = responses.cols();
    if (n < 10) throw StatsError("factor scores need at least 10 respondents");
    if (items < 2) throw StatsError("factor scores need at least 2 items");
    if (!responses.allFinite()) throw StatsError("responses must be finite");

    Eigen::MatrixXd z = responses.rowwise() - responses.colwise().mean();
    for (Eigen::Index j = 0; j < items; ++j) {
        const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1));
        if (!(sd > 1e-12)) throw StatsError("item " + std::to_string(j + 1) + " has zero variance");
        z.col(j) /= sd;
    }
    const Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n - 1);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
    if (!lu.isInvertible()) throw StatsError("item correlation matrix is singular");
    const Eigen::MatrixXd corr_inv = lu.inverse();

    // squared multiple correlations as starting communalities
    Eigen::VectorXd h2 = (Eigen::VectorXd::Ones(items).array() - corr_inv.diagonal().array().inverse()).matrix();
    Eigen::VectorXd loadings(items);
    int iteration = 0;
    for (;;) {
        if (iteration == options.max_iterations)
            throw StatsError("principal-axis factoring did not converge in " +
                             std::to_string(options.max_iterations) + " iterations");
        ++iteration;
        Eigen::MatrixXd reduced = corr;
        reduced.diagonal() = h2;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
        const double lambda = eig.eigenvalues()(items - 1);
        loadings = eig.eigenvectors().col(items - 1) * std::sqrt(std::max(lambda, 0.0));
        const Eigen::VectorXd next = loadings.array().square().matrix();
        const double change = (next - h2).cwiseAbs().maxCoeff();
        h2 = next;
        if (change < options.tolerance) break;
    }
    if (loadings.sum() < 0.0) loadings = -loadings;

    FactorScores out;
    const Eigen::VectorXd weights = corr_inv * loadings;
    out.scores = z * weights;
    out.scores.array() -= out.scores.mean();
    out.loadings = loadings;
    out.communalities = h2;
    out.iterations = iteration;
    return out;
}

}  // namespace quakedrill::stats
