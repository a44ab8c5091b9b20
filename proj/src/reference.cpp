#include "gglangevin/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gg {

namespace {

constexpr int kCdfGridPanels = 8192;

double simpson_rule(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(fa, flm, fm, m - a);
    const double right = simpson_rule(fm, frm, fb, b - m);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth <= 0) throw std::runtime_error("adaptive_simpson: tolerance not met at max subdivision");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (!(b >= a)) throw std::invalid_argument("adaptive_simpson: bad interval");
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson_rule(fa, fm, fb, b - a);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

Density1D::Density1D(std::function<double(double)> pdf, double a, double b, double Z)
    : pdf_(std::move(pdf)), a_(a), b_(b), Z_(Z) {
    if (!(b_ > a_)) throw std::invalid_argument("Density1D: bad interval");
    grid_x_.resize(kCdfGridPanels + 1);
    grid_cdf_.resize(kCdfGridPanels + 1);
    const double h = (b_ - a_) / kCdfGridPanels;
    grid_x_[0] = a_;
    grid_cdf_[0] = 0.0;
    double prev_f = pdf_(a_);
    for (int i = 1; i <= kCdfGridPanels; ++i) {
        const double x = a_ + h * i;
        const double fm = pdf_(x - 0.5 * h);
        const double fx = pdf_(x);
        grid_x_[i] = x;
        grid_cdf_[i] = grid_cdf_[i - 1] + simpson_rule(prev_f, fm, fx, h);
        prev_f = fx;
    }
    if (std::abs(grid_cdf_.back() - 1.0) > 1e-8) {
        throw std::runtime_error("Density1D: density does not integrate to 1 on [a, b]");
    }
}

double Density1D::cdf(double x) const {
    if (x <= a_) return 0.0;
    if (x >= b_) return grid_cdf_.back();
    const double h = (b_ - a_) / kCdfGridPanels;
    const int i = std::min(static_cast<int>((x - a_) / h), kCdfGridPanels - 1);
    const double x0 = grid_x_[i];
    if (x == x0) return grid_cdf_[i];
    return grid_cdf_[i] + simpson_rule(pdf_(x0), pdf_(0.5 * (x0 + x)), pdf_(x), x - x0);
}

std::pair<double, Density1D> quadrature_normalize(const std::function<double(double)>& f, double a,
                                                  double b, double tol) {
    const double Z = adaptive_simpson(f, a, b, tol);
    if (!(Z > 0.0) || !std::isfinite(Z)) {
        throw std::runtime_error("quadrature_normalize: non-positive or non-finite mass");
    }
    auto pdf = [f, Z](double x) { return f(x) / Z; };
    return {Z, Density1D(pdf, a, b, Z)};
}

namespace {

void require_1d(const GmmPrior& prior) {
    if (prior.dim() != 1) throw std::invalid_argument("reference densities are 1D only");
}

std::pair<double, double> prior_range(const GmmPrior& prior, double extra_std) {
    double lo = prior.means[0][0], hi = prior.means[0][0], smax = 0.0;
    for (std::size_t i = 0; i < prior.components(); ++i) {
        lo = std::min(lo, prior.means[i][0]);
        hi = std::max(hi, prior.means[i][0]);
        smax = std::max(smax, std::sqrt(prior.vars[i][0]));
    }
    return {lo - extra_std * smax, hi + extra_std * smax};
}

}  // namespace

Density1D gmm_density_1d(const GmmPrior& prior, double sigma) {
    require_1d(prior);
    auto [lo, hi] = prior_range(prior, 8.0);
    lo -= 8.0 * sigma;
    hi += 8.0 * sigma;
    auto pdf = [prior, sigma](double z) { return std::exp(gmm_noisy_logpdf(prior, sigma, {z})); };
    return Density1D(pdf, lo, hi, 1.0);
}

GmmPrior product_mixture_quadratic(const GmmPrior& prior, double eta, double mu) {
    require_1d(prior);
    if (!(eta > 0.0)) throw std::invalid_argument("product_mixture_quadratic: eta must be > 0");
    GmmPrior out;
    const std::size_t n = prior.components();
    out.weights.resize(n);
    out.means.assign(n, {0.0});
    out.vars.assign(n, {0.0});
    std::vector<double> logmass(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = prior.means[i][0];
        const double v = prior.vars[i][0];
        const double denom = 1.0 + 2.0 * eta * v;
        out.vars[i][0] = v / denom;
        out.means[i][0] = (m + 2.0 * eta * v * mu) / denom;
        // integral of N(z; m, v) exp(-eta (z - mu)^2) dz
        logmass[i] = std::log(prior.weights[i] > 0.0 ? prior.weights[i] : 1e-300) -
                     eta * (m - mu) * (m - mu) / denom - 0.5 * std::log(denom);
    }
    const double lmax = *std::max_element(logmass.begin(), logmass.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.weights[i] = std::exp(logmass[i] - lmax);
        total += out.weights[i];
    }
    for (double& w : out.weights) w /= total;
    out.validate();
    return out;
}

Density1D product_density_quadratic(const GmmPrior& prior, double eta, double mu) {
    const GmmPrior mix = product_mixture_quadratic(prior, eta, mu);
    auto [lo, hi] = prior_range(prior, 8.0);
    lo = std::min(lo, mu - 4.0 / std::sqrt(eta));
    hi = std::max(hi, mu + 4.0 / std::sqrt(eta));
    auto pdf = [mix](double z) { return std::exp(gmm_noisy_logpdf(mix, 0.0, {z})); };
    return Density1D(pdf, lo, hi, 1.0);
}

Density1D product_density_l1(const GmmPrior& prior, double eta, double mu) {
    require_1d(prior);
    if (!(eta > 0.0)) throw std::invalid_argument("product_density_l1: eta must be > 0");
    auto [lo, hi] = prior_range(prior, 8.0);
    auto raw = [prior, eta, mu](double z) {
        return std::exp(gmm_noisy_logpdf(prior, 0.0, {z}) - eta * std::abs(z - mu));
    };
    return quadrature_normalize(raw, lo, hi, 1e-12).second;
}

double tv_distance(const std::vector<double>& samples, const Density1D& density, int bins) {
    if (samples.size() < 1000) throw std::invalid_argument("tv_distance: need >= 1000 samples");
    if (bins < 10) throw std::invalid_argument("tv_distance: need >= 10 bins");
    const double a = density.a(), b = density.b();
    const double h = (b - a) / bins;
    std::vector<double> counts(bins, 0.0);
    for (double x : samples) {
        int i = static_cast<int>((x - a) / h);
        i = std::clamp(i, 0, bins - 1);
        counts[i] += 1.0;
    }
    double tv = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double emp = counts[i] / static_cast<double>(samples.size());
        const double ref = density.mass(a + i * h, a + (i + 1) * h);
        tv += std::abs(emp - ref);
    }
    return 0.5 * tv;
}

double ks_statistic(std::vector<double> samples, const Density1D& density) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample set");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = density.cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
        d = std::max(d, std::abs(static_cast<double>(i) / n - F));
    }
    return d;
}

}  // namespace gg
