#ifndef GGLANGEVIN_REFERENCE_HPP
#define GGLANGEVIN_REFERENCE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gglangevin/score.hpp"

namespace gg {

/// Normalized 1D density on [a, b] with a quadrature-backed CDF. The
/// normalization is re-checked against an independent composite rule at
/// construction (tolerance 1e-8).
class Density1D {
public:
    Density1D(std::function<double(double)> pdf, double a, double b, double Z);

    double a() const { return a_; }
    double b() const { return b_; }
    double normalization() const { return Z_; }
    double pdf(double x) const { return pdf_(x); }
    double cdf(double x) const;
    // Integral of the pdf over [lo, hi] using the cached grid.
    double mass(double lo, double hi) const { return cdf(hi) - cdf(lo); }

private:
    std::function<double(double)> pdf_;
    double a_, b_, Z_;
    std::vector<double> grid_x_;
    std::vector<double> grid_cdf_;
};

// Adaptive Simpson integration to absolute tolerance tol. Throws
// std::runtime_error when the subdivision limit is hit before convergence.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 48);

// Normalizes a nonnegative integrable function on [a, b].
std::pair<double, Density1D> quadrature_normalize(const std::function<double(double)>& f, double a,
                                                  double b, double tol);

// Prior density itself (sigma = 0) or its sigma-convolved version.
Density1D gmm_density_1d(const GmmPrior& prior, double sigma = 0.0);

// Closed form for prior(z) * exp(-eta (z - mu)^2): every component stays
// Gaussian, so the product is a reweighted Gaussian mixture.
Density1D product_density_quadratic(const GmmPrior& prior, double eta, double mu);
GmmPrior product_mixture_quadratic(const GmmPrior& prior, double eta, double mu);

// Numeric route for prior(z) * exp(-eta |z - mu|).
Density1D product_density_l1(const GmmPrior& prior, double eta, double mu);

double tv_distance(const std::vector<double>& samples, const Density1D& density, int bins);
double ks_statistic(std::vector<double> samples, const Density1D& density);

}  // namespace gg

#endif
