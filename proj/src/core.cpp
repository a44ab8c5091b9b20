#include "gglangevin/core.hpp"

#include <cmath>

namespace gg {

double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

void PointCloud2::validate() const {
    for (const Vec2& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("PointCloud2: non-finite point");
        }
    }
    if (!normals.empty()) {
        if (normals.size() != points.size()) {
            throw std::invalid_argument("PointCloud2: normals/points count mismatch");
        }
        for (const Vec2& n : normals) {
            if (std::abs(norm(n) - 1.0) > 1e-9) {
                throw std::invalid_argument("PointCloud2: normal not unit length");
            }
        }
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // (0,1) on the radial draw so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > bound) x = next_u64();
    return static_cast<std::size_t>(x % n);
}

Rng Rng::derive(std::uint64_t index) const {
    std::uint64_t s = seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return Rng(splitmix64(s));
}

std::vector<double> draw_standard_normal(Rng& rng, std::size_t d) {
    if (d == 0) throw std::invalid_argument("draw_standard_normal: d must be positive");
    std::vector<double> out(d);
    for (double& v : out) v = rng.normal();
    return out;
}

NoiseSchedule NoiseSchedule::constant(double sigma) {
    NoiseSchedule s;
    s.kind = Kind::Constant;
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSchedule NoiseSchedule::cosine_anneal(double sigma_max, double sigma_min, long t_anneal, long t_tail) {
    NoiseSchedule s;
    s.kind = Kind::CosineAnneal;
    s.sigma_max = sigma_max;
    s.sigma_min = sigma_min;
    s.t_anneal = t_anneal;
    s.t_tail = t_tail;
    s.validate();
    return s;
}

double NoiseSchedule::at(long t) const {
    if (t < 0) throw std::invalid_argument("NoiseSchedule: negative step index");
    if (kind == Kind::Constant) return sigma;
    if (t >= t_anneal) return sigma_min;
    const double phase = M_PI * static_cast<double>(t) / static_cast<double>(t_anneal);
    return sigma_min + (sigma_max - sigma_min) * 0.5 * (1.0 + std::cos(phase));
}

void NoiseSchedule::validate() const {
    if (kind == Kind::Constant) {
        if (!(sigma > 0.0)) throw std::invalid_argument("NoiseSchedule: sigma must be > 0");
        return;
    }
    if (!(sigma_min > 0.0) || !(sigma_max > 0.0)) {
        throw std::invalid_argument("NoiseSchedule: sigma bounds must be > 0");
    }
    if (sigma_min > sigma_max) throw std::invalid_argument("NoiseSchedule: sigma_min > sigma_max");
    if (t_anneal < 0 || t_tail < 0) throw std::invalid_argument("NoiseSchedule: negative phase length");
}

double schedule_sigma(const NoiseSchedule& schedule, long t) { return schedule.at(t); }

void SamplerConfig::validate() const {
    schedule.validate();
    if (!(beta >= 0.0)) throw std::invalid_argument("SamplerConfig: beta must be >= 0");
    if (steps <= 0) throw std::invalid_argument("SamplerConfig: steps must be positive");
    if (eta) {
        if (!(*eta > 0.0)) throw std::invalid_argument("SamplerConfig: eta must be > 0");
        if (schedule.kind == NoiseSchedule::Kind::Constant) {
            const double implied = *eta * schedule.sigma * schedule.sigma / 2.0;
            if (std::abs(implied - beta) > 1e-12) {
                throw std::invalid_argument("SamplerConfig: beta and eta disagree (beta = eta sigma^2 / 2)");
            }
        }
    }
}

double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec_dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool vec_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace gg
