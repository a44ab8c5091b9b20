#ifndef GGLANGEVIN_CORE_HPP
#define GGLANGEVIN_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gg {

// Flat latent vector z. Whitened convention: priors are standardized so each
// coordinate has roughly unit scale.
using Latent = std::vector<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a);

// 2D measurement points inside Omega = [-1,1]^2, with optional unit normals.
struct PointCloud2 {
    std::vector<Vec2> points;
    std::vector<Vec2> normals;  // empty or same size as points

    bool has_normals() const { return !normals.empty(); }
    std::size_t size() const { return points.size(); }
    // Throws std::invalid_argument if a point is non-finite or a normal is
    // present but not unit length (tolerance 1e-9) or mismatched in count.
    void validate() const;
};

// Signaled numerical divergence (non-finite state, runaway iterate).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic generator. Same seed + same call sequence gives the same
// stream on every run; uniforms come from a fixed xoshiro256** engine and
// normals from Box-Muller, so the stream does not depend on standard-library
// distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    double uniform();            // [0, 1)
    double uniform(double a, double b);
    double normal();             // N(0, 1)
    std::uint64_t next_u64();
    std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}

    // Independent child stream; index selects among derived streams.
    Rng derive(std::uint64_t index) const;

private:
    std::uint64_t state_[4];  // internal engine state (splitmix-seeded xoshiro256**)
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::vector<double> draw_standard_normal(Rng& rng, std::size_t d);

// Noise level per step. Constant, or half-cosine anneal from sigma_max down
// to sigma_min over t_anneal steps followed by a constant tail of t_tail
// steps at sigma_min.
struct NoiseSchedule {
    enum class Kind { Constant, CosineAnneal };
    Kind kind = Kind::Constant;
    double sigma = 0.05;      // Constant
    double sigma_max = 0.2;   // CosineAnneal
    double sigma_min = 0.02;
    long t_anneal = 0;
    long t_tail = 0;

    static NoiseSchedule constant(double sigma);
    static NoiseSchedule cosine_anneal(double sigma_max, double sigma_min, long t_anneal, long t_tail);

    double at(long t) const;
    // Natural run length; 0 for Constant (caller picks the step count).
    long length() const { return kind == Kind::Constant ? 0 : t_anneal + t_tail; }
    void validate() const;
};

double schedule_sigma(const NoiseSchedule& schedule, long t);

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct SamplerConfig {
    NoiseSchedule schedule;
    double beta = 0.03;            // guidance strength; Adam learning rate
    std::optional<double> eta;     // weighting rate, beta = eta * sigma^2 / 2
    long steps = 2000;
    AdamParams adam;
    std::uint64_t seed = 0;

    // Checks beta/eta consistency (constant schedules) and basic ranges.
    void validate() const;
};

// Small dense-vector helpers shared across modules.
double vec_norm(const std::vector<double>& v);
double vec_dot(const std::vector<double>& a, const std::vector<double>& b);
bool vec_finite(const std::vector<double>& v);

}  // namespace gg

#endif
