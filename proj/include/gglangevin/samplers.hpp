#ifndef GGLANGEVIN_SAMPLERS_HPP
#define GGLANGEVIN_SAMPLERS_HPP

#include "gglangevin/guidance.hpp"
#include "gglangevin/score.hpp"

namespace gg {

struct TraceRecord {
    long t = 0;
    double sigma = 0.0;
    LossBreakdown loss;
    double score_norm = 0.0;
    double guidance_norm = 0.0;
};

struct SamplerTrace {
    std::vector<TraceRecord> records;
    Latent final_z;
    bool diverged = false;
    long steps_completed = 0;
};

// Iterate abort threshold in whitened units.
constexpr double kDivergenceNormLimit = 1e3;

// z' = z + sigma n + (sigma^2/2) s(z); the drift uses the true score at the
// pre-noise iterate. Requires an oracle with a true score.
Latent langevin_step(const ScoreOracle& oracle, const Latent& z, double sigma, Rng& rng);

// z' = z + sigma n + (sigma^2/2) s_sigma(z + sigma n); the noisy-data score
// is evaluated at the noised iterate.
Latent half_denoising_step(const ScoreOracle& oracle, const Latent& z, double sigma, Rng& rng);

// z' = z + sigma n + (sigma^2/2) s(z) - beta grad, with grad the guidance
// gradient at the pre-noise iterate.
Latent guided_langevin_true_step(const ScoreOracle& oracle, const Latent& z, double sigma,
                                 double beta, const std::vector<double>& loss_grad_at_z, Rng& rng);

// The hybrid update: the score model sees the noised latent, the guidance
// gradient was taken at the denoised one. Combination is left to the caller.
struct HdndParts {
    Latent noised;         // z + sigma n
    Latent half_denoised;  // noised + (sigma^2/2) s_sigma(noised)
    std::vector<double> guidance_grad;
};
HdndParts hdnd_step(const ScoreOracle& oracle, const Latent& z, double sigma,
                    const std::vector<double>& loss_grad_at_z, Rng& rng);
// Plain combination z' = half_denoised - beta * grad.
Latent hdnd_step_plain(const ScoreOracle& oracle, const Latent& z, double sigma, double beta,
                       const std::vector<double>& loss_grad_at_z, Rng& rng);

struct RunOptions {
    bool use_adam = true;   // Adam on the guidance gradient, applied at the half-denoised state
    long trace_stride = 1;  // record every k-th step
};

// The full loop: z0 -> N steps of add-noise / half-denoise / guidance, with
// the guidance gradient routed through Adam (learning rate beta) starting
// from the half-denoised iterate. Divergence aborts with a partial trace.
SamplerTrace gg_langevin_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                             const SamplerConfig& cfg, const RunOptions& opts = {});

// Deterministic Adam minimization of the MAP objective from the encoder
// initialization; no noise injection.
SamplerTrace map_run(const DiskDecoder& dec, const PointCloud2& P, const SamplerConfig& cfg,
                     const GuidanceConfig& gcfg);

struct DpsOptions {
    double sigma_T = 80.0;   // forward-noising level for the initial state
    double sigma_end = 0.01;
    double zeta = 0.1;       // guidance scale along the reverse trajectory
    long trace_stride = 1;
};

// Reverse-time ancestral sampling over a geometric sigma grid, with the loss
// gradient taken at the Tweedie estimate and pulled back through the
// denoiser.
SamplerTrace dps_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                     const SamplerConfig& cfg, const DpsOptions& opts = {});

struct DapsOptions {
    double sigma_max = 1.0;
    double sigma_end = 0.01;
    long steps_per_level = 250;
    double eta = 24.0;      // guidance weight inside each level
    double lr_scale = 0.1;  // Langevin step size as a fraction of r^2
};

// Decoupled annealing: per noise level, Tweedie-denoise, then Langevin MCMC
// on exp(-eta L(x)) N(x; denoised, r^2) and re-noise to the next level.
SamplerTrace daps_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                      const SamplerConfig& cfg, const DapsOptions& opts = {});

// --- stationary-distribution sampling for the 1D toy experiments ---

enum class ToyMethod { LangevinTrue, HalfDenoising, GuidedTrue, Hdnd };
enum class ToyInit { Rejection, Prior, Point };

struct StationaryRunConfig {
    ToyMethod method = ToyMethod::Hdnd;
    ToyInit init = ToyInit::Rejection;
    double init_point = 0.0;
    int chains = 800;
    long steps_per_chain = 280;
    double burn_in_frac = 0.1;
    double sigma = 0.05;
    double beta = 0.0;
    double eta_for_rejection = 0.0;  // 0 disables the weight (prior init)
    std::uint64_t seed = 0;
};

// Pools post-burn-in states from independent chains whose starting points
// come from the init prior, thinned by the guidance weight exp(-eta L).
std::vector<double> stationary_samples(const ScoreOracle& oracle, const GmmPrior& init_prior,
                                       const GuidanceFn& guidance, const StationaryRunConfig& cfg);

}  // namespace gg

#endif
