#ifndef GGLANGEVIN_SCORE_HPP
#define GGLANGEVIN_SCORE_HPP

#include <memory>
#include <string>
#include <vector>

#include "gglangevin/core.hpp"
#include "gglangevin/smallnet.hpp"

namespace gg {

/// Gaussian mixture with diagonal covariances. Serves as the analytic prior:
/// the noisy-data score has a closed form because convolving with N(0, s^2 I)
/// just inflates every component variance by s^2.
struct GmmPrior {
    std::vector<double> weights;
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> vars;

    std::size_t dim() const { return means.empty() ? 0 : means.front().size(); }
    std::size_t components() const { return weights.size(); }
    void validate() const;

    static GmmPrior single(const std::vector<double>& mean, const std::vector<double>& var);
    // Symmetric 1D bimodal prior at +-mode_abs with per-component variance.
    static GmmPrior bimodal1d(double mode_abs, double var);

    std::vector<double> mean() const;
    std::vector<double> variance() const;  // per-coordinate marginal variance
    double data_std() const;               // sqrt of mean per-coordinate variance
};

std::vector<double> gmm_noisy_score(const GmmPrior& prior, double sigma, const Latent& z);
std::vector<double> gmm_true_score(const GmmPrior& prior, const Latent& z);
double gmm_noisy_logpdf(const GmmPrior& prior, double sigma, const Latent& z);
// Hessian-vector product of log p_sigma at z; exact for diagonal mixtures.
std::vector<double> gmm_noisy_loghess_vec(const GmmPrior& prior, double sigma, const Latent& z,
                                          const std::vector<double>& vec);

Latent sample_prior(const GmmPrior& prior, Rng& rng);

// Training noise level, sigma ~ LogNormal(-1.2, 1.2^2).
double sample_sigma(Rng& rng);

void save_gmm(const std::string& path, const GmmPrior& prior);
GmmPrior load_gmm(const std::string& path);

/// MLP noise predictor conditioned on sigma through one extra input
/// coordinate (log sigma), wrapped in the variance-preserving skip
/// parametrization eps_hat(z) = phi(z / sqrt(1+s^2)) / sqrt(1+s^2)
/// + s z / (1+s^2).
struct NoisePredictor {
    Mlp net;  // input d+1, output d

    std::size_t latent_dim() const { return net.output_dim(); }
    void validate() const;
};

std::vector<double> edm_predict_eps(const NoisePredictor& model, const Latent& z_noisy, double sigma);
std::vector<double> score_from_eps(const std::vector<double>& eps, double sigma);

struct DsmSample {
    Latent z;                 // clean latent
    double sigma = 0.0;
    std::vector<double> eps;  // standard normal noise
};

// Mean over the batch of w_sigma * |eps_hat(z + sigma eps) - eps|^2 / d with
// w_sigma = 1 + sigma^2. The 1/d keeps the value at 1 for a unit-variance
// prior at zero initialization regardless of latent dimension.
double dsm_loss(const NoisePredictor& model, const std::vector<DsmSample>& batch);

struct TrainScoreConfig {
    std::vector<std::size_t> hidden = {64, 64};
    double lr = 1e-3;       // initial learning rate
    double lr_final = 1e-5; // cosine-decayed floor reached at the last epoch
    std::size_t batch = 256;
    long epochs = 60;
    double holdout_frac = 0.1;
    std::uint64_t seed = 0;
};

struct TrainScoreResult {
    NoisePredictor model;
    std::vector<double> loss_curve;  // per-epoch mean training loss
    double init_holdout_loss = 0.0;
    double final_holdout_loss = 0.0;
};

// Denoising score matching on prior samples. Deterministic per config. An
// initial model continues training from its weights (hidden sizes in the
// config are then ignored).
TrainScoreResult train_score_model(const std::vector<Latent>& samples, const TrainScoreConfig& cfg,
                                   const NoisePredictor* resume_from = nullptr);

/// Anything that yields the noisy-data score s_sigma(z). The true
/// (noise-free) score is only available analytically.
class ScoreOracle {
public:
    virtual ~ScoreOracle() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> noisy_score(const Latent& z, double sigma) const = 0;
    virtual bool has_true_score() const { return false; }
    virtual std::vector<double> true_score(const Latent& z) const;
    // Vector-Jacobian product of the one-shot denoiser z -> z + sigma^2
    // s_sigma(z), used by samplers that differentiate through denoising.
    virtual std::vector<double> denoiser_vjp(const Latent& z, double sigma,
                                             const std::vector<double>& cotangent) const = 0;
};

class GmmScoreOracle final : public ScoreOracle {
public:
    explicit GmmScoreOracle(GmmPrior prior);
    std::size_t dim() const override { return prior_.dim(); }
    std::vector<double> noisy_score(const Latent& z, double sigma) const override;
    bool has_true_score() const override { return true; }
    std::vector<double> true_score(const Latent& z) const override;
    std::vector<double> denoiser_vjp(const Latent& z, double sigma,
                                     const std::vector<double>& cotangent) const override;
    const GmmPrior& prior() const { return prior_; }

private:
    GmmPrior prior_;
};

class LearnedScoreOracle final : public ScoreOracle {
public:
    explicit LearnedScoreOracle(NoisePredictor model);
    std::size_t dim() const override { return model_.latent_dim(); }
    std::vector<double> noisy_score(const Latent& z, double sigma) const override;
    std::vector<double> denoiser_vjp(const Latent& z, double sigma,
                                     const std::vector<double>& cotangent) const override;
    const NoisePredictor& model() const { return model_; }

private:
    NoisePredictor model_;
};

}  // namespace gg

#endif
