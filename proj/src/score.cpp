#include "gglangevin/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gg {

void GmmPrior::validate() const {
    if (weights.empty()) throw std::invalid_argument("GmmPrior: need at least one component");
    if (means.size() != weights.size() || vars.size() != weights.size()) {
        throw std::invalid_argument("GmmPrior: component count mismatch");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("GmmPrior: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("GmmPrior: weights must sum to 1");
    const std::size_t d = dim();
    if (d == 0) throw std::invalid_argument("GmmPrior: zero dimension");
    for (std::size_t i = 0; i < components(); ++i) {
        if (means[i].size() != d || vars[i].size() != d) {
            throw std::invalid_argument("GmmPrior: dimension mismatch");
        }
        for (double v : vars[i]) {
            if (!(v > 0.0)) throw std::invalid_argument("GmmPrior: variances must be > 0");
        }
    }
}

GmmPrior GmmPrior::single(const std::vector<double>& mean, const std::vector<double>& var) {
    GmmPrior p;
    p.weights = {1.0};
    p.means = {mean};
    p.vars = {var};
    p.validate();
    return p;
}

GmmPrior GmmPrior::bimodal1d(double mode_abs, double var) {
    GmmPrior p;
    p.weights = {0.5, 0.5};
    p.means = {{-mode_abs}, {mode_abs}};
    p.vars = {{var}, {var}};
    p.validate();
    return p;
}

std::vector<double> GmmPrior::mean() const {
    std::vector<double> m(dim(), 0.0);
    for (std::size_t i = 0; i < components(); ++i) {
        for (std::size_t j = 0; j < dim(); ++j) m[j] += weights[i] * means[i][j];
    }
    return m;
}

std::vector<double> GmmPrior::variance() const {
    const std::vector<double> m = mean();
    std::vector<double> v(dim(), 0.0);
    for (std::size_t i = 0; i < components(); ++i) {
        for (std::size_t j = 0; j < dim(); ++j) {
            const double dm = means[i][j] - m[j];
            v[j] += weights[i] * (vars[i][j] + dm * dm);
        }
    }
    return v;
}

double GmmPrior::data_std() const {
    const std::vector<double> v = variance();
    const double avg = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    return std::sqrt(avg);
}

namespace {

// Log responsibilities and per-component score terms for the sigma-inflated
// mixture. sigma == 0 gives the noise-free case.
struct MixtureEval {
    std::vector<double> resp;                 // responsibilities r_i
    std::vector<std::vector<double>> gcomp;   // g_i = -(z - mu_i) / (v_i + s^2)
    double logpdf = 0.0;
};

MixtureEval eval_mixture(const GmmPrior& prior, double sigma, const Latent& z) {
    const std::size_t n = prior.components();
    const std::size_t d = prior.dim();
    if (z.size() != d) throw std::invalid_argument("gmm score: latent dim mismatch");
    const double s2 = sigma * sigma;
    MixtureEval ev;
    ev.gcomp.assign(n, std::vector<double>(d));
    std::vector<double> logw(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double V = prior.vars[i][j] + s2;
            const double diff = z[j] - prior.means[i][j];
            lq += -0.5 * diff * diff / V - 0.5 * std::log(2.0 * M_PI * V);
            ev.gcomp[i][j] = -diff / V;
        }
        logw[i] = std::log(prior.weights[i] > 0.0 ? prior.weights[i] : 1e-300) + lq;
    }
    const double lmax = *std::max_element(logw.begin(), logw.end());
    double denom = 0.0;
    ev.resp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev.resp[i] = std::exp(logw[i] - lmax);
        denom += ev.resp[i];
    }
    for (double& r : ev.resp) r /= denom;
    ev.logpdf = lmax + std::log(denom);
    return ev;
}

}  // namespace

std::vector<double> gmm_noisy_score(const GmmPrior& prior, double sigma, const Latent& z) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gmm_noisy_score: sigma must be > 0");
    const MixtureEval ev = eval_mixture(prior, sigma, z);
    std::vector<double> s(prior.dim(), 0.0);
    for (std::size_t i = 0; i < prior.components(); ++i) {
        for (std::size_t j = 0; j < prior.dim(); ++j) s[j] += ev.resp[i] * ev.gcomp[i][j];
    }
    return s;
}

std::vector<double> gmm_true_score(const GmmPrior& prior, const Latent& z) {
    const MixtureEval ev = eval_mixture(prior, 0.0, z);
    std::vector<double> s(prior.dim(), 0.0);
    for (std::size_t i = 0; i < prior.components(); ++i) {
        for (std::size_t j = 0; j < prior.dim(); ++j) s[j] += ev.resp[i] * ev.gcomp[i][j];
    }
    return s;
}

double gmm_noisy_logpdf(const GmmPrior& prior, double sigma, const Latent& z) {
    if (sigma < 0.0) throw std::invalid_argument("gmm_noisy_logpdf: sigma must be >= 0");
    return eval_mixture(prior, sigma, z).logpdf;
}

std::vector<double> gmm_noisy_loghess_vec(const GmmPrior& prior, double sigma, const Latent& z,
                                          const std::vector<double>& vec) {
    const std::size_t d = prior.dim();
    if (vec.size() != d) throw std::invalid_argument("gmm_noisy_loghess_vec: vec dim mismatch");
    const MixtureEval ev = eval_mixture(prior, sigma, z);
    const double s2 = sigma * sigma;
    std::vector<double> gbar(d, 0.0);
    for (std::size_t i = 0; i < prior.components(); ++i) {
        for (std::size_t j = 0; j < d; ++j) gbar[j] += ev.resp[i] * ev.gcomp[i][j];
    }
    // H = sum_i r_i (g_i g_i^T - diag(1/V_i)) - gbar gbar^T
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < prior.components(); ++i) {
        double gi_v = 0.0;
        for (std::size_t j = 0; j < d; ++j) gi_v += ev.gcomp[i][j] * vec[j];
        for (std::size_t j = 0; j < d; ++j) {
            out[j] += ev.resp[i] * (ev.gcomp[i][j] * gi_v - vec[j] / (prior.vars[i][j] + s2));
        }
    }
    const double gbar_v = vec_dot(gbar, vec);
    for (std::size_t j = 0; j < d; ++j) out[j] -= gbar[j] * gbar_v;
    return out;
}

Latent sample_prior(const GmmPrior& prior, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = prior.components() - 1;
    for (std::size_t i = 0; i < prior.components(); ++i) {
        acc += prior.weights[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    Latent z(prior.dim());
    for (std::size_t j = 0; j < prior.dim(); ++j) {
        z[j] = prior.means[pick][j] + std::sqrt(prior.vars[pick][j]) * rng.normal();
    }
    return z;
}

double sample_sigma(Rng& rng) { return std::exp(-1.2 + 1.2 * rng.normal()); }

void save_gmm(const std::string& path, const GmmPrior& prior) {
    prior.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_gmm: cannot open " + path);
    out << "gg-gmm v1\n";
    out << "components " << prior.components() << " dim " << prior.dim() << "\n";
    char buf[64];
    auto emit = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%a", x);
        out << buf;
    };
    for (std::size_t i = 0; i < prior.components(); ++i) {
        emit(prior.weights[i]);
        for (double m : prior.means[i]) {
            out << ' ';
            emit(m);
        }
        for (double v : prior.vars[i]) {
            out << ' ';
            emit(v);
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("save_gmm: write failed for " + path);
}

GmmPrior load_gmm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_gmm: cannot open " + path);
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != "gg-gmm" || version != "v1") throw std::runtime_error("load_gmm: bad header");
    std::size_t n = 0, d = 0;
    in >> key >> n >> key >> d;
    GmmPrior p;
    p.weights.resize(n);
    p.means.assign(n, std::vector<double>(d));
    p.vars.assign(n, std::vector<double>(d));
    auto read = [&]() {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("load_gmm: truncated file");
        return std::strtod(tok.c_str(), nullptr);
    };
    for (std::size_t i = 0; i < n; ++i) {
        p.weights[i] = read();
        for (std::size_t j = 0; j < d; ++j) p.means[i][j] = read();
        for (std::size_t j = 0; j < d; ++j) p.vars[i][j] = read();
    }
    p.validate();
    return p;
}

void NoisePredictor::validate() const {
    net.validate();
    if (net.input_dim() != net.output_dim() + 1) {
        throw std::invalid_argument("NoisePredictor: net must take (z, log sigma) and return d values");
    }
}

namespace {

std::vector<double> edm_embed(const Latent& z_noisy, double sigma, double inv_sqrt) {
    std::vector<double> in(z_noisy.size() + 1);
    for (std::size_t j = 0; j < z_noisy.size(); ++j) in[j] = z_noisy[j] * inv_sqrt;
    in.back() = std::log(sigma);
    return in;
}

}  // namespace

std::vector<double> edm_predict_eps(const NoisePredictor& model, const Latent& z_noisy, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("edm_predict_eps: sigma must be > 0");
    if (z_noisy.size() != model.latent_dim()) {
        throw std::invalid_argument("edm_predict_eps: latent dim mismatch");
    }
    const double s2 = sigma * sigma;
    const double inv_sqrt = 1.0 / std::sqrt(1.0 + s2);
    std::vector<double> eps = model.net.forward(edm_embed(z_noisy, sigma, inv_sqrt));
    for (std::size_t j = 0; j < eps.size(); ++j) {
        eps[j] = eps[j] * inv_sqrt + sigma * z_noisy[j] / (1.0 + s2);
    }
    return eps;
}

std::vector<double> score_from_eps(const std::vector<double>& eps, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("score_from_eps: sigma must be > 0");
    std::vector<double> s(eps.size());
    for (std::size_t j = 0; j < eps.size(); ++j) s[j] = -eps[j] / sigma;
    return s;
}

double dsm_loss(const NoisePredictor& model, const std::vector<DsmSample>& batch) {
    if (batch.empty()) throw std::invalid_argument("dsm_loss: empty batch");
    const std::size_t d = model.latent_dim();
    double total = 0.0;
    std::vector<double> noisy(d);
    for (const DsmSample& s : batch) {
        if (s.z.size() != d || s.eps.size() != d) throw std::invalid_argument("dsm_loss: dim mismatch");
        for (std::size_t j = 0; j < d; ++j) noisy[j] = s.z[j] + s.sigma * s.eps[j];
        const std::vector<double> eps_hat = edm_predict_eps(model, noisy, s.sigma);
        const double w = 1.0 + s.sigma * s.sigma;
        double err = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double e = eps_hat[j] - s.eps[j];
            err += e * e;
        }
        total += w * err / static_cast<double>(d);
    }
    if (!std::isfinite(total)) throw DivergenceError("dsm_loss: non-finite loss");
    return total / static_cast<double>(batch.size());
}

TrainScoreResult train_score_model(const std::vector<Latent>& samples, const TrainScoreConfig& cfg,
                                   const NoisePredictor* resume_from) {
    if (samples.size() < 1000) throw std::invalid_argument("train_score_model: need >= 1000 samples");
    const std::size_t d = samples.front().size();
    for (const Latent& z : samples) {
        if (z.size() != d) throw std::invalid_argument("train_score_model: inconsistent dims");
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    const std::size_t n_hold = static_cast<std::size_t>(cfg.holdout_frac * static_cast<double>(samples.size()));
    const std::size_t n_train = samples.size() - n_hold;
    if (n_train < cfg.batch) throw std::invalid_argument("train_score_model: too few training samples");

    // Fixed holdout noise so the before/after comparison is exact.
    std::vector<DsmSample> holdout;
    holdout.reserve(n_hold);
    for (std::size_t i = 0; i < n_hold; ++i) {
        DsmSample s;
        s.z = samples[order[n_train + i]];
        s.sigma = sample_sigma(rng);
        s.eps = draw_standard_normal(rng, d);
        holdout.push_back(std::move(s));
    }

    TrainScoreResult result;
    if (resume_from) {
        result.model = *resume_from;
    } else {
        std::vector<std::size_t> dims;
        dims.push_back(d + 1);
        dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
        dims.push_back(d);
        result.model.net = Mlp::init(dims, rng);
    }
    result.model.validate();
    if (result.model.latent_dim() != d) {
        throw std::invalid_argument("train_score_model: model dimension mismatch");
    }
    result.init_holdout_loss = n_hold > 0 ? dsm_loss(result.model, holdout) : 0.0;

    AdamState opt(result.model.net.params.size(), cfg.lr);
    std::vector<double> grad(result.model.net.params.size());
    std::vector<double> noisy(d), cot(d);
    const std::size_t batches_per_epoch = n_train / cfg.batch;
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double phase = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 1.0;
        opt.lr = cfg.lr_final + (cfg.lr - cfg.lr_final) * 0.5 * (1.0 + std::cos(M_PI * phase));
        for (std::size_t i = n_train; i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = 0; k < cfg.batch; ++k) {
                const Latent& z = samples[order[b * cfg.batch + k]];
                const double sigma = sample_sigma(rng);
                const double s2 = sigma * sigma;
                const double inv_sqrt = 1.0 / std::sqrt(1.0 + s2);
                const std::vector<double> eps = draw_standard_normal(rng, d);
                for (std::size_t j = 0; j < d; ++j) noisy[j] = z[j] + sigma * eps[j];
                std::vector<double> phi_out;
                const std::vector<double> in = edm_embed(noisy, sigma, inv_sqrt);
                phi_out = result.model.net.forward(in);
                const double w = 1.0 + s2;
                double err = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double eps_hat = phi_out[j] * inv_sqrt + sigma * noisy[j] / (1.0 + s2);
                    const double e = eps_hat - eps[j];
                    err += e * e;
                    // d loss / d phi_j, including the skip scaling
                    cot[j] = 2.0 * w * e * inv_sqrt / static_cast<double>(d * cfg.batch);
                }
                batch_loss += w * err / static_cast<double>(d);
                const Mlp::Gradients g = result.model.net.vjp(in, cot);
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += g.params[j];
            }
            batch_loss /= static_cast<double>(cfg.batch);
            if (!std::isfinite(batch_loss)) throw DivergenceError("train_score_model: loss diverged");
            epoch_loss += batch_loss;
            opt.step(result.model.net.params, grad);
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(batches_per_epoch));
    }
    result.final_holdout_loss = n_hold > 0 ? dsm_loss(result.model, holdout) : 0.0;
    return result;
}

std::vector<double> ScoreOracle::true_score(const Latent&) const {
    throw std::logic_error("ScoreOracle: true score unavailable for this oracle");
}

GmmScoreOracle::GmmScoreOracle(GmmPrior prior) : prior_(std::move(prior)) { prior_.validate(); }

std::vector<double> GmmScoreOracle::noisy_score(const Latent& z, double sigma) const {
    return gmm_noisy_score(prior_, sigma, z);
}

std::vector<double> GmmScoreOracle::true_score(const Latent& z) const {
    return gmm_true_score(prior_, z);
}

std::vector<double> GmmScoreOracle::denoiser_vjp(const Latent& z, double sigma,
                                                 const std::vector<double>& cotangent) const {
    const double s2 = sigma * sigma;
    std::vector<double> out = gmm_noisy_loghess_vec(prior_, sigma, z, cotangent);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = cotangent[j] + s2 * out[j];
    return out;
}

LearnedScoreOracle::LearnedScoreOracle(NoisePredictor model) : model_(std::move(model)) {
    model_.validate();
}

std::vector<double> LearnedScoreOracle::noisy_score(const Latent& z, double sigma) const {
    return score_from_eps(edm_predict_eps(model_, z, sigma), sigma);
}

std::vector<double> LearnedScoreOracle::denoiser_vjp(const Latent& z, double sigma,
                                                     const std::vector<double>& cotangent) const {
    // Tweedie map T(z) = z + s^2 score(z) with score = -eps_hat / s, so
    // T^T c = c - s (d eps_hat / dz)^T c.
    const double s2 = sigma * sigma;
    const double inv_sqrt = 1.0 / std::sqrt(1.0 + s2);
    std::vector<double> in(z.size() + 1);
    for (std::size_t j = 0; j < z.size(); ++j) in[j] = z[j] * inv_sqrt;
    in.back() = std::log(sigma);
    const Mlp::Gradients g = model_.net.vjp(in, cotangent);
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double deps = g.input[j] * inv_sqrt * inv_sqrt + sigma / (1.0 + s2) * cotangent[j];
        out[j] = cotangent[j] - sigma * deps;
    }
    return out;
}

}  // namespace gg
