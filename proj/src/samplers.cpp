#include "gglangevin/samplers.hpp"

#include <cmath>

namespace gg {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    if (!vec_finite(v)) throw DivergenceError(std::string(what) + ": non-finite values");
}

bool state_ok(const Latent& z) { return vec_finite(z) && vec_norm(z) <= kDivergenceNormLimit; }

}  // namespace

Latent langevin_step(const ScoreOracle& oracle, const Latent& z, double sigma, Rng& rng) {
    if (!oracle.has_true_score()) {
        throw std::logic_error("langevin_step: oracle has no true score");
    }
    const double half = 0.5 * sigma * sigma;
    const std::vector<double> s = oracle.true_score(z);
    require_finite(s, "langevin_step score");
    Latent out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] + sigma * rng.normal() + half * s[j];
    return out;
}

Latent half_denoising_step(const ScoreOracle& oracle, const Latent& z, double sigma, Rng& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("half_denoising_step: sigma must be > 0");
    Latent noised(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) noised[j] = z[j] + sigma * rng.normal();
    const std::vector<double> s = oracle.noisy_score(noised, sigma);
    require_finite(s, "half_denoising_step score");
    const double half = 0.5 * sigma * sigma;
    for (std::size_t j = 0; j < z.size(); ++j) noised[j] += half * s[j];
    return noised;
}

Latent guided_langevin_true_step(const ScoreOracle& oracle, const Latent& z, double sigma,
                                 double beta, const std::vector<double>& loss_grad_at_z, Rng& rng) {
    Latent out = langevin_step(oracle, z, sigma, rng);
    require_finite(loss_grad_at_z, "guided_langevin_true_step gradient");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= beta * loss_grad_at_z[j];
    return out;
}

HdndParts hdnd_step(const ScoreOracle& oracle, const Latent& z, double sigma,
                    const std::vector<double>& loss_grad_at_z, Rng& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("hdnd_step: sigma must be > 0");
    HdndParts parts;
    parts.noised.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) parts.noised[j] = z[j] + sigma * rng.normal();
    const std::vector<double> s = oracle.noisy_score(parts.noised, sigma);
    require_finite(s, "hdnd_step score");
    require_finite(loss_grad_at_z, "hdnd_step gradient");
    const double half = 0.5 * sigma * sigma;
    parts.half_denoised.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) parts.half_denoised[j] = parts.noised[j] + half * s[j];
    parts.guidance_grad = loss_grad_at_z;
    return parts;
}

Latent hdnd_step_plain(const ScoreOracle& oracle, const Latent& z, double sigma, double beta,
                       const std::vector<double>& loss_grad_at_z, Rng& rng) {
    HdndParts parts = hdnd_step(oracle, z, sigma, loss_grad_at_z, rng);
    for (std::size_t j = 0; j < parts.half_denoised.size(); ++j) {
        parts.half_denoised[j] -= beta * parts.guidance_grad[j];
    }
    return parts.half_denoised;
}

SamplerTrace gg_langevin_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                             const SamplerConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    SamplerTrace trace;
    Latent z = z0;
    Rng rng(cfg.seed);
    AdamState adam(z.size(), cfg.beta, cfg.adam);
    const long stride = std::max<long>(1, opts.trace_stride);
    for (long t = 0; t < cfg.steps; ++t) {
        const double sigma = cfg.schedule.at(t);
        try {
            Latent noised(z.size());
            for (std::size_t j = 0; j < z.size(); ++j) noised[j] = z[j] + sigma * rng.normal();
            const std::vector<double> s = oracle.noisy_score(noised, sigma);
            require_finite(s, "gg_langevin_run score");
            const double half = 0.5 * sigma * sigma;
            for (std::size_t j = 0; j < z.size(); ++j) noised[j] += half * s[j];
            const LossEval ev = guidance(z, rng);
            require_finite(ev.grad, "gg_langevin_run guidance");
            if (t % stride == 0) {
                trace.records.push_back(
                    {t, sigma, ev.breakdown, vec_norm(s), vec_norm(ev.grad)});
            }
            if (opts.use_adam) {
                z = std::move(noised);
                adam.step(z, ev.grad);
            } else {
                for (std::size_t j = 0; j < z.size(); ++j) noised[j] -= cfg.beta * ev.grad[j];
                z = std::move(noised);
            }
        } catch (const DivergenceError&) {
            trace.diverged = true;
            break;
        }
        if (!state_ok(z)) {
            trace.diverged = true;
            break;
        }
        trace.steps_completed = t + 1;
    }
    trace.final_z = z;
    return trace;
}

SamplerTrace map_run(const DiskDecoder& dec, const PointCloud2& P, const SamplerConfig& cfg,
                     const GuidanceConfig& gcfg) {
    cfg.validate();
    gcfg.validate();
    SamplerTrace trace;
    Rng rng(cfg.seed);
    Latent z = encode_init(dec, P, rng);
    AdamState adam(z.size(), cfg.beta, cfg.adam);
    for (long t = 0; t < cfg.steps; ++t) {
        try {
            const LossEval ev = map_objective(dec, z, P, gcfg, rng);
            require_finite(ev.grad, "map_run gradient");
            trace.records.push_back({t, 0.0, ev.breakdown, 0.0, vec_norm(ev.grad)});
            adam.step(z, ev.grad);
        } catch (const DivergenceError&) {
            trace.diverged = true;
            break;
        }
        if (!state_ok(z)) {
            trace.diverged = true;
            break;
        }
        trace.steps_completed = t + 1;
    }
    trace.final_z = z;
    return trace;
}

SamplerTrace dps_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                     const SamplerConfig& cfg, const DpsOptions& opts) {
    cfg.validate();
    if (!(opts.sigma_T > opts.sigma_end) || !(opts.sigma_end > 0.0)) {
        throw std::invalid_argument("dps_run: need sigma_T > sigma_end > 0");
    }
    SamplerTrace trace;
    Rng rng(cfg.seed);
    const long n = cfg.steps;
    Latent z(z0.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = z0[j] + opts.sigma_T * rng.normal();

    const double log_ratio = std::log(opts.sigma_end / opts.sigma_T) / static_cast<double>(n);
    auto sigma_at = [&](long i) { return opts.sigma_T * std::exp(log_ratio * static_cast<double>(i)); };
    const long stride = std::max<long>(1, opts.trace_stride);

    for (long t = 0; t < n; ++t) {
        const double si = sigma_at(t);
        const double sn = sigma_at(t + 1);
        try {
            const std::vector<double> s = oracle.noisy_score(z, si);
            require_finite(s, "dps_run score");
            // Tweedie estimate and the loss gradient pulled back through it
            Latent denoised(z.size());
            const double s2 = si * si;
            for (std::size_t j = 0; j < z.size(); ++j) denoised[j] = z[j] + s2 * s[j];
            const LossEval ev = guidance(denoised, rng);
            require_finite(ev.grad, "dps_run guidance");
            const std::vector<double> g = oracle.denoiser_vjp(z, si, ev.grad);
            require_finite(g, "dps_run pullback");
            if (t % stride == 0) {
                trace.records.push_back({t, si, ev.breakdown, vec_norm(s), vec_norm(g)});
            }
            const double dvar = s2 - sn * sn;
            const double noise_std = std::sqrt(dvar * (sn * sn) / s2);
            for (std::size_t j = 0; j < z.size(); ++j) {
                z[j] += dvar * s[j] + noise_std * rng.normal() - opts.zeta * g[j];
            }
        } catch (const DivergenceError&) {
            trace.diverged = true;
            break;
        }
        if (!vec_finite(z) || vec_norm(z) > kDivergenceNormLimit + opts.sigma_T * 40.0) {
            // allowance for the deliberately huge initial noise level
            trace.diverged = true;
            break;
        }
        trace.steps_completed = t + 1;
    }
    trace.final_z = z;
    return trace;
}

SamplerTrace daps_run(const ScoreOracle& oracle, const GuidanceFn& guidance, const Latent& z0,
                      const SamplerConfig& cfg, const DapsOptions& opts) {
    cfg.validate();
    if (!(opts.sigma_max > opts.sigma_end) || !(opts.sigma_end > 0.0)) {
        throw std::invalid_argument("daps_run: need sigma_max > sigma_end > 0");
    }
    if (opts.steps_per_level < 1) throw std::invalid_argument("daps_run: steps_per_level < 1");
    const long levels = std::max<long>(1, cfg.steps / opts.steps_per_level);
    SamplerTrace trace;
    Rng rng(cfg.seed);
    Latent z(z0.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = z0[j] + opts.sigma_max * rng.normal();

    auto sigma_at = [&](long i) {
        if (levels == 1) return opts.sigma_max;
        const double f = static_cast<double>(i) / static_cast<double>(levels - 1);
        return opts.sigma_max * std::pow(opts.sigma_end / opts.sigma_max, f);
    };

    Latent x = z;
    for (long lvl = 0; lvl < levels; ++lvl) {
        const double sigma = sigma_at(lvl);
        const double s2 = sigma * sigma;
        // Tweedie posterior spread for unit-variance data; the proposal
        // around the denoised estimate must not be wider than what the
        // noise level actually leaves uncertain.
        const double r2 = s2 / (1.0 + s2);
        try {
            const std::vector<double> s = oracle.noisy_score(z, sigma);
            require_finite(s, "daps_run score");
            Latent denoised(z.size());
            for (std::size_t j = 0; j < z.size(); ++j) denoised[j] = z[j] + s2 * s[j];

            // Langevin MCMC around the denoised estimate, tilted by the loss.
            // The step size shrinks with the guidance weight so the tilted
            // drift stays inside the ULA stability region.
            x = denoised;
            const double delta = opts.lr_scale * r2 / (1.0 + opts.eta * r2);
            const double noise = std::sqrt(delta);
            LossEval ev;
            for (long k = 0; k < opts.steps_per_level; ++k) {
                ev = guidance(x, rng);
                require_finite(ev.grad, "daps_run guidance");
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double drift = -(x[j] - denoised[j]) / r2 - opts.eta * ev.grad[j];
                    x[j] += 0.5 * delta * drift + noise * rng.normal();
                }
                if (!vec_finite(x)) throw DivergenceError("daps_run: non-finite MCMC state");
            }
            trace.records.push_back(
                {lvl * opts.steps_per_level, sigma, ev.breakdown, vec_norm(s), vec_norm(ev.grad)});
            if (lvl + 1 < levels) {
                const double next = sigma_at(lvl + 1);
                for (std::size_t j = 0; j < z.size(); ++j) z[j] = x[j] + next * rng.normal();
            }
        } catch (const DivergenceError&) {
            trace.diverged = true;
            break;
        }
        if (!state_ok(x)) {
            trace.diverged = true;
            break;
        }
        trace.steps_completed = (lvl + 1) * opts.steps_per_level;
    }
    trace.final_z = x;
    return trace;
}

std::vector<double> stationary_samples(const ScoreOracle& oracle, const GmmPrior& init_prior,
                                       const GuidanceFn& guidance, const StationaryRunConfig& cfg) {
    if (init_prior.dim() != 1) throw std::invalid_argument("stationary_samples: 1D only");
    if (cfg.chains < 1 || cfg.steps_per_chain < 1) {
        throw std::invalid_argument("stationary_samples: bad chain layout");
    }
    const long burn = static_cast<long>(cfg.burn_in_frac * static_cast<double>(cfg.steps_per_chain));
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(cfg.chains) * (cfg.steps_per_chain - burn));
    Rng base(cfg.seed);
    for (int c = 0; c < cfg.chains; ++c) {
        Rng rng = base.derive(static_cast<std::uint64_t>(c));
        Latent z(1, cfg.init_point);
        if (cfg.init == ToyInit::Prior || cfg.init == ToyInit::Rejection) {
            for (int tries = 0; tries < 100000; ++tries) {
                z = sample_prior(init_prior, rng);
                if (cfg.init == ToyInit::Prior || cfg.eta_for_rejection <= 0.0) break;
                const LossEval ev = guidance(z, rng);
                if (rng.uniform() < std::exp(-cfg.eta_for_rejection * ev.value)) break;
            }
        }
        for (long t = 0; t < cfg.steps_per_chain; ++t) {
            switch (cfg.method) {
                case ToyMethod::LangevinTrue:
                    z = langevin_step(oracle, z, cfg.sigma, rng);
                    break;
                case ToyMethod::HalfDenoising:
                    z = half_denoising_step(oracle, z, cfg.sigma, rng);
                    break;
                case ToyMethod::GuidedTrue: {
                    const LossEval ev = guidance(z, rng);
                    z = guided_langevin_true_step(oracle, z, cfg.sigma, cfg.beta, ev.grad, rng);
                    break;
                }
                case ToyMethod::Hdnd: {
                    const LossEval ev = guidance(z, rng);
                    z = hdnd_step_plain(oracle, z, cfg.sigma, cfg.beta, ev.grad, rng);
                    break;
                }
            }
            if (t >= burn) pooled.push_back(z[0]);
        }
    }
    return pooled;
}

}  // namespace gg
