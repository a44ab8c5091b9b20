#include "gglangevin/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace gg {

namespace {

std::vector<double> make_raw(std::initializer_list<std::array<double, 3>> disks) {
    std::vector<double> raw;
    raw.reserve(disks.size() * 3);
    for (const auto& d : disks) {
        raw.push_back(d[0]);
        raw.push_back(d[1]);
        raw.push_back(softplus_inv(d[2]));
    }
    return raw;
}

}  // namespace

ShapeWorld ShapeWorld::standard(double tau) {
    ShapeWorld world;
    world.shapes = {
        {"arc", make_raw({{{-0.423, 0.054, 0.16}},
                          {{-0.258, 0.269, 0.14}},
                          {{0.000, 0.350, 0.14}},
                          {{0.258, 0.269, 0.14}},
                          {{0.423, 0.054, 0.16}}})},
        {"dumbbell", make_raw({{{-0.55, 0.00, 0.28}},
                               {{-0.27, 0.00, 0.10}},
                               {{0.00, 0.00, 0.10}},
                               {{0.27, 0.00, 0.10}},
                               {{0.55, 0.00, 0.28}}})},
        {"tripod", make_raw({{{-0.36, -0.21, 0.14}},
                             {{0.00, 0.00, 0.18}},
                             {{0.00, 0.42, 0.14}},
                             {{0.00, 0.66, 0.12}},
                             {{0.36, -0.21, 0.14}}})},
    };

    const std::size_t K = 5;
    const std::size_t n = 3 * K;
    // Whitening from the exact moments of the shape-generating mixture
    // (equal-weight families, per-coordinate jitter).
    std::vector<double> mean(n, 0.0), var(n, 0.0);
    const double ws = 1.0 / static_cast<double>(world.shapes.size());
    for (const ShapeSpec& s : world.shapes) {
        for (std::size_t j = 0; j < n; ++j) mean[j] += ws * s.raw_params[j];
    }
    for (const ShapeSpec& s : world.shapes) {
        for (std::size_t j = 0; j < n; ++j) {
            const double jit = (j % 3 == 2) ? world.rho_jitter : world.center_jitter;
            const double dm = s.raw_params[j] - mean[j];
            var[j] += ws * (dm * dm + jit * jit);
        }
    }
    world.decoder.K = K;
    world.decoder.tau = tau;
    world.decoder.whiten_mean = mean;
    world.decoder.whiten_std.resize(n);
    for (std::size_t j = 0; j < n; ++j) world.decoder.whiten_std[j] = std::sqrt(var[j]);
    world.decoder.validate();

    // The sampling prior smooths the generator: per family one tight
    // component (the generator itself) and one broad "funnel" whose
    // directional pull captures mangled warm starts from mid-range, plus a
    // faint global background so the score stays moderate everywhere. A
    // learned score would provide this smoothness on its own.
    const double w_tight = 0.30, w_funnel = 0.03, w_background = 0.01;
    const double funnel_center_std = 0.07, funnel_rho_std = 0.14;
    for (const ShapeSpec& s : world.shapes) {
        world.prior.weights.push_back(w_tight);
        world.prior.means.push_back(world.decoder.latent_from_raw(s.raw_params));
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double jit = (j % 3 == 2) ? world.rho_jitter : world.center_jitter;
            v[j] = (jit * jit) / var[j];
        }
        world.prior.vars.push_back(std::move(v));
    }
    for (const ShapeSpec& s : world.shapes) {
        world.prior.weights.push_back(w_funnel);
        world.prior.means.push_back(world.decoder.latent_from_raw(s.raw_params));
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double jit = (j % 3 == 2) ? funnel_rho_std : funnel_center_std;
            v[j] = std::min((jit * jit) / var[j], 1.0);  // never wider than the background
        }
        world.prior.vars.push_back(std::move(v));
    }
    world.prior.weights.push_back(w_background);
    world.prior.means.push_back(std::vector<double>(n, 0.0));
    world.prior.vars.push_back(std::vector<double>(n, 1.0));
    world.prior.validate();
    return world;
}

std::size_t ShapeWorld::shape_index(const std::string& name) const {
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (shapes[i].name == name) return i;
    }
    throw std::invalid_argument("ShapeWorld: unknown shape '" + name + "'");
}

Latent ShapeWorld::canonical_latent(std::size_t shape_idx) const {
    return prior.means.at(shape_idx);
}

Latent ShapeWorld::sample_shape(std::size_t shape_idx, Rng& rng) const {
    const std::vector<double>& m = prior.means.at(shape_idx);
    const std::vector<double>& v = prior.vars.at(shape_idx);
    Latent z(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) z[j] = m[j] + std::sqrt(v[j]) * rng.normal();
    return z;
}

PointCloud2 simulate_scan(const DiskDecoder& dec, const Latent& gt, const ScanSpec& spec, Rng& rng) {
    if (spec.rays_per_sensor < 1) throw std::invalid_argument("simulate_scan: rays must be >= 1");
    PointCloud2 cloud;
    const double march_step = 0.005;
    const double t_max = 3.5;
    for (const Vec2& sensor : spec.sensors) {
        const double aim = std::atan2(-sensor.y, -sensor.x);
        const double half_fov = 0.5 * spec.fov_deg * M_PI / 180.0;
        for (int r = 0; r < spec.rays_per_sensor; ++r) {
            const double frac = spec.rays_per_sensor == 1
                                    ? 0.5
                                    : static_cast<double>(r) / (spec.rays_per_sensor - 1);
            const double ang = aim - half_fov + 2.0 * half_fov * frac;
            const Vec2 dir{std::cos(ang), std::sin(ang)};
            // March until the SDF first turns negative, then bisect.
            double t_prev = 0.0;
            double d_prev = decode(dec, gt, sensor);
            if (d_prev <= 0.0) continue;  // sensor must be outside
            double t_hit = -1.0;
            for (double t = march_step; t <= t_max; t += march_step) {
                const Vec2 p = sensor + t * dir;
                const double d = decode(dec, gt, p);
                if (d <= 0.0) {
                    double lo = t_prev, hi = t;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (decode(dec, gt, sensor + mid * dir) <= 0.0) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    t_hit = 0.5 * (lo + hi);
                    break;
                }
                t_prev = t;
                d_prev = d;
            }
            if (t_hit < 0.0) continue;
            const double t_noisy = t_hit + spec.noise_std * rng.normal();
            cloud.points.push_back(sensor + t_noisy * dir);
        }
    }
    return cloud;
}

PointCloud2 apply_cut(const PointCloud2& P, Vec2 normal, double offset, double decay, Rng& rng) {
    if (std::abs(norm(normal) - 1.0) > 1e-9) throw std::invalid_argument("apply_cut: normal not unit");
    if (!(decay > 0.0)) throw std::invalid_argument("apply_cut: decay must be > 0");
    PointCloud2 out;
    for (std::size_t i = 0; i < P.points.size(); ++i) {
        const double d = dot(normal, P.points[i]) - offset;
        bool keep = true;
        if (d > 0.0) keep = rng.uniform() < std::exp(-d / decay);
        if (keep) {
            out.points.push_back(P.points[i]);
            if (P.has_normals()) out.normals.push_back(P.normals[i]);
        }
    }
    return out;
}

namespace {

double slot_cost(const DiskDecoder& dec, const GmmPrior& prior, std::size_t c,
                 const std::vector<double>& raw, const std::vector<std::size_t>& perm) {
    double cost = 0.0;
    for (std::size_t k = 0; k < dec.K; ++k) {
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t slot = 3 * k + j;
            const double zj = (raw[3 * perm[k] + j] - dec.whiten_mean[slot]) / dec.whiten_std[slot];
            const double d = zj - prior.means[c][slot];
            cost += d * d / prior.vars[c][slot];
        }
    }
    return cost;
}

Latent apply_disk_perm(const DiskDecoder& dec, const std::vector<double>& raw,
                       const std::vector<std::size_t>& perm) {
    std::vector<double> out(raw.size());
    for (std::size_t k = 0; k < dec.K; ++k) {
        for (std::size_t j = 0; j < 3; ++j) out[3 * k + j] = raw[3 * perm[k] + j];
    }
    return dec.latent_from_raw(out);
}

}  // namespace

Latent align_latent_to_component(const DiskDecoder& dec, const GmmPrior& prior,
                                 std::size_t component, const Latent& z) {
    if (prior.dim() != dec.latent_dim()) {
        throw std::invalid_argument("align_latent_to_component: prior/decoder dim mismatch");
    }
    const std::vector<double> raw = dec.raw_params(z);
    std::vector<std::size_t> perm(dec.K), best_perm(dec.K);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best_cost = std::numeric_limits<double>::max();
    do {
        const double cost = slot_cost(dec, prior, component, raw, perm);
        if (cost < best_cost) {
            best_cost = cost;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return apply_disk_perm(dec, raw, best_perm);
}

Latent align_latent_to_prior(const DiskDecoder& dec, const GmmPrior& prior, const Latent& z) {
    if (prior.dim() != dec.latent_dim()) {
        throw std::invalid_argument("align_latent_to_prior: prior/decoder dim mismatch");
    }
    const std::vector<double> raw = dec.raw_params(z);
    std::vector<std::size_t> perm(dec.K), best_perm(dec.K);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best_cost = std::numeric_limits<double>::max();
    do {
        for (std::size_t c = 0; c < prior.components(); ++c) {
            const double cost = slot_cost(dec, prior, c, raw, perm);
            if (cost < best_cost) {
                best_cost = cost;
                best_perm = perm;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return apply_disk_perm(dec, raw, best_perm);
}

Latent bench_encoder_init(const ShapeWorld& world, const PointCloud2& scan, Rng& rng) {
    const Latent z0 = encode_init(world.decoder, scan, rng);
    // The visible points identify the shape family far more reliably than the
    // mangled k-means latent does, especially under cuts.
    std::size_t best_c = 0;
    double best_fit = std::numeric_limits<double>::max();
    for (std::size_t c = 0; c < world.shapes.size(); ++c) {
        const double fit = surface_loss(world.decoder, world.prior.means[c], scan).value;
        if (fit < best_fit) {
            best_fit = fit;
            best_c = c;
        }
    }
    return align_latent_to_component(world.decoder, world.prior, best_c, z0);
}

namespace {

// Exact nearest neighbor over a uniform grid with expanding-ring search.
class NnGrid {
public:
    explicit NnGrid(const std::vector<Vec2>& pts) : pts_(pts) {
        double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
        for (const Vec2& p : pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        const double w = std::max(xmax - xmin, 1e-9);
        const double h = std::max(ymax - ymin, 1e-9);
        cell_ = std::max(std::sqrt(w * h / static_cast<double>(pts.size())), 1e-9);
        nx_ = std::max(1, static_cast<int>(w / cell_) + 1);
        ny_ = std::max(1, static_cast<int>(h / cell_) + 1);
        x0_ = xmin;
        y0_ = ymin;
        cells_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cells_[cell_index(pts[i])].push_back(static_cast<int>(i));
        }
    }

    std::pair<int, double> nearest(Vec2 q) const {
        const int ci = std::clamp(static_cast<int>((q.x - x0_) / cell_), 0, nx_ - 1);
        const int cj = std::clamp(static_cast<int>((q.y - y0_) / cell_), 0, ny_ - 1);
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        const int max_ring = std::max(nx_, ny_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (best >= 0) {
                const double bound = (static_cast<double>(ring) - 1.0) * cell_;
                if (bound > 0.0 && bound * bound > best_d2) break;
            }
            for (int dj = -ring; dj <= ring; ++dj) {
                const int j = cj + dj;
                if (j < 0 || j >= ny_) continue;
                const bool edge_row = std::abs(dj) == ring;
                const int istep = edge_row ? 1 : 2 * ring;
                for (int di = -ring; di <= ring; di += std::max(istep, 1)) {
                    const int i = ci + di;
                    if (i < 0 || i >= nx_) continue;
                    for (int idx : cells_[static_cast<std::size_t>(j) * nx_ + i]) {
                        const Vec2 diff = pts_[idx] - q;
                        const double d2 = dot(diff, diff);
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = idx;
                        }
                    }
                }
            }
        }
        return {best, std::sqrt(best_d2)};
    }

private:
    std::size_t cell_index(Vec2 p) const {
        const int i = std::clamp(static_cast<int>((p.x - x0_) / cell_), 0, nx_ - 1);
        const int j = std::clamp(static_cast<int>((p.y - y0_) / cell_), 0, ny_ - 1);
        return static_cast<std::size_t>(j) * nx_ + i;
    }

    std::vector<Vec2> pts_;
    double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> cells_;
};

}  // namespace

double chamfer_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("chamfer_distance: empty point set");
    const NnGrid ga(a), gb(b);
    double sum_ab = 0.0;
    for (const Vec2& p : a) sum_ab += gb.nearest(p).second;
    double sum_ba = 0.0;
    for (const Vec2& p : b) sum_ba += ga.nearest(p).second;
    const double mean = 0.5 * (sum_ab / static_cast<double>(a.size()) +
                               sum_ba / static_cast<double>(b.size()));
    return 100.0 * mean;
}

double chamfer_angle(const PointCloud2& a, const PointCloud2& b) {
    if (a.points.empty() || b.points.empty()) throw std::invalid_argument("chamfer_angle: empty point set");
    if (!a.has_normals() || !b.has_normals()) throw std::invalid_argument("chamfer_angle: normals required");
    const NnGrid ga(a.points), gb(b.points);
    auto directional = [](const PointCloud2& from, const PointCloud2& to, const NnGrid& grid) {
        double sum = 0.0;
        for (std::size_t i = 0; i < from.points.size(); ++i) {
            const int j = grid.nearest(from.points[i]).first;
            const double c = std::clamp(std::abs(dot(from.normals[i], to.normals[j])), 0.0, 1.0);
            sum += std::acos(c);
        }
        return sum / static_cast<double>(from.points.size());
    };
    const double rad = 0.5 * (directional(a, b, gb) + directional(b, a, ga));
    return rad * 180.0 / M_PI;
}

PointCloud2 sample_contour(const DiskDecoder& dec, const Latent& z, const Contour& contour,
                           std::size_t count) {
    PointCloud2 out;
    const double total = contour.total_length();
    if (contour.empty() || total <= 0.0 || count == 0) return out;
    const double step = total / static_cast<double>(count);
    double next_s = 0.5 * step;
    double walked = 0.0;
    for (const Contour::Loop& loop : contour.loops) {
        const std::size_t nv = loop.vertices.size();
        if (nv < 2) continue;
        const std::size_t edges = loop.closed ? nv : nv - 1;
        for (std::size_t e = 0; e < edges; ++e) {
            const Vec2 p0 = loop.vertices[e];
            const Vec2 p1 = loop.vertices[(e + 1) % nv];
            const double len = norm(p1 - p0);
            while (next_s <= walked + len && out.points.size() < count) {
                const double t = len > 0.0 ? (next_s - walked) / len : 0.0;
                const Vec2 p = p0 + t * (p1 - p0);
                const Vec2 g = decode_grad_x(dec, z, p);
                const double gn = norm(g);
                if (gn > 1e-12) {
                    out.points.push_back(p);
                    out.normals.push_back((1.0 / gn) * g);
                }
                next_s += step;
            }
            walked += len;
        }
    }
    return out;
}

Metrics compare_latents(const DiskDecoder& dec, const Latent& recon, const Latent& gt,
                        int resolution, std::size_t samples) {
    const Contour c_recon = extract_contour(dec, recon, resolution);
    const Contour c_gt = extract_contour(dec, gt, resolution);
    const PointCloud2 pr = sample_contour(dec, recon, c_recon, samples);
    const PointCloud2 pg = sample_contour(dec, gt, c_gt, samples);
    if (pr.points.empty()) throw std::runtime_error("compare_latents: empty reconstructed contour");
    if (pg.points.empty()) throw std::runtime_error("compare_latents: empty ground-truth contour");
    Metrics m;
    m.chamfer_dist = chamfer_distance(pr.points, pg.points);
    m.chamfer_angle_deg = chamfer_angle(pr, pg);
    return m;
}

RegimePreset sparse_regime() {
    RegimePreset p;
    p.name = "sparse";
    p.scan.sensors = {{1.3 * std::cos(0.6), 1.3 * std::sin(0.6)},
                      {1.3 * std::cos(3.5), 1.3 * std::sin(3.5)}};
    p.scan.rays_per_sensor = 30;
    p.scan.noise_std = 0.01;
    p.sampler.schedule = NoiseSchedule::constant(0.05);
    p.sampler.beta = 0.03;
    p.sampler.steps = 2000;
    p.guidance.lambda = 0.1;
    p.guidance.xi = 1e-3;
    p.guidance.m_eikonal = 256;
    return p;
}

RegimePreset incomplete_regime() {
    RegimePreset p;
    p.name = "incomplete";
    p.scan.sensors.clear();
    for (double ang : {0.35, 1.92, 3.49, 5.06}) {
        p.scan.sensors.push_back({1.3 * std::cos(ang), 1.3 * std::sin(ang)});
    }
    p.scan.rays_per_sensor = 60;
    p.scan.noise_std = 0.005;
    p.cut_enabled = true;
    p.sampler.schedule = NoiseSchedule::cosine_anneal(0.2, 0.02, 4000, 1000);
    p.sampler.beta = 0.03;
    p.sampler.steps = 5000;
    p.guidance.lambda = 0.1;
    p.guidance.xi = 1e-3;
    p.guidance.m_eikonal = 256;
    return p;
}

RegimePreset regime_by_name(const std::string& name) {
    if (name == "sparse") return sparse_regime();
    if (name == "incomplete") return incomplete_regime();
    throw std::invalid_argument("unknown regime '" + name + "'");
}

CellResult run_cell(const ShapeWorld& world, const BenchCell& cell, const RegimePreset& preset) {
    CellResult result;
    result.cell = cell;
    const auto t_start = std::chrono::steady_clock::now();
    try {
        Rng inst(cell.instance_seed);
        const std::size_t shape_idx = world.shape_index(cell.shape);
        result.gt = world.sample_shape(shape_idx, inst);
        PointCloud2 scan = simulate_scan(world.decoder, result.gt, preset.scan, inst);
        if (preset.cut_enabled) {
            const double ang = inst.uniform(0.0, 2.0 * M_PI);
            const Vec2 normal{std::cos(ang), std::sin(ang)};
            const double offset = inst.uniform(-0.15, 0.15);
            scan = apply_cut(scan, normal, offset, 0.1, inst);
        }
        result.scan = scan;
        if (scan.points.size() < world.decoder.K) {
            throw std::runtime_error("scan too sparse for initialization");
        }

        int sampler_idx = 0;
        if (cell.sampler == "gg") sampler_idx = 0;
        else if (cell.sampler == "map") sampler_idx = 1;
        else if (cell.sampler == "dps") sampler_idx = 2;
        else if (cell.sampler == "daps") sampler_idx = 3;
        else throw std::invalid_argument("unknown sampler '" + cell.sampler + "'");
        Rng srng = inst.derive(1000 + static_cast<std::uint64_t>(sampler_idx));

        const GmmScoreOracle oracle(world.prior);
        SamplerConfig cfg = preset.sampler;
        SamplerTrace trace;
        if (cell.sampler == "map") {
            cfg.seed = srng.next_u64();
            cfg.steps = 2000;
            cfg.schedule = NoiseSchedule::constant(0.05);  // unused by MAP
            trace = map_run(world.decoder, scan, cfg, preset.guidance);
        } else {
            const Latent z0 = bench_encoder_init(world, scan, srng);
            cfg.seed = srng.next_u64();
            const GuidanceFn guidance = make_geometric_guidance(world.decoder, scan, preset.guidance);
            if (cell.sampler == "gg") {
                RunOptions opts;
                opts.trace_stride = 10;
                trace = gg_langevin_run(oracle, guidance, z0, cfg, opts);
            } else if (cell.sampler == "dps") {
                DpsOptions opts;
                opts.trace_stride = 10;
                trace = dps_run(oracle, guidance, z0, cfg, opts);
            } else {
                DapsOptions opts;
                // likelihood-style weight, tuned on the benchmark like the
                // other baselines' step sizes
                opts.eta = 2400.0;
                opts.lr_scale = 0.3;
                trace = daps_run(oracle, guidance, z0, cfg, opts);
            }
        }
        result.diverged = trace.diverged;
        result.final_z = trace.final_z;
        result.trace = std::move(trace);
        if (result.diverged) throw std::runtime_error("sampler diverged");
        result.metrics = compare_latents(world.decoder, result.final_z, result.gt);
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    const auto t_end = std::chrono::steady_clock::now();
    result.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();
    return result;
}

BenchReport run_experiment(const ShapeWorld& world, const BenchManifest& manifest) {
    if (manifest.shapes.empty() || manifest.regimes.empty() || manifest.samplers.empty() ||
        manifest.seeds < 1) {
        throw std::invalid_argument("run_experiment: empty manifest");
    }
    // One instance (ground truth + scan) per (shape, regime, replicate); all
    // samplers see the same instance.
    struct CellPlan {
        BenchCell cell;
        RegimePreset preset;
    };
    std::vector<CellPlan> plans;
    Rng seeder(manifest.base_seed);
    std::uint64_t instance_counter = 0;
    for (const std::string& shape : manifest.shapes) {
        world.shape_index(shape);  // validate early
        for (const std::string& regime : manifest.regimes) {
            RegimePreset preset = regime_by_name(regime);
            if (manifest.gg_schedule) preset.sampler.schedule = *manifest.gg_schedule;
            if (manifest.gg_steps) preset.sampler.steps = *manifest.gg_steps;
            for (int rep = 0; rep < manifest.seeds; ++rep) {
                const std::uint64_t instance_seed = seeder.derive(instance_counter++).next_u64();
                for (const std::string& sampler : manifest.samplers) {
                    BenchCell cell{shape, regime, sampler, rep, instance_seed};
                    plans.push_back({cell, preset});
                }
            }
        }
    }

    BenchReport report;
    report.cells.resize(plans.size());
    const int threads = std::max(1, manifest.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            report.cells[i] = run_cell(world, plans[i].cell, plans[i].preset);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= plans.size()) return;
                report.cells[i] = run_cell(world, plans[i].cell, plans[i].preset);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (const std::string& regime : manifest.regimes) {
        for (const std::string& sampler : manifest.samplers) {
            BenchReport::Aggregate agg;
            agg.regime = regime;
            agg.sampler = sampler;
            for (const CellResult& r : report.cells) {
                if (r.cell.regime != regime || r.cell.sampler != sampler) continue;
                if (r.ok) {
                    agg.mean_cd += r.metrics.chamfer_dist;
                    agg.mean_ca += r.metrics.chamfer_angle_deg;
                    ++agg.cells_ok;
                } else {
                    ++agg.cells_failed;
                }
            }
            if (agg.cells_ok > 0) {
                agg.mean_cd /= agg.cells_ok;
                agg.mean_ca /= agg.cells_ok;
            }
            report.aggregates.push_back(agg);
        }
    }
    return report;
}

}  // namespace gg
