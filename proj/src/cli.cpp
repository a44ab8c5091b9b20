#include "gglangevin/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "gglangevin/bench.hpp"
#include "gglangevin/reference.hpp"

namespace gg {

namespace {

using nlohmann::json;

GmmPrior prior_from_config(const Config& cfg) {
    GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    if (cfg.has("prior", "means")) {
        const std::vector<double> means = cfg.get_doubles("prior", "means");
        const std::vector<double> vars = cfg.get_doubles("prior", "vars");
        std::vector<double> weights;
        if (cfg.has("prior", "weights")) {
            weights = cfg.get_doubles("prior", "weights");
        } else {
            weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
        }
        if (means.size() != vars.size() || means.size() != weights.size()) {
            throw std::invalid_argument("config: [prior] means/vars/weights length mismatch");
        }
        prior.weights = weights;
        prior.means.clear();
        prior.vars.clear();
        for (std::size_t i = 0; i < means.size(); ++i) {
            prior.means.push_back({means[i]});
            prior.vars.push_back({vars[i]});
        }
        prior.validate();
    }
    return prior;
}

NoiseSchedule schedule_from_tokens(const std::vector<std::string>& tok) {
    if (tok.empty()) throw std::invalid_argument("config: empty schedule");
    if (tok[0] == "constant") {
        if (tok.size() != 2) throw std::invalid_argument("config: constant schedule needs one value");
        return NoiseSchedule::constant(std::stod(tok[1]));
    }
    if (tok[0] == "cosine") {
        if (tok.size() != 5) {
            throw std::invalid_argument("config: cosine schedule needs sigma_max sigma_min t_anneal t_tail");
        }
        return NoiseSchedule::cosine_anneal(std::stod(tok[1]), std::stod(tok[2]), std::stol(tok[3]),
                                            std::stol(tok[4]));
    }
    throw std::invalid_argument("config: unknown schedule kind '" + tok[0] + "'");
}

std::string resolve_out_dir(const std::string& out_dir) {
    if (const char* env = std::getenv("GG_OUT_DIR"); env && *env) return env;
    return out_dir;
}

TrainScoreConfig train_config_from(const Config& cfg, std::uint64_t seed) {
    TrainScoreConfig tc;
    tc.seed = seed;
    if (cfg.has("train", "hidden")) {
        tc.hidden.clear();
        for (double h : cfg.get_doubles("train", "hidden")) {
            tc.hidden.push_back(static_cast<std::size_t>(h));
        }
    }
    tc.lr = cfg.get_double("train", "lr", tc.lr);
    tc.batch = static_cast<std::size_t>(cfg.get_long("train", "batch", static_cast<long>(tc.batch)));
    tc.epochs = cfg.get_long("train", "epochs", tc.epochs);
    tc.holdout_frac = cfg.get_double("train", "holdout", tc.holdout_frac);
    return tc;
}

NoisePredictor train_or_load_model(const Config& cfg, const GmmPrior& prior, std::uint64_t seed,
                                   const std::string& out_dir, std::vector<double>* curve = nullptr) {
    const std::string model_file = cfg.get_or("train", "model_file", "");
    if (!model_file.empty() && std::filesystem::exists(model_file)) {
        NoisePredictor model{load_mlp(model_file)};
        model.validate();
        return model;
    }
    const long n = cfg.get_long("train", "samples", 60000);
    Rng rng(seed ^ 0x7261696e64617461ULL);
    std::vector<Latent> data;
    data.reserve(n);
    for (long i = 0; i < n; ++i) data.push_back(sample_prior(prior, rng));
    const TrainScoreConfig tc = train_config_from(cfg, seed);
    TrainScoreResult res = train_score_model(data, tc);
    if (curve) *curve = res.loss_curve;
    if (!model_file.empty()) {
        save_mlp(model_file, res.model.net);
    } else {
        save_mlp(out_dir + "/score_model.txt", res.model.net);
    }
    return res.model;
}

struct Histogram {
    std::vector<double> edges;
    std::vector<double> density;
};

Histogram make_histogram(const std::vector<double>& samples, double a, double b, int bins) {
    Histogram h;
    h.edges.resize(bins + 1);
    h.density.assign(bins, 0.0);
    const double w = (b - a) / bins;
    for (int i = 0; i <= bins; ++i) h.edges[i] = a + w * i;
    for (double x : samples) {
        int i = static_cast<int>((x - a) / w);
        i = std::clamp(i, 0, bins - 1);
        h.density[i] += 1.0;
    }
    for (double& d : h.density) d /= static_cast<double>(samples.size()) * w;
    return h;
}

void write_density_csv(const std::string& path, const std::string& schema, const Density1D& density,
                       int points) {
    CsvWriter csv(path, schema, {"z", "pdf"});
    for (int i = 0; i < points; ++i) {
        const double z = density.a() + (density.b() - density.a()) * i / (points - 1);
        csv.row_values({z, density.pdf(z)});
    }
}

void write_hist_csv(const std::string& path, const Histogram& h, const Density1D& density) {
    CsvWriter csv(path, "gg-hist-v1", {"bin_lo", "bin_hi", "empirical_pdf", "reference_pdf"});
    for (std::size_t i = 0; i < h.density.size(); ++i) {
        const double lo = h.edges[i], hi = h.edges[i + 1];
        csv.row_values({lo, hi, h.density[i], density.mass(lo, hi) / (hi - lo)});
    }
}

void write_panel_svg(const std::string& path, const std::string& title, const Density1D& prior_pdf,
                     const Density1D* product_pdf, const Histogram& hist) {
    double ymax = 0.0;
    const int grid = 400;
    std::vector<double> xs(grid), yp(grid), yq(grid);
    for (int i = 0; i < grid; ++i) {
        const double z = prior_pdf.a() + (prior_pdf.b() - prior_pdf.a()) * i / (grid - 1);
        xs[i] = z;
        yp[i] = prior_pdf.pdf(z);
        yq[i] = product_pdf ? product_pdf->pdf(z) : 0.0;
        ymax = std::max({ymax, yp[i], yq[i]});
    }
    for (double d : hist.density) ymax = std::max(ymax, d);
    XyChart chart(prior_pdf.a(), prior_pdf.b(), 0.0, ymax * 1.08);
    chart.bars(hist.edges, hist.density, "#2ca02c");
    chart.curve(xs, yp, "#1f77b4");
    if (product_pdf) chart.curve(xs, yq, "#2ca02c");
    chart.caption(title);
    chart.save(path);
}

void write_trace_csv(const std::string& path, const SamplerTrace& trace) {
    CsvWriter csv(path, "gg-trace-v1",
                  {"step", "sigma", "loss_surface", "loss_eikonal", "loss_siren", "loss_total",
                   "score_norm", "guidance_norm"});
    for (const TraceRecord& r : trace.records) {
        csv.row_values({static_cast<double>(r.t), r.sigma, r.loss.surface, r.loss.eikonal,
                        r.loss.siren, r.loss.total, r.score_norm, r.guidance_norm});
    }
}

void write_scan_csv(const std::string& path, const PointCloud2& cloud) {
    CsvWriter csv(path, "gg-scan-v1", {"x", "y"});
    for (const Vec2& p : cloud.points) csv.row_values({p.x, p.y});
}

void write_contour_csv(const std::string& path, const Contour& contour) {
    CsvWriter csv(path, "gg-contour-v1", {"loop", "x", "y", "nx", "ny"});
    for (std::size_t l = 0; l < contour.loops.size(); ++l) {
        const Contour::Loop& loop = contour.loops[l];
        for (std::size_t i = 0; i < loop.vertices.size(); ++i) {
            const Vec2 n = i < loop.normals.size() ? loop.normals[i] : Vec2{0.0, 0.0};
            csv.row_values({static_cast<double>(l), loop.vertices[i].x, loop.vertices[i].y, n.x, n.y});
        }
    }
}

void write_overlay_svg(const std::string& path, const std::string& title, const PointCloud2& scan,
                       const Contour& gt, const Contour* recon) {
    SceneSvg svg;
    for (const Contour::Loop& loop : gt.loops) svg.polyline(loop.vertices, loop.closed, "#1f77b4", 2.0);
    if (recon) {
        for (const Contour::Loop& loop : recon->loops) {
            svg.polyline(loop.vertices, loop.closed, "#2ca02c", 2.0);
        }
    }
    svg.points(scan.points, 2.0, "#d62728");
    svg.caption(title);
    svg.save(path);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

const std::map<std::string, std::set<std::string>> kToySchema = {
    {"prior", {"means", "vars", "weights"}},
    {"guidance", {"eta", "mu"}},
    {"sampler", {"sigma", "chains", "steps_per_chain", "burn_in", "bins"}},
    {"train", {"samples", "hidden", "epochs", "batch", "lr", "holdout", "model_file"}},
    {"run", {"seed"}},
};

const std::map<std::string, std::set<std::string>> kTrainSchema = {
    {"prior", {"means", "vars", "weights"}},
    {"train", {"samples", "hidden", "epochs", "batch", "lr", "holdout", "model_file", "resume"}},
    {"run", {"seed"}},
};

const std::map<std::string, std::set<std::string>> kReconstructSchema = {
    {"experiment", {"shape", "regime", "sampler", "seed", "resolution", "metric_samples"}},
};

const std::map<std::string, std::set<std::string>> kBenchSchema = {
    {"bench", {"shapes", "regimes", "samplers", "seeds", "seed", "threads"}},
    {"gg", {"schedule", "steps"}},
};

}  // namespace

int cmd_toy1d(const Config& cfg, const std::string& out_dir_in, const CliOverrides& ov) {
    GmmPrior prior;
    double eta, mu, sigma, burn_in;
    int chains, bins;
    long steps_per_chain;
    std::uint64_t seed;
    std::string out_dir;
    try {
        cfg.require_known(kToySchema);
        prior = prior_from_config(cfg);
        eta = cfg.get_double("guidance", "eta", 2.0);
        mu = cfg.get_double("guidance", "mu", 0.5);
        sigma = cfg.get_double("sampler", "sigma", 0.05);
        chains = static_cast<int>(cfg.get_long("sampler", "chains", 800));
        steps_per_chain = cfg.get_long("sampler", "steps_per_chain", 280);
        burn_in = cfg.get_double("sampler", "burn_in", 0.1);
        bins = static_cast<int>(cfg.get_long("sampler", "bins", 50));
        seed = ov.seed.value_or(cfg.get_u64("run", "seed", 1));
        out_dir = resolve_out_dir(out_dir_in);
        ensure_directory(out_dir);
    } catch (const std::exception& e) {
        std::cerr << "toy1d: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const GmmScoreOracle analytic(prior);
        std::optional<LearnedScoreOracle> learned;
        if (!ov.analytic_only) {
            learned.emplace(train_or_load_model(cfg, prior, seed, out_dir));
        }

        const Density1D prior_density = gmm_density_1d(prior);
        const Density1D quad_density = product_density_quadratic(prior, eta, mu);
        const Density1D l1_density = product_density_l1(prior, eta, mu);
        write_density_csv(out_dir + "/density_prior.csv", "gg-density-v1", prior_density, 512);
        write_density_csv(out_dir + "/density_product_quadratic.csv", "gg-density-v1", quad_density, 512);
        write_density_csv(out_dir + "/density_product_l1.csv", "gg-density-v1", l1_density, 512);

        json summary;
        summary["config"]["eta"] = eta;
        summary["config"]["mu"] = mu;
        summary["config"]["sigma"] = sigma;
        summary["config"]["seed"] = seed;
        summary["config"]["samples"] =
            chains * (steps_per_chain - static_cast<long>(burn_in * steps_per_chain));

        struct OracleCase {
            const char* name;
            const ScoreOracle* oracle;
        };
        std::vector<OracleCase> oracles{{"analytic", &analytic}};
        if (learned) oracles.push_back({"learned", &*learned});

        StationaryRunConfig run;
        run.chains = chains;
        run.steps_per_chain = steps_per_chain;
        run.burn_in_frac = burn_in;
        run.sigma = sigma;

        for (const OracleCase& oc : oracles) {
            // Unguided half-denoising against the prior itself.
            run.method = ToyMethod::HalfDenoising;
            run.init = ToyInit::Prior;
            run.beta = 0.0;
            run.eta_for_rejection = 0.0;
            run.seed = seed ^ 0x11;
            const std::vector<double> base =
                stationary_samples(*oc.oracle, prior, zero_guidance(1), run);
            const Histogram hb = make_histogram(base, prior_density.a(), prior_density.b(), bins);
            write_hist_csv(out_dir + "/hist_prior_" + oc.name + ".csv", hb, prior_density);
            write_panel_svg(out_dir + "/panel_prior_" + oc.name + ".svg",
                            std::string("half-denoising vs prior (") + oc.name + ")", prior_density,
                            nullptr, hb);
            summary["tv"][std::string("prior_") + oc.name] = tv_distance(base, prior_density, bins);
            summary["ks"][std::string("prior_") + oc.name] = ks_statistic(base, prior_density);

            struct FamilyCase {
                const char* name;
                GuidanceFn guidance;
                const Density1D* density;
            };
            const std::vector<FamilyCase> families{
                {"quadratic", make_quadratic_guidance(mu), &quad_density},
                {"l1", make_l1_guidance(mu), &l1_density},
            };
            for (const FamilyCase& fam : families) {
                run.method = ToyMethod::Hdnd;
                run.init = ToyInit::Rejection;
                run.eta_for_rejection = eta;
                run.beta = eta * sigma * sigma / 2.0;
                run.seed = seed ^ (fam.name[0] == 'q' ? 0x71ULL : 0x6cULL);
                const std::vector<double> samples =
                    stationary_samples(*oc.oracle, prior, fam.guidance, run);
                const Histogram h = make_histogram(samples, fam.density->a(), fam.density->b(), bins);
                const std::string tag = std::string(fam.name) + "_" + oc.name;
                write_hist_csv(out_dir + "/hist_" + tag + ".csv", h, *fam.density);
                write_panel_svg(out_dir + "/panel_" + tag + ".svg",
                                std::string("gg-langevin ") + tag, prior_density, fam.density, h);
                summary["tv"][tag] = tv_distance(samples, *fam.density, bins);
                summary["ks"][tag] = ks_statistic(samples, *fam.density);
            }
        }
        write_json(out_dir + "/summary.json", summary);
        std::cout << "toy1d: wrote " << out_dir << "/summary.json\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "toy1d: " << e.what() << "\n";
        return kExitDivergence;
    }
}

int cmd_train_score(const Config& cfg, const std::string& out_dir_in, const CliOverrides& ov) {
    GmmPrior prior;
    std::uint64_t seed;
    std::string out_dir, model_out, resume;
    long n;
    try {
        cfg.require_known(kTrainSchema);
        prior = prior_from_config(cfg);
        seed = ov.seed.value_or(cfg.get_u64("run", "seed", 1));
        out_dir = resolve_out_dir(out_dir_in);
        ensure_directory(out_dir);
        model_out = cfg.get_or("train", "model_file", out_dir + "/score_model.txt");
        resume = cfg.get_or("train", "resume", "");
        n = cfg.get_long("train", "samples", 60000);
    } catch (const std::exception& e) {
        std::cerr << "train-score: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        Rng rng(seed ^ 0x7261696e64617461ULL);
        std::vector<Latent> data;
        data.reserve(n);
        for (long i = 0; i < n; ++i) data.push_back(sample_prior(prior, rng));
        const TrainScoreConfig tc = train_config_from(cfg, seed);
        std::optional<NoisePredictor> init_model;
        if (!resume.empty()) init_model.emplace(NoisePredictor{load_mlp(resume)});
        const TrainScoreResult res =
            train_score_model(data, tc, init_model ? &*init_model : nullptr);
        save_mlp(model_out, res.model.net);
        CsvWriter csv(out_dir + "/loss_curve.csv", "gg-losscurve-v1", {"epoch", "train_loss"});
        for (std::size_t i = 0; i < res.loss_curve.size(); ++i) {
            csv.row_values({static_cast<double>(i), res.loss_curve[i]});
        }
        // learned vs analytic score curves on a grid, per noise level
        const LearnedScoreOracle oracle(res.model);
        const double sd = prior.data_std();
        CsvWriter curves(out_dir + "/score_curves.csv", "gg-score-curve-v1",
                         {"sigma", "z", "score_mlp", "score_analytic"});
        for (double sigma : {0.05, 0.1, 0.3}) {
            for (int i = 0; i < 400; ++i) {
                const double z = -3.0 * sd + 6.0 * sd * i / 399.0;
                curves.row_values({sigma, z, oracle.noisy_score({z}, sigma)[0],
                                   gmm_noisy_score(prior, sigma, {z})[0]});
            }
        }
        std::cout << "train-score: init holdout dsm loss = " << res.init_holdout_loss
                  << " (expected ~1.0 for a whitened prior)\n";
        std::cout << "train-score: final holdout dsm loss = " << res.final_holdout_loss << "\n";
        std::cout << "train-score: model written to " << model_out << "\n";
        return kExitOk;
    } catch (const DivergenceError& e) {
        std::cerr << "train-score: diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "train-score: " << e.what() << "\n";
        return kExitDivergence;
    }
}

int cmd_reconstruct(const Config& cfg, const std::string& out_dir_in, const CliOverrides& ov) {
    std::string out_dir, shape, regime, sampler;
    std::uint64_t seed;
    int resolution;
    std::size_t metric_samples;
    try {
        cfg.require_known(kReconstructSchema);
        shape = cfg.get_or("experiment", "shape", "dumbbell");
        regime = cfg.get_or("experiment", "regime", "sparse");
        sampler = ov.sampler.value_or(cfg.get_or("experiment", "sampler", "gg"));
        seed = ov.seed.value_or(cfg.get_u64("experiment", "seed", 1));
        resolution = static_cast<int>(cfg.get_long("experiment", "resolution", 256));
        metric_samples = static_cast<std::size_t>(cfg.get_long("experiment", "metric_samples", 2000));
        regime_by_name(regime);
        if (sampler != "gg" && sampler != "map" && sampler != "dps" && sampler != "daps") {
            throw std::invalid_argument("unknown sampler '" + sampler + "'");
        }
        out_dir = resolve_out_dir(out_dir_in);
        ensure_directory(out_dir);
    } catch (const std::exception& e) {
        std::cerr << "reconstruct: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const ShapeWorld world = ShapeWorld::standard();
        world.shape_index(shape);
        BenchCell cell{shape, regime, sampler, 0, seed};
        const CellResult result = run_cell(world, cell, regime_by_name(regime));
        write_scan_csv(out_dir + "/scan.csv", result.scan);
        write_trace_csv(out_dir + "/trace.csv", result.trace);
        const Contour gt_contour =
            contour_normals(world.decoder, result.gt, extract_contour(world.decoder, result.gt, resolution));
        Contour recon_contour;
        if (!result.final_z.empty()) {
            recon_contour = contour_normals(
                world.decoder, result.final_z, extract_contour(world.decoder, result.final_z, resolution));
            write_contour_csv(out_dir + "/contour.csv", recon_contour);
            save_latent(out_dir + "/latent.txt", world.decoder, result.final_z);
        }
        write_overlay_svg(out_dir + "/overlay.svg", shape + " / " + regime + " / " + sampler,
                          result.scan, gt_contour, result.final_z.empty() ? nullptr : &recon_contour);
        json metrics;
        metrics["shape"] = shape;
        metrics["regime"] = regime;
        metrics["sampler"] = sampler;
        metrics["seed"] = seed;
        metrics["ok"] = result.ok;
        metrics["diverged"] = result.diverged;
        if (result.ok) {
            metrics["chamfer_distance_x100"] = result.metrics.chamfer_dist;
            metrics["chamfer_angle_deg"] = result.metrics.chamfer_angle_deg;
        } else {
            metrics["error"] = result.error;
        }
        metrics["metric_samples"] = metric_samples;
        write_json(out_dir + "/metrics.json", metrics);
        if (!result.ok) {
            std::cerr << "reconstruct: " << result.error << "\n";
            return kExitDivergence;
        }
        std::cout << "reconstruct: CD=" << result.metrics.chamfer_dist
                  << " CA=" << result.metrics.chamfer_angle_deg << " -> " << out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "reconstruct: " << e.what() << "\n";
        return kExitDivergence;
    }
}

int cmd_bench(const Config& cfg, const std::string& out_dir_in, const CliOverrides& ov) {
    BenchManifest manifest;
    std::string out_dir;
    try {
        cfg.require_known(kBenchSchema);
        if (cfg.has("bench", "shapes")) manifest.shapes = cfg.get_strings("bench", "shapes");
        if (cfg.has("bench", "regimes")) manifest.regimes = cfg.get_strings("bench", "regimes");
        if (cfg.has("bench", "samplers")) manifest.samplers = cfg.get_strings("bench", "samplers");
        manifest.seeds = static_cast<int>(cfg.get_long("bench", "seeds", 3));
        manifest.base_seed = ov.seed.value_or(cfg.get_u64("bench", "seed", 1));
        manifest.threads = ov.threads.value_or(static_cast<int>(cfg.get_long("bench", "threads", 1)));
        if (cfg.has("gg", "schedule")) {
            manifest.gg_schedule = schedule_from_tokens(cfg.get_strings("gg", "schedule"));
        }
        if (cfg.has("gg", "steps")) manifest.gg_steps = cfg.get_long("gg", "steps", 0);
        if (ov.sampler) manifest.samplers = {*ov.sampler};
        for (const std::string& r : manifest.regimes) regime_by_name(r);
        for (const std::string& s : manifest.samplers) {
            if (s != "gg" && s != "map" && s != "dps" && s != "daps") {
                throw std::invalid_argument("unknown sampler '" + s + "'");
            }
        }
        out_dir = resolve_out_dir(out_dir_in);
        ensure_directory(out_dir);
        ensure_directory(out_dir + "/svg");
    } catch (const std::exception& e) {
        std::cerr << "bench: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const ShapeWorld world = ShapeWorld::standard();
        const BenchReport report = run_experiment(world, manifest);

        CsvWriter csv(out_dir + "/report.csv", "gg-bench-v1",
                      {"shape", "regime", "sampler", "replicate", "instance_seed", "status",
                       "chamfer_distance_x100", "chamfer_angle_deg"});
        for (const CellResult& r : report.cells) {
            csv.row({r.cell.shape, r.cell.regime, r.cell.sampler, std::to_string(r.cell.replicate),
                     std::to_string(r.cell.instance_seed),
                     r.ok ? "ok" : (r.diverged ? "diverged" : "failed"),
                     r.ok ? fmt_double(r.metrics.chamfer_dist) : "",
                     r.ok ? fmt_double(r.metrics.chamfer_angle_deg) : ""});
        }

        json summary;
        for (const auto& agg : report.aggregates) {
            json entry;
            entry["mean_cd"] = agg.mean_cd;
            entry["mean_ca"] = agg.mean_ca;
            entry["cells_ok"] = agg.cells_ok;
            entry["cells_failed"] = agg.cells_failed;
            // spread over cells for seed sweeps
            double var_cd = 0.0;
            int n = 0;
            for (const CellResult& r : report.cells) {
                if (r.ok && r.cell.regime == agg.regime && r.cell.sampler == agg.sampler) {
                    var_cd += (r.metrics.chamfer_dist - agg.mean_cd) *
                              (r.metrics.chamfer_dist - agg.mean_cd);
                    ++n;
                }
            }
            entry["std_cd"] = n > 1 ? std::sqrt(var_cd / (n - 1)) : 0.0;
            summary[agg.regime][agg.sampler] = entry;
        }
        write_json(out_dir + "/summary.json", summary);

        int failures = 0;
        double total_ms = 0.0;
        for (const CellResult& r : report.cells) {
            total_ms += r.wall_ms;
            if (!r.ok) ++failures;
            const std::string tag = r.cell.shape + "_" + r.cell.regime + "_" + r.cell.sampler + "_" +
                                    std::to_string(r.cell.replicate);
            const Contour gt_contour = contour_normals(
                world.decoder, r.gt, extract_contour(world.decoder, r.gt, 192));
            Contour recon;
            if (!r.final_z.empty()) {
                recon = extract_contour(world.decoder, r.final_z, 192);
            }
            write_overlay_svg(out_dir + "/svg/" + tag + ".svg", tag, r.scan, gt_contour,
                              r.final_z.empty() ? nullptr : &recon);
        }

        std::cout << "regime      sampler   mean_CD   mean_CA   ok  failed\n";
        for (const auto& agg : report.aggregates) {
            std::printf("%-11s %-9s %8.3f  %8.2f  %3d  %5d\n", agg.regime.c_str(),
                        agg.sampler.c_str(), agg.mean_cd, agg.mean_ca, agg.cells_ok,
                        agg.cells_failed);
        }
        std::printf("bench: %zu cells in %.1f s (wall, serial sum)\n", report.cells.size(),
                    total_ms / 1000.0);
        return failures > 0 ? kExitPartialFailure : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << "\n";
        return kExitDivergence;
    }
}

}  // namespace gg

// CLI11 lives only in this translation unit.
#include <CLI11.hpp>

namespace gg {

int cli_main(int argc, char** argv) {
    CLI::App app{"Geometry-guided Langevin sampling for 2D shape reconstruction"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    CliOverrides ov;
    std::uint64_t seed_flag = 0;
    std::string sampler_flag;
    int threads_flag = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file (key=value sections)");
        sub->add_option("--out", out_dir, "output directory (env GG_OUT_DIR overrides)");
        sub->add_option("--seed", seed_flag, "seed override")->
            each([&](const std::string&) { ov.seed = seed_flag; });
        sub->add_option("--threads", threads_flag, "worker threads for independent cells")->
            each([&](const std::string&) { ov.threads = threads_flag; });
    };

    CLI::App* toy = app.add_subcommand("toy1d", "1D sampling study against closed-form densities");
    add_common(toy);
    toy->add_flag("--analytic-only", ov.analytic_only, "skip score-model training");

    CLI::App* train = app.add_subcommand("train-score", "train the MLP noise predictor");
    add_common(train);

    CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct one scanned shape");
    add_common(rec);
    rec->add_option("--sampler", sampler_flag, "gg | map | dps | daps")->
        each([&](const std::string&) { ov.sampler = sampler_flag; });

    CLI::App* bench = app.add_subcommand("bench", "run the sampler comparison benchmark");
    add_common(bench);
    bench->add_option("--sampler", sampler_flag, "restrict to one sampler")->
        each([&](const std::string&) { ov.sampler = sampler_flag; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    Config cfg;
    try {
        if (!config_path.empty()) cfg = Config::parse_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (toy->parsed()) return cmd_toy1d(cfg, out_dir, ov);
    if (train->parsed()) return cmd_train_score(cfg, out_dir, ov);
    if (rec->parsed()) return cmd_reconstruct(cfg, out_dir, ov);
    if (bench->parsed()) return cmd_bench(cfg, out_dir, ov);
    return kExitConfig;
}

}  // namespace gg
