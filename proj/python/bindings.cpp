#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gglangevin/bench.hpp"
#include "gglangevin/reference.hpp"

namespace py = pybind11;
using namespace gg;

namespace {

PointCloud2 cloud_from_lists(const std::vector<std::pair<double, double>>& pts,
                             const std::vector<std::pair<double, double>>& normals) {
    PointCloud2 c;
    for (const auto& [x, y] : pts) c.points.push_back({x, y});
    for (const auto& [x, y] : normals) c.normals.push_back({x, y});
    c.validate();
    return c;
}

std::vector<std::pair<double, double>> cloud_points(const PointCloud2& c) {
    std::vector<std::pair<double, double>> out;
    for (const Vec2& p : c.points) out.emplace_back(p.x, p.y);
    return out;
}

std::vector<std::pair<double, double>> cloud_normals(const PointCloud2& c) {
    std::vector<std::pair<double, double>> out;
    for (const Vec2& p : c.normals) out.emplace_back(p.x, p.y);
    return out;
}

py::dict trace_to_dict(const SamplerTrace& trace) {
    py::dict d;
    std::vector<long> steps;
    std::vector<double> sigma, total, surface, eikonal, score_norm, guidance_norm;
    for (const TraceRecord& r : trace.records) {
        steps.push_back(r.t);
        sigma.push_back(r.sigma);
        total.push_back(r.loss.total);
        surface.push_back(r.loss.surface);
        eikonal.push_back(r.loss.eikonal);
        score_norm.push_back(r.score_norm);
        guidance_norm.push_back(r.guidance_norm);
    }
    d["step"] = steps;
    d["sigma"] = sigma;
    d["loss_total"] = total;
    d["loss_surface"] = surface;
    d["loss_eikonal"] = eikonal;
    d["score_norm"] = score_norm;
    d["guidance_norm"] = guidance_norm;
    d["final_z"] = trace.final_z;
    d["diverged"] = trace.diverged;
    d["steps_completed"] = trace.steps_completed;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geometry-guided Langevin sampling core";

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def_static("constant", &NoiseSchedule::constant, py::arg("sigma"))
        .def_static("cosine_anneal", &NoiseSchedule::cosine_anneal, py::arg("sigma_max"),
                    py::arg("sigma_min"), py::arg("t_anneal"), py::arg("t_tail"))
        .def("at", &NoiseSchedule::at, py::arg("t"))
        .def("length", &NoiseSchedule::length);
    m.def("schedule_sigma", &schedule_sigma, py::arg("schedule"), py::arg("t"));

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("normal", &Rng::normal)
        .def("uniform", py::overload_cast<>(&Rng::uniform));

    py::class_<GmmPrior>(m, "GmmPrior")
        .def(py::init([](std::vector<double> weights, std::vector<std::vector<double>> means,
                         std::vector<std::vector<double>> vars) {
                 GmmPrior p{std::move(weights), std::move(means), std::move(vars)};
                 p.validate();
                 return p;
             }),
             py::arg("weights"), py::arg("means"), py::arg("vars"))
        .def_static("bimodal1d", &GmmPrior::bimodal1d, py::arg("mode_abs"), py::arg("var"))
        .def_property_readonly("dim", &GmmPrior::dim)
        .def("data_std", &GmmPrior::data_std);
    m.def("gmm_noisy_score", &gmm_noisy_score, py::arg("prior"), py::arg("sigma"), py::arg("z"));
    m.def("gmm_true_score", &gmm_true_score, py::arg("prior"), py::arg("z"));
    m.def("sample_prior",
          [](const GmmPrior& p, Rng& rng) { return sample_prior(p, rng); }, py::arg("prior"),
          py::arg("rng"));

    py::class_<NoisePredictor>(m, "NoisePredictor")
        .def_static("load", [](const std::string& path) { return NoisePredictor{load_mlp(path)}; })
        .def("save", [](const NoisePredictor& np, const std::string& path) { save_mlp(path, np.net); })
        .def_property_readonly("latent_dim", &NoisePredictor::latent_dim);
    m.def("edm_predict_eps", &edm_predict_eps, py::arg("model"), py::arg("z_noisy"), py::arg("sigma"));
    m.def("score_from_eps", &score_from_eps, py::arg("eps"), py::arg("sigma"));
    m.def(
        "train_score_model",
        [](const std::vector<Latent>& samples, long epochs, std::vector<std::size_t> hidden,
           double lr, std::size_t batch, std::uint64_t seed) {
            TrainScoreConfig cfg;
            cfg.epochs = epochs;
            cfg.hidden = std::move(hidden);
            cfg.lr = lr;
            cfg.batch = batch;
            cfg.seed = seed;
            TrainScoreResult res = train_score_model(samples, cfg);
            return py::make_tuple(res.model, res.loss_curve, res.init_holdout_loss,
                                  res.final_holdout_loss);
        },
        py::arg("samples"), py::arg("epochs") = 60,
        py::arg("hidden") = std::vector<std::size_t>{64, 64}, py::arg("lr") = 1e-3,
        py::arg("batch") = 256, py::arg("seed") = 0);

    py::class_<ScoreOracle>(m, "ScoreOracle")
        .def("noisy_score", &ScoreOracle::noisy_score, py::arg("z"), py::arg("sigma"))
        .def("has_true_score", &ScoreOracle::has_true_score)
        .def("true_score", &ScoreOracle::true_score, py::arg("z"));
    py::class_<GmmScoreOracle, ScoreOracle>(m, "GmmScoreOracle").def(py::init<GmmPrior>());
    py::class_<LearnedScoreOracle, ScoreOracle>(m, "LearnedScoreOracle")
        .def(py::init<NoisePredictor>());

    py::class_<DiskDecoder>(m, "DiskDecoder")
        .def_static("plain", &DiskDecoder::plain, py::arg("k"), py::arg("tau") = 0.02)
        .def_readonly("K", &DiskDecoder::K)
        .def_readonly("tau", &DiskDecoder::tau)
        .def_property_readonly("latent_dim", &DiskDecoder::latent_dim)
        .def("raw_params", &DiskDecoder::raw_params)
        .def("latent_from_raw", &DiskDecoder::latent_from_raw);
    m.def("decode",
          [](const DiskDecoder& d, const Latent& z, double x, double y) {
              return decode(d, z, {x, y});
          },
          py::arg("decoder"), py::arg("z"), py::arg("x"), py::arg("y"));
    m.def("decode_grad_x",
          [](const DiskDecoder& d, const Latent& z, double x, double y) {
              const Vec2 g = decode_grad_x(d, z, {x, y});
              return std::make_pair(g.x, g.y);
          },
          py::arg("decoder"), py::arg("z"), py::arg("x"), py::arg("y"));
    m.def("decode_grad_z",
          [](const DiskDecoder& d, const Latent& z, double x, double y) {
              return decode_grad_z(d, z, {x, y});
          },
          py::arg("decoder"), py::arg("z"), py::arg("x"), py::arg("y"));
    m.def("extract_contour",
          [](const DiskDecoder& d, const Latent& z, int resolution) {
              const Contour c = extract_contour(d, z, resolution);
              std::vector<std::vector<std::pair<double, double>>> loops;
              for (const Contour::Loop& loop : c.loops) {
                  std::vector<std::pair<double, double>> pts;
                  for (const Vec2& p : loop.vertices) pts.emplace_back(p.x, p.y);
                  loops.push_back(std::move(pts));
              }
              return loops;
          },
          py::arg("decoder"), py::arg("z"), py::arg("resolution") = 256);
    m.def("encode_init",
          [](const DiskDecoder& d, const std::vector<std::pair<double, double>>& pts,
             std::uint64_t seed) {
              Rng rng(seed);
              return encode_init(d, cloud_from_lists(pts, {}), rng);
          },
          py::arg("decoder"), py::arg("points"), py::arg("seed") = 0);

    m.def("surface_loss",
          [](const DiskDecoder& d, const Latent& z, const std::vector<std::pair<double, double>>& pts) {
              const LossEval ev = surface_loss(d, z, cloud_from_lists(pts, {}));
              return py::make_tuple(ev.value, ev.grad);
          },
          py::arg("decoder"), py::arg("z"), py::arg("points"));
    m.def("eikonal_loss",
          [](const DiskDecoder& d, const Latent& z, std::size_t m, std::uint64_t seed) {
              Rng rng(seed);
              const LossEval ev = eikonal_loss(d, z, rng, m);
              return py::make_tuple(ev.value, ev.grad);
          },
          py::arg("decoder"), py::arg("z"), py::arg("m") = 256, py::arg("seed") = 0);
    m.def("siren_loss",
          [](const DiskDecoder& d, const Latent& z, std::size_t m, double alpha, std::uint64_t seed) {
              Rng rng(seed);
              const LossEval ev = siren_loss(d, z, rng, m, alpha);
              return py::make_tuple(ev.value, ev.grad);
          },
          py::arg("decoder"), py::arg("z"), py::arg("m") = 256, py::arg("alpha") = 100.0,
          py::arg("seed") = 0);

    py::class_<SamplerConfig>(m, "SamplerConfig")
        .def(py::init([](const NoiseSchedule& schedule, double beta, long steps, std::uint64_t seed) {
                 SamplerConfig cfg;
                 cfg.schedule = schedule;
                 cfg.beta = beta;
                 cfg.steps = steps;
                 cfg.seed = seed;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("schedule"), py::arg("beta"), py::arg("steps"), py::arg("seed") = 0);

    m.def(
        "gg_langevin_reconstruct",
        [](const GmmScoreOracle& oracle, const DiskDecoder& dec,
           const std::vector<std::pair<double, double>>& pts, const SamplerConfig& cfg,
           double lambda, std::size_t m_eikonal, bool use_adam) {
            GuidanceConfig gcfg;
            gcfg.lambda = lambda;
            gcfg.m_eikonal = m_eikonal;
            const PointCloud2 cloud = cloud_from_lists(pts, {});
            Rng rng(cfg.seed ^ 0x696e6974ULL);
            const Latent z0 = encode_init(dec, cloud, rng);
            RunOptions opts;
            opts.use_adam = use_adam;
            const SamplerTrace trace =
                gg_langevin_run(oracle, make_geometric_guidance(dec, cloud, gcfg), z0, cfg, opts);
            return trace_to_dict(trace);
        },
        py::arg("oracle"), py::arg("decoder"), py::arg("points"), py::arg("config"),
        py::arg("lambda_eikonal") = 0.1, py::arg("m_eikonal") = 256, py::arg("use_adam") = true);

    m.def(
        "gg_langevin_toy1d",
        [](const ScoreOracle& oracle, const GmmPrior& prior, const std::string& family, double eta,
           double mu, double sigma, int chains, long steps_per_chain, std::uint64_t seed) {
            StationaryRunConfig cfg;
            cfg.method = ToyMethod::Hdnd;
            cfg.init = ToyInit::Rejection;
            cfg.chains = chains;
            cfg.steps_per_chain = steps_per_chain;
            cfg.sigma = sigma;
            cfg.beta = eta * sigma * sigma / 2.0;
            cfg.eta_for_rejection = eta;
            cfg.seed = seed;
            const GuidanceFn fn =
                family == "l1" ? make_l1_guidance(mu) : make_quadratic_guidance(mu);
            return stationary_samples(oracle, prior, fn, cfg);
        },
        py::arg("oracle"), py::arg("prior"), py::arg("family") = "quadratic", py::arg("eta") = 2.0,
        py::arg("mu") = 0.5, py::arg("sigma") = 0.05, py::arg("chains") = 800,
        py::arg("steps_per_chain") = 280, py::arg("seed") = 0);

    py::class_<Density1D>(m, "Density1D")
        .def("pdf", &Density1D::pdf)
        .def("cdf", &Density1D::cdf)
        .def_property_readonly("a", &Density1D::a)
        .def_property_readonly("b", &Density1D::b);
    m.def("gmm_density_1d", &gmm_density_1d, py::arg("prior"), py::arg("sigma") = 0.0);
    m.def("product_density_quadratic", &product_density_quadratic, py::arg("prior"), py::arg("eta"),
          py::arg("mu"));
    m.def("product_density_l1", &product_density_l1, py::arg("prior"), py::arg("eta"), py::arg("mu"));
    m.def("tv_distance", &tv_distance, py::arg("samples"), py::arg("density"), py::arg("bins") = 50);
    m.def("ks_statistic", &ks_statistic, py::arg("samples"), py::arg("density"));

    m.def("chamfer_distance",
          [](const std::vector<std::pair<double, double>>& a,
             const std::vector<std::pair<double, double>>& b) {
              return chamfer_distance(cloud_from_lists(a, {}).points, cloud_from_lists(b, {}).points);
          },
          py::arg("a"), py::arg("b"));
    m.def("chamfer_angle",
          [](const std::vector<std::pair<double, double>>& a,
             const std::vector<std::pair<double, double>>& na,
             const std::vector<std::pair<double, double>>& b,
             const std::vector<std::pair<double, double>>& nb) {
              return chamfer_angle(cloud_from_lists(a, na), cloud_from_lists(b, nb));
          },
          py::arg("a"), py::arg("a_normals"), py::arg("b"), py::arg("b_normals"));

    py::class_<ShapeWorld>(m, "ShapeWorld")
        .def_static("standard", &ShapeWorld::standard, py::arg("tau") = 0.02)
        .def_readonly("decoder", &ShapeWorld::decoder)
        .def_readonly("prior", &ShapeWorld::prior)
        .def("shape_names",
             [](const ShapeWorld& w) {
                 std::vector<std::string> names;
                 for (const ShapeSpec& s : w.shapes) names.push_back(s.name);
                 return names;
             })
        .def("canonical_latent",
             [](const ShapeWorld& w, const std::string& name) {
                 return w.canonical_latent(w.shape_index(name));
             });
    m.def("simulate_scan",
          [](const ShapeWorld& world, const std::string& shape, const std::string& regime,
             std::uint64_t seed) {
              Rng rng(seed);
              const Latent gt = world.sample_shape(world.shape_index(shape), rng);
              RegimePreset preset = regime_by_name(regime);
              PointCloud2 scan = simulate_scan(world.decoder, gt, preset.scan, rng);
              if (preset.cut_enabled) {
                  const double ang = rng.uniform(0.0, 2.0 * M_PI);
                  scan = apply_cut(scan, {std::cos(ang), std::sin(ang)}, rng.uniform(-0.15, 0.15),
                                   0.1, rng);
              }
              return py::make_tuple(cloud_points(scan), gt);
          },
          py::arg("world"), py::arg("shape"), py::arg("regime") = "sparse", py::arg("seed") = 0);
    m.def("sample_contour_points",
          [](const DiskDecoder& dec, const Latent& z, int resolution, std::size_t count) {
              const Contour c = extract_contour(dec, z, resolution);
              const PointCloud2 cloud = sample_contour(dec, z, c, count);
              return py::make_tuple(cloud_points(cloud), cloud_normals(cloud));
          },
          py::arg("decoder"), py::arg("z"), py::arg("resolution") = 256, py::arg("count") = 2000);
}
