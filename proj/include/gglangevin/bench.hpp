#ifndef GGLANGEVIN_BENCH_HPP
#define GGLANGEVIN_BENCH_HPP

#include <optional>
#include <string>

#include "gglangevin/decoder.hpp"
#include "gglangevin/samplers.hpp"

namespace gg {

/// A named ground-truth shape, stored as raw disk parameters of the shared
/// decoder family.
struct ShapeSpec {
    std::string name;
    std::vector<double> raw_params;
};

/// The procedural benchmark world: a whitened K-disk decoder, canonical
/// shapes, and an analytic mixture prior over whitened latents with one
/// component per shape family. Ground-truth instances are prior draws from a
/// chosen component.
struct ShapeWorld {
    DiskDecoder decoder;
    GmmPrior prior;
    std::vector<ShapeSpec> shapes;
    double center_jitter = 0.03;  // raw-space std per shape family
    double rho_jitter = 0.06;

    static ShapeWorld standard(double tau = 0.02);

    std::size_t shape_index(const std::string& name) const;
    // Whitened component mean for a shape family.
    Latent canonical_latent(std::size_t shape_idx) const;
    // Ground-truth draw: component mean plus per-coordinate jitter.
    Latent sample_shape(std::size_t shape_idx, Rng& rng) const;
};

struct CutSpec {
    Vec2 normal{1.0, 0.0};  // unit
    double offset = 0.0;
    double decay = 0.1;  // length scale of the keep probability
};

struct ScanSpec {
    std::vector<Vec2> sensors;
    int rays_per_sensor = 30;
    double noise_std = 0.01;   // along-ray Gaussian range noise
    double fov_deg = 70.0;     // fan width, aimed at the origin
    std::optional<CutSpec> cut;
};

// First-hit ray casting against the decoded SDF (bisection along each ray)
// plus range noise; rays that never cross the surface are dropped.
PointCloud2 simulate_scan(const DiskDecoder& dec, const Latent& gt, const ScanSpec& spec, Rng& rng);

// Points on the positive side of the plane survive with probability
// exp(-d / decay); the other side is untouched. Never moves a point.
PointCloud2 apply_cut(const PointCloud2& P, Vec2 normal, double offset, double decay, Rng& rng);

// Re-orders the disks of a latent so their slots best match one prior
// component (minimum whitened slot distance over all disk permutations and
// components, or a fixed component). Disk order is gauge freedom for the
// decoded shape, but the mixture prior lives in slot coordinates, so warm
// starts must be aligned before the score can pull toward a component.
Latent align_latent_to_prior(const DiskDecoder& dec, const GmmPrior& prior, const Latent& z);
Latent align_latent_to_component(const DiskDecoder& dec, const GmmPrior& prior,
                                 std::size_t component, const Latent& z);

// The benchmark's encoder stand-in: k-means initialization, component choice
// by measurement fit of the component mean shapes, permutation alignment to
// the chosen component.
Latent bench_encoder_init(const ShapeWorld& world, const PointCloud2& scan, Rng& rng);

// Symmetric mean nearest-neighbor distance, reported x100.
double chamfer_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
// Mean angle (degrees) between normals at the chamfer correspondences,
// orientation-agnostic via |cos|.
double chamfer_angle(const PointCloud2& a, const PointCloud2& b);

// Arc-length-uniform samples along the contour with SDF-gradient normals.
PointCloud2 sample_contour(const DiskDecoder& dec, const Latent& z, const Contour& contour,
                           std::size_t count);

struct Metrics {
    double chamfer_dist = 0.0;  // x100
    double chamfer_angle_deg = 0.0;
};

// Contour both latents at the given resolution and compare >=2000 samples.
Metrics compare_latents(const DiskDecoder& dec, const Latent& recon, const Latent& gt,
                        int resolution = 256, std::size_t samples = 2000);

// --- experiment presets and runner ---

struct RegimePreset {
    std::string name;
    ScanSpec scan;          // cut filled per instance for the incomplete regime
    SamplerConfig sampler;  // schedule/steps/beta for the gg run
    GuidanceConfig guidance;
    bool cut_enabled = false;
};

RegimePreset sparse_regime();
RegimePreset incomplete_regime();
RegimePreset regime_by_name(const std::string& name);

struct BenchCell {
    std::string shape;
    std::string regime;
    std::string sampler;  // gg | map | dps | daps
    int replicate = 0;
    std::uint64_t instance_seed = 0;
};

struct CellResult {
    BenchCell cell;
    Metrics metrics;
    bool ok = false;
    bool diverged = false;
    std::string error;
    double wall_ms = 0.0;
    Latent final_z;       // empty on failure
    PointCloud2 scan;     // the measurement the cell saw
    Latent gt;
    SamplerTrace trace;
};

struct BenchManifest {
    std::vector<std::string> shapes = {"arc", "dumbbell", "tripod"};
    std::vector<std::string> regimes = {"sparse", "incomplete"};
    std::vector<std::string> samplers = {"gg", "map", "dps", "daps"};
    int seeds = 3;
    std::uint64_t base_seed = 0;
    int threads = 1;
    // Optional schedule override for the gg sampler (noise-schedule studies).
    std::optional<NoiseSchedule> gg_schedule;
    std::optional<long> gg_steps;
};

struct BenchReport {
    std::vector<CellResult> cells;
    // mean metrics over successful cells per (regime, sampler)
    struct Aggregate {
        std::string regime;
        std::string sampler;
        double mean_cd = 0.0;
        double mean_ca = 0.0;
        int cells_ok = 0;
        int cells_failed = 0;
    };
    std::vector<Aggregate> aggregates;
};

// Executes every (shape x regime x sampler x replicate) cell. Cells are
// independent and seeded from the manifest, so thread count cannot change
// the results; failures are recorded and the run continues.
BenchReport run_experiment(const ShapeWorld& world, const BenchManifest& manifest);

// Single reconstruction cell, shared by the CLI reconstruct command.
CellResult run_cell(const ShapeWorld& world, const BenchCell& cell, const RegimePreset& preset);

}  // namespace gg

#endif
