#ifndef GGLANGEVIN_DECODER_HPP
#define GGLANGEVIN_DECODER_HPP

#include <string>
#include <vector>

#include "gglangevin/core.hpp"

namespace gg {

/// Latent-to-shape map over a union of K disks blended with a soft minimum:
///   D(z, x) = -tau log sum_k exp(-(|x - c_k| - r_k) / tau),  r_k = softplus(rho_k).
/// The latent is whitened; raw parameters are mean + std * z with layout
/// (c_1x, c_1y, rho_1, ..., c_Kx, c_Ky, rho_K). Differentiable in both z and
/// x away from the disk centers.
struct DiskDecoder {
    std::size_t K = 1;
    double tau = 0.02;
    std::vector<double> whiten_mean;  // size 3K
    std::vector<double> whiten_std;   // size 3K, entries > 0

    static DiskDecoder plain(std::size_t K, double tau = 0.02);
    // Per-coordinate standardization fitted over raw parameter samples.
    static DiskDecoder with_whitening(std::size_t K, double tau,
                                      const std::vector<std::vector<double>>& raw_dataset);

    std::size_t latent_dim() const { return 3 * K; }
    std::vector<double> raw_params(const Latent& z) const;
    Latent latent_from_raw(const std::vector<double>& raw) const;
    void validate() const;
};

double decode(const DiskDecoder& dec, const Latent& z, Vec2 x);
Vec2 decode_grad_x(const DiskDecoder& dec, const Latent& z, Vec2 x);
std::vector<double> decode_grad_z(const DiskDecoder& dec, const Latent& z, Vec2 x);

// One evaluation point, everything the losses need.
struct DecodeEval {
    double value = 0.0;
    Vec2 grad_x;
};
DecodeEval decode_eval(const DiskDecoder& dec, const Latent& z, Vec2 x);

// (d grad_x / d z)^T h, the mixed second derivative contracted with a
// spatial cotangent. Exact; used by the eikonal gradient.
std::vector<double> decode_grad_x_vjp_z(const DiskDecoder& dec, const Latent& z, Vec2 x, Vec2 h);

// Convenience: accumulate c * dD/dz into acc without allocating.
void accumulate_grad_z(const DiskDecoder& dec, const Latent& z, Vec2 x, double c,
                       std::vector<double>& acc);

/// Zero-level-set polylines with optional per-vertex unit normals.
struct Contour {
    struct Loop {
        std::vector<Vec2> vertices;
        std::vector<Vec2> normals;  // filled by contour_normals
        bool closed = true;
    };
    std::vector<Loop> loops;

    bool empty() const { return loops.empty(); }
    std::size_t vertex_count() const;
    double total_length() const;
};

// Marching squares over Omega = [-1,1]^2 with linear interpolation on cell
// edges; resolution is the cell count per axis (>= 16). Loops are oriented
// with the interior (D < 0) on the left. An empty level set gives an empty
// contour.
Contour extract_contour(const DiskDecoder& dec, const Latent& z, int resolution);

// Normals n = grad_x D / |grad_x D| at every vertex. Throws on a vanishing
// gradient instead of normalizing garbage.
Contour contour_normals(const DiskDecoder& dec, const Latent& z, Contour contour);

// Warm start: k-means disk centers over P, radius = mean member distance,
// mapped through the inverse whitening. Deterministic per rng. Requires
// |P| >= K.
Latent encode_init(const DiskDecoder& dec, const PointCloud2& P, Rng& rng);

double softplus_inv(double y);

// Versioned text round-trip for latents (hexfloat payload, bit-exact),
// storing both whitened coordinates and the decoded raw disk parameters.
void save_latent(const std::string& path, const DiskDecoder& dec, const Latent& z);
Latent load_latent(const std::string& path, const DiskDecoder& dec);

}  // namespace gg

#endif
