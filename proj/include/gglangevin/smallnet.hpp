#ifndef GGLANGEVIN_SMALLNET_HPP
#define GGLANGEVIN_SMALLNET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gglangevin/core.hpp"

namespace gg {

/// Fully-connected net with softplus hidden activations and a linear output
/// layer. Parameters live in one flat vector (per layer: weight matrix
/// row-major, then bias) so optimizers and serialization stay trivial.
struct Mlp {
    std::vector<std::size_t> dims;  // [d_in, hidden..., d_out]
    std::vector<double> params;

    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }
    std::size_t layer_count() const { return dims.size() - 1; }
    static std::size_t param_count(const std::vector<std::size_t>& dims);

    // Hidden layers get fan-in-scaled Gaussian weights; the final layer is
    // zeroed so the net outputs exactly zero at initialization.
    static Mlp init(const std::vector<std::size_t>& dims, Rng& rng);

    std::vector<double> forward(const std::vector<double>& input) const;

    struct Gradients {
        std::vector<double> params;
        std::vector<double> input;
    };
    // Exact reverse-mode gradients of <cotangent, forward(input)> with
    // respect to parameters and input. Optionally returns the forward value.
    Gradients vjp(const std::vector<double>& input, const std::vector<double>& cotangent,
                  std::vector<double>* output = nullptr) const;

    void validate() const;
};

inline std::vector<double> mlp_forward(const Mlp& net, const std::vector<double>& input) {
    return net.forward(input);
}

inline Mlp::Gradients mlp_grad(const Mlp& net, const std::vector<double>& input,
                               const std::vector<double>& cotangent) {
    return net.vjp(input, cotangent);
}

double softplus(double x);
double sigmoid(double x);

// Bit-exact text round-trip (hexfloat payload) with a versioned header.
void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);

/// Adam with bias correction over a flat parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
    double lr = 1e-3;
    AdamParams hyper;

    AdamState(std::size_t n, double lr, AdamParams hyper = {});

    // Throws DivergenceError on non-finite gradients.
    void step(std::vector<double>& params, const std::vector<double>& grads);
};

inline void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads) {
    state.step(params, grads);
}

}  // namespace gg

#endif
