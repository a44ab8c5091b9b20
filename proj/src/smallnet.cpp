#include "gglangevin/smallnet.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gg {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t Mlp::param_count(const std::vector<std::size_t>& dims) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l + 1] * (dims[l] + 1);
    return n;
}

Mlp Mlp::init(const std::vector<std::size_t>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    for (std::size_t d : dims) {
        if (d == 0) throw std::invalid_argument("Mlp: zero layer width");
    }
    Mlp net;
    net.dims = dims;
    net.params.assign(param_count(dims), 0.0);
    std::size_t off = 0;
    const std::size_t layers = dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        const bool final_layer = (l + 1 == layers);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < out * in; ++i) {
            net.params[off + i] = final_layer ? 0.0 : scale * rng.normal();
        }
        off += out * in + out;  // biases start at zero
    }
    return net;
}

void Mlp::validate() const {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: bad dims");
    if (params.size() != param_count(dims)) throw std::invalid_argument("Mlp: param size mismatch");
    if (!vec_finite(params)) throw std::invalid_argument("Mlp: non-finite parameters");
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
    if (input.size() != input_dim()) throw std::invalid_argument("Mlp::forward: input dim mismatch");
    std::vector<double> h = input;
    std::vector<double> a;
    std::size_t off = 0;
    const std::size_t layers = layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        a.assign(out, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            double s = params[off + out * in + i];  // bias
            const double* w = &params[off + i * in];
            for (std::size_t j = 0; j < in; ++j) s += w[j] * h[j];
            a[i] = s;
        }
        off += out * (in + 1);
        if (l + 1 < layers) {
            for (double& x : a) x = softplus(x);
        }
        h = a;
    }
    return h;
}

Mlp::Gradients Mlp::vjp(const std::vector<double>& input, const std::vector<double>& cotangent,
                        std::vector<double>* output) const {
    if (input.size() != input_dim()) throw std::invalid_argument("Mlp::vjp: input dim mismatch");
    if (cotangent.size() != output_dim()) throw std::invalid_argument("Mlp::vjp: cotangent dim mismatch");

    const std::size_t layers = layer_count();
    // Forward pass, keeping pre-activations and layer inputs.
    std::vector<std::vector<double>> inputs(layers);   // h_{l-1}
    std::vector<std::vector<double>> preacts(layers);  // a_l
    std::vector<double> h = input;
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        inputs[l] = h;
        std::vector<double> a(out);
        for (std::size_t i = 0; i < out; ++i) {
            double s = params[off + out * in + i];
            const double* w = &params[off + i * in];
            for (std::size_t j = 0; j < in; ++j) s += w[j] * h[j];
            a[i] = s;
        }
        preacts[l] = a;
        off += out * (in + 1);
        if (l + 1 < layers) {
            for (double& x : a) x = softplus(x);
        }
        h = std::move(a);
    }
    if (output) *output = h;

    Gradients g;
    g.params.assign(params.size(), 0.0);
    std::vector<double> delta = cotangent;
    std::size_t end = params.size();
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = dims[l], out = dims[l + 1];
        const std::size_t base = end - out * (in + 1);
        const std::vector<double>& hin = inputs[l];
        for (std::size_t i = 0; i < out; ++i) {
            g.params[base + out * in + i] = delta[i];
            double* gw = &g.params[base + i * in];
            for (std::size_t j = 0; j < in; ++j) gw[j] = delta[i] * hin[j];
        }
        std::vector<double> prev(in, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            const double* w = &params[base + i * in];
            for (std::size_t j = 0; j < in; ++j) prev[j] += w[j] * delta[i];
        }
        if (l > 0) {
            for (std::size_t j = 0; j < in; ++j) prev[j] *= sigmoid(preacts[l - 1][j]);
        }
        delta = std::move(prev);
        end = base;
    }
    g.input = std::move(delta);
    return g;
}

void save_mlp(const std::string& path, const Mlp& net) {
    net.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
    out << "gg-mlp v1\n";
    out << "activation softplus\n";
    out << "dims";
    for (std::size_t d : net.dims) out << ' ' << d;
    out << "\nparams " << net.params.size() << "\n";
    char buf[64];
    for (double p : net.params) {
        std::snprintf(buf, sizeof(buf), "%a\n", p);
        out << buf;
    }
    if (!out) throw std::runtime_error("save_mlp: write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mlp: cannot open " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "gg-mlp" || version != "v1") throw std::runtime_error("load_mlp: bad header in " + path);
    std::string key, act;
    in >> key >> act;
    if (key != "activation" || act != "softplus") throw std::runtime_error("load_mlp: unsupported activation");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::istringstream dims_line(line);
    dims_line >> key;
    if (key != "dims") throw std::runtime_error("load_mlp: missing dims");
    Mlp net;
    std::size_t d;
    while (dims_line >> d) net.dims.push_back(d);
    std::size_t count = 0;
    in >> key >> count;
    if (key != "params") throw std::runtime_error("load_mlp: missing params");
    net.params.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("load_mlp: truncated params");
        net.params[i] = std::strtod(tok.c_str(), nullptr);
    }
    net.validate();
    return net;
}

AdamState::AdamState(std::size_t n, double lr_, AdamParams hyper_)
    : m(n, 0.0), v(n, 0.0), lr(lr_), hyper(hyper_) {}

void AdamState::step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != m.size() || grads.size() != m.size()) {
        throw std::invalid_argument("AdamState::step: layout mismatch");
    }
    if (!vec_finite(grads)) throw DivergenceError("adam_step: non-finite gradient");
    ++t;
    const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grads[i];
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
}

}  // namespace gg
