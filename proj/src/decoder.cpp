#include "gglangevin/decoder.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "gglangevin/smallnet.hpp"  // softplus, sigmoid

namespace gg {

double softplus_inv(double y) {
    if (!(y > 0.0)) throw std::invalid_argument("softplus_inv: argument must be > 0");
    if (y > 30.0) return y;
    return std::log(std::expm1(y));
}

DiskDecoder DiskDecoder::plain(std::size_t K, double tau) {
    DiskDecoder d;
    d.K = K;
    d.tau = tau;
    d.whiten_mean.assign(3 * K, 0.0);
    d.whiten_std.assign(3 * K, 1.0);
    d.validate();
    return d;
}

DiskDecoder DiskDecoder::with_whitening(std::size_t K, double tau,
                                        const std::vector<std::vector<double>>& raw_dataset) {
    if (raw_dataset.size() < 2) throw std::invalid_argument("with_whitening: need >= 2 samples");
    DiskDecoder d;
    d.K = K;
    d.tau = tau;
    const std::size_t n = 3 * K;
    d.whiten_mean.assign(n, 0.0);
    d.whiten_std.assign(n, 0.0);
    for (const auto& raw : raw_dataset) {
        if (raw.size() != n) throw std::invalid_argument("with_whitening: raw sample dim mismatch");
        for (std::size_t j = 0; j < n; ++j) d.whiten_mean[j] += raw[j];
    }
    for (double& m : d.whiten_mean) m /= static_cast<double>(raw_dataset.size());
    for (const auto& raw : raw_dataset) {
        for (std::size_t j = 0; j < n; ++j) {
            const double diff = raw[j] - d.whiten_mean[j];
            d.whiten_std[j] += diff * diff;
        }
    }
    for (double& s : d.whiten_std) {
        s = std::sqrt(s / static_cast<double>(raw_dataset.size() - 1));
        s = std::max(s, 1e-6);
    }
    d.validate();
    return d;
}

void DiskDecoder::validate() const {
    if (K < 1) throw std::invalid_argument("DiskDecoder: K must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("DiskDecoder: tau must be > 0");
    if (whiten_mean.size() != 3 * K || whiten_std.size() != 3 * K) {
        throw std::invalid_argument("DiskDecoder: whitening size mismatch");
    }
    for (double s : whiten_std) {
        if (!(s > 0.0)) throw std::invalid_argument("DiskDecoder: whitening std must be > 0");
    }
}

std::vector<double> DiskDecoder::raw_params(const Latent& z) const {
    if (z.size() != latent_dim()) throw std::invalid_argument("DiskDecoder: latent dim mismatch");
    std::vector<double> raw(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) raw[j] = whiten_mean[j] + whiten_std[j] * z[j];
    return raw;
}

Latent DiskDecoder::latent_from_raw(const std::vector<double>& raw) const {
    if (raw.size() != latent_dim()) throw std::invalid_argument("DiskDecoder: raw dim mismatch");
    Latent z(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) z[j] = (raw[j] - whiten_mean[j]) / whiten_std[j];
    return z;
}

namespace {

struct SoftminEval {
    std::vector<double> w;      // softmin weights
    std::vector<Vec2> u;        // unit directions (x - c_k) / |x - c_k|
    std::vector<double> dist;   // |x - c_k|
    std::vector<double> rho;    // raw rho_k
    double value = 0.0;
};

SoftminEval eval_softmin(const DiskDecoder& dec, const Latent& z, Vec2 x) {
    const std::vector<double> raw = dec.raw_params(z);
    SoftminEval ev;
    const std::size_t K = dec.K;
    ev.w.resize(K);
    ev.u.resize(K);
    ev.dist.resize(K);
    ev.rho.resize(K);
    std::vector<double> f(K);
    double fmin = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const Vec2 c{raw[3 * k], raw[3 * k + 1]};
        ev.rho[k] = raw[3 * k + 2];
        const Vec2 d = x - c;
        ev.dist[k] = norm(d);
        ev.u[k] = ev.dist[k] > 1e-300 ? (1.0 / ev.dist[k]) * d : Vec2{0.0, 0.0};
        f[k] = ev.dist[k] - softplus(ev.rho[k]);
        if (k == 0 || f[k] < fmin) fmin = f[k];
    }
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        ev.w[k] = std::exp(-(f[k] - fmin) / dec.tau);
        s += ev.w[k];
    }
    for (double& w : ev.w) w /= s;
    ev.value = fmin - dec.tau * std::log(s);
    return ev;
}

}  // namespace

double decode(const DiskDecoder& dec, const Latent& z, Vec2 x) {
    return eval_softmin(dec, z, x).value;
}

Vec2 decode_grad_x(const DiskDecoder& dec, const Latent& z, Vec2 x) {
    const SoftminEval ev = eval_softmin(dec, z, x);
    Vec2 g{0.0, 0.0};
    for (std::size_t k = 0; k < dec.K; ++k) g = g + ev.w[k] * ev.u[k];
    return g;
}

DecodeEval decode_eval(const DiskDecoder& dec, const Latent& z, Vec2 x) {
    const SoftminEval ev = eval_softmin(dec, z, x);
    Vec2 g{0.0, 0.0};
    for (std::size_t k = 0; k < dec.K; ++k) g = g + ev.w[k] * ev.u[k];
    return {ev.value, g};
}

std::vector<double> decode_grad_z(const DiskDecoder& dec, const Latent& z, Vec2 x) {
    std::vector<double> g(dec.latent_dim(), 0.0);
    accumulate_grad_z(dec, z, x, 1.0, g);
    return g;
}

void accumulate_grad_z(const DiskDecoder& dec, const Latent& z, Vec2 x, double c,
                       std::vector<double>& acc) {
    const SoftminEval ev = eval_softmin(dec, z, x);
    for (std::size_t k = 0; k < dec.K; ++k) {
        // dD/d c_k = -w_k u_k, dD/d rho_k = -w_k sigmoid(rho_k)
        acc[3 * k] += c * -ev.w[k] * ev.u[k].x * dec.whiten_std[3 * k];
        acc[3 * k + 1] += c * -ev.w[k] * ev.u[k].y * dec.whiten_std[3 * k + 1];
        acc[3 * k + 2] += c * -ev.w[k] * sigmoid(ev.rho[k]) * dec.whiten_std[3 * k + 2];
    }
}

std::vector<double> decode_grad_x_vjp_z(const DiskDecoder& dec, const Latent& z, Vec2 x, Vec2 h) {
    const SoftminEval ev = eval_softmin(dec, z, x);
    Vec2 g{0.0, 0.0};
    for (std::size_t k = 0; k < dec.K; ++k) g = g + ev.w[k] * ev.u[k];
    const double A = dot(h, g);
    std::vector<double> out(dec.latent_dim(), 0.0);
    for (std::size_t k = 0; k < dec.K; ++k) {
        const double hu = dot(h, ev.u[k]);
        const double s1 = ev.w[k] / dec.tau * (A - hu);
        // center part: s1 * (-u_k) - w_k (h - u_k (u_k . h)) / dist_k
        double cx = -s1 * ev.u[k].x;
        double cy = -s1 * ev.u[k].y;
        if (ev.dist[k] > 1e-300) {
            cx -= ev.w[k] * (h.x - ev.u[k].x * hu) / ev.dist[k];
            cy -= ev.w[k] * (h.y - ev.u[k].y * hu) / ev.dist[k];
        }
        out[3 * k] = cx * dec.whiten_std[3 * k];
        out[3 * k + 1] = cy * dec.whiten_std[3 * k + 1];
        out[3 * k + 2] = -s1 * sigmoid(ev.rho[k]) * dec.whiten_std[3 * k + 2];
    }
    return out;
}

std::size_t Contour::vertex_count() const {
    std::size_t n = 0;
    for (const Loop& l : loops) n += l.vertices.size();
    return n;
}

double Contour::total_length() const {
    double len = 0.0;
    for (const Loop& l : loops) {
        const std::size_t n = l.vertices.size();
        if (n < 2) continue;
        const std::size_t edges = l.closed ? n : n - 1;
        for (std::size_t i = 0; i < edges; ++i) {
            len += norm(l.vertices[(i + 1) % n] - l.vertices[i]);
        }
    }
    return len;
}

namespace {

// Directed marching-squares segments per case, encoded as edge index pairs
// (0 bottom, 1 right, 2 top, 3 left); interior (D < 0) stays on the left.
struct CellSegment {
    int from;
    int to;
};

void cell_segments(int corner_case, bool center_inside, CellSegment out[2], int& count) {
    count = 0;
    auto add = [&](int a, int b) { out[count++] = {a, b}; };
    switch (corner_case) {
        case 0:
        case 15: break;
        case 1: add(0, 3); break;
        case 2: add(1, 0); break;
        case 3: add(1, 3); break;
        case 4: add(2, 1); break;
        case 5:
            if (center_inside) {
                add(0, 1);
                add(2, 3);
            } else {
                add(0, 3);
                add(2, 1);
            }
            break;
        case 6: add(2, 0); break;
        case 7: add(2, 3); break;
        case 8: add(3, 2); break;
        case 9: add(0, 2); break;
        case 10:
            if (center_inside) {
                add(3, 0);
                add(1, 2);
            } else {
                add(1, 0);
                add(3, 2);
            }
            break;
        case 11: add(1, 2); break;
        case 12: add(3, 1); break;
        case 13: add(0, 1); break;
        case 14: add(3, 0); break;
        default: break;
    }
}

}  // namespace

Contour extract_contour(const DiskDecoder& dec, const Latent& z, int resolution) {
    if (resolution < 16) throw std::invalid_argument("extract_contour: resolution must be >= 16");
    const int n = resolution;
    const double h = 2.0 / n;
    auto node_x = [&](int i) { return -1.0 + h * i; };

    std::vector<double> values(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            values[static_cast<std::size_t>(j) * (n + 1) + i] = decode(dec, z, {node_x(i), node_x(j)});
        }
    }
    auto val = [&](int i, int j) { return values[static_cast<std::size_t>(j) * (n + 1) + i]; };
    auto inside = [&](int i, int j) { return val(i, j) < 0.0; };

    // One vertex per crossed grid edge, keyed by (node, axis).
    std::map<std::pair<long, int>, int> edge_vertex;
    std::vector<Vec2> vertices;
    auto edge_key = [&](int i, int j, int axis) {
        return std::make_pair(static_cast<long>(j) * (n + 1) + i, axis);
    };
    auto vertex_on_edge = [&](int i, int j, int axis) {
        const auto key = edge_key(i, j, axis);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        const double va = val(i, j);
        const double vb = axis == 0 ? val(i + 1, j) : val(i, j + 1);
        double t = va / (va - vb);
        t = std::clamp(t, 0.0, 1.0);
        Vec2 p{node_x(i), node_x(j)};
        if (axis == 0) {
            p.x += t * h;
        } else {
            p.y += t * h;
        }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(p);
        edge_vertex.emplace(key, id);
        return id;
    };

    std::map<int, int> next;  // vertex -> vertex along the oriented contour
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int c = (inside(i, j) ? 1 : 0) | (inside(i + 1, j) ? 2 : 0) |
                          (inside(i + 1, j + 1) ? 4 : 0) | (inside(i, j + 1) ? 8 : 0);
            if (c == 0 || c == 15) continue;
            bool center_inside = false;
            if (c == 5 || c == 10) {
                center_inside = decode(dec, z, {node_x(i) + 0.5 * h, node_x(j) + 0.5 * h}) < 0.0;
            }
            CellSegment segs[2];
            int count = 0;
            cell_segments(c, center_inside, segs, count);
            auto edge_vtx = [&](int e) {
                switch (e) {
                    case 0: return vertex_on_edge(i, j, 0);
                    case 1: return vertex_on_edge(i + 1, j, 1);
                    case 2: return vertex_on_edge(i, j + 1, 0);
                    default: return vertex_on_edge(i, j, 1);
                }
            };
            for (int s = 0; s < count; ++s) {
                next[edge_vtx(segs[s].from)] = edge_vtx(segs[s].to);
            }
        }
    }

    Contour contour;
    std::vector<bool> used(vertices.size(), false);
    for (const auto& [start, unused_to] : next) {
        (void)unused_to;
        if (used[start]) continue;
        Contour::Loop loop;
        int cur = start;
        bool closed = false;
        while (!used[cur]) {
            used[cur] = true;
            loop.vertices.push_back(vertices[cur]);
            auto it = next.find(cur);
            if (it == next.end()) break;  // chain hits the domain boundary
            cur = it->second;
            if (cur == start) {
                closed = true;
                break;
            }
        }
        loop.closed = closed;
        if (loop.vertices.size() >= (closed ? 3u : 2u)) contour.loops.push_back(std::move(loop));
    }
    return contour;
}

Contour contour_normals(const DiskDecoder& dec, const Latent& z, Contour contour) {
    for (Contour::Loop& loop : contour.loops) {
        loop.normals.resize(loop.vertices.size());
        for (std::size_t i = 0; i < loop.vertices.size(); ++i) {
            const Vec2 g = decode_grad_x(dec, z, loop.vertices[i]);
            const double gn = norm(g);
            if (gn < 1e-12) {
                throw std::runtime_error("contour_normals: vanishing SDF gradient at contour vertex");
            }
            loop.normals[i] = (1.0 / gn) * g;
        }
    }
    return contour;
}

Latent encode_init(const DiskDecoder& dec, const PointCloud2& P, Rng& rng) {
    const std::size_t K = dec.K;
    if (P.size() < K) throw std::invalid_argument("encode_init: fewer points than disks");
    const std::vector<Vec2>& pts = P.points;

    // k-means++ seeding
    std::vector<Vec2> centers;
    centers.reserve(K);
    centers.push_back(pts[rng.uniform_index(pts.size())]);
    std::vector<double> d2(pts.size());
    while (centers.size() < K) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (const Vec2& c : centers) {
                const Vec2 diff = pts[i] - c;
                best = std::min(best, dot(diff, diff));
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(pts[rng.uniform_index(pts.size())]);
            continue;
        }
        double u = rng.uniform() * total;
        std::size_t pick = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(pts[pick]);
    }

    // Lloyd iterations
    std::vector<int> assign(pts.size(), -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int best = 0;
            double bestd = std::numeric_limits<double>::max();
            for (std::size_t k = 0; k < K; ++k) {
                const Vec2 diff = pts[i] - centers[k];
                const double dd = dot(diff, diff);
                if (dd < bestd) {
                    bestd = dd;
                    best = static_cast<int>(k);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<Vec2> sums(K, {0.0, 0.0});
        std::vector<std::size_t> counts(K, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sums[assign[i]] = sums[assign[i]] + pts[i];
            ++counts[assign[i]];
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (counts[k] == 0) {
                // Recapture an empty cluster at the point farthest from its center.
                std::size_t far = 0;
                double fard = -1.0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const Vec2 diff = pts[i] - centers[assign[i]];
                    const double dd = dot(diff, diff);
                    if (dd > fard) {
                        fard = dd;
                        far = i;
                    }
                }
                centers[k] = pts[far];
                changed = true;
            } else {
                centers[k] = (1.0 / static_cast<double>(counts[k])) * sums[k];
            }
        }
        if (!changed) break;
    }

    std::vector<double> radii(K, 0.0);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        radii[assign[i]] += norm(pts[i] - centers[assign[i]]);
        ++counts[assign[i]];
    }
    for (std::size_t k = 0; k < K; ++k) {
        radii[k] = counts[k] > 0 ? radii[k] / static_cast<double>(counts[k]) : 0.0;
        radii[k] = std::max(radii[k], 0.02);  // keep softplus_inv finite
    }

    // Canonical disk order so latents are comparable across runs.
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (centers[a].x != centers[b].x) return centers[a].x < centers[b].x;
        return centers[a].y < centers[b].y;
    });

    std::vector<double> raw(3 * K);
    for (std::size_t k = 0; k < K; ++k) {
        raw[3 * k] = centers[order[k]].x;
        raw[3 * k + 1] = centers[order[k]].y;
        raw[3 * k + 2] = softplus_inv(radii[order[k]]);
    }
    return dec.latent_from_raw(raw);
}

void save_latent(const std::string& path, const DiskDecoder& dec, const Latent& z) {
    if (z.size() != dec.latent_dim()) throw std::invalid_argument("save_latent: dim mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_latent: cannot open " + path);
    out << "gg-latent v1\ndim " << z.size() << "\n";
    char buf[64];
    out << "z";
    for (double v : z) {
        std::snprintf(buf, sizeof(buf), " %a", v);
        out << buf;
    }
    out << "\nraw";
    for (double v : dec.raw_params(z)) {
        std::snprintf(buf, sizeof(buf), " %a", v);
        out << buf;
    }
    out << "\n";
    if (!out) throw std::runtime_error("save_latent: write failed for " + path);
}

Latent load_latent(const std::string& path, const DiskDecoder& dec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_latent: cannot open " + path);
    std::string magic, version, key;
    std::size_t d = 0;
    in >> magic >> version >> key >> d;
    if (magic != "gg-latent" || version != "v1" || key != "dim") {
        throw std::runtime_error("load_latent: bad header");
    }
    if (d != dec.latent_dim()) throw std::runtime_error("load_latent: dim mismatch");
    in >> key;
    if (key != "z") throw std::runtime_error("load_latent: missing z row");
    Latent z(d);
    for (double& v : z) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("load_latent: truncated file");
        v = std::strtod(tok.c_str(), nullptr);
    }
    return z;
}

}  // namespace gg
