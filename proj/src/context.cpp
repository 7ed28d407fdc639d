#include "tsekit/context.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tsekit {

namespace {

void require_single_sample(const Tensor4D& x, const char* op) {
    if (x.n != 1) {
        throw std::invalid_argument(std::string(op) + ": analysis runs on single tensors (n == 1), got n = " +
                                    std::to_string(x.n));
    }
}

DescriptorGrid grid_from_tensor(const Tensor4D& t) {
    DescriptorGrid g;
    g.tiles_h = t.h;
    g.tiles_w = t.w;
    g.c = t.c;
    g.values = t.data;  // n == 1, so layout already matches (c, th, tw)
    return g;
}

}  // namespace

std::vector<float> gap_descriptor(const Tensor4D& x) {
    require_single_sample(x, "gap_descriptor");
    std::vector<float> g(size_t(x.c));
    for (int ic = 0; ic < x.c; ++ic) {
        double acc = 0.0;
        for (int iy = 0; iy < x.h; ++iy) {
            for (int ix = 0; ix < x.w; ++ix) acc += x.at(0, ic, iy, ix);
        }
        g[size_t(ic)] = float(acc / (std::int64_t(x.h) * x.w));
    }
    return g;
}

DescriptorGrid tile_descriptors(const Tensor4D& x, const TileSpec& tile) {
    require_single_sample(x, "tile_descriptors");
    const auto [th, tw] = tile.tile_dims(x.h, x.w);
    return grid_from_tensor(avg_pool2d(x, th, tw));
}

DescriptorGrid tile_deltas(const Tensor4D& x, const TileSpec& tile) {
    DescriptorGrid grid = tile_descriptors(x, tile);
    const std::vector<float> g = gap_descriptor(x);
    for (int ic = 0; ic < grid.c; ++ic) {
        for (int ty = 0; ty < grid.tiles_h; ++ty) {
            for (int tx = 0; tx < grid.tiles_w; ++tx) {
                grid.values[size_t(grid.index(ic, ty, tx))] -= g[size_t(ic)];
            }
        }
    }
    return grid;
}

DescriptorGrid scale_vectors(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile) {
    require_single_sample(x, "scale_vectors");
    return grid_from_tensor(tse_scale_map(x, w, tile));
}

std::vector<double> descriptor_correlation(const DescriptorGrid& t, const std::vector<float>& g) {
    if (t.c != int(g.size())) {
        throw std::invalid_argument("descriptor_correlation: grid has " + std::to_string(t.c) +
                                    " channels, reference has " + std::to_string(g.size()));
    }
    if (t.c < 2) {
        throw std::invalid_argument("descriptor_correlation: needs at least 2 channels");
    }
    double g_mean = 0.0;
    for (float v : g) g_mean += v;
    g_mean /= double(t.c);
    double g_var = 0.0;
    for (float v : g) g_var += (v - g_mean) * (v - g_mean);
    if (g_var <= 0.0) {
        throw std::invalid_argument("descriptor_correlation: reference vector has zero variance");
    }
    std::vector<double> out;
    out.reserve(size_t(t.tiles()));
    for (int ty = 0; ty < t.tiles_h; ++ty) {
        for (int tx = 0; tx < t.tiles_w; ++tx) {
            double t_mean = 0.0;
            for (int ic = 0; ic < t.c; ++ic) t_mean += t.at(ic, ty, tx);
            t_mean /= double(t.c);
            double t_var = 0.0, cov = 0.0;
            for (int ic = 0; ic < t.c; ++ic) {
                const double dt = t.at(ic, ty, tx) - t_mean;
                const double dg = g[size_t(ic)] - g_mean;
                t_var += dt * dt;
                cov += dt * dg;
            }
            if (t_var <= 0.0) {
                throw std::invalid_argument("descriptor_correlation: tile (" + std::to_string(ty) +
                                            ", " + std::to_string(tx) +
                                            ") has zero variance across channels");
            }
            out.push_back(cov / std::sqrt(t_var * g_var));
        }
    }
    return out;
}

double mean_tile_correlation(const Tensor4D& x, const TileSpec& tile) {
    const auto corr = descriptor_correlation(tile_descriptors(x, tile), gap_descriptor(x));
    double acc = 0.0;
    for (double v : corr) acc += v;
    return acc / double(corr.size());
}

Tensor4D smooth_random_tensor(int c, int h, int w, std::uint64_t seed) {
    Tensor4D noise(1, c, h, w);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (float& v : noise.data) v = float(dist(rng));
    const int radius = std::max(1, h / 4) / 2;
    if (radius == 0) return noise;
    // Separable box blur with clipped windows (divides by in-bounds count).
    Tensor4D tmp(1, c, h, w);
    for (int ic = 0; ic < c; ++ic) {
        for (int iy = 0; iy < h; ++iy) {
            for (int ix = 0; ix < w; ++ix) {
                const int x0 = std::max(0, ix - radius);
                const int x1 = std::min(w - 1, ix + radius);
                double acc = 0.0;
                for (int j = x0; j <= x1; ++j) acc += noise.at(0, ic, iy, j);
                tmp.at(0, ic, iy, ix) = float(acc / (x1 - x0 + 1));
            }
        }
    }
    Tensor4D out(1, c, h, w);
    for (int ic = 0; ic < c; ++ic) {
        for (int iy = 0; iy < h; ++iy) {
            const int y0 = std::max(0, iy - radius);
            const int y1 = std::min(h - 1, iy + radius);
            for (int ix = 0; ix < w; ++ix) {
                double acc = 0.0;
                for (int j = y0; j <= y1; ++j) acc += tmp.at(0, ic, j, ix);
                out.at(0, ic, iy, ix) = float(acc / (y1 - y0 + 1));
            }
        }
    }
    return out;
}

DeltaStats delta_scaling_experiment(double sigma, const std::vector<int>& tile_sizes, int trials,
                                    std::uint64_t seed) {
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw std::invalid_argument("delta_scaling_experiment: sigma must be finite and >= 0");
    }
    if (trials < 100) {
        throw std::invalid_argument("delta_scaling_experiment: needs at least 100 trials");
    }
    std::vector<int> sizes = tile_sizes;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.size() < 4 || sizes.front() < 1) {
        throw std::invalid_argument("delta_scaling_experiment: needs >= 4 distinct positive tile sizes");
    }

    constexpr int kTilesPerTrial = 8;
    DeltaStats stats;
    stats.sigma = sigma;
    stats.tile_sizes = sizes;
    for (size_t si = 0; si < sizes.size(); ++si) {
        const int points = sizes[si];
        // Per-size derived seed so each size's trials are independent streams.
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (si + 1));
        std::normal_distribution<double> dist(0.0, sigma > 0.0 ? sigma : 1.0);
        double sq_acc = 0.0;
        std::int64_t count = 0;
        for (int trial = 0; trial < trials; ++trial) {
            // One strip per tile: a (tiles x points) map tiled by single rows.
            Tensor4D x(1, 1, kTilesPerTrial, points);
            if (sigma > 0.0) {
                for (float& v : x.data) v = float(dist(rng));
            }
            const DescriptorGrid deltas = tile_deltas(x, TileSpec::strip_rows(1));
            for (float d : deltas.values) {
                sq_acc += double(d) * d;
                ++count;
            }
        }
        stats.delta_std.push_back(std::sqrt(sq_acc / double(count)));
    }

    // Least-squares slope of log std(delta) against log n.
    if (sigma == 0.0) {
        stats.slope = 0.0;
        return stats;
    }
    double mx = 0.0, my = 0.0;
    const size_t m = sizes.size();
    for (size_t i = 0; i < m; ++i) {
        mx += std::log(double(sizes[i]));
        my += std::log(stats.delta_std[i]);
    }
    mx /= double(m);
    my /= double(m);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double dx = std::log(double(sizes[i])) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(stats.delta_std[i]) - my);
    }
    stats.slope = sxy / sxx;
    return stats;
}

}  // namespace tsekit
