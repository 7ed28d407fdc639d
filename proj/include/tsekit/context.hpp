#pragma once

#include <cstdint>
#include <vector>

#include "tsekit/attention.hpp"
#include "tsekit/tensor.hpp"

namespace tsekit {

/// Per-tile per-channel statistics of a tiling: one value per (channel,
/// tile row, tile col). Analysis functions operate on single-sample
/// tensors (n == 1).
struct DescriptorGrid {
    int tiles_h = 0;
    int tiles_w = 0;
    int c = 0;
    std::vector<float> values;  // (c, tiles_h, tiles_w) row-major

    std::int64_t index(int ic, int ty, int tx) const {
        return (std::int64_t(ic) * tiles_h + ty) * tiles_w + tx;
    }
    float at(int ic, int ty, int tx) const { return values[size_t(index(ic, ty, tx))]; }
    int tiles() const { return tiles_h * tiles_w; }
};

/// Global average pool: one mean per channel over all spatial positions.
std::vector<float> gap_descriptor(const Tensor4D& x);

/// Per-tile channel means of the tiling.
DescriptorGrid tile_descriptors(const Tensor4D& x, const TileSpec& tile);

/// Per-tile deviation from the global mean: delta[j][i] = tile mean minus
/// channel mean. The tile-size-weighted sum of deltas is zero per channel.
DescriptorGrid tile_deltas(const Tensor4D& x, const TileSpec& tile);

/// Per-tile excitation outputs (the scale map of tse_forward before
/// broadcasting), one scale vector per tile.
DescriptorGrid scale_vectors(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile);

/// Pearson correlation across channels between each tile's descriptor and
/// the global one. Throws std::invalid_argument when either side has zero
/// variance across channels.
std::vector<double> descriptor_correlation(const DescriptorGrid& t, const std::vector<float>& g);

/// Mean per-tile squeeze correlation of one tensor under one tiling.
double mean_tile_correlation(const Tensor4D& x, const TileSpec& tile);

/// I.i.d. noise passed through a box blur of width ~h/4, a stand-in for a
/// feature map with spatial structure. Reproducible per seed.
Tensor4D smooth_random_tensor(int c, int h, int w, std::uint64_t seed);

/// Measured scaling of the tile-mean deviation with tile size.
struct DeltaStats {
    double sigma = 0.0;               // std of the generated activations
    std::vector<int> tile_sizes;      // points per tile (n)
    std::vector<double> delta_std;    // measured std of delta per n
    double slope = 0.0;               // least-squares slope of log std vs log n
};

/// Monte-Carlo check that the tile-mean deviation shrinks like n^(-1/2):
/// draws i.i.d. activations with the given std, splits them into tiles of
/// each size, measures std(delta) and fits the log-log slope. Requires
/// trials >= 100 and at least 4 distinct tile sizes.
DeltaStats delta_scaling_experiment(double sigma, const std::vector<int>& tile_sizes, int trials,
                                    std::uint64_t seed);

}  // namespace tsekit
