#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "tsekit/tensor.hpp"

namespace tsekit {

enum class TileKind { Full, StripRows, StripCols, Patch, FixedStrip };

/// Where a fixed strip sits. Upper/Middle strips of height k resolve their
/// row range against the tensor height at apply time; Explicit carries the
/// range directly.
enum class FixedAnchor { Explicit, Upper, Middle };

/// A spatial tiling strategy. Strip and patch tiles are clipped to the
/// tensor, so e.g. strip_rows(9) on a 7-row tensor degenerates to one tile.
struct TileSpec {
    TileKind kind = TileKind::Full;
    int k = 0;                                   // unused for Full/FixedStrip(Explicit)
    FixedAnchor anchor = FixedAnchor::Explicit;  // FixedStrip only
    int row_start = 0;
    int row_end = 0;

    static TileSpec full();
    static TileSpec strip_rows(int k);
    static TileSpec strip_cols(int k);
    static TileSpec patch(int k);
    static TileSpec fixed_strip(int row_start, int row_end);
    static TileSpec fixed_upper(int k);
    static TileSpec fixed_middle(int k);

    /// Pooling kernel (tile height, tile width) for a tensor of the given
    /// spatial size. Not meaningful for FixedStrip.
    std::pair<int, int> tile_dims(int h, int w) const;

    /// Row range [start, end) of a fixed strip on an h-row tensor.
    std::pair<int, int> strip_rows_range(int h) const;

    std::string to_string() const;
};

/// Number of scale vectors the tiling produces on an h x w tensor:
/// ceil(h/th) * ceil(w/tw). Full and FixedStrip yield 1.
long num_tiles(int h, int w, const TileSpec& tile);

/// Grammar: "full" | "strip-rows:K" | "strip-cols:K" | "patch:K"
///          | "fixed:upper:K" | "fixed:middle:K"
TileSpec parse_tile_spec(const std::string& text);

/// Excitation hyper-parameters: bottleneck reduction ratio and conv kernel.
/// reduction 0 means "native" (defer to the per-block ratio of a network
/// descriptor); kernel (1,1) reproduces the original excitation.
struct ExciteConfig {
    int reduction = 4;
    int kh = 1;
    int kw = 1;
};

/// Grammar: "cKHxKW:rR", e.g. "c1x1:r4", "c3x1:r2". Either part may be
/// omitted ("c3x1", "r2").
ExciteConfig parse_excite_config(const std::string& text);

/// The two excitation layers: reduce (C -> C_r) then expand (C_r -> C),
/// with biases (zero by default).
struct ExciteWeights {
    Conv2d reduce;
    Conv2d expand;

    int channels() const { return reduce.c_in; }
    int reduced_channels() const { return reduce.c_out; }
    std::pair<int, int> kernel() const { return {reduce.kh, reduce.kw}; }
    std::int64_t param_count() const { return reduce.param_count() + expand.param_count(); }
    void validate() const;

    static ExciteWeights zeros(int channels, const ExciteConfig& conf = {});
    /// Fan-in scaled uniform init, reproducible per seed.
    static ExciteWeights random(int channels, const ExciteConfig& conf, std::uint64_t seed);
};

/// Classic channel attention: per-channel global mean, two-layer bottleneck
/// with sigmoid, per-channel rescale.
Tensor4D se_forward(const Tensor4D& x, const ExciteWeights& w);

/// Per-tile scale map (pre-broadcast): excitation applied to the pooled
/// descriptor grid of the tiling. This is exactly the map tse_forward
/// broadcasts, so the two agree bit-for-bit.
Tensor4D tse_scale_map(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile);

/// Tiled channel attention: pool by tile, excite, broadcast each tile's
/// scale vector back over the tile, multiply. FixedStrip tiles are handled
/// by fixed_strip_forward.
Tensor4D tse_forward(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile,
                     const ExciteConfig& conf = {});

/// Attention from a single fixed row strip: the descriptor is the mean over
/// rows [row_start, row_end) x all columns and the resulting scale vector
/// is applied to the whole tensor.
Tensor4D fixed_strip_forward(const Tensor4D& x, const ExciteWeights& w, const TileSpec& strip);

/// A tiled block bound to specific weights, e.g. produced by transplant().
struct TseBlock {
    ExciteWeights weights;
    TileSpec tile;

    Tensor4D forward(const Tensor4D& x) const;
};

/// Reuse trained SE weights unchanged under a new tiling. Only (1,1)
/// kernels transplant; anything else has no SE counterpart.
TseBlock transplant(const ExciteWeights& se_weights, const TileSpec& tile);

}  // namespace tsekit
