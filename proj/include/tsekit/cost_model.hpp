#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsekit/attention.hpp"
#include "tsekit/descriptor.hpp"

namespace tsekit {

struct BlockCost {
    std::string name;
    std::string stage;
    std::int64_t buffer = 0;  // activation elements held before the rescale
    std::int64_t flops = 0;   // excitation MACs (N tiles x per-descriptor cost)
    std::int64_t params = 0;
};

struct CostReport {
    std::string network;
    std::string tile;
    std::string excite;
    std::int64_t buffer_elements = 0;
    std::int64_t attention_flops = 0;
    std::int64_t attention_params = 0;
    std::int64_t baseline_flops = 0;
    std::int64_t baseline_params = 0;
    std::int64_t total_flops = 0;   // baseline + attention
    std::int64_t total_params = 0;  // baseline + attention
    std::vector<BlockCost> blocks;
};

/// Minimum pipeline buffering of one attention block: the elements a
/// streaming accelerator must hold before the rescale multiply can start.
/// Full tiles (and fixed strips, whose single scale applies globally) stall
/// the whole h*w*c map; strip/patch tiles only their clipped tile.
std::int64_t block_buffer(const BlockShape& shape, const TileSpec& tile);

/// Excitation compute of one block, counted as multiply-accumulates of the
/// two bottleneck convs repeated once per tile (pooling adds, pointwise
/// activations and the rescale multiply are not counted). The bottleneck
/// width is the block's native ceil(c/r) for the Full tile — the unmodified
/// host network — and ceil(c/conf.reduction) for tiled analyses, matching a
/// drop-in tiled block that re-derives its width from the operating
/// channels. conf.reduction == 0 keeps the native width everywhere.
std::int64_t block_flops(const BlockShape& shape, const TileSpec& tile, const ExciteConfig& conf);

/// Weight + bias count of the block's excitation. Widths are the block's
/// native bottleneck scaled by the config ratio (reduction R halves the
/// ratio relative to the stock R=4, doubling the width); tiling never
/// changes the parameter count.
std::int64_t block_params(const BlockShape& shape, const ExciteConfig& conf);

/// Sum block costs over the whole network and add the baseline constants.
CostReport analyze_network(const NetworkDescriptor& desc, const TileSpec& tile,
                           const ExciteConfig& conf);

/// Aligned plain-text table: one summary row (Method / Params / MFLOPs /
/// Buffer) followed by the per-block breakdown.
std::string report_table(const CostReport& report);

/// JSON form of the report (schema "tse-cost/1").
std::string report_json_text(const CostReport& report);

}  // namespace tsekit
