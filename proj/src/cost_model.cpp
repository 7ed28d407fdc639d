#include "tsekit/cost_model.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsekit {

namespace {

constexpr int kStockReduction = 4;  // ratio the shipped descriptors are calibrated at

void check_shape(const BlockShape& shape) {
    if (shape.h < 1 || shape.w < 1 || shape.c < 1 || shape.r < 1) {
        throw std::invalid_argument("block '" + shape.name + "': dims and r must be >= 1");
    }
}

int native_width(const BlockShape& shape) { return std::max(1, ceil_div(shape.c, shape.r)); }

std::int64_t excite_macs(int channels, int width, const ExciteConfig& conf) {
    const std::int64_t taps = std::int64_t(conf.kh) * conf.kw;
    return taps * channels * width + taps * width * channels;
}

std::string format_millions(std::int64_t v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, double(v) / 1e6);
    return std::string(buf);
}

}  // namespace

std::int64_t block_buffer(const BlockShape& shape, const TileSpec& tile) {
    check_shape(shape);
    if (tile.kind == TileKind::Full || tile.kind == TileKind::FixedStrip) {
        return std::int64_t(shape.h) * shape.w * shape.c;
    }
    const auto [th, tw] = tile.tile_dims(shape.h, shape.w);
    return std::int64_t(th) * tw * shape.c;
}

std::int64_t block_flops(const BlockShape& shape, const TileSpec& tile, const ExciteConfig& conf) {
    check_shape(shape);
    if (conf.reduction < 0 || conf.kh < 1 || conf.kw < 1) {
        throw std::invalid_argument("block_flops: invalid excite config");
    }
    const bool global_scale = tile.kind == TileKind::Full || tile.kind == TileKind::FixedStrip;
    const int width = (global_scale || conf.reduction == 0)
                          ? native_width(shape)
                          : std::max(1, ceil_div(shape.c, conf.reduction));
    const long tiles = global_scale ? 1 : num_tiles(shape.h, shape.w, tile);
    return std::int64_t(tiles) * excite_macs(shape.c, width, conf);
}

std::int64_t block_params(const BlockShape& shape, const ExciteConfig& conf) {
    check_shape(shape);
    if (conf.reduction < 0 || conf.kh < 1 || conf.kw < 1) {
        throw std::invalid_argument("block_params: invalid excite config");
    }
    const int base = native_width(shape);
    const int width = conf.reduction == 0
                          ? base
                          : std::max(1, ceil_div(base * kStockReduction, conf.reduction));
    const std::int64_t taps = std::int64_t(conf.kh) * conf.kw;
    return taps * shape.c * width + width + taps * width * shape.c + shape.c;
}

CostReport analyze_network(const NetworkDescriptor& desc, const TileSpec& tile,
                           const ExciteConfig& conf) {
    validate_descriptor(desc);
    CostReport report;
    report.network = desc.name;
    report.tile = tile.to_string();
    report.excite = "c" + std::to_string(conf.kh) + "x" + std::to_string(conf.kw) +
                    (conf.reduction > 0 ? ":r" + std::to_string(conf.reduction) : ":native");
    report.baseline_flops = desc.baseline_flops;
    report.baseline_params = desc.baseline_params;
    for (const BlockShape& b : desc.blocks) {
        BlockCost cost;
        cost.name = b.name;
        cost.stage = b.stage;
        cost.buffer = block_buffer(b, tile);
        cost.flops = block_flops(b, tile, conf);
        cost.params = block_params(b, conf);
        report.buffer_elements += cost.buffer;
        report.attention_flops += cost.flops;
        report.attention_params += cost.params;
        report.blocks.push_back(std::move(cost));
    }
    report.total_flops = report.baseline_flops + report.attention_flops;
    report.total_params = report.baseline_params + report.attention_params;
    return report;
}

std::string report_table(const CostReport& report) {
    std::ostringstream out;
    const std::string method = report.network + " " + report.tile + " " + report.excite;
    const size_t col = std::max<size_t>(34, method.size() + 2);
    out << "Method" << std::string(col - 6, ' ') << "Params    MFLOPs     Buffer\n";
    out << method << std::string(col - method.size(), ' ') << format_millions(report.total_params, 2)
        << "M     " << format_millions(report.total_flops, 2) << "    "
        << format_millions(report.buffer_elements, 2) << "M\n";
    out << "\n";
    out << "  block           stage     buffer      flops     params\n";
    for (const BlockCost& b : report.blocks) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-15s %-8s %9lld %10lld %10lld\n", b.name.c_str(),
                      b.stage.c_str(), (long long)b.buffer, (long long)b.flops, (long long)b.params);
        out << line;
    }
    char totals[200];
    std::snprintf(totals, sizeof totals,
                  "  %-15s %-8s %9lld %10lld %10lld\n", "total", "", (long long)report.buffer_elements,
                  (long long)report.attention_flops, (long long)report.attention_params);
    out << totals;
    return out.str();
}

std::string report_json_text(const CostReport& report) {
    nlohmann::json root;
    root["schema"] = "tse-cost/1";
    root["network"] = report.network;
    root["tile"] = report.tile;
    root["excite"] = report.excite;
    root["buffer_elements"] = report.buffer_elements;
    root["attention_flops"] = report.attention_flops;
    root["attention_params"] = report.attention_params;
    root["baseline_flops"] = report.baseline_flops;
    root["baseline_params"] = report.baseline_params;
    root["total_flops"] = report.total_flops;
    root["total_params"] = report.total_params;
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockCost& b : report.blocks) {
        nlohmann::json jb;
        jb["name"] = b.name;
        jb["stage"] = b.stage;
        jb["buffer"] = b.buffer;
        jb["flops"] = b.flops;
        jb["params"] = b.params;
        blocks.push_back(std::move(jb));
    }
    root["blocks"] = std::move(blocks);
    return root.dump(2) + "\n";
}

}  // namespace tsekit
