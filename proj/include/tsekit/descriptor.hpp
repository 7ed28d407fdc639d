#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsekit {

/// Input shape of one attention block: spatial dims, channels and the
/// block's native bottleneck ratio (reduced width = ceil(c / r)).
struct BlockShape {
    std::string name;
    std::string stage;
    int h = 0;
    int w = 0;
    int c = 0;
    int r = 0;
};

/// Attention-block inventory of a network plus its baseline (attention-free)
/// cost constants.
struct NetworkDescriptor {
    std::string name;
    int input_h = 0;
    int input_w = 0;
    std::int64_t baseline_flops = 0;
    std::int64_t baseline_params = 0;
    std::vector<BlockShape> blocks;
};

/// Thrown by descriptor validation; message carries the offending field
/// path, e.g. "blocks[3].h".
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Checks dims >= 1, r >= 1, non-negative baselines and unique block names.
void validate_descriptor(const NetworkDescriptor& desc);

/// Parse + validate a descriptor JSON file (schema "tse-desc/1").
NetworkDescriptor load_descriptor(const std::string& path);
NetworkDescriptor descriptor_from_json_text(const std::string& text);

/// Canonical JSON (sorted keys, two-space indent); two saves of the same
/// descriptor are byte-identical. Refuses invalid descriptors.
void save_descriptor(const NetworkDescriptor& desc, const std::string& path);
std::string descriptor_to_json_text(const NetworkDescriptor& desc);

}  // namespace tsekit
