#include "tsekit/descriptor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tsekit {

namespace {

constexpr const char* kSchema = "tse-desc/1";

using nlohmann::json;

std::int64_t require_int(const json& node, const std::string& path, std::int64_t min_value) {
    if (!node.is_number_integer()) {
        throw ValidationError(path + ": expected an integer");
    }
    const std::int64_t v = node.get<std::int64_t>();
    if (v < min_value) {
        throw ValidationError(path + ": value " + std::to_string(v) + " below minimum " +
                              std::to_string(min_value));
    }
    return v;
}

std::string require_string(const json& node, const std::string& path) {
    if (!node.is_string() || node.get<std::string>().empty()) {
        throw ValidationError(path + ": expected a non-empty string");
    }
    return node.get<std::string>();
}

const json& require_field(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(path + "." + key + ": missing field");
    }
    return *it;
}

}  // namespace

void validate_descriptor(const NetworkDescriptor& desc) {
    if (desc.name.empty()) throw ValidationError("name: expected a non-empty string");
    if (desc.input_h < 1 || desc.input_w < 1) {
        throw ValidationError("input: dims must be >= 1");
    }
    if (desc.baseline_flops < 0) throw ValidationError("baseline_flops: must be non-negative");
    if (desc.baseline_params < 0) throw ValidationError("baseline_params: must be non-negative");
    if (desc.blocks.empty()) throw ValidationError("blocks: at least one attention block required");
    std::vector<std::string> names;
    for (size_t i = 0; i < desc.blocks.size(); ++i) {
        const BlockShape& b = desc.blocks[i];
        const std::string path = "blocks[" + std::to_string(i) + "]";
        if (b.name.empty()) throw ValidationError(path + ".name: expected a non-empty string");
        if (b.h < 1) throw ValidationError(path + ".h: must be >= 1 (block '" + b.name + "')");
        if (b.w < 1) throw ValidationError(path + ".w: must be >= 1 (block '" + b.name + "')");
        if (b.c < 1) throw ValidationError(path + ".c: must be >= 1 (block '" + b.name + "')");
        if (b.r < 1) throw ValidationError(path + ".r: must be >= 1 (block '" + b.name + "')");
        names.push_back(b.name);
    }
    std::sort(names.begin(), names.end());
    for (size_t i = 1; i < names.size(); ++i) {
        if (names[i] == names[i - 1]) {
            throw ValidationError("blocks: duplicate block name '" + names[i] + "'");
        }
    }
}

NetworkDescriptor descriptor_from_json_text(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw ValidationError("descriptor: not a JSON object");
    }
    const std::string schema = require_string(require_field(root, "schema", "descriptor"), "schema");
    if (schema != kSchema) {
        throw ValidationError("schema: expected '" + std::string(kSchema) + "', got '" + schema + "'");
    }
    NetworkDescriptor desc;
    desc.name = require_string(require_field(root, "name", "descriptor"), "name");
    const json& input = require_field(root, "input", "descriptor");
    if (!input.is_array() || input.size() != 2) {
        throw ValidationError("input: expected [h, w]");
    }
    desc.input_h = int(require_int(input[0], "input[0]", 1));
    desc.input_w = int(require_int(input[1], "input[1]", 1));
    desc.baseline_flops = require_int(require_field(root, "baseline_flops", "descriptor"),
                                      "baseline_flops", 0);
    desc.baseline_params = require_int(require_field(root, "baseline_params", "descriptor"),
                                       "baseline_params", 0);
    const json& blocks = require_field(root, "blocks", "descriptor");
    if (!blocks.is_array()) throw ValidationError("blocks: expected an array");
    for (size_t i = 0; i < blocks.size(); ++i) {
        const std::string path = "blocks[" + std::to_string(i) + "]";
        const json& jb = blocks[i];
        if (!jb.is_object()) throw ValidationError(path + ": expected an object");
        BlockShape b;
        b.name = require_string(require_field(jb, "name", path), path + ".name");
        b.stage = require_string(require_field(jb, "stage", path), path + ".stage");
        b.h = int(require_int(require_field(jb, "h", path), path + ".h", 1));
        b.w = int(require_int(require_field(jb, "w", path), path + ".w", 1));
        b.c = int(require_int(require_field(jb, "c", path), path + ".c", 1));
        b.r = int(require_int(require_field(jb, "r", path), path + ".r", 1));
        desc.blocks.push_back(std::move(b));
    }
    validate_descriptor(desc);
    return desc;
}

NetworkDescriptor load_descriptor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open descriptor file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw std::ios_base::failure("failed reading descriptor file: " + path);
    }
    return descriptor_from_json_text(buf.str());
}

std::string descriptor_to_json_text(const NetworkDescriptor& desc) {
    validate_descriptor(desc);
    json root;
    root["schema"] = kSchema;
    root["name"] = desc.name;
    root["input"] = json::array({desc.input_h, desc.input_w});
    root["baseline_flops"] = desc.baseline_flops;
    root["baseline_params"] = desc.baseline_params;
    json blocks = json::array();
    for (const BlockShape& b : desc.blocks) {
        json jb;
        jb["name"] = b.name;
        jb["stage"] = b.stage;
        jb["h"] = b.h;
        jb["w"] = b.w;
        jb["c"] = b.c;
        jb["r"] = b.r;
        blocks.push_back(std::move(jb));
    }
    root["blocks"] = std::move(blocks);
    return root.dump(2) + "\n";
}

void save_descriptor(const NetworkDescriptor& desc, const std::string& path) {
    const std::string text = descriptor_to_json_text(desc);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::ios_base::failure("cannot open descriptor file for writing: " + path);
    }
    out << text;
    if (!out.good()) {
        throw std::ios_base::failure("failed writing descriptor file: " + path);
    }
}

}  // namespace tsekit
