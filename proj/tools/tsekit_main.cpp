#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsekit/attention.hpp"
#include "tsekit/context.hpp"
#include "tsekit/cost_model.hpp"
#include "tsekit/descriptor.hpp"
#include "tsekit/tensor_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TSE_KIT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t p = text.find(',', start);
        if (p == std::string::npos) {
            if (start < text.size()) out.push_back(text.substr(start));
            break;
        }
        if (p > start) out.push_back(text.substr(start, p - start));
        start = p + 1;
    }
    return out;
}

int cmd_analyze(const std::string& descriptor_path, const std::string& tile_text,
                const std::string& conf_text, const std::string& format) {
    const tsekit::TileSpec tile = tsekit::parse_tile_spec(tile_text);
    const tsekit::ExciteConfig conf = tsekit::parse_excite_config(conf_text);
    const tsekit::NetworkDescriptor desc = tsekit::load_descriptor(descriptor_path);
    const tsekit::CostReport report = tsekit::analyze_network(desc, tile, conf);
    if (format == "json") {
        std::cout << tsekit::report_json_text(report);
    } else {
        std::cout << tsekit::report_table(report);
    }
    return kExitOk;
}

int cmd_forward(const std::string& input_path, const std::string& weights_path,
                const std::string& tile_text, const std::string& conf_text,
                const std::string& output_path) {
    const tsekit::TileSpec tile = tsekit::parse_tile_spec(tile_text);
    const tsekit::ExciteConfig conf = tsekit::parse_excite_config(conf_text);
    const tsekit::Tensor4D x = tsekit::read_tensor(input_path);
    const tsekit::ExciteWeights w = tsekit::read_weights(weights_path);
    if (x.c != w.channels()) {
        throw std::invalid_argument("channel mismatch: tensor is (" + std::to_string(x.n) + ", " +
                                    std::to_string(x.c) + ", " + std::to_string(x.h) + ", " +
                                    std::to_string(x.w) + "), weights expect " +
                                    std::to_string(w.channels()) + " channels");
    }
    if (w.reduce.kh != conf.kh || w.reduce.kw != conf.kw) {
        throw std::invalid_argument("kernel mismatch: weights are " + std::to_string(w.reduce.kh) +
                                    "x" + std::to_string(w.reduce.kw) + ", config says " +
                                    std::to_string(conf.kh) + "x" + std::to_string(conf.kw));
    }
    tsekit::Tensor4D y;
    if (tile.kind == tsekit::TileKind::FixedStrip) {
        y = tsekit::fixed_strip_forward(x, w, tile);
    } else {
        y = tsekit::tse_forward(x, w, tile, conf);
    }
    tsekit::write_tensor(y, output_path);
    return kExitOk;
}

int cmd_context(const std::optional<std::string>& input_path, bool synthetic,
                const std::string& tiles_text, std::uint64_t seed, int samples, int channels,
                int height, int width, bool delta_scaling, double sigma,
                const std::string& tile_sizes_text, int trials) {
    nlohmann::json root;
    root["schema"] = "tse-context/1";
    root["seed"] = seed;

    std::vector<tsekit::TileSpec> tiles;
    for (const std::string& t : split_list(tiles_text)) {
        tiles.push_back(tsekit::parse_tile_spec(t));
    }

    if (input_path || synthetic) {
        if (tiles.empty()) {
            throw std::invalid_argument("context: --tiles is required for correlation analysis");
        }
        std::vector<tsekit::Tensor4D> inputs;
        if (input_path) {
            inputs.push_back(tsekit::read_tensor(*input_path));
            if (inputs.back().n != 1) {
                throw std::invalid_argument("context: input tensor must have n == 1");
            }
        } else {
            for (int s = 0; s < samples; ++s) {
                inputs.push_back(tsekit::smooth_random_tensor(channels, height, width, seed + s));
            }
        }

        // Channels that are constant across space carry no tile-vs-global
        // signal; flag them instead of failing.
        nlohmann::json flagged = nlohmann::json::array();
        {
            const tsekit::Tensor4D& x0 = inputs.front();
            for (int ic = 0; ic < x0.c; ++ic) {
                float lo = x0.at(0, ic, 0, 0), hi = lo;
                for (int iy = 0; iy < x0.h; ++iy) {
                    for (int ix = 0; ix < x0.w; ++ix) {
                        lo = std::min(lo, x0.at(0, ic, iy, ix));
                        hi = std::max(hi, x0.at(0, ic, iy, ix));
                    }
                }
                if (lo == hi) flagged.push_back(ic);
            }
        }
        root["zero_variance_channels"] = std::move(flagged);

        nlohmann::json results = nlohmann::json::array();
        for (const tsekit::TileSpec& tile : tiles) {
            std::vector<double> per_tile;
            double mean_acc = 0.0;
            int usable = 0;
            for (const tsekit::Tensor4D& x : inputs) {
                try {
                    const auto corr = tsekit::descriptor_correlation(tsekit::tile_descriptors(x, tile),
                                                                     tsekit::gap_descriptor(x));
                    if (per_tile.size() < corr.size()) per_tile.resize(corr.size(), 0.0);
                    double acc = 0.0;
                    for (size_t i = 0; i < corr.size(); ++i) {
                        per_tile[i] += corr[i];
                        acc += corr[i];
                    }
                    mean_acc += acc / double(corr.size());
                    ++usable;
                } catch (const std::invalid_argument&) {
                    // degenerate sample, skip it
                }
            }
            nlohmann::json entry;
            entry["tile_spec"] = tile.to_string();
            entry["samples"] = usable;
            if (usable > 0) {
                for (double& v : per_tile) v /= double(usable);
                entry["per_tile_correlation"] = per_tile;
                entry["mean_correlation"] = mean_acc / double(usable);
            } else {
                entry["per_tile_correlation"] = nlohmann::json::array();
                entry["mean_correlation"] = nullptr;
            }
            results.push_back(std::move(entry));
        }
        root["results"] = std::move(results);
    }

    if (delta_scaling) {
        std::vector<int> sizes;
        for (const std::string& s : split_list(tile_sizes_text)) {
            sizes.push_back(std::stoi(s));
        }
        const tsekit::DeltaStats stats = tsekit::delta_scaling_experiment(sigma, sizes, trials, seed);
        nlohmann::json js;
        js["sigma"] = stats.sigma;
        js["n"] = stats.tile_sizes;
        js["std"] = stats.delta_std;
        js["slope"] = stats.slope;
        root["delta_stats"] = std::move(js);
    }

    std::cout << root.dump(2) << "\n";
    return kExitOk;
}

int cmd_descriptors(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::ios_base::failure("not a directory: " + dir);
    }
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    for (const std::string& p : paths) {
        const tsekit::NetworkDescriptor desc = tsekit::load_descriptor(p);
        const tsekit::CostReport full =
            tsekit::analyze_network(desc, tsekit::TileSpec::full(), tsekit::ExciteConfig{});
        std::printf("%-24s input %4dx%-4d blocks %3zu  full buffer %.2fM\n", desc.name.c_str(),
                    desc.input_h, desc.input_w, desc.blocks.size(),
                    double(full.buffer_elements) / 1e6);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SE/TSE channel attention toolkit: forward kernels, accelerator cost model and "
                 "tile-context analysis"};
    app.require_subcommand(1);

    // analyze
    std::string an_descriptor, an_tile = "full", an_conf = "c1x1:r4", an_format = "table";
    auto* analyze = app.add_subcommand("analyze", "Buffer/FLOPs/params report for a network");
    analyze->add_option("descriptor", an_descriptor, "network descriptor JSON")->required();
    analyze->add_option("--tile", an_tile, "tile spec (full, strip-rows:K, strip-cols:K, patch:K, fixed:upper:K, fixed:middle:K)");
    analyze->add_option("--conf", an_conf, "excite config, e.g. c1x1:r4");
    analyze->add_option("--format", an_format, "table | json")
        ->check(CLI::IsMember({"table", "json"}));

    // forward
    std::string fw_input, fw_weights, fw_tile = "full", fw_conf = "c1x1:r4", fw_output;
    auto* forward = app.add_subcommand("forward", "Run an attention block on a tensor file");
    forward->add_option("--input", fw_input, "input tensor (.tse)")->required();
    forward->add_option("--weights", fw_weights, "excitation weights file")->required();
    forward->add_option("--tile", fw_tile, "tile spec");
    forward->add_option("--conf", fw_conf, "excite config");
    forward->add_option("--output", fw_output, "output tensor path")->required();

    // context
    std::optional<std::string> cx_input;
    bool cx_synthetic = false, cx_delta = false;
    std::string cx_tiles = "strip-rows:1,strip-rows:7";
    std::optional<std::uint64_t> cx_seed;
    int cx_samples = 100, cx_channels = 8, cx_height = 28, cx_width = 28, cx_trials = 1000;
    double cx_sigma = 1.0;
    std::string cx_sizes = "16,64,256,1024";
    auto* context = app.add_subcommand("context", "Tile/global descriptor statistics");
    context->add_option("--input", cx_input, "tensor file to analyze");
    context->add_flag("--synthetic", cx_synthetic, "analyze generated smooth tensors");
    context->add_option("--tiles", cx_tiles, "comma-separated tile specs");
    context->add_option("--seed", cx_seed, "RNG seed (falls back to TSE_KIT_SEED, then 0)");
    context->add_option("--samples", cx_samples, "synthetic sample count")->check(CLI::PositiveNumber);
    context->add_option("--channels", cx_channels, "synthetic channels")->check(CLI::PositiveNumber);
    context->add_option("--height", cx_height, "synthetic height")->check(CLI::PositiveNumber);
    context->add_option("--width", cx_width, "synthetic width")->check(CLI::PositiveNumber);
    context->add_flag("--delta-scaling", cx_delta, "run the tile-size scaling experiment");
    context->add_option("--sigma", cx_sigma, "activation std for --delta-scaling");
    context->add_option("--tile-sizes", cx_sizes, "points per tile for --delta-scaling");
    context->add_option("--trials", cx_trials, "trials per tile size")->check(CLI::PositiveNumber);

    // descriptors
    std::string ds_dir = "data/descriptors";
    auto* descriptors = app.add_subcommand("descriptors", "List shipped network descriptors");
    descriptors->add_option("--dir", ds_dir, "descriptor directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (app.got_subcommand(analyze)) {
            return cmd_analyze(an_descriptor, an_tile, an_conf, an_format);
        }
        if (app.got_subcommand(forward)) {
            return cmd_forward(fw_input, fw_weights, fw_tile, fw_conf, fw_output);
        }
        if (app.got_subcommand(context)) {
            if (!cx_input && !cx_synthetic && !cx_delta) {
                throw std::invalid_argument("context: need --input, --synthetic or --delta-scaling");
            }
            return cmd_context(cx_input, cx_synthetic, cx_tiles, resolve_seed(cx_seed), cx_samples,
                               cx_channels, cx_height, cx_width, cx_delta, cx_sigma, cx_sizes,
                               cx_trials);
        }
        if (app.got_subcommand(descriptors)) {
            return cmd_descriptors(ds_dir);
        }
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const tsekit::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tsekit::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
