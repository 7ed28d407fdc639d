#include "tsekit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tsekit {

TileSpec TileSpec::full() { return TileSpec{}; }

TileSpec TileSpec::strip_rows(int k) {
    if (k <= 0) throw std::invalid_argument("strip_rows: k must be positive");
    TileSpec t;
    t.kind = TileKind::StripRows;
    t.k = k;
    return t;
}

TileSpec TileSpec::strip_cols(int k) {
    if (k <= 0) throw std::invalid_argument("strip_cols: k must be positive");
    TileSpec t;
    t.kind = TileKind::StripCols;
    t.k = k;
    return t;
}

TileSpec TileSpec::patch(int k) {
    if (k <= 0) throw std::invalid_argument("patch: k must be positive");
    TileSpec t;
    t.kind = TileKind::Patch;
    t.k = k;
    return t;
}

TileSpec TileSpec::fixed_strip(int row_start, int row_end) {
    if (row_start < 0 || row_end <= row_start) {
        throw std::invalid_argument("fixed_strip: need 0 <= row_start < row_end");
    }
    TileSpec t;
    t.kind = TileKind::FixedStrip;
    t.anchor = FixedAnchor::Explicit;
    t.row_start = row_start;
    t.row_end = row_end;
    return t;
}

TileSpec TileSpec::fixed_upper(int k) {
    if (k <= 0) throw std::invalid_argument("fixed_upper: k must be positive");
    TileSpec t;
    t.kind = TileKind::FixedStrip;
    t.anchor = FixedAnchor::Upper;
    t.k = k;
    return t;
}

TileSpec TileSpec::fixed_middle(int k) {
    if (k <= 0) throw std::invalid_argument("fixed_middle: k must be positive");
    TileSpec t;
    t.kind = TileKind::FixedStrip;
    t.anchor = FixedAnchor::Middle;
    t.k = k;
    return t;
}

std::pair<int, int> TileSpec::tile_dims(int h, int w) const {
    switch (kind) {
        case TileKind::Full:
            return {h, w};
        case TileKind::StripRows:
            return {std::min(k, h), w};
        case TileKind::StripCols:
            return {h, std::min(k, w)};
        case TileKind::Patch:
            return {std::min(k, h), std::min(k, w)};
        case TileKind::FixedStrip:
            throw std::invalid_argument("tile_dims: fixed strips do not tile the tensor");
    }
    throw std::invalid_argument("tile_dims: unknown tile kind");
}

std::pair<int, int> TileSpec::strip_rows_range(int h) const {
    if (kind != TileKind::FixedStrip) {
        throw std::invalid_argument("strip_rows_range: not a fixed strip");
    }
    switch (anchor) {
        case FixedAnchor::Explicit:
            return {row_start, row_end};
        case FixedAnchor::Upper:
            return {0, std::min(k, h)};
        case FixedAnchor::Middle: {
            const int mid = h / 2;
            return {std::max(0, mid - k / 2), std::min(h, mid + (k + 1) / 2)};
        }
    }
    throw std::invalid_argument("strip_rows_range: unknown anchor");
}

std::string TileSpec::to_string() const {
    switch (kind) {
        case TileKind::Full:
            return "full";
        case TileKind::StripRows:
            return "strip-rows:" + std::to_string(k);
        case TileKind::StripCols:
            return "strip-cols:" + std::to_string(k);
        case TileKind::Patch:
            return "patch:" + std::to_string(k);
        case TileKind::FixedStrip:
            if (anchor == FixedAnchor::Upper) return "fixed:upper:" + std::to_string(k);
            if (anchor == FixedAnchor::Middle) return "fixed:middle:" + std::to_string(k);
            return "fixed:rows:" + std::to_string(row_start) + "-" + std::to_string(row_end);
    }
    return "?";
}

long num_tiles(int h, int w, const TileSpec& tile) {
    if (h < 1 || w < 1) throw std::invalid_argument("num_tiles: dims must be positive");
    if (tile.kind == TileKind::Full || tile.kind == TileKind::FixedStrip) return 1;
    const auto [th, tw] = tile.tile_dims(h, w);
    return long(ceil_div(h, th)) * ceil_div(w, tw);
}

namespace {

int parse_positive_int(const std::string& text, const std::string& what) {
    size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected a positive integer, got '" + text + "'");
    }
    if (pos != text.size() || value <= 0) {
        throw std::invalid_argument(what + ": expected a positive integer, got '" + text + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        const size_t p = text.find(sep, start);
        if (p == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, p - start));
        start = p + 1;
    }
    return parts;
}

}  // namespace

TileSpec parse_tile_spec(const std::string& text) {
    const auto parts = split(text, ':');
    const std::string& head = parts[0];
    if (head == "full" && parts.size() == 1) return TileSpec::full();
    if (head == "strip-rows" && parts.size() == 2) {
        return TileSpec::strip_rows(parse_positive_int(parts[1], "strip-rows"));
    }
    if (head == "strip-cols" && parts.size() == 2) {
        return TileSpec::strip_cols(parse_positive_int(parts[1], "strip-cols"));
    }
    if (head == "patch" && parts.size() == 2) {
        return TileSpec::patch(parse_positive_int(parts[1], "patch"));
    }
    if (head == "fixed" && parts.size() == 3) {
        if (parts[1] == "upper") return TileSpec::fixed_upper(parse_positive_int(parts[2], "fixed:upper"));
        if (parts[1] == "middle") return TileSpec::fixed_middle(parse_positive_int(parts[2], "fixed:middle"));
        throw std::invalid_argument("tile spec: unknown fixed anchor '" + parts[1] + "'");
    }
    throw std::invalid_argument(
        "tile spec '" + text +
        "': expected full | strip-rows:K | strip-cols:K | patch:K | fixed:upper:K | fixed:middle:K");
}

ExciteConfig parse_excite_config(const std::string& text) {
    ExciteConfig conf;
    for (const auto& part : split(text, ':')) {
        if (part.empty()) throw std::invalid_argument("excite config: empty component in '" + text + "'");
        if (part[0] == 'c') {
            const auto dims = split(part.substr(1), 'x');
            if (dims.size() != 2) {
                throw std::invalid_argument("excite config: expected cKHxKW, got '" + part + "'");
            }
            conf.kh = parse_positive_int(dims[0], "excite kernel");
            conf.kw = parse_positive_int(dims[1], "excite kernel");
            if (conf.kh % 2 == 0 || conf.kw % 2 == 0) {
                throw std::invalid_argument("excite config: kernel dims must be odd, got '" + part + "'");
            }
        } else if (part[0] == 'r') {
            conf.reduction = parse_positive_int(part.substr(1), "excite reduction");
        } else {
            throw std::invalid_argument("excite config: unknown component '" + part + "'");
        }
    }
    return conf;
}

void ExciteWeights::validate() const {
    const bool consistent = reduce.c_out == expand.c_in && reduce.c_in == expand.c_out &&
                            reduce.kh == expand.kh && reduce.kw == expand.kw &&
                            std::int64_t(reduce.weight.size()) ==
                                std::int64_t(reduce.c_out) * reduce.c_in * reduce.kh * reduce.kw &&
                            std::int64_t(expand.weight.size()) ==
                                std::int64_t(expand.c_out) * expand.c_in * expand.kh * expand.kw &&
                            int(reduce.bias.size()) == reduce.c_out &&
                            int(expand.bias.size()) == expand.c_out;
    if (!consistent) {
        throw std::invalid_argument("ExciteWeights: reduce/expand layer shapes are inconsistent");
    }
}

namespace {

int reduced_width(int channels, int reduction) {
    return std::max(1, ceil_div(channels, reduction));
}

}  // namespace

ExciteWeights ExciteWeights::zeros(int channels, const ExciteConfig& conf) {
    if (channels <= 0) throw std::invalid_argument("ExciteWeights: channels must be positive");
    if (conf.reduction <= 0) throw std::invalid_argument("ExciteWeights: reduction must be positive");
    const int cr = reduced_width(channels, conf.reduction);
    ExciteWeights w;
    w.reduce = Conv2d::zeros(channels, cr, conf.kh, conf.kw);
    w.expand = Conv2d::zeros(cr, channels, conf.kh, conf.kw);
    return w;
}

ExciteWeights ExciteWeights::random(int channels, const ExciteConfig& conf, std::uint64_t seed) {
    ExciteWeights w = zeros(channels, conf);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Conv2d& layer) {
        const double bound = std::sqrt(6.0 / (double(layer.c_in) * layer.kh * layer.kw));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (float& v : layer.weight) v = float(dist(rng));
    };
    fill(w.reduce);
    fill(w.expand);
    return w;
}

namespace {

void check_channels(const Tensor4D& x, const ExciteWeights& w, const char* op) {
    w.validate();
    if (x.c != w.channels()) {
        throw std::invalid_argument(std::string(op) + ": input has " + std::to_string(x.c) +
                                    " channels, weights expect " + std::to_string(w.channels()));
    }
}

/// Reduce -> ReLU -> expand -> sigmoid over a descriptor grid.
Tensor4D excite(const Tensor4D& descriptors, const ExciteWeights& w) {
    Tensor4D a = conv_grid(descriptors, w.reduce);
    a = pointwise(a, Pointwise::Relu);
    a = conv_grid(a, w.expand);
    return pointwise(a, Pointwise::Sigmoid);
}

}  // namespace

Tensor4D se_forward(const Tensor4D& x, const ExciteWeights& w) {
    check_channels(x, w, "se_forward");
    const int ch = x.c;
    const int cr = w.reduced_channels();
    // Center taps of the kernels; for the stock (1,1) kernel the whole layer.
    const int cy = w.reduce.kh / 2;
    const int cx = w.reduce.kw / 2;
    Tensor4D out(x.n, x.c, x.h, x.w);
    std::vector<float> mean(size_t(ch), 0.0f);
    std::vector<float> hidden(size_t(cr), 0.0f);
    std::vector<float> scale(size_t(ch), 0.0f);
    for (int in = 0; in < x.n; ++in) {
        for (int ic = 0; ic < ch; ++ic) {
            double acc = 0.0;
            for (int iy = 0; iy < x.h; ++iy) {
                for (int ix = 0; ix < x.w; ++ix) acc += x.at(in, ic, iy, ix);
            }
            mean[size_t(ic)] = float(acc / (std::int64_t(x.h) * x.w));
        }
        for (int j = 0; j < cr; ++j) {
            double acc = w.reduce.bias[size_t(j)];
            for (int ic = 0; ic < ch; ++ic) {
                acc += double(w.reduce.weight[size_t(w.reduce.weight_index(j, ic, cy, cx))]) *
                       mean[size_t(ic)];
            }
            const float v = float(acc);
            hidden[size_t(j)] = v > 0.0f ? v : 0.0f;
        }
        for (int ic = 0; ic < ch; ++ic) {
            double acc = w.expand.bias[size_t(ic)];
            for (int j = 0; j < cr; ++j) {
                acc += double(w.expand.weight[size_t(w.expand.weight_index(ic, j, cy, cx))]) *
                       hidden[size_t(j)];
            }
            scale[size_t(ic)] = float(1.0 / (1.0 + std::exp(-double(float(acc)))));
        }
        for (int ic = 0; ic < ch; ++ic) {
            const float s = scale[size_t(ic)];
            for (int iy = 0; iy < x.h; ++iy) {
                for (int ix = 0; ix < x.w; ++ix) {
                    out.at(in, ic, iy, ix) = x.at(in, ic, iy, ix) * s;
                }
            }
        }
    }
    return out;
}

Tensor4D tse_scale_map(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile) {
    check_channels(x, w, "tse_scale_map");
    if (tile.kind == TileKind::FixedStrip) {
        throw std::invalid_argument("tse_scale_map: fixed strips use fixed_strip_forward");
    }
    const auto [th, tw] = tile.tile_dims(x.h, x.w);
    return excite(avg_pool2d(x, th, tw), w);
}

Tensor4D tse_forward(const Tensor4D& x, const ExciteWeights& w, const TileSpec& tile,
                     const ExciteConfig& conf) {
    check_channels(x, w, "tse_forward");
    if (tile.kind == TileKind::FixedStrip) {
        throw std::invalid_argument("tse_forward: fixed strips use fixed_strip_forward");
    }
    if (conf.kh != w.reduce.kh || conf.kw != w.reduce.kw) {
        throw std::invalid_argument("tse_forward: config kernel (" + std::to_string(conf.kh) + "x" +
                                    std::to_string(conf.kw) + ") does not match weights (" +
                                    std::to_string(w.reduce.kh) + "x" + std::to_string(w.reduce.kw) +
                                    ")");
    }
    const auto [th, tw] = tile.tile_dims(x.h, x.w);
    const Tensor4D scales = tse_scale_map(x, w, tile);
    return mul_elementwise(x, broadcast_tiles(scales, th, tw, x.h, x.w));
}

Tensor4D fixed_strip_forward(const Tensor4D& x, const ExciteWeights& w, const TileSpec& strip) {
    check_channels(x, w, "fixed_strip_forward");
    if (strip.kind != TileKind::FixedStrip) {
        throw std::invalid_argument("fixed_strip_forward: tile is not a fixed strip");
    }
    const auto [r0, r1] = strip.strip_rows_range(x.h);
    if (r0 < 0 || r0 >= r1 || r1 > x.h) {
        throw std::invalid_argument("fixed_strip_forward: strip rows [" + std::to_string(r0) + ", " +
                                    std::to_string(r1) + ") out of range for height " +
                                    std::to_string(x.h));
    }
    Tensor4D descriptors(x.n, x.c, 1, 1);
    for (int in = 0; in < x.n; ++in) {
        for (int ic = 0; ic < x.c; ++ic) {
            double acc = 0.0;
            for (int iy = r0; iy < r1; ++iy) {
                for (int ix = 0; ix < x.w; ++ix) acc += x.at(in, ic, iy, ix);
            }
            descriptors.at(in, ic, 0, 0) = float(acc / (std::int64_t(r1 - r0) * x.w));
        }
    }
    const Tensor4D scales = excite(descriptors, w);
    return mul_elementwise(x, broadcast_tiles(scales, x.h, x.w, x.h, x.w));
}

Tensor4D TseBlock::forward(const Tensor4D& x) const {
    if (tile.kind == TileKind::FixedStrip) return fixed_strip_forward(x, weights, tile);
    ExciteConfig conf;
    conf.reduction = 0;  // widths come from the weights
    conf.kh = weights.reduce.kh;
    conf.kw = weights.reduce.kw;
    return tse_forward(x, weights, tile, conf);
}

TseBlock transplant(const ExciteWeights& se_weights, const TileSpec& tile) {
    se_weights.validate();
    if (se_weights.reduce.kh != 1 || se_weights.reduce.kw != 1) {
        throw std::invalid_argument("transplant: only (1,1) excitation kernels are SE-compatible");
    }
    return TseBlock{se_weights, tile};
}

}  // namespace tsekit
