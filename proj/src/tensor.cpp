#include "tsekit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tsekit {

namespace {

void check_dims(int n, int c, int h, int w) {
    if (n < 1 || c < 1 || h < 1 || w < 1) {
        throw std::invalid_argument("Tensor4D dims must be >= 1, got (" + std::to_string(n) +
                                    ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
                                    std::to_string(w) + ")");
    }
}

}  // namespace

Tensor4D::Tensor4D(int n_, int c_, int h_, int w_, float fill) : n(n_), c(c_), h(h_), w(w_) {
    check_dims(n, c, h, w);
    data.assign(size_t(size()), fill);
}

Tensor4D Tensor4D::from_values(int n, int c, int h, int w, std::vector<float> values) {
    check_dims(n, c, h, w);
    Tensor4D t;
    t.n = n;
    t.c = c;
    t.h = h;
    t.w = w;
    if (std::int64_t(values.size()) != t.size()) {
        throw std::invalid_argument("value count does not match dims");
    }
    t.data = std::move(values);
    return t;
}

Conv2d Conv2d::zeros(int c_in, int c_out, int kh, int kw) {
    Conv2d l;
    l.c_in = c_in;
    l.c_out = c_out;
    l.kh = kh;
    l.kw = kw;
    l.weight.assign(size_t(c_out) * c_in * kh * kw, 0.0f);
    l.bias.assign(size_t(c_out), 0.0f);
    return l;
}

Tensor4D avg_pool2d(const Tensor4D& x, int kh, int kw) {
    if (kh <= 0 || kw <= 0) {
        throw std::invalid_argument("avg_pool2d: kernel must be positive, got (" +
                                    std::to_string(kh) + ", " + std::to_string(kw) + ")");
    }
    const int oh = ceil_div(x.h, kh);
    const int ow = ceil_div(x.w, kw);
    Tensor4D out(x.n, x.c, oh, ow);
    for (int in = 0; in < x.n; ++in) {
        for (int ic = 0; ic < x.c; ++ic) {
            for (int oy = 0; oy < oh; ++oy) {
                const int y0 = oy * kh;
                const int y1 = std::min(y0 + kh, x.h);
                for (int ox = 0; ox < ow; ++ox) {
                    const int x0 = ox * kw;
                    const int x1 = std::min(x0 + kw, x.w);
                    // One accumulator per output cell, row-major summation,
                    // so repeated runs are bit-identical.
                    double acc = 0.0;
                    for (int iy = y0; iy < y1; ++iy) {
                        for (int ix = x0; ix < x1; ++ix) {
                            acc += x.at(in, ic, iy, ix);
                        }
                    }
                    const int count = (y1 - y0) * (x1 - x0);
                    out.at(in, ic, oy, ox) = float(acc / count);
                }
            }
        }
    }
    return out;
}

Tensor4D conv_grid(const Tensor4D& x, const Conv2d& layer) {
    if (x.c != layer.c_in) {
        throw std::invalid_argument("conv_grid: channel mismatch, input has " +
                                    std::to_string(x.c) + " channels, layer expects " +
                                    std::to_string(layer.c_in));
    }
    if (layer.kh % 2 == 0 || layer.kw % 2 == 0 || layer.kh <= 0 || layer.kw <= 0) {
        throw std::invalid_argument("conv_grid: kernel dims must be odd and positive");
    }
    const int ph = layer.kh / 2;
    const int pw = layer.kw / 2;
    Tensor4D out(x.n, layer.c_out, x.h, x.w);
    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < layer.c_out; ++oc) {
            for (int oy = 0; oy < x.h; ++oy) {
                for (int ox = 0; ox < x.w; ++ox) {
                    double acc = layer.bias[size_t(oc)];
                    for (int ic = 0; ic < layer.c_in; ++ic) {
                        for (int ky = 0; ky < layer.kh; ++ky) {
                            const int iy = oy + ky - ph;
                            if (iy < 0 || iy >= x.h) continue;
                            for (int kx = 0; kx < layer.kw; ++kx) {
                                const int ix = ox + kx - pw;
                                if (ix < 0 || ix >= x.w) continue;
                                acc += double(layer.weight[size_t(layer.weight_index(oc, ic, ky, kx))]) *
                                       x.at(in, ic, iy, ix);
                            }
                        }
                    }
                    out.at(in, oc, oy, ox) = float(acc);
                }
            }
        }
    }
    return out;
}

Tensor4D pointwise(const Tensor4D& x, Pointwise kind) {
    Tensor4D out = x;
    if (kind == Pointwise::Relu) {
        for (float& v : out.data) v = v > 0.0f ? v : 0.0f;
    } else {
        for (float& v : out.data) v = float(1.0 / (1.0 + std::exp(-double(v))));
    }
    return out;
}

Tensor4D broadcast_tiles(const Tensor4D& y, int kh, int kw, int target_h, int target_w) {
    if (kh <= 0 || kw <= 0 || target_h <= 0 || target_w <= 0) {
        throw std::invalid_argument("broadcast_tiles: dims must be positive");
    }
    if (ceil_div(target_h, kh) != y.h || ceil_div(target_w, kw) != y.w) {
        throw std::invalid_argument(
            "broadcast_tiles: tile grid " + std::to_string(y.h) + "x" + std::to_string(y.w) +
            " does not cover target " + std::to_string(target_h) + "x" + std::to_string(target_w) +
            " with tile " + std::to_string(kh) + "x" + std::to_string(kw));
    }
    Tensor4D out(y.n, y.c, target_h, target_w);
    for (int in = 0; in < y.n; ++in) {
        for (int ic = 0; ic < y.c; ++ic) {
            for (int iy = 0; iy < target_h; ++iy) {
                const int ty = iy / kh;
                for (int ix = 0; ix < target_w; ++ix) {
                    out.at(in, ic, iy, ix) = y.at(in, ic, ty, ix / kw);
                }
            }
        }
    }
    return out;
}

Tensor4D mul_elementwise(const Tensor4D& x, const Tensor4D& y) {
    if (!x.same_shape(y)) {
        throw std::invalid_argument("mul_elementwise: shape mismatch");
    }
    Tensor4D out = x;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= y.data[i];
    return out;
}

}  // namespace tsekit
