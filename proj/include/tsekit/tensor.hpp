#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tsekit {

/// Dense rank-4 activation tensor, row-major in (n, c, h, w) order.
/// Storage is 32-bit; kernels accumulate in 64-bit so pooling error stays
/// below 1e-6 for tensors up to ~1e6 elements.
struct Tensor4D {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<float> data;

    Tensor4D() = default;
    Tensor4D(int n, int c, int h, int w, float fill = 0.0f);
    static Tensor4D from_values(int n, int c, int h, int w, std::vector<float> values);

    std::int64_t size() const { return std::int64_t(n) * c * h * w; }

    std::int64_t index(int in, int ic, int iy, int ix) const {
        return ((std::int64_t(in) * c + ic) * h + iy) * w + ix;
    }
    float at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }
    float& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }

    bool same_shape(const Tensor4D& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
};

/// Weight bundle for one convolution over a descriptor grid.
/// weight is (c_out, c_in, kh, kw) row-major; bias has c_out entries.
struct Conv2d {
    int c_in = 0;
    int c_out = 0;
    int kh = 1;
    int kw = 1;
    std::vector<float> weight;
    std::vector<float> bias;

    static Conv2d zeros(int c_in, int c_out, int kh = 1, int kw = 1);
    std::int64_t weight_index(int oc, int ic, int ky, int kx) const {
        return ((std::int64_t(oc) * c_in + ic) * kh + ky) * kw + kx;
    }
    std::int64_t param_count() const {
        return std::int64_t(c_out) * c_in * kh * kw + c_out;
    }
};

enum class Pointwise { Relu, Sigmoid };

/// Ceil-mode average pooling with stride equal to the kernel.
/// Output dims are (n, c, ceil(h/kh), ceil(w/kw)); edge windows are clipped
/// to the tensor and divided by the count of in-bounds elements only.
/// Kernels larger than the tensor are clipped to it. Throws
/// std::invalid_argument for a zero kernel.
Tensor4D avg_pool2d(const Tensor4D& x, int kh, int kw);

/// Same-size zero-padded cross-correlation over a descriptor grid.
/// Kernel dims must be odd; x.c must equal layer.c_in.
Tensor4D conv_grid(const Tensor4D& x, const Conv2d& layer);

Tensor4D pointwise(const Tensor4D& x, Pointwise kind);

/// Nearest-neighbour tile broadcast: each cell of y is repeated kh times
/// along height and kw along width, then cropped to (target_h, target_w).
/// Requires ceil(target_h/kh) == y.h and ceil(target_w/kw) == y.w.
Tensor4D broadcast_tiles(const Tensor4D& y, int kh, int kw, int target_h, int target_w);

Tensor4D mul_elementwise(const Tensor4D& x, const Tensor4D& y);

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace tsekit
