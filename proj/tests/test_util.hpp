#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "tsekit/tensor.hpp"

namespace testutil {

inline tsekit::Tensor4D random_tensor(int n, int c, int h, int w, std::uint64_t seed,
                                      float lo = -2.0f, float hi = 2.0f) {
    tsekit::Tensor4D x(n, c, h, w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    for (float& v : x.data) v = dist(rng);
    return x;
}

inline float max_abs_diff(const tsekit::Tensor4D& a, const tsekit::Tensor4D& b) {
    float m = 0.0f;
    for (size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    }
    return m;
}

inline bool bit_equal(const tsekit::Tensor4D& a, const tsekit::Tensor4D& b) {
    return a.same_shape(b) && a.data == b.data;
}

/// Windowed-mean oracle, independent of avg_pool2d: gathers each output
/// cell's window directly and divides by the in-bounds count.
inline tsekit::Tensor4D pool_oracle(const tsekit::Tensor4D& x, int kh, int kw) {
    const int oh = (x.h + kh - 1) / kh;
    const int ow = (x.w + kw - 1) / kw;
    tsekit::Tensor4D out(x.n, x.c, oh, ow);
    for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < x.c; ++ic)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = 0.0;
                    int cnt = 0;
                    for (int iy = oy * kh; iy < std::min(oy * kh + kh, x.h); ++iy)
                        for (int ix = ox * kw; ix < std::min(ox * kw + kw, x.w); ++ix) {
                            acc += x.at(in, ic, iy, ix);
                            ++cnt;
                        }
                    out.at(in, ic, oy, ox) = float(acc / cnt);
                }
    return out;
}

}  // namespace testutil
