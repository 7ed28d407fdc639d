#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "test_util.hpp"
#include "tsekit/tensor.hpp"

using namespace tsekit;
using testutil::bit_equal;
using testutil::max_abs_diff;
using testutil::pool_oracle;
using testutil::random_tensor;

TEST_CASE("avg_pool2d constant tensor") {
    Tensor4D x(1, 1, 4, 4, 1.0f);
    const Tensor4D y = avg_pool2d(x, 2, 2);
    CHECK(y.h == 2);
    CHECK(y.w == 2);
    for (float v : y.data) CHECK(v == doctest::Approx(1.0f));
}

TEST_CASE("avg_pool2d clipped edge window divides by valid count") {
    const Tensor4D x = Tensor4D::from_values(1, 1, 5, 1, {1, 2, 3, 4, 5});
    const Tensor4D y = avg_pool2d(x, 2, 1);
    REQUIRE(y.h == 3);
    CHECK(y.at(0, 0, 0, 0) == doctest::Approx(1.5f));
    CHECK(y.at(0, 0, 1, 0) == doctest::Approx(3.5f));
    CHECK(y.at(0, 0, 2, 0) == doctest::Approx(5.0f));
}

TEST_CASE("avg_pool2d matches the windowed-mean oracle") {
    const Tensor4D x = random_tensor(2, 3, 17, 13, 42);
    const Tensor4D got = avg_pool2d(x, 7, 13);
    const Tensor4D want = pool_oracle(x, 7, 13);
    REQUIRE(got.same_shape(want));
    CHECK(max_abs_diff(got, want) < 1e-6f);
}

TEST_CASE("avg_pool2d oracle sweep over random shapes and kernels") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const int n = 1 + int(rng() % 2);
        const int c = 1 + int(rng() % 5);
        const int h = 1 + int(rng() % 23);
        const int w = 1 + int(rng() % 23);
        const int kh = 1 + int(rng() % 9);
        const int kw = 1 + int(rng() % 9);
        const Tensor4D x = random_tensor(n, c, h, w, rng());
        const Tensor4D got = avg_pool2d(x, kh, kw);
        const Tensor4D want = pool_oracle(x, kh, kw);
        REQUIRE(got.same_shape(want));
        REQUIRE(max_abs_diff(got, want) < 1e-6f);
    }
}

TEST_CASE("avg_pool2d full kernel equals the per-channel mean") {
    const Tensor4D x = random_tensor(2, 4, 9, 11, 3);
    const Tensor4D y = avg_pool2d(x, x.h, x.w);
    REQUIRE(y.h == 1);
    REQUIRE(y.w == 1);
    for (int in = 0; in < x.n; ++in) {
        for (int ic = 0; ic < x.c; ++ic) {
            double acc = 0.0;
            for (int iy = 0; iy < x.h; ++iy)
                for (int ix = 0; ix < x.w; ++ix) acc += x.at(in, ic, iy, ix);
            CHECK(y.at(in, ic, 0, 0) == doctest::Approx(acc / (x.h * x.w)).epsilon(1e-6));
        }
    }
}

TEST_CASE("avg_pool2d oversized kernel clips to the tensor") {
    const Tensor4D x = random_tensor(1, 2, 7, 7, 9);
    const Tensor4D y = avg_pool2d(x, 13, 13);
    CHECK(y.h == 1);
    CHECK(y.w == 1);
    CHECK(bit_equal(y, avg_pool2d(x, 7, 7)));
}

TEST_CASE("avg_pool2d rejects zero kernels") {
    const Tensor4D x(1, 1, 4, 4, 0.0f);
    CHECK_THROWS_AS(avg_pool2d(x, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(avg_pool2d(x, 2, 0), std::invalid_argument);
}

TEST_CASE("avg_pool2d is deterministic") {
    const Tensor4D x = random_tensor(2, 3, 15, 14, 11);
    CHECK(bit_equal(avg_pool2d(x, 4, 3), avg_pool2d(x, 4, 3)));
}

TEST_CASE("conv_grid identity map") {
    const int c = 5;
    Conv2d layer = Conv2d::zeros(c, c, 1, 1);
    for (int i = 0; i < c; ++i) layer.weight[size_t(i * c + i)] = 1.0f;
    const Tensor4D x = random_tensor(1, c, 6, 4, 21);
    CHECK(bit_equal(conv_grid(x, layer), x));
}

TEST_CASE("conv_grid 1x1 affine example") {
    Conv2d layer = Conv2d::zeros(2, 1, 1, 1);
    layer.weight = {1.0f, 1.0f};
    layer.bias = {0.5f};
    const Tensor4D x = Tensor4D::from_values(1, 2, 1, 1, {3.0f, -1.0f});
    const Tensor4D y = conv_grid(x, layer);
    CHECK(y.at(0, 0, 0, 0) == doctest::Approx(2.5f));
}

namespace {

// Naive zero-padded cross-correlation, written independently of conv_grid.
Tensor4D conv_oracle(const Tensor4D& x, const Conv2d& l) {
    Tensor4D out(x.n, l.c_out, x.h, x.w);
    for (int in = 0; in < x.n; ++in)
        for (int oc = 0; oc < l.c_out; ++oc)
            for (int oy = 0; oy < x.h; ++oy)
                for (int ox = 0; ox < x.w; ++ox) {
                    double acc = l.bias[size_t(oc)];
                    for (int ky = 0; ky < l.kh; ++ky)
                        for (int kx = 0; kx < l.kw; ++kx) {
                            const int iy = oy + ky - l.kh / 2;
                            const int ix = ox + kx - l.kw / 2;
                            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                            for (int ic = 0; ic < l.c_in; ++ic) {
                                acc += double(l.weight[size_t(l.weight_index(oc, ic, ky, kx))]) *
                                       x.at(in, ic, iy, ix);
                            }
                        }
                    out.at(in, oc, oy, ox) = float(acc);
                }
    return out;
}

Conv2d random_layer(int c_in, int c_out, int kh, int kw, std::uint64_t seed) {
    Conv2d l = Conv2d::zeros(c_in, c_out, kh, kw);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (float& v : l.weight) v = dist(rng);
    for (float& v : l.bias) v = dist(rng);
    return l;
}

}  // namespace

TEST_CASE("conv_grid matches the sliding-window oracle") {
    const Tensor4D x = random_tensor(1, 4, 5, 5, 33);
    for (auto [kh, kw] : {std::pair{3, 1}, std::pair{1, 3}, std::pair{3, 3}}) {
        const Conv2d l = random_layer(4, 3, kh, kw, 100 + kh * 10 + kw);
        const Tensor4D got = conv_grid(x, l);
        const Tensor4D want = conv_oracle(x, l);
        REQUIRE(got.same_shape(want));
        CHECK(max_abs_diff(got, want) < 1e-6f);
    }
}

TEST_CASE("conv_grid 1x1 equals a per-position matrix-vector product") {
    const Conv2d l = random_layer(3, 5, 1, 1, 17);
    const Tensor4D x = random_tensor(2, 3, 4, 6, 18);
    const Tensor4D y = conv_grid(x, l);
    for (int in = 0; in < x.n; ++in)
        for (int oy = 0; oy < x.h; ++oy)
            for (int ox = 0; ox < x.w; ++ox)
                for (int oc = 0; oc < l.c_out; ++oc) {
                    double acc = l.bias[size_t(oc)];
                    for (int ic = 0; ic < l.c_in; ++ic) {
                        acc += double(l.weight[size_t(l.weight_index(oc, ic, 0, 0))]) *
                               x.at(in, ic, oy, ox);
                    }
                    REQUIRE(y.at(in, oc, oy, ox) == doctest::Approx(acc).epsilon(1e-6));
                }
}

TEST_CASE("conv_grid validates channels and kernel parity") {
    const Tensor4D x = random_tensor(1, 3, 4, 4, 5);
    CHECK_THROWS_AS(conv_grid(x, Conv2d::zeros(4, 2, 1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(conv_grid(x, Conv2d::zeros(3, 2, 2, 1)), std::invalid_argument);
}

TEST_CASE("pointwise relu and sigmoid") {
    const Tensor4D x = Tensor4D::from_values(1, 1, 1, 3, {-2.5f, 0.0f, 2.5f});
    const Tensor4D r = pointwise(x, Pointwise::Relu);
    CHECK(r.data[0] == 0.0f);
    CHECK(r.data[1] == 0.0f);
    CHECK(r.data[2] == 2.5f);
    const Tensor4D s = pointwise(x, Pointwise::Sigmoid);
    CHECK(s.data[1] == doctest::Approx(0.5f));

    const Tensor4D z = random_tensor(1, 2, 5, 10, 77, -6.0f, 6.0f);
    Tensor4D neg = z;
    for (float& v : neg.data) v = -v;
    const Tensor4D a = pointwise(z, Pointwise::Sigmoid);
    const Tensor4D b = pointwise(neg, Pointwise::Sigmoid);
    for (size_t i = 0; i < a.data.size(); ++i) {
        CHECK(a.data[i] + b.data[i] == doctest::Approx(1.0f).epsilon(1e-6));
    }
}

TEST_CASE("broadcast_tiles repeats and crops") {
    const Tensor4D one = Tensor4D::from_values(1, 1, 1, 1, {3.5f});
    const Tensor4D rep = broadcast_tiles(one, 3, 3, 3, 3);
    for (float v : rep.data) CHECK(v == 3.5f);

    const Tensor4D col = Tensor4D::from_values(1, 1, 2, 1, {1.0f, 2.0f});
    const Tensor4D cropped = broadcast_tiles(col, 2, 1, 3, 1);
    CHECK(cropped.at(0, 0, 0, 0) == 1.0f);
    CHECK(cropped.at(0, 0, 1, 0) == 1.0f);
    CHECK(cropped.at(0, 0, 2, 0) == 2.0f);
}

TEST_CASE("broadcast_tiles of pooled tensor follows the index formula") {
    std::mt19937_64 rng(55);
    for (int i = 0; i < 20; ++i) {
        const int h = 1 + int(rng() % 17);
        const int w = 1 + int(rng() % 17);
        const int kh = 1 + int(rng() % 6);
        const int kw = 1 + int(rng() % 6);
        const Tensor4D x = random_tensor(1, 2, h, w, rng());
        const Tensor4D pooled = avg_pool2d(x, kh, kw);
        const Tensor4D up = broadcast_tiles(pooled, kh, kw, h, w);
        REQUIRE(up.same_shape(x));
        for (int ic = 0; ic < x.c; ++ic)
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix) {
                    REQUIRE(up.at(0, ic, iy, ix) == pooled.at(0, ic, iy / kh, ix / kw));
                }
    }
}

TEST_CASE("broadcast_tiles rejects inconsistent grids") {
    const Tensor4D y(1, 1, 2, 2, 1.0f);
    CHECK_THROWS_AS(broadcast_tiles(y, 3, 3, 9, 6), std::invalid_argument);
}

TEST_CASE("mul_elementwise") {
    const Tensor4D x = random_tensor(1, 2, 3, 3, 4);
    CHECK(bit_equal(mul_elementwise(x, Tensor4D(1, 2, 3, 3, 1.0f)), x));
    for (float v : mul_elementwise(x, Tensor4D(1, 2, 3, 3, 0.0f)).data) CHECK(v == 0.0f);

    const Tensor4D a = Tensor4D::from_values(1, 1, 1, 2, {2.0f, 3.0f});
    const Tensor4D b = Tensor4D::from_values(1, 1, 1, 2, {4.0f, 0.5f});
    const Tensor4D p = mul_elementwise(a, b);
    CHECK(p.data[0] == 8.0f);
    CHECK(p.data[1] == 1.5f);

    CHECK_THROWS_AS(mul_elementwise(x, Tensor4D(1, 2, 3, 4, 1.0f)), std::invalid_argument);
}

TEST_CASE("tensor values stay finite through the kernels") {
    const Tensor4D x = random_tensor(1, 3, 12, 9, 91, -50.0f, 50.0f);
    for (const Tensor4D& t : {avg_pool2d(x, 5, 4), pointwise(x, Pointwise::Sigmoid),
                              mul_elementwise(x, x)}) {
        for (float v : t.data) REQUIRE(std::isfinite(v));
    }
}
