#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "expect_errc.hpp"
#include "fishdet/layers.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fishdet;

namespace {

ConvolutionalDef conv_def(int filters, int size, int stride, bool pad, bool bn, Activation act) {
    ConvolutionalDef d;
    d.filters = filters;
    d.size = size;
    d.stride = stride;
    d.pad = pad;
    d.batch_normalize = bn;
    d.activation = act;
    return d;
}

double relative_error(const Tensor& got, const std::vector<double>& ref) {
    double max_ref = 0.0;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        max_ref = std::max(max_ref, std::abs(ref[i]));
        max_diff = std::max(max_diff, std::abs(static_cast<double>(got.data()[i]) - ref[i]));
    }
    return max_ref > 0 ? max_diff / max_ref : max_diff;
}

}  // namespace

TEST(Conv, IdentityKernel) {
    std::mt19937_64 rng(1);
    const auto input = fixture::random_tensor(rng, 3, 5, 7);
    const auto def = conv_def(3, 1, 1, false, false, Activation::Linear);
    ConvParams p;
    p.filters = 3;
    p.in_channels = 3;
    p.size = 1;
    p.biases.assign(3, 0.f);
    p.weights = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    EXPECT_EQ(conv_forward(input, def, p), input);
}

TEST(Conv, OnesKernelBorderCounts) {
    const Tensor input(1, 5, 5, 1.f);
    const auto def = conv_def(1, 3, 1, true, false, Activation::Linear);
    ConvParams p;
    p.filters = 1;
    p.in_channels = 1;
    p.size = 3;
    p.biases = {0.f};
    p.weights.assign(9, 1.f);
    const auto out = conv_forward(input, def, p);
    ASSERT_EQ(out.shape(), (Shape{1, 5, 5}));
    EXPECT_EQ(out.at(0, 2, 2), 9.f);
    EXPECT_EQ(out.at(0, 0, 0), 4.f);
    EXPECT_EQ(out.at(0, 4, 4), 4.f);
    EXPECT_EQ(out.at(0, 0, 2), 6.f);
    EXPECT_EQ(out.at(0, 2, 4), 6.f);
}

TEST(Conv, MatchesDirectOracle) {
    std::mt19937_64 rng(2);
    const auto input = fixture::random_tensor(rng, 3, 8, 8);
    const auto def = conv_def(16, 3, 1, true, false, Activation::Leaky);
    const auto p = fixture::random_conv_params(rng, def, 3);
    int oh = 0, ow = 0;
    const auto ref = oracle::direct_conv(input, def, p, oh, ow);
    const auto got = conv_forward(input, def, p);
    ASSERT_EQ(got.height(), oh);
    ASSERT_EQ(got.width(), ow);
    EXPECT_LE(relative_error(got, ref), 1e-5);
}

TEST(Conv, OutputDimsFormula) {
    std::mt19937_64 rng(3);
    const auto input = fixture::random_tensor(rng, 2, 13, 10);
    const auto def = conv_def(4, 3, 2, true, true, Activation::Leaky);
    const auto out = conv_forward(input, def, fixture::random_conv_params(rng, def, 2));
    EXPECT_EQ(out.height(), (13 + 2 - 3) / 2 + 1);
    EXPECT_EQ(out.width(), (10 + 2 - 3) / 2 + 1);
}

TEST(ConvProperty, RandomLayersMatchOracleAndAreDeterministic) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> dim(1, 16);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const int size = coin(rng) ? 3 : 1;
        const auto def = conv_def(dim(rng), size, coin(rng) ? 2 : 1, coin(rng) == 1, coin(rng) == 1,
                                  coin(rng) ? Activation::Leaky : Activation::Linear);
        const int cin = dim(rng);
        const int h = std::max(dim(rng), size);
        const int w = std::max(dim(rng), size);
        const auto input = fixture::random_tensor(rng, cin, h, w);
        const auto p = fixture::random_conv_params(rng, def, cin);
        int oh = 0, ow = 0;
        const auto ref = oracle::direct_conv(input, def, p, oh, ow);
        const auto one = conv_forward(input, def, p, {1});
        const auto many = conv_forward(input, def, p, {4});
        EXPECT_LE(relative_error(one, ref), 1e-5) << "trial " << trial;
        EXPECT_EQ(one, many) << "trial " << trial;
    }
}

TEST(ConvProperty, RawConvolutionIsLinear) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto def = conv_def(5, 3, 1 + trial % 2, true, false, Activation::Linear);
        const auto p = fixture::random_conv_params(rng, def, 4);
        const auto a = fixture::random_tensor(rng, 4, 9, 11);
        const auto b = fixture::random_tensor(rng, 4, 9, 11);
        Tensor sum = a;
        Tensor scaled = a;
        const float lambda = -2.5f;
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum.data()[i] += b.data()[i];
            scaled.data()[i] *= lambda;
        }
        const auto g = geometry_of(def);
        const auto ca = conv_raw(a, p, g);
        const auto cb = conv_raw(b, p, g);
        const auto cs = conv_raw(sum, p, g);
        const auto cl = conv_raw(scaled, p, g);
        double scale = 0.0;
        for (float v : cs.data()) scale = std::max(scale, static_cast<double>(std::abs(v)));
        for (std::size_t i = 0; i < cs.size(); ++i) {
            EXPECT_NEAR(cs.data()[i], ca.data()[i] + cb.data()[i], 1e-5 * std::max(1.0, scale));
            EXPECT_NEAR(cl.data()[i], lambda * ca.data()[i], 1e-5 * std::max(1.0, scale * std::abs(lambda)));
        }
    }
}

TEST(ConvProperty, BatchNormFolding) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto def = conv_def(6, trial % 2 ? 3 : 1, 1, true, true, Activation::Leaky);
        const auto p = fixture::random_conv_params(rng, def, 3);
        const auto input = fixture::random_tensor(rng, 3, 7, 7);
        auto folded_def = def;
        folded_def.batch_normalize = false;
        const auto folded = fold_batch_norm(p);
        EXPECT_FALSE(folded.batch_normalize);
        const auto a = conv_forward(input, def, p);
        const auto b = conv_forward(input, folded_def, folded);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-4);
    }
}

TEST(Conv, ChannelMismatch) {
    std::mt19937_64 rng(7);
    const auto def = conv_def(2, 1, 1, false, false, Activation::Linear);
    const auto p = fixture::random_conv_params(rng, def, 3);
    EXPECT_ERRC(conv_forward(Tensor(4, 3, 3), def, p), Errc::ChannelMismatch);
}

TEST(Conv, NonFiniteActivation) {
    const auto def = conv_def(1, 1, 1, false, false, Activation::Linear);
    ConvParams p;
    p.filters = 1;
    p.in_channels = 1;
    p.size = 1;
    p.biases = {0.f};
    p.weights = {1e30f};
    EXPECT_ERRC(conv_forward(Tensor(1, 2, 2, 1e30f), def, p), Errc::NonFiniteActivation);
}

TEST(Activation, LeakyFixedPointsAndSlope) {
    std::vector<float> v = {0.f, 1.f, 2.5f, 1e-8f, -1.f, -10.f};
    apply_activation(v, Activation::Leaky);
    EXPECT_EQ(v[0], 0.f);
    EXPECT_EQ(v[1], 1.f);
    EXPECT_EQ(v[2], 2.5f);
    EXPECT_EQ(v[3], 1e-8f);
    EXPECT_FLOAT_EQ(v[4], -0.1f);
    EXPECT_FLOAT_EQ(v[5], -1.f);
}

TEST(ActivationProperty, NonNegativeTensorsPassThrough) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto t = fixture::random_tensor(rng, 3, 4, 5, 0.f, 10.f);
        const auto before = t;
        apply_activation(t.data(), Activation::Leaky);
        EXPECT_EQ(t, before);
    }
}

TEST(Shortcut, SumsElementwise) {
    std::mt19937_64 rng(9);
    const auto a = fixture::random_tensor(rng, 2, 3, 4);
    const auto b = fixture::random_tensor(rng, 2, 3, 4);
    EXPECT_EQ(shortcut_add(a, Tensor(2, 3, 4)), a);
    const auto twice = shortcut_add(a, a);
    const auto sum = shortcut_add(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(twice.data()[i], 2 * a.data()[i]);
        EXPECT_EQ(sum.data()[i], a.data()[i] + b.data()[i]);
    }
    EXPECT_ERRC(shortcut_add(a, Tensor(2, 4, 3)), Errc::ShapeMismatch);
}

TEST(Route, ConcatenatesChannels) {
    std::mt19937_64 rng(10);
    const auto a = fixture::random_tensor(rng, 256, 13, 13);
    const auto b = fixture::random_tensor(rng, 128, 13, 13);
    const Tensor* single[] = {&a};
    EXPECT_EQ(route_concat(single), a);
    const Tensor* both[] = {&a, &b};
    const auto out = route_concat(both);
    EXPECT_EQ(out.shape(), (Shape{384, 13, 13}));
    EXPECT_EQ(out.at(255, 12, 12), a.at(255, 12, 12));
    EXPECT_EQ(out.at(256, 0, 0), b.at(0, 0, 0));
    const Tensor c(1, 26, 26);
    const Tensor* bad[] = {&a, &c};
    EXPECT_ERRC(route_concat(bad), Errc::ShapeMismatch);
}

TEST(Upsample, ReplicatesBlocks) {
    const auto one = upsample2x(Tensor(1, 1, 1, 3.f));
    EXPECT_EQ(one, Tensor(1, 2, 2, 3.f));
    EXPECT_EQ(upsample2x(Tensor(4, 13, 13)).shape(), (Shape{4, 26, 26}));

    Tensor board(2, 5, 3);
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 3; ++x) board.at(c, y, x) = static_cast<float>((x + y + c) % 2 + 10 * y + 100 * x);
    const auto up = upsample2x(board);
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 6; ++x) EXPECT_EQ(up.at(c, y, x), board.at(c, y >> 1, x >> 1));
}
