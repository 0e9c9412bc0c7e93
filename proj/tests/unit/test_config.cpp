#include <gtest/gtest.h>

#include <variant>

#include "expect_errc.hpp"
#include "fishdet/config.hpp"
#include "fixtures.hpp"

using namespace fishdet;

namespace {

const char* kSmall = R"(
# two convs and a shortcut
[net]
width=32
height=32
channels=3
momentum=0.9

[convolutional]
filters=4
size=3
stride=1
pad=1
batch_normalize=1
activation=leaky

[convolutional]
filters=4
size=1
activation=leaky

[shortcut]
from=-2
activation=linear
)";

template <typename T>
const T& layer_as(const NetworkDef& def, std::size_t i) {
    return std::get<T>(def.layers.at(i));
}

}  // namespace

TEST(Config, NetParamsAreParsed) {
    const auto def =
        parse_network_config("[net]\nwidth=416\nheight=416\nchannels=3\n[convolutional]\nfilters=1\nsize=1\n");
    EXPECT_EQ(def.net.width, 416);
    EXPECT_EQ(def.net.height, 416);
    EXPECT_EQ(def.net.channels, 3);
    EXPECT_EQ(def.layers.size(), 1u);
}

TEST(Config, NetworkSectionAlias) {
    const auto def = parse_network_config("[network]\nwidth=64\nheight=32\n[convolutional]\nfilters=1\nsize=1\n");
    EXPECT_EQ(def.net.width, 64);
    EXPECT_EQ(def.net.height, 32);
}

TEST(Config, DefaultsApplyWhenKeysAbsent) {
    const auto def = parse_network_config("[net]\nwidth=32\nheight=32\n[convolutional]\nfilters=8\nsize=3\n");
    const auto& c = layer_as<ConvolutionalDef>(def, 0);
    EXPECT_EQ(c.stride, 1);
    EXPECT_FALSE(c.pad);
    EXPECT_EQ(c.padding(), 0);
    EXPECT_FALSE(c.batch_normalize);
    EXPECT_EQ(c.activation, Activation::Linear);
}

TEST(Config, PadFlagMeansHalfKernel) {
    const auto def = parse_network_config(kSmall);
    EXPECT_EQ(layer_as<ConvolutionalDef>(def, 0).padding(), 1);
    EXPECT_EQ(layer_as<ConvolutionalDef>(def, 1).padding(), 0);
}

TEST(Config, ShortcutResolvesRelative) {
    const auto def = parse_network_config(kSmall);
    ASSERT_EQ(def.layers.size(), 3u);
    EXPECT_EQ(layer_as<ShortcutDef>(def, 2).from, -2);
    EXPECT_EQ(def.inputs_of(2), (std::vector<std::size_t>{1, 0}));
}

TEST(Config, TrainingKeysPassThrough) {
    std::vector<ConfigWarning> warnings;
    const auto def = parse_network_config(kSmall, {}, &warnings);
    EXPECT_EQ(def.net.extra.at("momentum"), "0.9");
    EXPECT_TRUE(warnings.empty());
}

TEST(Config, UnknownKeyIsKeptWithWarning) {
    std::vector<ConfigWarning> warnings;
    const auto def = parse_network_config("[net]\nwidth=32\nheight=32\n[convolutional]\nfilters=2\nsize=1\nsparkle=7\n",
                                          {}, &warnings);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_EQ(warnings[0].section, 1u);
    EXPECT_EQ(warnings[0].key, "sparkle");
    EXPECT_EQ(layer_as<ConvolutionalDef>(def, 0).extra.at("sparkle"), "7");
}

TEST(Config, CommentsAndWhitespaceIgnored) {
    const auto def = parse_network_config(
        "  # header\n[net]   \n width = 64 # trailing\nheight=64\n\n[convolutional]\nfilters=1\nsize=1\n");
    EXPECT_EQ(def.net.width, 64);
}

TEST(Config, FirstSectionMustBeNet) {
    EXPECT_ERRC(parse_network_config("[convolutional]\nfilters=1\nsize=1\n"), Errc::MalformedConfig);
}

TEST(Config, UnknownSectionNamesIndex) {
    try {
        parse_network_config("[net]\nwidth=32\nheight=32\n[maxpool]\nsize=2\n");
        FAIL() << "expected UnknownSection";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), Errc::UnknownSection);
        EXPECT_EQ(e.section(), 1u);
    }
}

TEST(Config, MissingRequiredKeyNamesKey) {
    try {
        parse_network_config("[net]\nwidth=32\nheight=32\n[convolutional]\nsize=3\n");
        FAIL() << "expected MissingRequiredKey";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), Errc::MissingRequiredKey);
        EXPECT_EQ(e.section(), 1u);
        EXPECT_EQ(e.key(), "filters");
    }
}

TEST(Config, NonNumericValueRejected) {
    EXPECT_ERRC(parse_network_config("[net]\nwidth=abc\nheight=32\n[convolutional]\nfilters=1\nsize=1\n"),
                Errc::InvalidValue);
}

TEST(Config, EmptyNetworkRejected) {
    EXPECT_ERRC(parse_network_config("[net]\nwidth=32\nheight=32\n"), Errc::MalformedConfig);
}

TEST(Config, ShortcutShapeMismatch) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=4
size=1
[convolutional]
filters=8
size=1
[convolutional]
filters=8
size=1
[shortcut]
from=-3
)";
    try {
        parse_network_config(text);
        FAIL() << "expected ShapeMismatch";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), Errc::ShapeMismatch);
        EXPECT_EQ(e.section(), 4u);
        EXPECT_EQ(e.key(), "from");
    }
}

TEST(Config, DanglingReferences) {
    EXPECT_ERRC(parse_network_config("[net]\nwidth=32\nheight=32\n[convolutional]\nfilters=1\nsize=1\n[shortcut]\nfrom=-5\n"),
                Errc::DanglingLayerReference);
    EXPECT_ERRC(parse_network_config("[net]\nwidth=32\nheight=32\n[convolutional]\nfilters=1\nsize=1\n[route]\nlayers=3\n"),
                Errc::DanglingLayerReference);
}

TEST(Config, RouteMismatchedSpatialDims) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=2
size=1
[convolutional]
filters=2
size=3
stride=2
pad=1
[route]
layers=-1,-2
)";
    EXPECT_ERRC(parse_network_config(text), Errc::ShapeMismatch);
}

TEST(Config, HeadFilterMismatch) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=17
size=1
[yolo]
mask=0,1,2
anchors=10,13,16,30,33,23
classes=1
)";
    EXPECT_ERRC(parse_network_config(text), Errc::HeadFilterMismatch);
}

TEST(Config, HeadConvMustBeLinearWithoutBatchNorm) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=18
size=1
activation=leaky
[yolo]
mask=0,1,2
anchors=10,13,16,30,33,23
classes=1
)";
    EXPECT_ERRC(parse_network_config(text), Errc::HeadFilterMismatch);
}

TEST(Config, ZeroClassesRejected) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=15
size=1
[yolo]
mask=0,1,2
anchors=10,13,16,30,33,23
classes=0
)";
    EXPECT_ERRC(parse_network_config(text), Errc::DegenerateClassCount);
}

TEST(Config, MaskIndexOutOfAnchors) {
    const char* text = R"([net]
width=32
height=32
[convolutional]
filters=18
size=1
[yolo]
mask=0,1,5
anchors=10,13,16,30,33,23
classes=1
)";
    EXPECT_ERRC(parse_network_config(text), Errc::InvalidValue);
}

TEST(Config, RequiredHeadCount) {
    ParseOptions opts;
    opts.required_heads = 3;
    EXPECT_ERRC(load_network_config(fixture::tiny_config_path(), opts), Errc::InvalidValue);
    EXPECT_NO_THROW(load_network_config(fixture::yolov3_config_path(), opts));
}

TEST(Config, FullYolov3SingleClass) {
    ParseOptions opts;
    opts.required_heads = 3;
    const auto def = load_network_config(fixture::yolov3_config_path(), opts);
    ASSERT_EQ(def.layers.size(), 107u);
    EXPECT_EQ(def.yolo_layers(), (std::vector<std::size_t>{82, 94, 106}));
    for (auto y : def.yolo_layers()) {
        EXPECT_EQ(layer_as<ConvolutionalDef>(def, y - 1).filters, 18);
        EXPECT_EQ(layer_as<YoloDef>(def, y).classes, 1);
    }
    EXPECT_EQ(def.conv_layers().size(), 75u);
    // the route feeding the second head joins layers 85 and 61 (0-based)
    EXPECT_EQ(def.inputs_of(86), (std::vector<std::size_t>{85, 61}));
    EXPECT_EQ(def.net.batch, 64);
    EXPECT_EQ(def.net.subdivisions, 16);
}

TEST(Config, ShapesOfFullNetwork) {
    const auto def = load_network_config(fixture::yolov3_config_path());
    const auto shapes = infer_shapes(def);
    EXPECT_EQ(shapes[0], (Shape{32, 416, 416}));
    EXPECT_EQ(shapes[81], (Shape{18, 13, 13}));
    EXPECT_EQ(shapes[86], (Shape{768, 26, 26}));
    EXPECT_EQ(shapes[93], (Shape{18, 26, 26}));
    EXPECT_EQ(shapes[105], (Shape{18, 52, 52}));
}

TEST(Config, SerializeRoundTrip) {
    for (const auto& path : {fixture::yolov3_config_path(), fixture::tiny_config_path()}) {
        const auto def = load_network_config(path);
        const auto text = serialize_network_config(def);
        const auto again = parse_network_config(text);
        EXPECT_EQ(again, def) << path;
        EXPECT_EQ(serialize_network_config(again), text);
    }
}

TEST(Config, SerializeRoundTripKeepsExtras) {
    const auto def = parse_network_config(kSmall);
    EXPECT_EQ(parse_network_config(serialize_network_config(def)), def);
}

TEST(HeadFilters, Formula) {
    EXPECT_EQ(head_filters_for(1), 18);
    EXPECT_EQ(head_filters_for(80), 255);
    EXPECT_EQ(head_filters_for(0), 15);
}

TEST(HeadFilters, ReportOnFullNetwork) {
    const auto def = load_network_config(fixture::yolov3_config_path());
    const auto ok = validate_head_filters(def, 1);
    EXPECT_TRUE(ok.ok());
    EXPECT_EQ(ok.expected_filters, 18);

    const auto coco = validate_head_filters(def, 80);
    EXPECT_EQ(coco.expected_filters, 255);
    ASSERT_EQ(coco.mismatches.size(), 3u);
    EXPECT_EQ(coco.mismatches[0].layer, 81u);
    EXPECT_EQ(coco.mismatches[0].actual, 18);
    EXPECT_EQ(coco.mismatches[0].expected, 255);

    const auto zero = validate_head_filters(def, 0);
    EXPECT_TRUE(zero.degenerate);
    EXPECT_EQ(zero.expected_filters, 15);
    EXPECT_FALSE(zero.ok());
}
