#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fishdet/detection.hpp"
#include "fishdet/pca.hpp"

namespace fishdet::cli {

/// Exit status for model, file and data errors.
inline constexpr int kExitFailure = 2;

struct ModelArgs {
    std::string config;
    std::string weights;
    bool allow_partial = false;
    unsigned workers = 1;
};

struct DetectArgs {
    ModelArgs model;
    /// Image files or directories of images.
    std::vector<std::string> inputs;
    std::string out_dir = "detections";
    float conf = kDefaultConfThreshold;
    float nms = kDefaultNmsThreshold;
};

struct EvalArgs {
    ModelArgs model;
    std::string manifest;
    std::string out_dir = "eval";
    double iou = 0.5;
    double conf = kDefaultConfThreshold;
    /// "all", "train" or "test".
    std::string split = "all";
};

struct ProbeArgs {
    ModelArgs model;
    std::string image;
    /// 1-based layer numbers.
    std::vector<std::size_t> layers;
    std::string out_dir = "probe";
    std::size_t top_k = kDefaultTopComponents;
    /// Rendered feature maps per layer; 0 renders all of them.
    std::size_t max_maps = 0;
};

struct PseudoLabelArgs {
    ModelArgs model;
    std::string image_dir;
    std::string label_dir;
    /// Defaults to `<label_dir>/manifest.json`.
    std::string manifest;
    float conf = kDefaultConfThreshold;
    /// When set, the manifest is split train/test with this test fraction.
    std::optional<double> test_fraction;
    std::uint64_t seed = 0;
};

struct SplitArgs {
    std::string manifest;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct InitWeightsArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
};

struct ServeArgs {
    std::string manifest;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    std::string audit_log;
};

int run_detect(const DetectArgs& args, std::ostream& out);
int run_eval(const EvalArgs& args, std::ostream& out);
int run_probe(const ProbeArgs& args, std::ostream& out);
int run_pseudolabel(const PseudoLabelArgs& args, std::ostream& out);
int run_split(const SplitArgs& args, std::ostream& out);
int run_init_weights(const InitWeightsArgs& args, std::ostream& out);
int run_serve(const ServeArgs& args, std::ostream& out);

/// Parses `argv` (without the program name) and dispatches. Errors are
/// printed to `err` and turned into exit codes.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// Output file stem for a probed feature map: `L001_m000`.
std::string feature_map_stem(std::size_t layer_1based, std::size_t map);
/// Output file stem for an eigenvector image: `L001_pc1`.
std::string component_stem(std::size_t layer_1based, std::size_t k);

}  // namespace fishdet::cli
