#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fishdet/detector.hpp"
#include "fishdet/metrics.hpp"

namespace fishdet {

/// Ordered: a state may only move to a later one, or be corrected again.
enum class ReviewState { Unreviewed, Accepted, Corrected };
enum class Split { Unassigned, Train, Test };

std::string_view to_string(ReviewState s) noexcept;
std::string_view to_string(Split s) noexcept;
std::optional<ReviewState> review_state_from(std::string_view s) noexcept;
std::optional<Split> split_from(std::string_view s) noexcept;

bool can_transition(ReviewState from, ReviewState to) noexcept;

struct LabeledImage {
    std::size_t id = 0;
    std::string image;
    std::string label_file;
    Split split = Split::Unassigned;
    ReviewState review = ReviewState::Unreviewed;
    /// Bumped on every saved edit; used for optimistic concurrency.
    std::uint64_t revision = 0;
    /// Scores of the pseudo-label boxes, if the labels came from the detector.
    std::vector<double> scores;
};

struct DatasetManifest {
    std::vector<LabeledImage> entries;
    std::optional<std::uint64_t> seed;
    std::optional<double> test_fraction;
    std::string provenance;
};

/// Paths are stored relative to the manifest's directory and resolved
/// against it on load.
std::string manifest_to_json(const DatasetManifest& manifest, const std::string& manifest_dir);
DatasetManifest manifest_from_json(std::string_view text, const std::string& manifest_dir);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Image files directly inside `dir`, sorted by name.
std::vector<std::string> scan_images(const std::string& dir);

/// Label path for an image: same stem, `.txt`, inside `label_dir`.
std::string label_path_for(const std::string& image, const std::string& label_dir);

/// Seeded shuffle, then the first round(n * test_fraction) entries (capped at
/// n - 1) become test; entry order in the manifest is preserved.
DatasetManifest split_dataset(std::vector<LabeledImage> entries, double test_fraction, std::uint64_t seed);

struct PseudoLabelOptions {
    float conf_threshold = kDefaultConfThreshold;
    unsigned workers = 1;
};

struct PseudoLabelFailure {
    std::string image;
    std::string message;
};

struct PseudoLabelSummary {
    std::size_t images = 0;
    std::size_t labeled = 0;
    std::size_t boxes = 0;
    std::size_t empty_images = 0;
    /// Ten equal-width score bins over [0, 1].
    std::array<std::size_t, 10> score_histogram{};
    std::vector<PseudoLabelFailure> failures;
};

struct PseudoLabelRun {
    DatasetManifest manifest;
    PseudoLabelSummary summary;
};

std::array<std::size_t, 10> score_histogram(const std::vector<double>& scores);

/// Detects every image in `image_dir` and writes one label file per image to
/// `label_dir`. Unreadable images are logged and skipped.
PseudoLabelRun pseudo_label(const Detector& detector, const std::string& image_dir, const std::string& label_dir,
                            const PseudoLabelOptions& options = {});

std::string summary_to_json(const PseudoLabelSummary& summary);
std::string summary_to_text(const PseudoLabelSummary& summary);

struct DatasetEvalOptions {
    EvalOptions metrics;
    /// Restrict to one split; nullopt evaluates every entry.
    std::optional<Split> split;
    unsigned workers = 1;
};

EvalReport evaluate_dataset(const Detector& detector, const DatasetManifest& manifest,
                            const DatasetEvalOptions& options = {});

}  // namespace fishdet
