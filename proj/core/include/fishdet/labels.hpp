#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fishdet/detection.hpp"
#include "fishdet/metrics.hpp"

namespace fishdet {

/// Parses `class cx cy w h` lines (normalized, origin top-left, y down).
/// Blank lines are skipped; an empty file is a background image.
std::vector<GroundTruthBox> parse_labels(std::string_view text);

/// Canonical form: `%d %.6f %.6f %.6f %.6f` per box. Boxes reaching outside
/// [0, 1] are clipped first; a warning is recorded when clipping moves a
/// coordinate by more than 1e-6. Boxes that round to zero size are dropped.
std::string write_labels(std::span<const GroundTruthBox> boxes, std::vector<std::string>* warnings = nullptr);

std::vector<GroundTruthBox> read_label_file(const std::string& path);

/// Writes via a temporary file and rename so readers never see a partial file.
void write_label_file(const std::string& path, std::span<const GroundTruthBox> boxes,
                      std::vector<std::string>* warnings = nullptr);

/// Writes `contents` to `path` through a temporary sibling and rename.
void write_file_atomic(const std::string& path, std::string_view contents);

/// Converts pixel-space detections to normalized label boxes.
std::vector<GroundTruthBox> detections_to_labels(std::span<const Detection> dets, int image_w, int image_h);

/// Detections in normalized coordinates for evaluation against label files.
std::vector<ScoredBox> detections_to_scored(std::span<const Detection> dets, int image_w, int image_h);

}  // namespace fishdet
