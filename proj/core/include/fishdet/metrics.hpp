#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fishdet/box.hpp"

namespace fishdet {

/// Labelled box; coordinates are fractions of the image dims.
struct GroundTruthBox {
    int class_id = 0;
    Box box;

    bool operator==(const GroundTruthBox&) const = default;
};

struct ScoredBox {
    int class_id = 0;
    double score = 0.0;
    Box box;
};

/// TN is always 0: background regions in a detection task are not countable.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

struct MatchResult {
    ConfusionCounts counts;
    /// One flag per input detection, in input order.
    std::vector<bool> true_positive;
};

/// Greedy matching in descending score order. A detection is a TP when the
/// unmatched same-class truth with the highest IOU (lowest index on ties)
/// reaches `iou_threshold`; that truth is then consumed.
MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const GroundTruthBox> truths,
                             double iou_threshold);

double precision(const ConfusionCounts& c) noexcept;
double recall(const ConfusionCounts& c) noexcept;
double f1_score(double precision, double recall) noexcept;
double f1_score(const ConfusionCounts& c) noexcept;
/// (TP + TN) / (TP + TN + FP + FN). With TN fixed at 0 this equals TP / (TP + FP + FN).
double accuracy(const ConfusionCounts& c) noexcept;

struct FlaggedDetection {
    double score = 0.0;
    bool true_positive = false;
};

struct PRPoint {
    double precision = 0.0;
    double recall = 0.0;
    double threshold = 0.0;
};

/// One point per prefix of the score-sorted list.
std::vector<PRPoint> pr_curve(std::span<const FlaggedDetection> dets, std::size_t total_truths);

/// Step-weighted area: sum over points of (R_n - R_{n-1}) * P_n, with R_0 = 0.
double average_precision(std::span<const PRPoint> curve);
double average_precision(std::span<const FlaggedDetection> dets, std::size_t total_truths);

double mean_ap(const std::map<int, double>& per_class);

double epochs_from_iterations(std::size_t batch, std::size_t iterations, std::size_t n_images);

struct EvalOptions {
    double iou_threshold = 0.5;
    double conf_threshold = 0.25;
    /// Detections at or above this score feed the PR curve and AP.
    double ap_score_floor = 0.005;
};

struct ClassReport {
    int class_id = 0;
    std::size_t truths = 0;
    std::size_t detections = 0;
    std::optional<double> ap;
    std::vector<PRPoint> curve;
};

struct ImageReport {
    std::string image;
    ConfusionCounts counts;
};

struct EvalReport {
    EvalOptions options;
    std::size_t images = 0;
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::optional<double> map;
    std::vector<ClassReport> per_class;
    std::vector<ImageReport> per_image;
};

/// Accumulates per-image matches into a dataset-level report.
class Evaluator {
public:
    explicit Evaluator(EvalOptions options = {});

    /// `dets` and `truths` share the same coordinate frame.
    ConfusionCounts add_image(const std::string& name, std::span<const ScoredBox> dets,
                              std::span<const GroundTruthBox> truths);

    EvalReport report() const;

private:
    EvalOptions options_;
    std::map<int, std::vector<FlaggedDetection>> flagged_;
    std::map<int, std::size_t> truths_;
    std::vector<ImageReport> images_;
    ConfusionCounts counts_;
};

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
/// `class,threshold,precision,recall` rows.
std::string pr_curve_csv(const EvalReport& report);

}  // namespace fishdet
