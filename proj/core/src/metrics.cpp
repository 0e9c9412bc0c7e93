#include "fishdet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

std::vector<std::size_t> score_order(std::size_t n, auto&& score_of) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score_of(a) > score_of(b); });
    return order;
}

double ratio(std::size_t num, std::size_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const GroundTruthBox> truths,
                             double iou_threshold) {
    MatchResult result;
    result.true_positive.assign(dets.size(), false);
    std::vector<bool> matched(truths.size(), false);
    const auto order = score_order(dets.size(), [&](std::size_t i) { return dets[i].score; });
    for (auto d : order) {
        std::size_t best = truths.size();
        double best_iou = -1.0;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            if (matched[t] || truths[t].class_id != dets[d].class_id) continue;
            const double v = iou(dets[d].box, truths[t].box);
            if (v > best_iou) {
                best_iou = v;
                best = t;
            }
        }
        if (best < truths.size() && best_iou >= iou_threshold) {
            matched[best] = true;
            result.true_positive[d] = true;
            ++result.counts.tp;
        } else {
            ++result.counts.fp;
        }
    }
    result.counts.fn = truths.size() - result.counts.tp;
    return result;
}

double precision(const ConfusionCounts& c) noexcept { return ratio(c.tp, c.tp + c.fp); }

double recall(const ConfusionCounts& c) noexcept { return ratio(c.tp, c.tp + c.fn); }

double f1_score(double p, double r) noexcept { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

double f1_score(const ConfusionCounts& c) noexcept { return f1_score(precision(c), recall(c)); }

double accuracy(const ConfusionCounts& c) noexcept { return ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn); }

std::vector<PRPoint> pr_curve(std::span<const FlaggedDetection> dets, std::size_t total_truths) {
    if (total_truths == 0) throw Error(Errc::EmptyTruthSet, "recall is undefined without ground truths");
    const auto order = score_order(dets.size(), [&](std::size_t i) { return dets[i].score; });
    std::vector<PRPoint> curve;
    curve.reserve(dets.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& d = dets[order[k]];
        if (d.true_positive) ++tp;
        curve.push_back({ratio(tp, k + 1), ratio(tp, total_truths), d.score});
    }
    return curve;
}

double average_precision(std::span<const PRPoint> curve) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (const auto& p : curve) {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    return ap;
}

double average_precision(std::span<const FlaggedDetection> dets, std::size_t total_truths) {
    if (total_truths == 0) throw Error(Errc::UndefinedAP, "AP is undefined for a class without ground truths");
    const auto curve = pr_curve(dets, total_truths);
    return average_precision(curve);
}

double mean_ap(const std::map<int, double>& per_class) {
    if (per_class.empty()) throw Error(Errc::NoClassesEvaluated, "no class has ground truths");
    double sum = 0.0;
    for (const auto& [cls, ap] : per_class) sum += ap;
    return sum / static_cast<double>(per_class.size());
}

double epochs_from_iterations(std::size_t batch, std::size_t iterations, std::size_t n_images) {
    if (n_images == 0) throw Error(Errc::ZeroImages, "epoch conversion needs at least one image");
    return static_cast<double>(batch) * static_cast<double>(iterations) / static_cast<double>(n_images);
}

Evaluator::Evaluator(EvalOptions options) : options_(options) {}

ConfusionCounts Evaluator::add_image(const std::string& name, std::span<const ScoredBox> dets,
                                     std::span<const GroundTruthBox> truths) {
    std::vector<ScoredBox> kept;
    for (const auto& d : dets) {
        if (d.score >= options_.ap_score_floor) kept.push_back(d);
    }
    const auto match = match_detections(kept, truths, options_.iou_threshold);

    // Matching is greedy in score order, so the matches made by detections
    // above the working threshold are the same as if only those were passed.
    ConfusionCounts counts;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        flagged_[kept[i].class_id].push_back({kept[i].score, static_cast<bool>(match.true_positive[i])});
        if (kept[i].score >= options_.conf_threshold) {
            if (match.true_positive[i]) {
                ++counts.tp;
            } else {
                ++counts.fp;
            }
        }
    }
    for (const auto& t : truths) ++truths_[t.class_id];
    counts.fn = truths.size() - counts.tp;
    counts_ += counts;
    images_.push_back({name, counts});
    return counts;
}

EvalReport Evaluator::report() const {
    EvalReport r;
    r.options = options_;
    r.images = images_.size();
    r.counts = counts_;
    r.precision = precision(counts_);
    r.recall = recall(counts_);
    r.f1 = f1_score(counts_);
    r.accuracy = accuracy(counts_);
    r.per_image = images_;

    std::map<int, double> aps;
    std::map<int, ClassReport> classes;
    for (const auto& [cls, n] : truths_) {
        classes[cls].class_id = cls;
        classes[cls].truths = n;
    }
    for (const auto& [cls, dets] : flagged_) {
        classes[cls].class_id = cls;
        classes[cls].detections = dets.size();
    }
    for (auto& [cls, cr] : classes) {
        if (cr.truths == 0) continue;
        static const std::vector<FlaggedDetection> none;
        const auto it = flagged_.find(cls);
        const auto& dets = it == flagged_.end() ? none : it->second;
        cr.curve = pr_curve(dets, cr.truths);
        cr.ap = average_precision(cr.curve);
        aps[cls] = *cr.ap;
    }
    for (auto& [cls, cr] : classes) r.per_class.push_back(std::move(cr));
    if (!aps.empty()) r.map = mean_ap(aps);
    return r;
}

std::string report_to_json(const EvalReport& report) {
    using nlohmann::json;
    auto counts_json = [](const ConfusionCounts& c) {
        return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
    };
    json j;
    j["iou_threshold"] = report.options.iou_threshold;
    j["conf_threshold"] = report.options.conf_threshold;
    j["ap_score_floor"] = report.options.ap_score_floor;
    j["images"] = report.images;
    j["counts"] = counts_json(report.counts);
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["accuracy"] = report.accuracy;
    j["accuracy_note"] = "true negatives are not countable for detection; TN is fixed at 0";
    j["map"] = report.map ? json(*report.map) : json(nullptr);
    j["per_class"] = json::array();
    for (const auto& c : report.per_class) {
        j["per_class"].push_back({{"class", c.class_id},
                                  {"truths", c.truths},
                                  {"detections", c.detections},
                                  {"ap", c.ap ? json(*c.ap) : json(nullptr)}});
    }
    j["per_image"] = json::array();
    for (const auto& im : report.per_image) {
        j["per_image"].push_back({{"image", im.image}, {"counts", counts_json(im.counts)}});
    }
    return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    out << "images: " << report.images << '\n'
        << "iou_threshold: " << num(report.options.iou_threshold) << '\n'
        << "conf_threshold: " << num(report.options.conf_threshold) << '\n'
        << "tp: " << report.counts.tp << '\n'
        << "fp: " << report.counts.fp << '\n'
        << "fn: " << report.counts.fn << '\n'
        << "tn: " << report.counts.tn << '\n'
        << "precision: " << num(report.precision) << '\n'
        << "recall: " << num(report.recall) << '\n'
        << "f1: " << num(report.f1) << '\n'
        << "accuracy: " << num(report.accuracy) << " (TN fixed at 0)\n"
        << "map: " << (report.map ? num(*report.map) : std::string("undefined")) << '\n';
    for (const auto& c : report.per_class) {
        out << "ap[" << c.class_id << "]: " << (c.ap ? num(*c.ap) : std::string("undefined")) << '\n';
    }
    return out.str();
}

std::string pr_curve_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "class,threshold,precision,recall\n";
    char line[128];
    for (const auto& c : report.per_class) {
        for (const auto& p : c.curve) {
            std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", c.class_id, p.threshold, p.precision, p.recall);
            out << line;
        }
    }
    return out.str();
}

}  // namespace fishdet
