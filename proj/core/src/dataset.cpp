#include "fishdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "fishdet/error.hpp"
#include "fishdet/labels.hpp"
#include "fishdet/parallel.hpp"

namespace fs = std::filesystem;

namespace fishdet {

std::string_view to_string(ReviewState s) noexcept {
    switch (s) {
        case ReviewState::Unreviewed: return "unreviewed";
        case ReviewState::Accepted: return "accepted";
        case ReviewState::Corrected: return "corrected";
    }
    return "unreviewed";
}

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::Unassigned: return "unassigned";
        case Split::Train: return "train";
        case Split::Test: return "test";
    }
    return "unassigned";
}

std::optional<ReviewState> review_state_from(std::string_view s) noexcept {
    if (s == "unreviewed") return ReviewState::Unreviewed;
    if (s == "accepted") return ReviewState::Accepted;
    if (s == "corrected") return ReviewState::Corrected;
    return std::nullopt;
}

std::optional<Split> split_from(std::string_view s) noexcept {
    if (s == "unassigned") return Split::Unassigned;
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

bool can_transition(ReviewState from, ReviewState to) noexcept {
    return to == ReviewState::Corrected || static_cast<int>(to) > static_cast<int>(from);
}

namespace {

std::string relative_to(const std::string& path, const std::string& base) {
    if (base.empty()) return path;
    std::error_code ec;
    const auto rel = fs::proximate(fs::path(path), fs::path(base), ec);
    return ec ? path : rel.generic_string();
}

std::string resolve_against(const std::string& path, const std::string& base) {
    const fs::path p(path);
    if (p.is_absolute() || base.empty()) return p.lexically_normal().string();
    return (fs::path(base) / p).lexically_normal().string();
}

std::string parent_dir(const std::string& path) {
    auto parent = fs::absolute(fs::path(path)).parent_path();
    return parent.string();
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& manifest, const std::string& manifest_dir) {
    using nlohmann::json;
    json j;
    j["version"] = 1;
    j["seed"] = manifest.seed ? json(*manifest.seed) : json(nullptr);
    j["test_fraction"] = manifest.test_fraction ? json(*manifest.test_fraction) : json(nullptr);
    j["provenance"] = manifest.provenance;
    j["entries"] = json::array();
    for (const auto& e : manifest.entries) {
        j["entries"].push_back({{"id", e.id},
                                {"image", relative_to(e.image, manifest_dir)},
                                {"labels", relative_to(e.label_file, manifest_dir)},
                                {"split", to_string(e.split)},
                                {"review_state", to_string(e.review)},
                                {"revision", e.revision},
                                {"scores", e.scores}});
    }
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text, const std::string& manifest_dir) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::DecodeError, std::string("manifest is not valid JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("test_fraction") && !j["test_fraction"].is_null()) {
            m.test_fraction = j["test_fraction"].get<double>();
        }
        m.provenance = j.value("provenance", "");
        for (const auto& je : j.at("entries")) {
            LabeledImage e;
            e.id = je.at("id").get<std::size_t>();
            e.image = resolve_against(je.at("image").get<std::string>(), manifest_dir);
            e.label_file = resolve_against(je.at("labels").get<std::string>(), manifest_dir);
            const auto split = split_from(je.value("split", "unassigned"));
            const auto state = review_state_from(je.value("review_state", "unreviewed"));
            if (!split || !state) throw Error(Errc::DecodeError, "manifest entry has an unknown split or state");
            e.split = *split;
            e.review = *state;
            e.revision = je.value("revision", std::uint64_t{0});
            if (je.contains("scores")) e.scores = je["scores"].get<std::vector<double>>();
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(Errc::DecodeError, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    write_file_atomic(path, manifest_to_json(manifest, parent_dir(path)));
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open manifest '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return manifest_from_json(ss.str(), parent_dir(path));
}

std::vector<std::string> scan_images(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(Errc::IoError, "'" + dir + "' is not a directory");
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_path(entry.path().string())) out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string label_path_for(const std::string& image, const std::string& label_dir) {
    return (fs::path(label_dir) / fs::path(image).stem()).string() + ".txt";
}

DatasetManifest split_dataset(std::vector<LabeledImage> entries, double test_fraction, std::uint64_t seed) {
    if (entries.empty()) throw Error(Errc::EmptyDataset, "cannot split an empty dataset");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw Error(Errc::InvalidValue, "test fraction must lie strictly between 0 and 1");
    }
    const std::size_t n = entries.size();
    const auto wanted = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    const std::size_t test_count = std::min(wanted, n - 1);

    // Fisher-Yates over indices with a fully specified engine, so a seed
    // reproduces the same split on every platform.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

    for (auto& e : entries) e.split = Split::Train;
    for (std::size_t k = 0; k < test_count; ++k) entries[order[k]].split = Split::Test;

    DatasetManifest m;
    m.entries = std::move(entries);
    m.seed = seed;
    m.test_fraction = test_fraction;
    m.provenance = "split " + std::to_string(n - test_count) + "/" + std::to_string(test_count);
    return m;
}

std::array<std::size_t, 10> score_histogram(const std::vector<double>& scores) {
    std::array<std::size_t, 10> bins{};
    for (double s : scores) {
        const auto b = static_cast<std::size_t>(std::clamp(std::floor(s * 10.0), 0.0, 9.0));
        ++bins[b];
    }
    return bins;
}

PseudoLabelRun pseudo_label(const Detector& detector, const std::string& image_dir, const std::string& label_dir,
                            const PseudoLabelOptions& options) {
    const auto images = scan_images(image_dir);
    if (images.empty()) throw Error(Errc::EmptyDataset, "no images found in '" + image_dir + "'");
    fs::create_directories(label_dir);

    struct Outcome {
        bool ok = false;
        std::string error;
        std::vector<double> scores;
        std::size_t boxes = 0;
    };
    std::vector<Outcome> outcomes(images.size());
    parallel_for(images.size(), options.workers, [&](std::size_t i) {
        auto& out = outcomes[i];
        try {
            const auto image = read_image(images[i]);
            const auto result = detector.detect(image, options.conf_threshold);
            const auto labels = detections_to_labels(result.detections, image.width, image.height);
            write_label_file(label_path_for(images[i], label_dir), labels);
            for (const auto& d : result.detections) out.scores.push_back(static_cast<double>(d.score));
            out.boxes = labels.size();
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    // Single collector: manifest order follows the sorted image list.
    PseudoLabelRun run;
    run.summary.images = images.size();
    std::vector<double> all_scores;
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto& o = outcomes[i];
        if (!o.ok) {
            spdlog::warn("skipping {}: {}", images[i], o.error);
            run.summary.failures.push_back({images[i], o.error});
            continue;
        }
        LabeledImage e;
        e.id = run.manifest.entries.size();
        e.image = fs::absolute(images[i]).lexically_normal().string();
        e.label_file = fs::absolute(label_path_for(images[i], label_dir)).lexically_normal().string();
        e.scores = o.scores;
        all_scores.insert(all_scores.end(), o.scores.begin(), o.scores.end());
        run.summary.boxes += o.boxes;
        if (o.boxes == 0) ++run.summary.empty_images;
        ++run.summary.labeled;
        run.manifest.entries.push_back(std::move(e));
    }
    run.summary.score_histogram = score_histogram(all_scores);
    run.manifest.provenance = "pseudo-labels at confidence >= " + std::to_string(options.conf_threshold);
    return run;
}

std::string summary_to_json(const PseudoLabelSummary& summary) {
    using nlohmann::json;
    json j;
    j["images"] = summary.images;
    j["labeled"] = summary.labeled;
    j["boxes"] = summary.boxes;
    j["empty_images"] = summary.empty_images;
    j["score_histogram"] = summary.score_histogram;
    j["failures"] = json::array();
    for (const auto& f : summary.failures) j["failures"].push_back({{"image", f.image}, {"error", f.message}});
    return j.dump(2) + "\n";
}

std::string summary_to_text(const PseudoLabelSummary& summary) {
    std::ostringstream out;
    out << "images: " << summary.images << '\n'
        << "labeled: " << summary.labeled << '\n'
        << "boxes: " << summary.boxes << '\n'
        << "empty_images: " << summary.empty_images << '\n'
        << "skipped: " << summary.failures.size() << '\n'
        << "score_histogram:";
    for (auto c : summary.score_histogram) out << ' ' << c;
    out << '\n';
    return out.str();
}

EvalReport evaluate_dataset(const Detector& detector, const DatasetManifest& manifest,
                            const DatasetEvalOptions& options) {
    std::vector<const LabeledImage*> selected;
    for (const auto& e : manifest.entries) {
        if (!options.split || e.split == *options.split) selected.push_back(&e);
    }
    for (const auto* e : selected) {
        if (!fs::exists(e->label_file)) throw Error(Errc::MissingLabelFile, "no label file '" + e->label_file + "'");
    }

    const auto floor = static_cast<float>(std::min(options.metrics.ap_score_floor, options.metrics.conf_threshold));
    struct Work {
        std::vector<ScoredBox> dets;
        std::vector<GroundTruthBox> truths;
    };
    std::vector<Work> work(selected.size());
    parallel_for(selected.size(), options.workers, [&](std::size_t i) {
        const auto image = read_image(selected[i]->image);
        const auto result = detector.detect(image, floor);
        work[i].dets = detections_to_scored(result.detections, image.width, image.height);
        work[i].truths = read_label_file(selected[i]->label_file);
    });

    Evaluator evaluator(options.metrics);
    for (std::size_t i = 0; i < selected.size(); ++i) {
        evaluator.add_image(selected[i]->image, work[i].dets, work[i].truths);
    }
    return evaluator.report();
}

}  // namespace fishdet
