#include "fishdet/cli/review.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "fishdet/error.hpp"
#include "fishdet/image.hpp"
#include "fishdet/labels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fishdet::cli {

namespace {

ReviewReply reply(ReviewStatus status, const json& body) { return {status, body.dump()}; }

ReviewReply error_reply(ReviewStatus status, const std::string& message) {
    return reply(status, json{{"error", message}});
}

json boxes_to_json(const std::vector<GroundTruthBox>& boxes) {
    json arr = json::array();
    for (const auto& b : boxes) {
        arr.push_back({{"class", b.class_id}, {"cx", b.box.cx}, {"cy", b.box.cy}, {"w", b.box.w}, {"h", b.box.h}});
    }
    return arr;
}

/// Validates one API box with the same rules the label parser applies.
std::optional<std::string> box_from_json(const json& j, GroundTruthBox& out) {
    if (!j.is_object()) return "box must be an object";
    for (const char* key : {"cx", "cy", "w", "h"}) {
        if (!j.contains(key) || !j[key].is_number()) return std::string("box field '") + key + "' must be a number";
    }
    const auto cls = j.value("class", json(0));
    if (!cls.is_number_integer() || cls.get<long long>() < 0) return "box class must be a non-negative integer";
    out.class_id = cls.get<int>();
    out.box = {j["cx"].get<double>(), j["cy"].get<double>(), j["w"].get<double>(), j["h"].get<double>()};
    for (double v : {out.box.cx, out.box.cy, out.box.w, out.box.h}) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) return "box coordinates must lie in [0, 1]";
    }
    if (out.box.w <= 0.0 || out.box.h <= 0.0) return "box width and height must be positive";
    return std::nullopt;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

json entry_summary(const LabeledImage& e) {
    double max_score = 0.0;
    for (double s : e.scores) max_score = std::max(max_score, s);
    return {{"id", e.id},
            {"image", fs::path(e.image).filename().string()},
            {"review_state", to_string(e.review)},
            {"split", to_string(e.split)},
            {"revision", e.revision},
            {"pseudo_boxes", e.scores.size()},
            {"max_score", e.scores.empty() ? json(nullptr) : json(max_score)}};
}

}  // namespace

ReviewSession::ReviewSession(std::string manifest_path, std::string audit_log)
    : manifest_path_(std::move(manifest_path)), audit_path_(std::move(audit_log)) {
    manifest_ = load_manifest(manifest_path_);
    if (audit_path_.empty()) audit_path_ = (fs::absolute(manifest_path_).parent_path() / "audit.jsonl").string();
    for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
        if (manifest_.entries[i].id != i) {
            throw Error(Errc::InvalidValue, "manifest ids must run 0..n-1 in order");
        }
        image_mutexes_.push_back(std::make_unique<std::mutex>());
    }
}

std::size_t ReviewSession::size() const {
    std::shared_lock lock(manifest_mutex_);
    return manifest_.entries.size();
}

ReviewReply ReviewSession::list_images(std::size_t page, std::size_t per_page,
                                       const std::optional<std::string>& state) const {
    if (per_page == 0 || per_page > 1000) return error_reply(ReviewStatus::BadRequest, "per_page must be in 1..1000");
    std::optional<ReviewState> wanted;
    if (state) {
        wanted = review_state_from(*state);
        if (!wanted) return error_reply(ReviewStatus::BadRequest, "unknown review state '" + *state + "'");
    }
    std::shared_lock lock(manifest_mutex_);
    std::vector<const LabeledImage*> matching;
    for (const auto& e : manifest_.entries) {
        if (!wanted || e.review == *wanted) matching.push_back(&e);
    }
    json items = json::array();
    for (std::size_t i = page * per_page; i < matching.size() && i < (page + 1) * per_page; ++i) {
        items.push_back(entry_summary(*matching[i]));
    }
    return reply(ReviewStatus::Ok,
                 json{{"page", page}, {"per_page", per_page}, {"total", matching.size()}, {"images", items}});
}

ReviewReply ReviewSession::get_labels(std::size_t id) const {
    LabeledImage entry;
    {
        std::shared_lock lock(manifest_mutex_);
        if (id >= manifest_.entries.size()) return error_reply(ReviewStatus::NotFound, "unknown image id");
        entry = manifest_.entries[id];
    }
    std::lock_guard file_lock(*image_mutexes_[id]);
    std::vector<GroundTruthBox> boxes;
    try {
        if (fs::exists(entry.label_file)) boxes = read_label_file(entry.label_file);
    } catch (const Error& e) {
        return error_reply(ReviewStatus::Unprocessable, e.what());
    }
    return reply(ReviewStatus::Ok, json{{"id", id},
                                        {"revision", entry.revision},
                                        {"review_state", to_string(entry.review)},
                                        {"boxes", boxes_to_json(boxes)}});
}

ReviewReply ReviewSession::put_labels(std::size_t id, const std::string& body) {
    if (id >= size()) return error_reply(ReviewStatus::NotFound, "unknown image id");
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        return error_reply(ReviewStatus::BadRequest, "request body is not valid JSON");
    }
    if (!j.is_object() || !j.contains("revision") || !j["revision"].is_number_unsigned()) {
        return error_reply(ReviewStatus::Unprocessable, "'revision' must be a non-negative integer");
    }
    if (!j.contains("boxes") || !j["boxes"].is_array()) {
        return error_reply(ReviewStatus::Unprocessable, "'boxes' must be an array");
    }
    const auto new_state = review_state_from(j.value("state", std::string("corrected")));
    if (!new_state || *new_state == ReviewState::Unreviewed) {
        return error_reply(ReviewStatus::Unprocessable, "'state' must be 'corrected' or 'accepted'");
    }
    std::vector<GroundTruthBox> boxes;
    for (std::size_t i = 0; i < j["boxes"].size(); ++i) {
        GroundTruthBox b;
        if (auto problem = box_from_json(j["boxes"][i], b)) {
            return error_reply(ReviewStatus::Unprocessable, "box " + std::to_string(i) + ": " + *problem);
        }
        boxes.push_back(b);
    }
    const auto revision = j["revision"].get<std::uint64_t>();
    const auto user = j.value("user", std::string("curator"));

    std::lock_guard file_lock(*image_mutexes_[id]);
    LabeledImage entry;
    {
        std::shared_lock lock(manifest_mutex_);
        entry = manifest_.entries[id];
    }
    if (revision != entry.revision) {
        return reply(ReviewStatus::Conflict, json{{"error", "stale revision"}, {"revision", entry.revision}});
    }
    if (!can_transition(entry.review, *new_state)) {
        return error_reply(ReviewStatus::Unprocessable, "cannot move from '" + std::string(to_string(entry.review)) +
                                                            "' to '" + std::string(to_string(*new_state)) + "'");
    }

    std::vector<std::string> warnings;
    const auto text = write_labels(boxes, &warnings);
    const auto stored = parse_labels(text);
    try {
        write_file_atomic(entry.label_file, text);
        std::unique_lock lock(manifest_mutex_);
        auto& live = manifest_.entries[id];
        const auto previous = live;
        live.review = *new_state;
        live.revision = revision + 1;
        try {
            save_manifest(manifest_, manifest_path_);
        } catch (...) {
            live = previous;
            throw;
        }
        entry = live;
    } catch (const Error& e) {
        spdlog::error("saving labels for image {} failed: {}", id, e.what());
        return error_reply(ReviewStatus::Unprocessable, e.what());
    }

    {
        std::lock_guard audit_lock(audit_mutex_);
        std::ofstream audit(audit_path_, std::ios::app);
        audit << json{{"time", utc_now()},
                      {"user", user},
                      {"id", id},
                      {"image", fs::path(entry.image).filename().string()},
                      {"state", to_string(entry.review)},
                      {"from_revision", revision},
                      {"to_revision", entry.revision},
                      {"boxes", stored.size()}}
                     .dump()
              << '\n';
    }
    return reply(ReviewStatus::Ok, json{{"id", id},
                                        {"revision", entry.revision},
                                        {"review_state", to_string(entry.review)},
                                        {"boxes", boxes_to_json(stored)},
                                        {"warnings", warnings}});
}

ReviewStats ReviewSession::stats() const {
    std::vector<LabeledImage> entries;
    {
        std::shared_lock lock(manifest_mutex_);
        entries = manifest_.entries;
    }
    ReviewStats s;
    s.total = entries.size();
    std::vector<double> scores;
    for (const auto& e : entries) {
        switch (e.review) {
            case ReviewState::Unreviewed: ++s.unreviewed; break;
            case ReviewState::Accepted: ++s.accepted; break;
            case ReviewState::Corrected: ++s.corrected; break;
        }
        std::lock_guard file_lock(*image_mutexes_[e.id]);
        try {
            if (fs::exists(e.label_file)) s.boxes += read_label_file(e.label_file).size();
        } catch (const Error& err) {
            spdlog::warn("stats: {}", err.what());
        }
        scores.insert(scores.end(), e.scores.begin(), e.scores.end());
    }
    s.score_histogram = score_histogram(scores);
    return s;
}

ReviewReply ReviewSession::stats_json() const {
    const auto s = stats();
    return reply(ReviewStatus::Ok, json{{"total", s.total},
                                        {"unreviewed", s.unreviewed},
                                        {"accepted", s.accepted},
                                        {"corrected", s.corrected},
                                        {"boxes", s.boxes},
                                        {"score_histogram", s.score_histogram}});
}

std::optional<std::string> ReviewSession::image_path(std::size_t id) const {
    std::shared_lock lock(manifest_mutex_);
    if (id >= manifest_.entries.size()) return std::nullopt;
    return manifest_.entries[id].image;
}

std::string image_content_type(const std::string& path) {
    auto ext = fs::path(path).extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".ppm") return "image/x-portable-pixmap";
    return "application/octet-stream";
}

void install_routes(httplib::Server& server, ReviewSession& session, const std::string& static_dir) {
    auto send = [](httplib::Response& res, const ReviewReply& r) {
        res.status = static_cast<int>(r.status);
        res.set_content(r.body, "application/json");
    };
    auto parse_id = [](const httplib::Request& req) -> std::optional<std::size_t> {
        const auto& s = req.matches[1].str();
        std::size_t id = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
        if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
        return id;
    };
    auto not_found = error_reply(ReviewStatus::NotFound, "unknown image id");

    server.Get("/images", [&session, send](const httplib::Request& req, httplib::Response& res) {
        std::size_t page = 0;
        std::size_t per_page = 50;
        try {
            if (req.has_param("page")) page = std::stoul(req.get_param_value("page"));
            if (req.has_param("per_page")) per_page = std::stoul(req.get_param_value("per_page"));
        } catch (const std::exception&) {
            send(res, error_reply(ReviewStatus::BadRequest, "page and per_page must be integers"));
            return;
        }
        std::optional<std::string> state;
        if (req.has_param("state")) state = req.get_param_value("state");
        send(res, session.list_images(page, per_page, state));
    });
    server.Get(R"(/images/(\d+)/raster)", [&session, send, parse_id, not_found](const httplib::Request& req,
                                                                               httplib::Response& res) {
        const auto id = parse_id(req);
        const auto path = id ? session.image_path(*id) : std::nullopt;
        if (!path) return send(res, not_found);
        try {
            const auto bytes = read_file_bytes(*path);
            res.set_content(std::string(bytes.begin(), bytes.end()), image_content_type(*path));
        } catch (const Error& e) {
            send(res, error_reply(ReviewStatus::NotFound, e.what()));
        }
    });
    server.Get(R"(/images/(\d+)/labels)", [&session, send, parse_id, not_found](const httplib::Request& req,
                                                                               httplib::Response& res) {
        const auto id = parse_id(req);
        send(res, id ? session.get_labels(*id) : not_found);
    });
    server.Put(R"(/images/(\d+)/labels)", [&session, send, parse_id, not_found](const httplib::Request& req,
                                                                               httplib::Response& res) {
        const auto id = parse_id(req);
        send(res, id ? session.put_labels(*id, req.body) : not_found);
    });
    server.Get("/stats", [&session, send](const httplib::Request&, httplib::Response& res) {
        send(res, session.stats_json());
    });
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
        throw Error(Errc::IoError, "static directory '" + static_dir + "' does not exist");
    }
}

}  // namespace fishdet::cli
