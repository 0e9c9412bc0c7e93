#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fishdet/dataset.hpp"
#include "fishdet/metrics.hpp"

namespace httplib {
class Server;
}

namespace fishdet::cli {

/// Outcome of a review request, mapped 1:1 onto HTTP statuses by the router.
enum class ReviewStatus { Ok = 200, BadRequest = 400, NotFound = 404, Conflict = 409, Unprocessable = 422 };

struct ReviewReply {
    ReviewStatus status = ReviewStatus::Ok;
    /// JSON document (success payload or {"error": ...}).
    std::string body;
};

struct ReviewStats {
    std::size_t total = 0;
    std::size_t unreviewed = 0;
    std::size_t accepted = 0;
    std::size_t corrected = 0;
    std::size_t boxes = 0;
    std::array<std::size_t, 10> score_histogram{};
};

/// Review state for one manifest. Label and manifest writes are atomic
/// renames; every successful save appends one JSON line to the audit log.
class ReviewSession {
public:
    /// `audit_log` defaults to `audit.jsonl` next to the manifest.
    explicit ReviewSession(std::string manifest_path, std::string audit_log = {});

    const std::string& manifest_path() const noexcept { return manifest_path_; }
    const std::string& audit_log_path() const noexcept { return audit_path_; }
    std::size_t size() const;

    /// Paged listing; `state` filters by review state name.
    ReviewReply list_images(std::size_t page, std::size_t per_page, const std::optional<std::string>& state) const;
    ReviewReply get_labels(std::size_t id) const;
    /// Body: {"revision": n, "state": "corrected"|"accepted", "boxes": [...], "user": "..."}.
    ReviewReply put_labels(std::size_t id, const std::string& body);
    ReviewReply stats_json() const;
    ReviewStats stats() const;

    /// Image path for the raster endpoint, or nullopt for an unknown id.
    std::optional<std::string> image_path(std::size_t id) const;

private:
    std::string manifest_path_;
    std::string audit_path_;
    DatasetManifest manifest_;
    mutable std::shared_mutex manifest_mutex_;
    std::vector<std::unique_ptr<std::mutex>> image_mutexes_;
    std::mutex audit_mutex_;
};

/// Installs the review endpoints; `static_dir` (optional) is mounted at "/".
void install_routes(httplib::Server& server, ReviewSession& session, const std::string& static_dir = {});

/// Content type for an image path, by extension.
std::string image_content_type(const std::string& path);

}  // namespace fishdet::cli
