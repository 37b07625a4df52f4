#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trackwall/events.hpp"
#include "trackwall/gateway.hpp"

namespace trackwall {

struct ControlApiOptions {
  std::string host = "127.0.0.1";
  int port = 8119;  // 0 picks a free port
  std::filesystem::path review_file = "broken_pages.jsonl";
  std::optional<std::filesystem::path> ui_dir;  // served under /ui when set
};

// Local JSON API over the live gateway. Every error body is
// {"httpStatus", "code", "message"} with code one of unknown_category,
// malformed_url, not_found, invalid_body.
class ControlApi {
 public:
  // Supplies the session's events for /metrics.
  using EventSource = std::function<std::vector<BrowsingEvent>()>;

  ControlApi(Gateway& gateway, PageSessions& sessions, EventSource events,
             ControlApiOptions options = {});
  ~ControlApi();

  ControlApi(const ControlApi&) = delete;
  ControlApi& operator=(const ControlApi&) = delete;

  // Binds and serves on a background thread. Throws std::runtime_error when
  // the address cannot be bound.
  void start();
  void stop();
  int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trackwall
