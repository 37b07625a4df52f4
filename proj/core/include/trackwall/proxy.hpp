#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "trackwall/gateway.hpp"

namespace trackwall {

inline constexpr std::string_view kBlockedBody = "blocked by trackwall";

// Opens a TCP connection and returns the connected descriptor, or -1.
using UpstreamDialer = std::function<int(const std::string& host, int port)>;

int dial_tcp(const std::string& host, int port, std::chrono::milliseconds timeout);

struct HttpHeaders {
  std::vector<std::pair<std::string, std::string>> fields;

  // Case-insensitive; first match.
  std::optional<std::string> get(std::string_view name) const;
  void remove(std::string_view name);
};

struct HttpRequestHead {
  std::string method;
  std::string target;
  std::string version;
  HttpHeaders headers;
};

struct HttpResponseHead {
  int status = 0;
  HttpHeaders headers;
};

// `head` excludes the terminating blank line. nullopt on malformed input.
std::optional<HttpRequestHead> parse_request_head(std::string_view head);
std::optional<HttpResponseHead> parse_response_head(std::string_view head);

// Decodes a complete chunked body; nullopt when truncated or malformed.
std::optional<std::string> decode_chunked(std::string_view body);

// Top-level navigation: explicit X-MTC-Navigate: 1, or an Accept header that
// asks for text/html from a request whose Referer is not an open page.
bool looks_like_navigation(const HttpRequestHead& request, bool referer_matches_open_page);

struct ProxyOptions {
  std::string host = "127.0.0.1";
  int port = 8118;  // 0 picks a free port
  std::chrono::milliseconds io_timeout{15000};
  std::size_t max_header_bytes = 64 * 1024;
  std::size_t max_buffered_page = 16 * 1024 * 1024;
};

// HTTP/1.1 forward proxy. One request per client connection (the proxy
// answers with Connection: close); CONNECT is tunneled without interception.
class ProxyServer {
 public:
  ProxyServer(Gateway& gateway, PageSessions& sessions, ProxyOptions options = {},
              UpstreamDialer dialer = {});
  ~ProxyServer();

  ProxyServer(const ProxyServer&) = delete;
  ProxyServer& operator=(const ProxyServer&) = delete;

  // Binds and starts accepting. Throws std::system_error.
  void start();
  void stop();
  int port() const noexcept { return port_; }

  std::uint64_t orphan_requests() const noexcept { return orphans_.load(); }

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void serve(int client_fd, std::string peer);
  void handle_connect(int client_fd, const HttpRequestHead& req, const std::string& client,
                      std::string pending);
  void handle_http(int client_fd, HttpRequestHead req, const std::string& client,
                   std::string body);
  int dial(const std::string& host, int port);
  void track(int fd);
  void untrack(int fd);
  void reap(bool all);

  Gateway& gateway_;
  PageSessions& sessions_;
  ProxyOptions options_;
  UpstreamDialer dialer_;

  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex workers_mutex_;
  std::vector<Worker> workers_;
  std::set<int> open_fds_;
  std::atomic<std::uint64_t> orphans_{0};
};

}  // namespace trackwall
