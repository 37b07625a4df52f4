#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include <httplib.h>

#include "test_support.hpp"
#include "trackwall/proxy.hpp"

namespace trackwall::testing {

struct RawResponse {
  int status = 0;
  std::string head;
  std::string body;
  std::string raw;
};

inline RawResponse parse_raw(std::string raw) {
  RawResponse r;
  r.raw = std::move(raw);
  const auto end = r.raw.find("\r\n\r\n");
  r.head = r.raw.substr(0, end);
  if (end != std::string::npos) r.body = r.raw.substr(end + 4);
  if (r.head.size() > 12) r.status = std::atoi(r.head.c_str() + 9);
  return r;
}

// Connects to 127.0.0.1:port, writes `request` and reads until the peer
// closes.
inline std::string exchange(int port, const std::string& request) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  timeval tv{10, 0};
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    return {};
  }
  std::size_t sent = 0;
  while (sent < request.size()) {
    const auto n = ::send(fd, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) break;
    sent += static_cast<std::size_t>(n);
  }
  std::string out;
  char buf[16384];
  for (;;) {
    const auto n = ::recv(fd, buf, sizeof(buf), 0);
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  return out;
}

struct StubPage {
  std::string content_type = "text/html; charset=utf-8";
  std::string body;
  bool chunked = false;
};

// Origin server for every host; pages are keyed by "host/path".
class StubUpstream {
 public:
  StubUpstream() {
    server_.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const auto host = req.get_header_value("Host");
      std::lock_guard lock(mutex_);
      last_accept_encoding_ = req.get_header_value("Accept-Encoding");
      const auto it = pages_.find(host.substr(0, host.find(':')) + req.path);
      if (it == pages_.end()) {
        res.status = 404;
        res.set_content("no such page", "text/plain");
        return;
      }
      const auto page = it->second;
      if (page.chunked) {
        res.set_chunked_content_provider(page.content_type,
                                         [page](std::size_t offset, httplib::DataSink& sink) {
                                           if (offset < page.body.size()) {
                                             const auto n = std::min<std::size_t>(
                                                 7, page.body.size() - offset);
                                             sink.write(page.body.data() + offset, n);
                                           } else {
                                             sink.done();
                                           }
                                           return true;
                                         });
      } else {
        res.set_content(page.body, page.content_type);
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubUpstream() {
    server_.stop();
    thread_.join();
  }

  void add(const std::string& host_path, StubPage page) {
    std::lock_guard lock(mutex_);
    pages_[host_path] = std::move(page);
  }
  int port() const { return port_; }
  std::size_t requests() const { return requests_.load(); }
  std::string last_accept_encoding() const {
    std::lock_guard lock(mutex_);
    return last_accept_encoding_;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::map<std::string, StubPage> pages_;
  std::string last_accept_encoding_;
  std::atomic<std::size_t> requests_{0};
};

// Proxy wired to a stub upstream: every dial goes to the stub unless the
// host is marked unreachable.
class ProxyRig {
 public:
  explicit ProxyRig(ProxyOptions options = {})
      : policy_(shared_resources().taxonomy),
        gateway_(shared_resources(), policy_, registry_),
        sessions_(&log_) {
    options.port = 0;
    proxy_ = std::make_unique<ProxyServer>(
        gateway_, sessions_, options, [this](const std::string& host, int) {
          ++dials_;
          {
            std::lock_guard lock(mutex_);
            if (unreachable_.contains(host)) return -1;
          }
          return dial_tcp("127.0.0.1", upstream_.port(), std::chrono::milliseconds(2000));
        });
    proxy_->start();
  }
  ~ProxyRig() { proxy_->stop(); }

  RawResponse get(const std::string& url, const std::string& client,
                  const std::string& extra_headers = "") {
    const auto host = url.substr(7, url.find('/', 7) - 7);
    return parse_raw(exchange(proxy_->port(), "GET " + url + " HTTP/1.1\r\nHost: " + host +
                                                  "\r\nX-MTC-Client: " + client + "\r\n" +
                                                  extra_headers + "\r\n"));
  }
  RawResponse navigate(const std::string& url, const std::string& client) {
    return get(url, client,
               "Accept: text/html,application/xhtml+xml\r\nAccept-Encoding: gzip, br\r\n");
  }
  RawResponse subresource(const std::string& url, const std::string& client,
                          const std::string& referer, const std::string& extra = "") {
    return get(url, client, "Accept: */*\r\nReferer: " + referer + "\r\n" + extra);
  }

  void unreachable(const std::string& host) {
    std::lock_guard lock(mutex_);
    unreachable_.insert(host);
  }

  StubUpstream& upstream() { return upstream_; }
  PolicyStore& policy() { return policy_; }
  TrackerRegistry& registry() { return registry_; }
  Gateway& gateway() { return gateway_; }
  PageSessions& sessions() { return sessions_; }
  EventLog& log() { return log_; }
  ProxyServer& proxy() { return *proxy_; }
  std::size_t dials() const { return dials_.load(); }

 private:
  StubUpstream upstream_;
  PolicyStore policy_;
  TrackerRegistry registry_;
  Gateway gateway_;
  EventLog log_;
  PageSessions sessions_;
  std::unique_ptr<ProxyServer> proxy_;
  std::atomic<std::size_t> dials_{0};
  std::mutex mutex_;
  std::set<std::string> unreachable_;
};

}  // namespace trackwall::testing
