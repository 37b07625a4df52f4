#include "trackwall/proxy.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <ctime>
#include <iostream>
#include <system_error>

#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/url.hpp"

namespace trackwall {

namespace {

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Appends up to one buffer's worth; returns bytes read, 0 on EOF, -1 on error.
long recv_some(int fd, std::string& out) {
  char buf[16384];
  for (;;) {
    const auto n = ::recv(fd, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n > 0) out.append(buf, static_cast<std::size_t>(n));
    return n;
  }
}

void pipe_until_eof(int from, int to) {
  std::string chunk;
  for (;;) {
    chunk.clear();
    if (recv_some(from, chunk) <= 0) return;
    if (!send_all(to, chunk)) return;
  }
}

std::string simple_response(int status, std::string_view reason, std::string_view body) {
  std::string out = "HTTP/1.1 " + std::to_string(status) + " " + std::string(reason) + "\r\n";
  out += "Content-Type: text/plain; charset=utf-8\r\n";
  out += "Content-Length: " + std::to_string(body.size()) + "\r\n";
  out += "Connection: close\r\n\r\n";
  out += body;
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && ascii_lower(a) == ascii_lower(b);
}

std::vector<std::string_view> head_lines(std::string_view head) {
  std::vector<std::string_view> lines;
  while (!head.empty()) {
    auto nl = head.find('\n');
    auto line = head.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    head.remove_prefix(nl + 1);
  }
  return lines;
}

bool parse_fields(const std::vector<std::string_view>& lines, HttpHeaders& headers) {
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto colon = lines[i].find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    headers.fields.emplace_back(trim(lines[i].substr(0, colon)), trim(lines[i].substr(colon + 1)));
  }
  return true;
}

std::optional<int> parse_port(std::string_view text) {
  int port = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
  if (ec != std::errc() || p != text.data() + text.size() || port <= 0 || port > 65535) {
    return std::nullopt;
  }
  return port;
}

// host:port from a CONNECT target, IPv6 literals in brackets.
std::optional<std::pair<std::string, int>> split_authority(std::string_view target) {
  const auto colon = target.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  auto port = parse_port(target.substr(colon + 1));
  if (!port) return std::nullopt;
  auto host = ascii_lower(target.substr(0, colon));
  if (host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return std::make_pair(host, *port);
}

std::string upstream_request(const HttpRequestHead& req, const Url& url, std::string_view body,
                             bool identity_encoding) {
  HttpHeaders headers = req.headers;
  if (auto conn = headers.get("Connection")) {
    for (const auto& token : split(*conn, ',')) headers.remove(trim(token));
  }
  for (auto name : {"Connection", "Proxy-Connection", "Keep-Alive", "Proxy-Authorization", "TE",
                    "Trailer", "Upgrade", "X-MTC-Client", "X-MTC-Navigate"}) {
    headers.remove(name);
  }
  if (identity_encoding) headers.remove("Accept-Encoding");
  if (!headers.get("Host")) headers.fields.emplace_back("Host", url.authority());

  std::string out = req.method + " " + url.target + " HTTP/1.1\r\n";
  for (const auto& [name, value] : headers.fields) out += name + ": " + value + "\r\n";
  out += "Connection: close\r\n\r\n";
  out += body;
  return out;
}

std::int64_t unix_now() { return static_cast<std::int64_t>(std::time(nullptr)); }

}  // namespace

int dial_tcp(const std::string& host, int port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) return -1;
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    set_timeouts(fd, timeout);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  return fd;
}

std::optional<std::string> HttpHeaders::get(std::string_view name) const {
  for (const auto& [k, v] : fields) {
    if (iequals(k, name)) return v;
  }
  return std::nullopt;
}

void HttpHeaders::remove(std::string_view name) {
  std::erase_if(fields, [&](const auto& f) { return iequals(f.first, name); });
}

std::optional<HttpRequestHead> parse_request_head(std::string_view head) {
  const auto lines = head_lines(head);
  if (lines.empty()) return std::nullopt;
  const auto parts = split(lines[0], ' ');
  if (parts.size() != 3 || parts[0].empty() || parts[1].empty()) return std::nullopt;
  if (!parts[2].starts_with("HTTP/")) return std::nullopt;
  HttpRequestHead req{parts[0], parts[1], parts[2], {}};
  if (!parse_fields(lines, req.headers)) return std::nullopt;
  return req;
}

std::optional<HttpResponseHead> parse_response_head(std::string_view head) {
  const auto lines = head_lines(head);
  if (lines.empty() || !lines[0].starts_with("HTTP/")) return std::nullopt;
  const auto sp = lines[0].find(' ');
  if (sp == std::string_view::npos) return std::nullopt;
  const auto code = lines[0].substr(sp + 1, 3);
  HttpResponseHead res;
  const auto [p, ec] = std::from_chars(code.data(), code.data() + code.size(), res.status);
  if (ec != std::errc() || p != code.data() + code.size()) return std::nullopt;
  if (!parse_fields(lines, res.headers)) return std::nullopt;
  return res;
}

std::optional<std::string> decode_chunked(std::string_view body) {
  std::string out;
  for (;;) {
    const auto eol = body.find("\r\n");
    if (eol == std::string_view::npos) return std::nullopt;
    auto size_text = body.substr(0, eol);
    if (const auto semi = size_text.find(';'); semi != std::string_view::npos) {
      size_text = size_text.substr(0, semi);
    }
    const auto trimmed = trim(size_text);
    std::size_t size = 0;
    const auto [p, ec] =
        std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), size, 16);
    if (ec != std::errc() || p != trimmed.data() + trimmed.size()) return std::nullopt;
    body.remove_prefix(eol + 2);
    if (size == 0) return out;
    if (body.size() < size + 2) return std::nullopt;
    out.append(body.substr(0, size));
    body.remove_prefix(size + 2);
  }
}

bool looks_like_navigation(const HttpRequestHead& request, bool referer_matches_open_page) {
  if (request.headers.get("X-MTC-Navigate") == "1") return true;
  if (request.method != "GET") return false;
  const auto accept = request.headers.get("Accept");
  if (!accept || ascii_lower(*accept).find("text/html") == std::string::npos) return false;
  return !referer_matches_open_page;
}

ProxyServer::ProxyServer(Gateway& gateway, PageSessions& sessions, ProxyOptions options,
                         UpstreamDialer dialer)
    : gateway_(gateway),
      sessions_(sessions),
      options_(std::move(options)),
      dialer_(std::move(dialer)) {}

ProxyServer::~ProxyServer() { stop(); }

void ProxyServer::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICHOST;
  addrinfo* res = nullptr;
  const auto service = std::to_string(options_.port);
  if (getaddrinfo(options_.host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    throw std::system_error(EINVAL, std::generic_category(), "bad listen address " + options_.host);
  }
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (listen_fd_ < 0 || ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 ||
      ::listen(listen_fd_, 128) != 0) {
    const int err = errno;
    freeaddrinfo(res);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(), "cannot listen on " + options_.host);
  }
  freeaddrinfo(res);

  sockaddr_storage bound{};
  socklen_t len = sizeof(bound);
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = bound.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);

  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void ProxyServer::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  {
    std::lock_guard lock(workers_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  reap(true);
}

void ProxyServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    sockaddr_storage peer{};
    socklen_t len = sizeof(peer);
    const int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len);
    if (fd < 0) continue;

    char addr[INET6_ADDRSTRLEN] = {0};
    if (peer.ss_family == AF_INET6) {
      inet_ntop(AF_INET6, &reinterpret_cast<sockaddr_in6*>(&peer)->sin6_addr, addr, sizeof(addr));
    } else {
      inet_ntop(AF_INET, &reinterpret_cast<sockaddr_in*>(&peer)->sin_addr, addr, sizeof(addr));
    }
    track(fd);
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread worker([this, fd, peer_addr = std::string(addr), done] {
      try {
        serve(fd, peer_addr);
      } catch (const std::exception& e) {
        std::clog << "trackwall proxy: " << e.what() << "\n";
      }
      untrack(fd);
      ::close(fd);
      *done = true;
    });
    {
      std::lock_guard lock(workers_mutex_);
      workers_.push_back({std::move(worker), std::move(done)});
    }
    reap(false);
  }
}

void ProxyServer::reap(bool all) {
  std::vector<Worker> finished;
  {
    std::lock_guard lock(workers_mutex_);
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (all || *it->done) {
        finished.push_back(std::move(*it));
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& w : finished) w.thread.join();
}

void ProxyServer::track(int fd) {
  std::lock_guard lock(workers_mutex_);
  open_fds_.insert(fd);
}

void ProxyServer::untrack(int fd) {
  std::lock_guard lock(workers_mutex_);
  open_fds_.erase(fd);
}

int ProxyServer::dial(const std::string& host, int port) {
  const int fd = dialer_ ? dialer_(host, port) : dial_tcp(host, port, options_.io_timeout);
  if (fd >= 0) {
    set_timeouts(fd, options_.io_timeout);
    track(fd);
  }
  return fd;
}

void ProxyServer::serve(int fd, std::string peer) {
  set_timeouts(fd, options_.io_timeout);
  std::string buf;
  std::size_t head_end = std::string::npos;
  while ((head_end = buf.find("\r\n\r\n")) == std::string::npos &&
         buf.size() <= options_.max_header_bytes) {
    if (recv_some(fd, buf) <= 0) return;
  }
  if (head_end == std::string::npos || head_end > options_.max_header_bytes) {
    send_all(fd, simple_response(431, "Request Header Fields Too Large", ""));
    return;
  }
  auto req = parse_request_head(std::string_view(buf).substr(0, head_end));
  if (!req) {
    send_all(fd, simple_response(400, "Bad Request", "malformed request"));
    return;
  }
  std::string rest = buf.substr(head_end + 4);
  const auto client = req->headers.get("X-MTC-Client").value_or(peer);

  if (req->method == "CONNECT") {
    handle_connect(fd, *req, client, std::move(rest));
    return;
  }
  if (req->headers.get("Transfer-Encoding")) {
    send_all(fd, simple_response(411, "Length Required", "chunked request bodies are not supported"));
    return;
  }
  std::size_t length = 0;
  if (auto cl = req->headers.get("Content-Length")) {
    const auto [p, ec] = std::from_chars(cl->data(), cl->data() + cl->size(), length);
    if (ec != std::errc() || p != cl->data() + cl->size()) {
      send_all(fd, simple_response(400, "Bad Request", "bad Content-Length"));
      return;
    }
  }
  while (rest.size() < length) {
    if (recv_some(fd, rest) <= 0) return;
  }
  rest.resize(length);
  handle_http(fd, std::move(*req), client, std::move(rest));
}

void ProxyServer::handle_connect(int fd, const HttpRequestHead& req, const std::string& client,
                                 std::string pending) {
  const auto target = split_authority(req.target);
  if (!target) {
    send_all(fd, simple_response(400, "Bad Request", "CONNECT target must be host:port"));
    return;
  }
  if (auto session = sessions_.current(client)) {
    std::lock_guard lock(session->mutex);
    if (gateway_.on_request(session->ctx, target->first).blocked) {
      send_all(fd, simple_response(403, "Forbidden", kBlockedBody));
      return;
    }
  } else {
    ++orphans_;
    gateway_.on_orphan_request();
  }

  const int up = dial(target->first, target->second);
  if (up < 0) {
    send_all(fd, simple_response(502, "Bad Gateway", "upstream unreachable"));
    return;
  }
  if (send_all(fd, "HTTP/1.1 200 Connection Established\r\n\r\n") &&
      (pending.empty() || send_all(up, pending))) {
    pollfd fds[2] = {{fd, POLLIN, 0}, {up, POLLIN, 0}};
    bool open[2] = {true, true};
    std::string chunk;
    while (open[0] || open[1]) {
      fds[0].events = open[0] ? POLLIN : 0;
      fds[1].events = open[1] ? POLLIN : 0;
      const int ready = ::poll(fds, 2, static_cast<int>(options_.io_timeout.count()));
      if (ready <= 0) break;
      bool failed = false;
      for (int i = 0; i < 2; ++i) {
        if (!open[i] || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        chunk.clear();
        const int other = i == 0 ? up : fd;
        if (recv_some(fds[i].fd, chunk) <= 0) {
          open[i] = false;
          ::shutdown(other, SHUT_WR);
        } else if (!send_all(other, chunk)) {
          failed = true;
        }
      }
      if (failed) break;
    }
  }
  untrack(up);
  ::close(up);
}

void ProxyServer::handle_http(int fd, HttpRequestHead req, const std::string& client,
                              std::string body) {
  const auto url = parse_url(req.target);
  if (!url || url->scheme != "http") {
    send_all(fd, simple_response(400, "Bad Request", "absolute http:// request target required"));
    return;
  }
  const int upstream_port = url->port.empty() ? 80 : parse_port(url->port).value_or(80);
  const auto page_url = url->str();

  std::optional<std::string> referer;
  if (auto r = req.headers.get("Referer")) {
    if (auto parsed = parse_url(*r)) referer = parsed->str();
  }
  auto referer_session = referer ? sessions_.match(client, *referer) : nullptr;
  const bool navigation = looks_like_navigation(req, referer_session != nullptr);

  if (!navigation) {
    auto session = referer_session ? referer_session : sessions_.current(client);
    if (session) {
      std::lock_guard lock(session->mutex);
      const auto v = gateway_.on_request(session->ctx, url->host);
      if (req.headers.get("Sec-Fetch-Dest") == "iframe") add_unique(session->ctx.event.iframes, page_url);
      if (v.blocked) {
        send_all(fd, simple_response(403, "Forbidden", kBlockedBody));
        return;
      }
    } else {
      ++orphans_;
      gateway_.on_orphan_request();
      std::clog << "trackwall proxy: orphan request from " << client << " to " << url->host
                << "\n";
    }
  }

  const int up = dial(url->host, upstream_port);
  if (up < 0) {
    send_all(fd, simple_response(502, "Bad Gateway", "upstream unreachable"));
    return;
  }
  struct Closer {
    ProxyServer* self;
    int fd;
    ~Closer() {
      self->untrack(fd);
      ::close(fd);
    }
  } closer{this, up};

  if (!send_all(up, upstream_request(req, *url, body, navigation))) {
    send_all(fd, simple_response(502, "Bad Gateway", "upstream write failed"));
    return;
  }
  if (!navigation) {
    pipe_until_eof(up, fd);
    return;
  }

  // Buffer the page so its context exists before the client sees any byte
  // (and so before any of its subresource requests can arrive).
  std::string response;
  bool eof = false;
  while (response.size() < options_.max_buffered_page) {
    const auto n = recv_some(up, response);
    if (n <= 0) {
      eof = true;
      break;
    }
  }
  const auto head_end = response.find("\r\n\r\n");
  const auto head = head_end == std::string::npos
                        ? std::nullopt
                        : parse_response_head(std::string_view(response).substr(0, head_end));
  if (!head) {
    send_all(fd, simple_response(502, "Bad Gateway", "no valid upstream response"));
    return;
  }

  RawPage raw{page_url, head->headers.get("Content-Type").value_or(""),
              response.substr(head_end + 4), head->status};
  if (ascii_lower(head->headers.get("Transfer-Encoding").value_or("")).find("chunked") !=
      std::string::npos) {
    if (auto decoded = decode_chunked(raw.body)) raw.body = std::move(*decoded);
  }
  const auto encoding = ascii_lower(head->headers.get("Content-Encoding").value_or("identity"));
  if (encoding != "identity" && !encoding.empty()) raw.body.clear();

  const auto& res = gateway_.resources();
  auto ctx = gateway_.begin_page(extract_features(raw, res.psl, res.taxonomy), unix_now(), client);
  sessions_.open(client, std::move(ctx));

  if (send_all(fd, response) && !eof) pipe_until_eof(up, fd);
}

}  // namespace trackwall
