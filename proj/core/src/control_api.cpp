#include "trackwall/control_api.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "trackwall/analytics.hpp"
#include "trackwall/canonical_json.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/url.hpp"

namespace trackwall {

namespace {

constexpr const char* kJson = "application/json";

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

void reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, const ApiError& e) {
  nlohmann::ordered_json body;
  body["httpStatus"] = e.status;
  body["code"] = e.code;
  body["message"] = e.message;
  reply(res, e.status, body);
}

ApiError from_core(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kUnknownCategory:
      return {400, "unknown_category", e.what()};
    case ErrorCode::kMalformedUrl:
      return {400, "malformed_url", e.what()};
    default:
      return {400, "invalid_body", e.what()};
  }
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw ApiError{400, "invalid_body", std::string("body is not JSON: ") + e.what()};
  }
}

std::vector<std::string> string_array(const nlohmann::json& v, const char* what) {
  if (!v.is_array()) throw ApiError{400, "invalid_body", std::string(what) + " must be an array"};
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw ApiError{400, "invalid_body", std::string(what) + " entries must be strings"};
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string required_string(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string() ||
      doc[key].get<std::string>().empty()) {
    throw ApiError{400, "invalid_body", std::string(key) + " must be a non-empty string"};
  }
  return doc[key].get<std::string>();
}

// Wraps a handler so core errors and ApiErrors become JSON error bodies.
template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ApiError& e) {
      reply_error(res, e);
    } catch (const Error& e) {
      reply_error(res, from_core(e));
    } catch (const std::exception& e) {
      nlohmann::ordered_json body;
      body["httpStatus"] = 500;
      body["message"] = e.what();
      reply(res, 500, body);
    }
  };
}

void method_not_allowed(const httplib::Request&, httplib::Response& res) {
  res.status = 405;
  res.set_header("Allow", "GET");
}

}  // namespace

struct ControlApi::Impl {
  Gateway& gateway;
  PageSessions& sessions;
  EventSource events;
  ControlApiOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::mutex review_mutex;

  Impl(Gateway& g, PageSessions& s, EventSource e, ControlApiOptions o)
      : gateway(g), sessions(s), events(std::move(e)), options(std::move(o)) {
    // httplib's default adds SO_REUSEPORT, which lets a second instance share
    // the port silently.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  const Taxonomy& taxonomy() const { return gateway.resources().taxonomy; }

  nlohmann::ordered_json blocked_categories() const {
    const auto config = gateway.policy().snapshot();
    auto out = nlohmann::ordered_json::array();
    for (const auto& c : taxonomy().top_categories()) {
      if (config->blocked_categories.contains(c)) out.push_back(c);
    }
    return out;
  }

  nlohmann::ordered_json page_view(const std::string& client, const PageContext& ctx) const {
    nlohmann::ordered_json j;
    j["client"] = client;
    j["url"] = ctx.features.normalized_url;
    j["categories"] = ctx.assignment.categories;
    j["source"] = to_string(ctx.assignment.source);
    j["verdict"] = to_string(ctx.decision.verdict);
    j["reason"] = to_string(ctx.decision.reason);
    j["matched"] = ctx.decision.matched_categories;
    auto parties = nlohmann::ordered_json::array();
    const auto& e = ctx.event;
    for (const auto& d : e.third_parties) {
      nlohmann::ordered_json p;
      p["domain"] = d;
      p["isTracker"] = std::find(e.trackers.begin(), e.trackers.end(), d) != e.trackers.end();
      p["blocked"] = std::find(e.blocked.begin(), e.blocked.end(), d) != e.blocked.end();
      parties.push_back(std::move(p));
    }
    j["thirdParties"] = std::move(parties);
    j["iframes"] = e.iframes;
    return j;
  }

  void routes() {
    server.Get("/taxonomy", guarded([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::ordered_json j;
      j["categories"] = taxonomy().top_categories();
      std::map<std::string, std::vector<std::string>> subs;
      for (const auto& [sub, parent] : taxonomy().subcategories()) subs[parent].push_back(sub);
      nlohmann::ordered_json by_parent = nlohmann::ordered_json::object();
      for (auto& [parent, list] : subs) {
        std::sort(list.begin(), list.end());
        by_parent[parent] = list;
      }
      j["subcategories"] = std::move(by_parent);
      reply(res, 200, j);
    }));
    server.Post("/taxonomy", method_not_allowed);
    server.Put("/taxonomy", method_not_allowed);
    server.Delete("/taxonomy", method_not_allowed);

    server.Get("/policy", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, policy_to_json(*gateway.policy().snapshot()));
    }));

    server.Get("/policy/categories",
               guarded([this](const httplib::Request&, httplib::Response& res) {
                 reply(res, 200, blocked_categories());
               }));
    server.Put("/policy/categories",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto doc = parse_body(req);
                 if (doc.is_object() && doc.contains("blockedCategories")) {
                   doc = doc["blockedCategories"];
                 }
                 gateway.policy().set_blocked_categories(string_array(doc, "categories"));
                 reply(res, 200, blocked_categories());
               }));

    server.Get("/policy/urls", guarded([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& [url, v] : gateway.policy().snapshot()->url_policies) j[url] = to_string(v);
      reply(res, 200, j);
    }));
    server.Get(R"(/policy/urls/(.+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto url = normalize_url(req.matches[1].str());
                 const auto config = gateway.policy().snapshot();
                 const auto it = config->url_policies.find(url);
                 if (it == config->url_policies.end()) {
                   throw ApiError{404, "not_found", "no per-URL policy for " + url};
                 }
                 nlohmann::ordered_json j;
                 j["url"] = url;
                 j["verdict"] = to_string(it->second);
                 reply(res, 200, j);
               }));
    server.Put(R"(/policy/urls/(.+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto url = normalize_url(req.matches[1].str());
                 const auto doc = parse_body(req);
                 const auto verdict = verdict_from_string(required_string(doc, "verdict"));
                 if (!verdict) throw ApiError{400, "invalid_body", "verdict must be block or allow"};
                 gateway.policy().set_url_policy(
                     url, *verdict == Verdict::kBlock ? UrlVerdict::kBlock : UrlVerdict::kAllow);
                 nlohmann::ordered_json j;
                 j["url"] = url;
                 j["verdict"] = to_string(*verdict);
                 reply(res, 200, j);
               }));
    server.Delete(R"(/policy/urls/(.+))",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const auto url = normalize_url(req.matches[1].str());
                    if (!gateway.policy().snapshot()->url_policies.contains(url)) {
                      throw ApiError{404, "not_found", "no per-URL policy for " + url};
                    }
                    gateway.policy().set_url_policy(url, UrlVerdict::kClear);
                    res.status = 204;
                  }));

    server.Get("/page/current", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("client")) throw ApiError{400, "invalid_body", "client is required"};
      const auto client = req.get_param_value("client");
      const auto session = sessions.current(client);
      if (!session) throw ApiError{404, "not_found", "no open page for client " + client};
      std::lock_guard lock(session->mutex);
      reply(res, 200, page_view(client, session->ctx));
    }));

    server.Post("/page/recategorize",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto doc = parse_body(req);
                  const auto url = normalize_url(required_string(doc, "url"));
                  if (!doc.contains("categories")) {
                    throw ApiError{400, "invalid_body", "categories is required"};
                  }
                  const auto cats = string_array(doc["categories"], "categories");
                  auto& policy = gateway.policy();
                  if (cats.empty()) {
                    policy.clear_category_override(url);
                  } else {
                    policy.set_category_override(url, cats);
                  }
                  gateway.categorizer().invalidate(url);

                  const auto config = policy.snapshot();
                  CategoryAssignment assignment{cats, AssignmentSource::kUserOverride};
                  const auto decision = resolve(url, assignment, *config);
                  if (!cats.empty()) {
                    for (const auto& s : sessions.all()) {
                      std::lock_guard lock(s->mutex);
                      if (s->ctx.features.normalized_url != url) continue;
                      s->ctx.assignment = assignment;
                      s->ctx.decision = decision;
                    }
                  }
                  nlohmann::ordered_json j;
                  j["url"] = url;
                  j["categories"] = cats;
                  j["source"] = cats.empty() ? "cleared" : to_string(assignment.source);
                  j["verdict"] = to_string(decision.verdict);
                  j["reason"] = to_string(decision.reason);
                  j["matched"] = decision.matched_categories;
                  reply(res, 200, j);
                }));

    server.Post("/report/broken-page",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto doc = parse_body(req);
                  const auto url = normalize_url(required_string(doc, "url"));
                  std::string note;
                  if (doc.contains("note")) {
                    if (!doc["note"].is_string()) {
                      throw ApiError{400, "invalid_body", "note must be a string"};
                    }
                    note = doc["note"].get<std::string>();
                  }
                  std::vector<std::string> candidates;
                  for (const auto& s : sessions.all()) {
                    std::lock_guard lock(s->mutex);
                    if (s->ctx.features.normalized_url != url) continue;
                    for (const auto& d : s->ctx.event.blocked) add_unique(candidates, d);
                  }
                  nlohmann::ordered_json line;
                  line["ts"] = static_cast<std::int64_t>(std::time(nullptr));
                  line["url"] = url;
                  line["note"] = note;
                  line["blockedDomains"] = candidates;
                  {
                    std::lock_guard lock(review_mutex);
                    std::ofstream out(options.review_file, std::ios::app | std::ios::binary);
                    if (!out) throw std::runtime_error("cannot append to review file");
                    out << line.dump() << "\n";
                  }
                  reply(res, 201, line);
                }));

    server.Get("/metrics", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto& r = gateway.resources();
      const auto report = build_report(events ? events() : std::vector<BrowsingEvent>{},
                                       r.ad_domains, r.psl, r.taxonomy);
      res.status = 200;
      res.set_content(dump_canonical(report_to_json(report)), kJson);
    }));

    server.Get("/status", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto j = metrics_to_json(gateway.metrics());
      j["clients"] = sessions.clients();
      reply(res, 200, j);
    }));

    if (options.ui_dir && std::filesystem::is_directory(*options.ui_dir)) {
      server.set_mount_point("/ui", options.ui_dir->string());
    }
  }
};

ControlApi::ControlApi(Gateway& gateway, PageSessions& sessions, EventSource events,
                       ControlApiOptions options)
    : impl_(std::make_unique<Impl>(gateway, sessions, std::move(events), std::move(options))) {}

ControlApi::~ControlApi() { stop(); }

void ControlApi::start() {
  auto& i = *impl_;
  if (i.options.port == 0) {
    i.port = i.server.bind_to_any_port(i.options.host);
    if (i.port <= 0) throw std::runtime_error("cannot bind control API on " + i.options.host);
  } else {
    if (!i.server.bind_to_port(i.options.host, i.options.port)) {
      throw std::runtime_error("cannot bind control API on " + i.options.host + ":" +
                               std::to_string(i.options.port));
    }
    i.port = i.options.port;
  }
  i.thread = std::thread([&i] { i.server.listen_after_bind(); });
  // A stop() that lands before the accept loop starts would be lost.
  i.server.wait_until_ready();
}

void ControlApi::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ControlApi::port() const noexcept { return impl_->port; }

}  // namespace trackwall
