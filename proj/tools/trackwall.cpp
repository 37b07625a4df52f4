// trackwall: category-aware tracker-blocking proxy, replay driver and
// report generator.
//
//   trackwall [--listen 127.0.0.1:8118] [--api-listen 127.0.0.1:8119]
//   trackwall --replay log.jsonl --events-out events.jsonl
//   trackwall report --events events.jsonl --format markdown
//   trackwall categorize https://example.com/page --html saved.html

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trackwall/analytics.hpp"
#include "trackwall/canonical_json.hpp"
#include "trackwall/control_api.hpp"
#include "trackwall/data_files.hpp"
#include "trackwall/errors.hpp"
#include "trackwall/gateway.hpp"
#include "trackwall/proxy.hpp"
#include "trackwall/replay.hpp"
#include "trackwall/url.hpp"

namespace fs = std::filesystem;
using namespace trackwall;

namespace {

fs::path default_data_dir() {
  if (const char* env = std::getenv("TRACKWALL_DATA_DIR")) return env;
  if (fs::exists(fs::path(TRACKWALL_BUILD_DATA_DIR) / "taxonomy.txt")) {
    return TRACKWALL_BUILD_DATA_DIR;
  }
  return TRACKWALL_INSTALL_DATA_DIR;
}

std::pair<std::string, int> parse_listen(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("expected addr:port, got " + spec);
  auto host = spec.substr(0, colon);
  if (host.size() > 1 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  try {
    return {host, std::stoi(spec.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("bad port in " + spec);
  }
}

void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

struct RunArgs {
  fs::path data_dir;
  std::string listen = "127.0.0.1:8118";
  std::string api_listen = "127.0.0.1:8119";
  std::optional<fs::path> replay;
  std::optional<fs::path> events_out;
  std::optional<fs::path> policy;
  std::optional<fs::path> registry;
  bool reset_registry = false;
  fs::path review_file = "broken_pages.jsonl";
  std::optional<fs::path> ui_dir;
  bool no_api = false;
};

int run(const RunArgs& args, bool api_requested) {
  auto resources = Resources::load(args.data_dir);
  auto policy = args.policy ? PolicyStore::open(resources->taxonomy, *args.policy)
                            : std::make_unique<PolicyStore>(resources->taxonomy);
  auto registry = args.registry ? TrackerRegistry::open(*args.registry, args.reset_registry)
                                : std::make_unique<TrackerRegistry>();
  Gateway gateway(*resources, *policy, *registry);
  auto log = args.events_out ? std::make_unique<EventLog>(*args.events_out)
                             : std::make_unique<EventLog>();

  if (args.replay) {
    // Replayed pages are logged as they finish; sessions only back the API.
    PageSessions sessions;
    std::unique_ptr<ControlApi> api;
    if (api_requested && !args.no_api) {
      block_signals();
      const auto [host, port] = parse_listen(args.api_listen);
      api = std::make_unique<ControlApi>(gateway, sessions, [&log] { return log->events(); },
                                         ControlApiOptions{host, port, args.review_file,
                                                           args.ui_dir});
      api->start();
    }
    ReplayOptions options;
    options.sink = log.get();
    if (api) {
      options.on_page = [&sessions](const PageContext& ctx) {
        sessions.open(ctx.event.user.value_or("replay"), ctx);
      };
    }
    const auto result = replay_file(gateway, *args.replay, options);
    std::cerr << "events=" << result.events.size() << " skipped=" << result.skipped << "\n";
    if (args.registry) registry->save();
    if (api) {
      std::cerr << "control API on " << args.api_listen << "; Ctrl-C to exit\n";
      wait_for_signal();
      api->stop();
    }
    return 0;
  }

  block_signals();
  PageSessions sessions(log.get());
  const auto [proxy_host, proxy_port] = parse_listen(args.listen);
  ProxyServer proxy(gateway, sessions, ProxyOptions{proxy_host, proxy_port});
  proxy.start();
  std::unique_ptr<ControlApi> api;
  if (!args.no_api) {
    const auto [host, port] = parse_listen(args.api_listen);
    api = std::make_unique<ControlApi>(
        gateway, sessions,
        [&log, &sessions] {
          auto events = log->events();
          auto open = sessions.open_events();
          events.insert(events.end(), open.begin(), open.end());
          return events;
        },
        ControlApiOptions{host, port, args.review_file, args.ui_dir});
    api->start();
  }
  std::cerr << "proxy on " << args.listen;
  if (api) std::cerr << ", control API on " << args.api_listen;
  std::cerr << "\n";
  wait_for_signal();
  if (api) api->stop();
  proxy.stop();
  sessions.flush();
  if (args.registry) registry->save();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trackwall: category-aware tracker blocking gateway"};
  app.require_subcommand(0, 1);

  RunArgs args;
  args.data_dir = default_data_dir();
  app.add_option("--data-dir", args.data_dir, "Directory with taxonomy, lexicon and lists")
      ->check(CLI::ExistingDirectory);
  app.add_option("--listen", args.listen, "Proxy address (addr:port)");
  auto* api_opt = app.add_option("--api-listen", args.api_listen, "Control API address");
  app.add_option("--replay", args.replay, "Replay a JSONL browsing log instead of proxying")
      ->check(CLI::ExistingFile);
  app.add_option("--events-out", args.events_out, "Append BrowsingEvents here (JSONL)");
  app.add_option("--policy", args.policy, "policy.json to load and persist");
  app.add_option("--registry", args.registry, "Tracker registry file to load and save");
  app.add_flag("--reset-registry", args.reset_registry, "Ignore the saved registry");
  app.add_option("--review-file", args.review_file, "Where broken-page reports are appended");
  app.add_option("--ui-dir", args.ui_dir, "Static console files served under /ui");
  app.add_flag("--no-api", args.no_api, "Do not start the control API");

  auto* report = app.add_subcommand("report", "Aggregate an event log into a report");
  fs::path events_path;
  std::string format = "json";
  std::optional<fs::path> out_path;
  std::size_t min_pages = 0;
  report->add_option("--events", events_path, "events.jsonl")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "json or markdown");
  report->add_option("--out", out_path, "Write here instead of stdout");
  report->add_option("--min-pages", min_pages, "Drop users with fewer events");

  auto* categorize = app.add_subcommand("categorize", "Categorize one page");
  std::string page_url;
  std::optional<fs::path> html_path;
  categorize->add_option("url", page_url, "Page URL")->required();
  categorize->add_option("--html", html_path, "Saved HTML of the page")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report) {
      const auto fmt = report_format_from_string(format);
      auto resources = Resources::load(args.data_dir);
      const auto loaded = load_events(events_path);
      if (loaded.skipped) std::cerr << "skipped " << loaded.skipped << " malformed lines\n";
      const auto built = build_report(loaded.events, resources->ad_domains, resources->psl,
                                      resources->taxonomy, ReportOptions{min_pages});
      const auto text = render_report(built, fmt);
      if (out_path) {
        write_file_atomic(*out_path, text);
      } else {
        std::cout << text;
      }
      return 0;
    }
    if (*categorize) {
      auto resources = Resources::load(args.data_dir);
      RawPage raw{normalize_url(page_url), "text/html",
                  html_path ? read_file(*html_path) : std::string(), 200};
      const auto features = extract_features(raw, resources->psl, resources->taxonomy);
      PolicyStore policy(resources->taxonomy);
      TrackerRegistry registry;
      Gateway gateway(*resources, policy, registry);
      const auto ctx = gateway.begin_page(features, 0);
      nlohmann::ordered_json j = assignment_to_json(ctx.assignment);
      j["title"] = features.title;
      j["iframes"] = features.iframe_sources;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    return run(args, api_opt->count() > 0);
  } catch (const Error& e) {
    std::cerr << "trackwall: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "trackwall: " << e.what() << "\n";
    return 1;
  }
}
