#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

namespace trackwall {

// Public suffix rules in the publicsuffix.org format: plain rules, `*.`
// wildcards and `!` exceptions. Hosts under no listed suffix fall back to the
// implicit `*` rule (the last label is the suffix).
class PublicSuffixList {
 public:
  static PublicSuffixList load(const std::filesystem::path& path);
  static PublicSuffixList parse(std::string_view text);

  // eTLD+1. IP literals, single-label hosts and hosts that are themselves a
  // public suffix come back unchanged (lowercased, trailing dot removed).
  std::string registrable_domain(std::string_view host) const;

  std::size_t rule_count() const noexcept {
    return rules_.size() + wildcards_.size() + exceptions_.size();
  }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;  // stored without the "*."
  std::unordered_set<std::string> exceptions_;  // stored without the "!"
};

// Strong type for an eTLD+1 value.
struct RegistrableDomain {
  std::string value;

  friend bool operator==(const RegistrableDomain&, const RegistrableDomain&) = default;
  friend auto operator<=>(const RegistrableDomain&, const RegistrableDomain&) = default;
};

bool is_ip_literal(std::string_view host);

}  // namespace trackwall
