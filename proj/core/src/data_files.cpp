#include "trackwall/data_files.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "trackwall/errors.hpp"

namespace trackwall {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedUrl: return "malformed_url";
    case ErrorCode::kUnknownCategory: return "unknown_category";
    case ErrorCode::kTooManyCategories: return "too_many_categories";
    case ErrorCode::kAllZeroScores: return "all_zero_scores";
    case ErrorCode::kSameParty: return "same_party";
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kFileUnreadable: return "file_unreadable";
    case ErrorCode::kInvalidData: return "invalid_data";
    case ErrorCode::kUnknownFormat: return "unknown_format";
  }
  return "unknown";
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_data_lines(std::string_view text) {
  std::vector<std::string> lines;
  for (auto& line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kFileUnreadable, "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_data_lines(const std::filesystem::path& path) {
  return split_data_lines(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kFileUnreadable, "cannot write " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      throw Error(ErrorCode::kFileUnreadable, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kFileUnreadable, "cannot replace " + path.string());
  }
}

}  // namespace trackwall
