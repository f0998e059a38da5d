#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "confusion_lens/token.hpp"

namespace confusion_lens::testing {

inline std::filesystem::path source_dir() { return CONFUSION_LENS_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("confusion_lens_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Records for consecutive pieces; logprobs[i] applies to piece i.
inline std::vector<TokenRecord> make_records(const std::vector<std::string>& pieces,
                                             const std::vector<std::optional<double>>& logprobs) {
  std::vector<TokenRecord> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    TokenRecord r;
    r.index = i;
    r.text = pieces[i];
    r.span = {offset, offset + pieces[i].size()};
    r.logprob = i < logprobs.size() ? logprobs[i] : std::nullopt;
    offset += pieces[i].size();
    out.push_back(std::move(r));
  }
  return out;
}

// Every piece gets the same logprob except index 0, which has none.
inline std::vector<TokenRecord> flat_records(const std::vector<std::string>& pieces,
                                             double logprob = -1.0) {
  std::vector<std::optional<double>> lps(pieces.size(), logprob);
  if (!lps.empty()) lps[0] = std::nullopt;
  return make_records(pieces, lps);
}

inline std::string concat(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) out += p;
  return out;
}

}  // namespace confusion_lens::testing
