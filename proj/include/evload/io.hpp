#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "evload/error.hpp"

namespace evload::io {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "failed reading '" + path.string() + "'");
  return buf.str();
}

/// Collects output files in memory and publishes them together: every file
/// is first written to a temporary sibling, and only when all writes have
/// succeeded are they renamed into place. Nothing is written if the stage
/// is destroyed without commit().
class OutputStage {
 public:
  explicit OutputStage(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }

  const fs::path& dir() const { return dir_; }

  std::vector<fs::path> commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create directory '" + dir_.string() + "': " + ec.message());

    std::vector<fs::path> temps;
    auto cleanup = [&] {
      for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, content] : files_) {
      const fs::path tmp = dir_ / ("." + name + ".tmp");
      temps.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      if (!out) {
        cleanup();
        fail(ErrorKind::Io, "failed writing '" + (dir_ / name).string() + "'");
      }
    }
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < files_.size(); ++i) {
      const fs::path target = dir_ / files_[i].first;
      fs::rename(temps[i], target, ec);
      if (ec) {
        cleanup();
        for (const auto& w : written) fs::remove(w, ec);
        fail(ErrorKind::Io, "cannot publish '" + target.string() + "'");
      }
      written.push_back(target);
    }
    files_.clear();
    return written;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace evload::io
