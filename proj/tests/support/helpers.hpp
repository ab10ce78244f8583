#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kidex/annotate.hpp"
#include "kidex/core.hpp"
#include "kidex/pipeline.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("kidex_" + tag + "_" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str(const std::string& rel = "") const { return rel.empty() ? path_.string() : (path_ / rel).string(); }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = kidex::pipeline::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Document over whitespace-separated text with no annotations.
inline kidex::Document make_doc(const std::string& text, const std::string& id = "d") {
  kidex::Document doc;
  doc.doc_id = id;
  doc.text = text;
  doc.tokens = kidex::annotate::tokenize(text);
  return doc;
}

inline kidex::OcrEntry cell(int left, int top, int right, int bottom, std::string text = "") {
  return kidex::OcrEntry{kidex::BBox{left, top, right, bottom}, std::move(text)};
}

}  // namespace testing
