#include "impedlab/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <unistd.h>

#include "impedlab/error.hpp"
#include "json.hpp"

#ifndef IMPEDLAB_VERSION
#define IMPEDLAB_VERSION "unknown"
#endif

namespace impedlab {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : width_(columns.size()) { text_row(columns); rows_ = 0; }

CsvTable& CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  return text_row(cells);
}

CsvTable& CsvTable::text_row(const std::vector<std::string>& cells) {
  require(cells.size() == width_, ErrorCode::ArgumentOutOfRange,
          "CSV row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(width_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
  ++rows_;
  return *this;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::StageFailed, "write: cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::StageFailed, "write: cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunOutput::RunOutput(fs::path root, std::string command, std::string config_json)
    : root_(std::move(root)), command_(std::move(command)), config_json_(std::move(config_json)) {
  fs::create_directories(root_);
}

void RunOutput::write(const std::string& relative, const std::string& content) {
  write_file_atomic(root_ / relative, content);
  files_[relative] = {sha256_hex(content), content.size()};
}

RunOutput::Timer::Timer(RunOutput& out, std::string stage)
    : out_(&out), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

RunOutput::Timer::~Timer() { stop(); }

void RunOutput::Timer::stop() {
  if (!running_) return;
  running_ = false;
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
  out_->timings_.emplace_back(stage_, dt.count());
}

void RunOutput::finish(int exit_status) {
  using nlohmann::json;
  json files = json::object();
  for (const auto& [name, entry] : files_) {
    std::ifstream in(root_ / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    require(in.good() || in.eof(), ErrorCode::StageFailed, "manifest: registered file missing: " + name);
    require(sha256_hex(ss.str()) == entry.sha256, ErrorCode::StageFailed, "manifest: checksum changed for " + name);
    files[name] = {{"sha256", entry.sha256}, {"bytes", entry.bytes}};
  }
  json timings = json::array();
  for (const auto& [stage, seconds] : timings_) timings.push_back({{"stage", stage}, {"seconds", seconds}});
  json constants = json::object();
  for (const auto& [name, v] : constants_) constants[name] = std::isfinite(v) ? json(v) : json(format_number(v));
  json m;
  m["artifact"] = "impedlab";
  m["version"] = IMPEDLAB_VERSION;
  m["command"] = command_;
  m["exit_status"] = exit_status;
  m["config"] = json::parse(config_json_);
  m["files"] = files;
  m["timings"] = timings;
  m["constants"] = constants;
  m["flags"] = flags_;
  m["info"] = info_;
  write_file_atomic(root_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace impedlab
