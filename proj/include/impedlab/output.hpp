#ifndef IMPEDLAB_OUTPUT_HPP
#define IMPEDLAB_OUTPUT_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace impedlab {

/// %.17g; non-finite values print as nan, inf, -inf.
std::string format_number(double v);

/// Comma-separated table with '\n' line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  CsvTable& row(const std::vector<double>& values);
  /// Mixed row; numbers must already be formatted.
  CsvTable& text_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_; }
  std::string str() const { return out_; }

 private:
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string out_;
};

/// Writes through a temporary file in the same directory and renames it over
/// the destination.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);

/// Output directory of one command. Every file goes through write() so the
/// manifest lists it with its checksum.
class RunOutput {
 public:
  RunOutput(std::filesystem::path root, std::string command, std::string config_json);

  const std::filesystem::path& root() const { return root_; }

  void write(const std::string& relative, const std::string& content);

  void set_constant(const std::string& name, double value) { constants_[name] = value; }
  void set_flag(const std::string& name, bool value) { flags_[name] = value; }
  void set_info(const std::string& name, const std::string& value) { info_[name] = value; }

  /// Times a stage; call stop() or let it go out of scope.
  class Timer {
   public:
    Timer(RunOutput& out, std::string stage);
    ~Timer();
    void stop();

   private:
    RunOutput* out_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
    bool running_ = true;
  };

  Timer time(std::string stage) { return Timer(*this, std::move(stage)); }

  /// Writes manifest.json at the root; checks every registered file.
  void finish(int exit_status);

 private:
  struct FileEntry {
    std::string sha256;
    std::size_t bytes = 0;
  };

  std::filesystem::path root_;
  std::string command_;
  std::string config_json_;
  std::map<std::string, FileEntry> files_;
  std::vector<std::pair<std::string, double>> timings_;
  std::map<std::string, double> constants_;
  std::map<std::string, bool> flags_;
  std::map<std::string, std::string> info_;
};

}  // namespace impedlab

#endif
