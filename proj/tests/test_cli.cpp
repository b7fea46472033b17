#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "impedlab/commands.hpp"
#include "impedlab/output.hpp"
#include "json.hpp"

using namespace impedlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(IMPEDLAB_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(IMPEDLAB_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json base_config() { return json::parse(slurp(config_path("sphere_full_coat.json"))); }

ErrorCode parse_error(const json& doc, std::string* message = nullptr) {
  try {
    parse_config(doc.dump());
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("config was accepted");
  return ErrorCode::StageFailed;
}

}  // namespace

TEST_CASE("canonical configurations load") {
  for (auto name : {"sphere_full_coat.json", "sphere_polar_cap.json", "stability_sweep.json"}) {
    CAPTURE(name);
    const auto c = load_config(config_path(name));
    CHECK(c.schema_version == 1);
    CHECK_FALSE(c.source_text.empty());
  }
  const auto cap = load_config(config_path("sphere_polar_cap.json"));
  CHECK(cap.partition.is_dirichlet(0.1));
  CHECK(cap.forward.method == ForwardMethod::Bie);
}

TEST_CASE("unknown keys are rejected with their location") {
  auto doc = base_config();
  doc["inverse"]["r_one"] = 3.0;
  std::string msg;
  CHECK(parse_error(doc, &msg) == ErrorCode::ConfigInvalid);
  CHECK(msg.find("/inverse/r_one") != std::string::npos);

  doc = base_config();
  doc["extra"] = true;
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);
}

TEST_CASE("invalid values are rejected") {
  auto doc = base_config();
  doc.erase("schema_version");
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);

  doc = base_config();
  doc["schema_version"] = 2;
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);

  doc = base_config();
  doc["inverse"]["r1"] = 1.5;  // inside the obstacle diameter
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);

  doc = base_config();
  doc["wave"]["k"] = -1;
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);

  doc = base_config();
  doc["impedance"]["params"] = json::array({0.2});  // below lambda0
  CHECK(parse_error(doc) == ErrorCode::ConfigInvalid);

  CHECK_THROWS_AS(parse_config("{not json"), Error);
  CHECK_THROWS_AS(load_config(config_path("missing.json")), Error);
}

TEST_CASE("configuration serialisation round-trips") {
  for (auto name : {"sphere_full_coat.json", "sphere_polar_cap.json", "stability_sweep.json"}) {
    const auto a = load_config(config_path(name));
    const auto text = config_to_json(a);
    const auto b = parse_config(text);
    CHECK(config_to_json(b) == text);
  }
}

TEST_CASE("numbers and tables") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  CsvTable t({"a", "b"});
  t.row({1.0, 0.5}).text_row({"x", "2"});
  CHECK(t.str() == "a,b\n1,0.5\nx,2\n");
  CHECK(t.rows() == 2);
  CHECK_THROWS_AS(t.row({1.0}), Error);
}

TEST_CASE("sha256 and atomic writes") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = scratch("atomic");
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("solve writes the trace and a manifest with valid checksums") {
  const auto dir = scratch("solve");
  std::ostringstream err;
  REQUIRE(run_command("solve", "", {config_path("sphere_full_coat.json"), dir.string(), {}, 1}, err) == 0);
  CHECK(err.str().empty());

  const auto trace = slurp(dir / "trace.csv");
  const auto lines = std::count(trace.begin(), trace.end(), '\n');
  CHECK(lines == 24 * 48 + 1);
  CHECK(trace.find('\r') == std::string::npos);

  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "solve");
  CHECK(manifest["exit_status"] == 0);
  CHECK(manifest["config"]["name"] == "sphere_full_coat");
  REQUIRE(manifest["files"].contains("trace.csv"));
  for (const auto& [name, entry] : manifest["files"].items())
    CHECK(entry["sha256"] == sha256_hex(slurp(dir / name)));
}

TEST_CASE("verify psi0 through the command runner") {
  const auto dir = scratch("psi0");
  std::ostringstream err;
  REQUIRE(run_command("verify", "psi0", {config_path("sphere_full_coat.json"), dir.string(), {}, 1}, err) == 0);
  const auto report = json::parse(slurp(dir / "psi0.json"));
  CHECK(report.dump().find("false") == std::string::npos);
  CHECK(fs::exists(dir / "psi0.csv"));
}

TEST_CASE("failures produce a one-line JSON error and a nonzero status") {
  const auto dir = scratch("bad");
  std::ostringstream err;
  CHECK(run_command("solve", "", {config_path("missing.json"), dir.string(), {}, {}}, err) == 2);
  const auto text = err.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(json::parse(text)["error"] == "ConfigInvalid");

  std::ostringstream err2;
  CHECK(run_command("verify", "nonsense", {config_path("sphere_full_coat.json"), dir.string(), {}, {}}, err2) != 0);
  CHECK(json::parse(err2.str()).contains("error"));
}
