#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stormscope::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Collects everything one invocation reads and writes, and emits it as
/// manifest.json next to the artifacts.
class Run {
public:
  Run(std::string subcommand, std::filesystem::path out_dir, std::optional<long long> fixed_epoch);

  const std::filesystem::path& out_dir() const { return out_dir_; }
  /// ISO timestamp of the run; the fixed epoch when one was given.
  const std::string& stamp() const { return stamp_; }

  void input(const std::string& path);
  void config(const std::string& key, nlohmann::ordered_json value);
  void seed(std::uint64_t s) { seed_ = s; }
  /// Writes `bytes` to out_dir/name and records its hash.
  void artifact(const std::string& name, const std::string& bytes);
  void finish();

private:
  std::string subcommand_;
  std::filesystem::path out_dir_;
  std::string stamp_;
  bool fixed_ = false;
  std::optional<std::uint64_t> seed_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json artifacts_ = nlohmann::ordered_json::array();
};

} // namespace stormscope::cli
