#include "manifest.hpp"

#include <array>
#include <chrono>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "stormscope/corpus.hpp"
#include "stormscope/error.hpp"

namespace stormscope::cli {

namespace {

std::string to_hex(const unsigned char* data, unsigned int n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int i = 0; i < n; ++i) {
    out += kHex[data[i] >> 4];
    out += kHex[data[i] & 0xF];
  }
  return out;
}

} // namespace

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw DataError("sha256 failed");
  return to_hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

Run::Run(std::string subcommand, std::filesystem::path out_dir, std::optional<long long> fixed_epoch)
    : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
  if (fixed_epoch) {
    fixed_ = true;
    stamp_ = format_iso8601_utc(*fixed_epoch);
  } else {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch());
    stamp_ = format_iso8601_utc(now.count());
  }
}

void Run::input(const std::string& path) {
  inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
}

void Run::config(const std::string& key, nlohmann::ordered_json value) { config_[key] = std::move(value); }

void Run::artifact(const std::string& name, const std::string& bytes) {
  const auto path = out_dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << bytes;
  out.close();
  if (!out) throw DataError("write failed for " + path.string());
  artifacts_.push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
}

void Run::finish() {
  nlohmann::ordered_json m;
  m["tool"] = "stormscope";
  m["version"] = STORMSCOPE_VERSION;
  m["subcommand"] = subcommand_;
  m["created_at"] = stamp_;
  m["fixed_epoch"] = fixed_;
  m["seed"] = seed_ ? nlohmann::ordered_json(*seed_) : nlohmann::ordered_json(nullptr);
  m["inputs"] = inputs_;
  m["config"] = config_;
  m["artifacts"] = artifacts_;
  std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write manifest in " + out_dir_.string());
  out << m.dump(2) << '\n';
}

} // namespace stormscope::cli
