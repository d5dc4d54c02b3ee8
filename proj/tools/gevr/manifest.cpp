#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <json.hpp>
#include <openssl/evp.h>

#include "gevr/error.hpp"
#include "gevr/version.hpp"

namespace gevr::cli {
namespace {

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 initialisation failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

void Manifest::write(const std::filesystem::path& primary) const {
  nlohmann::json doc;
  doc["command"] = command;
  doc["args"] = args;
  doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  doc["version"] = kVersion;
  nlohmann::json ins = nlohmann::json::array();
  for (const auto& p : inputs) ins.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  doc["inputs"] = ins;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& p : outputs) outs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  doc["outputs"] = outs;
  doc["started"] = iso_utc(started);
  doc["finished"] = iso_utc(std::chrono::system_clock::now());
  std::filesystem::path target = primary;
  target += ".manifest.json";
  std::ofstream out(target, std::ios::binary);
  if (!out) throw DataError("cannot write manifest '" + target.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace gevr::cli
