// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/manifest.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "boundrate/error.hpp"
#include "json.hpp"

namespace boundrate {
namespace {

class Digest {
public:
  Digest() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      fail(ErrorCode::kIo, "SHA-256 initialization failed");
  }
  void update(const void *data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1)
      fail(ErrorCode::kIo, "SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1)
      fail(ErrorCode::kIo, "SHA-256 finalization failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

} // namespace

std::string sha256_hex(std::string_view bytes) {
  Digest d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIo, "cannot open '" + path + "'");
  Digest d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad())
    fail(ErrorCode::kIo, "failed reading '" + path + "'");
  return d.hex();
}

void write_manifest(const std::string &dir, const std::string &command,
                    const std::string &config_json, const std::vector<std::string> &artifacts) {
  namespace fs = std::filesystem;
  nlohmann::ordered_json j;
  j["tool"] = "boundrate";
  j["version"] = BOUNDRATE_VERSION;
  j["command"] = command;
  try {
    j["config"] = nlohmann::ordered_json::parse(config_json);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorCode::kParse, std::string("manifest config is not valid JSON: ") + e.what());
  }
  j["artifacts"] = nlohmann::ordered_json::array();
  const fs::path base = fs::weakly_canonical(dir);
  for (const auto &a : artifacts) {
    std::error_code ec;
    const auto size = fs::file_size(a, ec);
    if (ec)
      fail(ErrorCode::kIo, "cannot stat artifact '" + a + "'");
    auto rel = fs::weakly_canonical(a).lexically_relative(base);
    const std::string shown =
        rel.empty() || *rel.begin() == ".." ? a : rel.generic_string();
    j["artifacts"].push_back({{"path", shown}, {"bytes", size}, {"sha256", sha256_file(a)}});
  }
  const auto path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

} // namespace boundrate
