// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace boundrate {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string &path);

/// Writes `<dir>/manifest.json` with the command, the config object (given
/// as JSON text) and the size and SHA-256 of each artifact. Artifact paths
/// are recorded relative to `dir` when they lie inside it.
void write_manifest(const std::string &dir, const std::string &command,
                    const std::string &config_json, const std::vector<std::string> &artifacts);

} // namespace boundrate
