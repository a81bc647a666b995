//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_DIGEST_H_
#define SOLVFLOW_DIGEST_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace solvflow {

inline constexpr std::string_view kToolVersion = "solvflow 0.3.0";

// 64-bit FNV-1a. Used for fingerprint hashing and for every digest embedded
// in reports, so the constants must never change.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (const char c: data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lower-case 16-digit hex rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

std::string digest_string(std::string_view data);

// Digest of a file's bytes; throws Error if the file cannot be read.
std::string digest_file(const std::filesystem::path &path);

}  // namespace solvflow

#endif  // SOLVFLOW_DIGEST_H_
