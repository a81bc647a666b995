//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/digest.h"

#include <array>
#include <fstream>
#include <iterator>

#include "solvflow/error.h"

namespace solvflow {

std::string hex64(std::uint64_t value) {
  static constexpr std::array<char, 16> kDigits = {
    '0', '1', '2', '3', '4', '5', '6', '7',
    '8', '9', 'a', 'b', 'c', 'd', 'e', 'f',
  };
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string digest_string(std::string_view data) {
  return hex64(fnv1a64(data));
}

std::string digest_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string() + " for digest");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return digest_string(bytes);
}

}  // namespace solvflow
