// Copyright 2026 The pernorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// UTF-8 <-> scalar value conversion with strict validation.

#ifndef PERNORM_UTF8_HPP_
#define PERNORM_UTF8_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "pernorm/error.hpp"

namespace pernorm {

// A sequence of Unicode scalar values.
using Text = std::u32string;
using TextView = std::u32string_view;

namespace utf8 {

// Decodes `bytes`, rejecting overlongs, surrogates and values above
// U+10FFFF. `line` only feeds the error message.
inline Text Decode(std::string_view bytes, std::size_t line = 0) {
  Text out;
  out.reserve(bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char b0 = p[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len;
    char32_t cp;
    char32_t min;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      throw Utf8Error(line, i);
    }
    if (i + len > n) throw Utf8Error(line, i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char b = p[i + k];
      if ((b & 0xC0) != 0x80) throw Utf8Error(line, i);
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw Utf8Error(line, i);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void AppendEncoded(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string Encode(TextView text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char32_t cp : text) AppendEncoded(cp, out);
  return out;
}

}  // namespace utf8

// "0627 0653" style rendering used by rule files and diff reports.
inline std::string ToHex(TextView text) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i) out.push_back(' ');
    char32_t cp = text[i];
    char buf[8];
    int len = 0;
    do {
      buf[len++] = kDigits[cp & 0xF];
      cp >>= 4;
    } while (cp != 0);
    for (int k = len; k < 4; ++k) out.push_back('0');
    while (len) out.push_back(buf[--len]);
  }
  return out;
}

}  // namespace pernorm

#endif  // PERNORM_UTF8_HPP_
