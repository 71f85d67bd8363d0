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

// Writes the synthetic Urdu-like corpus used by the directional
// replication run: clean lines that every `ur` mode leaves untouched, and a
// fixed 30% of lines carrying yeh / farsi yeh, heh and kaf variant
// spellings that `ur` reading normalization undoes.
//
//   pernorm_gen_synthetic OUT [LINES] [SEED]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "pernorm/experiment.hpp"
#include "pernorm/grammar.hpp"
#include "pernorm/utf8.hpp"

namespace {

using pernorm::Text;

double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index drawn with probability proportional to 1 / (i + 1)^s.
class Zipf {
 public:
  Zipf(std::size_t n, double s) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_.push_back(total);
    }
    for (double& c : cdf_) c /= total;
  }
  std::size_t operator()(std::mt19937_64& rng) const {
    const double u = Unit(rng);
    return std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  }

 private:
  std::vector<double> cdf_;
};

// Urdu letters minus the variant codepoints the corruption introduces.
const std::vector<char32_t> kLetters = {
    0x0627, 0x06CC, 0x0631, 0x0646, 0x0648, 0x06A9, 0x0645, 0x062A, 0x0644, 0x0633,
    0x06C1, 0x0628, 0x062F, 0x06D2, 0x06BE, 0x06AF, 0x0639, 0x062C, 0x0641, 0x067E,
    0x0642, 0x0634, 0x062D, 0x0679, 0x0632, 0x0686, 0x062E, 0x0688, 0x0691, 0x0635,
    0x0637, 0x06BA, 0x0621, 0x063A, 0x0636, 0x062B, 0x0630, 0x0638, 0x0698};

Text Word(std::mt19937_64& rng, const Zipf& letter) {
  const std::size_t len = 2 + pernorm::UniformBelow(rng, 6);
  Text w;
  while (w.size() < len) {
    w.push_back(kLetters[letter(rng)]);
  }
  return w;
}

// Flips reversible spellings inside one word; returns true on change.
bool Corrupt(Text& w, std::mt19937_64& rng, double p) {
  bool changed = false;
  if (w == Text{0x06C1}) {
    if (Unit(rng) < p) {
      w[0] = 0x0647;
      changed = true;
    }
    return changed;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool final = i + 1 == w.size();
    if (w[i] == 0x06CC && Unit(rng) < p) {
      w[i] = final && Unit(rng) < 0.5 ? 0x0649 : 0x064A;
      changed = true;
    } else if (w[i] == 0x06A9 && !final && Unit(rng) < p) {
      w[i] = 0x0643;
      changed = true;
    }
  }
  return changed;
}

bool Corruptible(const std::vector<Text>& words) {
  for (const Text& w : words) {
    if (w == Text{0x06C1}) return true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0x06CC || (w[i] == 0x06A9 && i + 1 < w.size())) return true;
    }
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: pernorm_gen_synthetic OUT [LINES] [SEED]\n";
    return 2;
  }
  const std::size_t n_lines = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 50000;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 20221208;
  std::mt19937_64 rng(seed);

  const Zipf letter(kLetters.size(), 0.9);
  std::vector<Text> lexicon = {
      {0x06A9, 0x06CC}, {0x06C1, 0x06D2}, {0x0645, 0x06CC, 0x06BA}, {0x0627, 0x0648, 0x0631},
      {0x06CC, 0x06C1}, {0x06A9, 0x06D2}, {0x06A9, 0x0648}, {0x0633, 0x06D2},
      {0x0646, 0x06D2}, {0x06C1}, {0x06A9, 0x06CC, 0x0627}, {0x062A, 0x06BE, 0x0627},
      {0x06C1, 0x06CC, 0x06BA}, {0x0644, 0x06CC, 0x06D2}, {0x06A9, 0x0631}, {0x062F, 0x06CC}};
  while (lexicon.size() < 50000) lexicon.push_back(Word(rng, letter));
  const Zipf word(lexicon.size(), 1.0);
  // Code-switched tail: short foreign words and Urdu numerals. The foreign
  // alphabet is long and steeply skewed, so many symbols are seen only a
  // handful of times, as in real text.
  std::vector<char32_t> latin;
  for (char32_t c = U'a'; c <= U'z'; ++c) latin.push_back(c);
  for (char32_t c = U'A'; c <= U'Z'; ++c) latin.push_back(c);
  for (char32_t c = 0x00C0; c <= 0x017F; ++c) {
    if (c != 0x00D7 && c != 0x00F7) latin.push_back(c);
  }
  for (char32_t c = 0x0391; c <= 0x03C9; ++c) {
    if (c != 0x03A2) latin.push_back(c);
  }
  for (char32_t c = 0x0410; c <= 0x044F; ++c) latin.push_back(c);
  const Zipf latin_pick(latin.size(), 1.5);
  auto latin_word = [&] {
    Text w;
    const std::size_t len = 1 + pernorm::UniformBelow(rng, 6);
    for (std::size_t k = 0; k < len; ++k) w.push_back(latin[latin_pick(rng)]);
    return w;
  };
  auto numeral = [&] {
    Text w;
    const std::size_t len = 1 + pernorm::UniformBelow(rng, 4);
    for (std::size_t k = 0; k < len; ++k) {
      w.push_back(static_cast<char32_t>(0x06F0 + pernorm::UniformBelow(rng, 10)));
    }
    return w;
  };

  const pernorm::Grammar& ur = pernorm::BundledGrammar("ur");
  std::vector<std::size_t> order(n_lines);
  for (std::size_t i = 0; i < n_lines; ++i) order[i] = i;
  pernorm::FisherYates(order, rng);
  std::vector<char> corrupt(n_lines, 0);
  for (std::size_t i = 0; i < n_lines * 3 / 10; ++i) corrupt[order[i]] = 1;

  std::ofstream out(argv[1], std::ios::binary);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < n_lines; ++i) {
    std::vector<Text> words;
    do {
      words.clear();
      const std::size_t len = 5 + pernorm::UniformBelow(rng, 10);
      for (std::size_t k = 0; k < len; ++k) words.push_back(lexicon[word(rng)]);
    } while (corrupt[i] && !Corruptible(words));
    if (Unit(rng) < 0.15) {
      words.insert(words.begin() + pernorm::UniformBelow(rng, words.size() + 1), latin_word());
    }
    if (Unit(rng) < 0.05) {
      words.insert(words.begin() + pernorm::UniformBelow(rng, words.size() + 1), numeral());
    }
    Text clean;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k) clean.push_back(U' ');
      clean += words[k];
    }
    clean += U" ۔";
    for (pernorm::Mode m : {pernorm::Mode::kNfc, pernorm::Mode::kVisual, pernorm::Mode::kReading}) {
      if (ur.Normalize(m, clean) != clean) {
        std::cerr << "clean line " << i << " is not a fixed point\n";
        return 1;
      }
    }
    Text line = clean;
    if (corrupt[i]) {
      bool any = false;
      while (!any) {
        std::vector<Text> noisy = words;
        for (Text& w : noisy) any |= Corrupt(w, rng, 0.6);
        if (!any) continue;
        line.clear();
        for (std::size_t k = 0; k < noisy.size(); ++k) {
          if (k) line.push_back(U' ');
          line += noisy[k];
        }
        line += U" ۔";
      }
      if (ur.Normalize(pernorm::Mode::kReading, line) != clean) {
        std::cerr << "corrupted line " << i << " does not normalize back\n";
        return 1;
      }
      ++changed;
    }
    out << pernorm::utf8::Encode(line) << '\n';
  }
  std::cerr << n_lines << " lines, " << changed << " with variant spellings\n";
  return out ? 0 : 1;
}
