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
// pernorm: command-line front end.
//
// Exit codes: 0 success, 1 invariant failure, 2 usage/config/grammar error,
// 3 malformed UTF-8 input.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pernorm/corpus.hpp"
#include "pernorm/error.hpp"
#include "pernorm/experiment.hpp"
#include "pernorm/grammar.hpp"
#include "pernorm/ngram_lm.hpp"
#include "pernorm/stats.hpp"
#include "pernorm/utf8.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kInvariant = 1, kUsage = 2, kEncoding = 3 };

class UsageError : public pernorm::Error {
 public:
  using pernorm::Error::Error;
};

std::string ReadInput(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ios::sync_with_stdio(false);
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError("cannot read '" + path + "'");
  return pernorm::ReadFileBytes(path);
}

pernorm::Corpus ReadLines(const std::string& path) {
  pernorm::Corpus corpus = pernorm::ReadCorpus(ReadInput(path));
  if (corpus.had_bom) {
    std::cerr << "pernorm: note: stripped byte order mark from "
              << (path.empty() || path == "-" ? "<stdin>" : path) << "\n";
  }
  return corpus;
}

// Writes to `path` through a sibling temp file and a rename, so readers never
// see partial output. An empty path or "-" means stdout.
void WriteOutput(const std::string& path, const std::function<void(std::ostream&)>& fill) {
  if (path.empty() || path == "-") {
    fill(std::cout);
    std::cout.flush();
    if (!std::cout) throw pernorm::Error("write to stdout failed");
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + tmp.string() + "'");
    fill(out);
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw pernorm::Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw UsageError("cannot rename onto '" + path + "': " + ec.message());
  }
}

void WriteLines(std::ostream& out, const std::vector<pernorm::Text>& lines) {
  std::string buf;
  for (const auto& l : lines) {
    buf.clear();
    for (char32_t cp : l) pernorm::utf8::AppendEncoded(cp, buf);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

// Files in `dir` named <lang>.rules or visual_common.rules replace the
// bundled ones.
pernorm::Grammar ResolveGrammar(const std::string& language, const std::string& dir) {
  if (!pernorm::IsGrammarLanguage(language)) throw pernorm::UnknownLanguageError(language);
  if (dir.empty()) return pernorm::BundledGrammar(language);
  const fs::path common_path = fs::path(dir) / "visual_common.rules";
  const fs::path lang_path = fs::path(dir) / (language + ".rules");
  std::error_code ec;
  auto common = fs::is_regular_file(common_path, ec)
                    ? pernorm::LoadVisualCommon(pernorm::ReadFileBytes(common_path.string()),
                                                common_path.string())
                    : pernorm::BundledVisualCommon();
  if (fs::is_regular_file(lang_path, ec)) {
    return pernorm::LoadGrammar(language, pernorm::ReadFileBytes(lang_path.string()),
                                lang_path.string(), common);
  }
  return pernorm::LoadGrammar(language, pernorm::BundledSource(language),
                              language + ".rules", common);
}

pernorm::Mode ModeFlag(const std::string& name) {
  auto m = pernorm::ParseMode(name);
  if (!m) throw UsageError("unknown mode '" + name + "' (expected nfc, visual or reading)");
  return *m;
}

pernorm::Unit UnitFlag(const std::string& name) {
  auto u = pernorm::ParseUnit(name);
  if (!u) throw UsageError("unknown unit '" + name + "' (expected char or word)");
  return *u;
}

std::vector<double> ReadColumn(const std::string& path) {
  const pernorm::Corpus corpus = ReadLines(path);
  std::vector<double> values;
  for (const auto& line : corpus.lines) {
    const std::string s = pernorm::utf8::Encode(line.text);
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos || s[first] == '#') continue;
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v;
    std::string rest;
    if (!(in >> v) || (in >> rest)) {
      throw UsageError(path + ":" + std::to_string(line.index) + ": not a number");
    }
    values.push_back(v);
  }
  return values;
}

pernorm::TokenSequences LineTokens(const pernorm::Corpus& corpus, pernorm::Unit unit) {
  pernorm::TokenSequences seqs;
  for (const auto& line : corpus.lines) {
    auto toks = pernorm::ToTokens(line.text, unit);
    if (!toks.empty()) seqs.push_back(std::move(toks));
  }
  return seqs;
}

struct Options {
  std::string lang;
  std::string mode = "reading";
  std::string in;
  std::string out;
  std::string report;
  std::string grammar_dir;
  std::string model;
  std::string unit = "char";
  std::string config;
  std::string results;
  std::string folds;
  std::string a, b;
  double beta = -1;
  int order = 3;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool check = false;
  bool discount_fallback = false;
};

int Normalize(const Options& o) {
  const pernorm::Grammar grammar = ResolveGrammar(o.lang, o.grammar_dir);
  const pernorm::Mode mode = ModeFlag(o.mode);
  const pernorm::Corpus corpus = ReadLines(o.in);
  std::vector<pernorm::Text> out(corpus.lines.size());
  pernorm::detail::ParallelFor(out.size(), o.jobs, [&](std::size_t i) {
    out[i] = grammar.Normalize(mode, corpus.lines[i].text);
  });
  if (o.check) {
    std::size_t violations = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const pernorm::Text twice = grammar.Normalize(mode, out[i]);
      if (twice != out[i]) {
        if (++violations <= 10) {
          std::cerr << "line " << corpus.lines[i].index << ": not idempotent: "
                    << pernorm::ToHex(out[i]) << " -> " << pernorm::ToHex(twice) << "\n";
        }
      }
    }
    if (violations) {
      std::cerr << violations << " idempotence violation(s)\n";
      return kInvariant;
    }
    std::cerr << corpus.lines.size() << " lines idempotent\n";
    return kOk;
  }
  WriteOutput(o.out, [&](std::ostream& s) { WriteLines(s, out); });
  return kOk;
}

int Diff(const Options& o) {
  const pernorm::Grammar grammar = ResolveGrammar(o.lang, o.grammar_dir);
  const pernorm::Mode mode = ModeFlag(o.mode);
  const pernorm::Corpus corpus = ReadLines(o.in);
  const pernorm::CorpusDiff diff = pernorm::DiffCorpus(corpus.lines, grammar, mode, o.jobs);
  WriteOutput(o.report, [&](std::ostream& s) { pernorm::WriteDiffReport(s, diff); });
  if (!o.out.empty()) {
    WriteOutput(o.out, [&](std::ostream& s) { WriteLines(s, diff.normalized); });
  }
  return kOk;
}

int Filter(const Options& o) {
  double beta = o.beta;
  if (beta < 0) {
    auto b = o.lang.empty() ? std::nullopt : pernorm::ReplicationBeta(o.lang);
    if (!b) throw UsageError("filter needs --beta or a --lang with a known threshold");
    beta = *b;
  }
  if (!(beta >= 0 && beta <= 1)) throw UsageError("--beta must lie in [0, 1]");
  const pernorm::Corpus corpus = ReadLines(o.in);
  std::vector<char> keep(corpus.lines.size());
  pernorm::detail::ParallelFor(keep.size(), o.jobs, [&](std::size_t i) {
    keep[i] = pernorm::ScriptFilter(corpus.lines[i].text, beta);
  });
  std::vector<pernorm::Text> kept;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) kept.push_back(corpus.lines[i].text);
  }
  std::cerr << "kept " << kept.size() << " of " << corpus.lines.size() << " lines (beta "
            << beta << ")\n";
  WriteOutput(o.out, [&](std::ostream& s) { WriteLines(s, kept); });
  return kOk;
}

int Stats(const Options& o) {
  const pernorm::Grammar grammar = ResolveGrammar(o.lang, o.grammar_dir);
  const pernorm::Corpus corpus = ReadLines(o.in);
  const auto diff = pernorm::DiffCorpus(corpus.lines, grammar, ModeFlag(o.mode), o.jobs);
  WriteOutput(o.out, [&](std::ostream& s) { pernorm::WriteDiffStats(s, diff.stats); });
  return kOk;
}

int TrainLm(const Options& o) {
  const pernorm::Unit unit = UnitFlag(o.unit);
  const pernorm::Corpus corpus = ReadLines(o.in);
  const auto seqs = LineTokens(corpus, unit);
  const pernorm::NGramModel model =
      pernorm::Train(seqs, unit, o.order, {.discount_fallback = o.discount_fallback});
  for (int k : model.fallback_orders()) {
    std::cerr << "pernorm: note: order " << k << " uses fallback discounts\n";
  }
  WriteOutput(o.model, [&](std::ostream& s) { pernorm::WriteArpa(s, model); });
  return kOk;
}

int Entropy(const Options& o) {
  std::ifstream in(o.model, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + o.model + "'");
  const pernorm::NGramModel model = pernorm::ReadArpa(in);
  const pernorm::Corpus corpus = ReadLines(o.in);
  const auto seqs = LineTokens(corpus, model.unit());
  const double h = pernorm::CrossEntropy(model, seqs);
  std::cout << std::setprecision(17) << h << "\n";
  return kOk;
}

int KFold(const Options& o) {
  pernorm::ExperimentConfig config;
  if (!o.config.empty()) config = pernorm::ParseConfig(ReadInput(o.config));
  if (!o.lang.empty()) config.language = o.lang;
  if (o.discount_fallback) config.discount_fallback = true;
  config.seed = o.seed;
  config.Validate();
  const pernorm::Grammar grammar = ResolveGrammar(config.language, o.grammar_dir);

  pernorm::Corpus corpus = ReadLines(o.in);
  if (config.beta) {
    std::vector<pernorm::CorpusLine> kept;
    for (auto& l : corpus.lines) {
      if (pernorm::ScriptFilter(l.text, *config.beta)) kept.push_back(std::move(l));
    }
    corpus.lines = std::move(kept);
  }
  const auto result = pernorm::RunExperiment(corpus.lines, grammar, config, o.jobs);
  std::cerr << "lines " << result.lines << ", changed " << result.changed_lines << ", folds "
            << config.k << ", models " << result.models_trained << "\n";
  WriteOutput(o.results, [&](std::ostream& s) { pernorm::WriteResultsTsv(s, result); });
  if (!o.folds.empty()) {
    WriteOutput(o.folds, [&](std::ostream& s) { pernorm::WriteFoldsTsv(s, result); });
  }
  return kOk;
}

void PrintTest(std::ostream& out, const char* name, const std::optional<pernorm::TestResult>& r,
               const std::string& why) {
  using pernorm::experiment_detail::Num;
  out << name;
  if (!r) {
    out << "\tnan\tnan\tnan\tnan\tnan\t# " << why << "\n";
    return;
  }
  out << '\t' << Num(r->statistic) << '\t' << Num(r->p_value) << '\t'
      << (r->df ? Num(*r->df) : "nan") << '\t' << (r->ci_low ? Num(*r->ci_low) : "nan")
      << '\t' << (r->ci_high ? Num(*r->ci_high) : "nan") << '\n';
}

int SigTest(const Options& o) {
  const std::vector<double> a = ReadColumn(o.a), b = ReadColumn(o.b);
  std::optional<pernorm::TestResult> ws, mw, bm;
  std::string ws_why, mw_why, bm_why;
  auto run = [](auto fn, std::optional<pernorm::TestResult>& slot, std::string& why) {
    try {
      slot = fn();
    } catch (const pernorm::PreconditionError& e) {
      why = e.what();
    }
  };
  run([&] { return pernorm::WelchTest(a, b); }, ws, ws_why);
  run([&] { return pernorm::MannWhitneyTest(a, b); }, mw, mw_why);
  run([&] { return pernorm::BrunnerMunzelTest(a, b); }, bm, bm_why);
  WriteOutput(o.out, [&](std::ostream& s) {
    s << "test\tstatistic\tp_value\tdf\tci_lo\tci_hi\n";
    PrintTest(s, "welch", ws, ws_why);
    PrintTest(s, "mann_whitney", mw, mw_why);
    PrintTest(s, "brunner_munzel", bm, bm_why);
  });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perso-Arabic script normalization and evaluation toolkit", "pernorm"};
  app.require_subcommand(1);
  Options o;

  auto add_lang = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--lang", o.lang, "language tag: ar azb ckb ks ms pnb sd ug ur");
    if (required) opt->required();
    c->add_option("--grammar-dir", o.grammar_dir,
                  "directory whose <lang>.rules / visual_common.rules shadow the bundled ones");
  };
  auto add_jobs = [&](CLI::App* c) {
    c->add_option("--jobs", o.jobs, "worker threads (0 = one per core)");
  };

  auto* normalize = app.add_subcommand("normalize", "normalize text line by line");
  add_lang(normalize, true);
  normalize->add_option("--mode", o.mode, "nfc, visual or reading")->required();
  normalize->add_option("--in", o.in, "input file (default stdin)");
  normalize->add_option("--out", o.out, "output file (default stdout)");
  normalize->add_flag("--check", o.check, "verify idempotence instead of writing output");
  add_jobs(normalize);

  auto* diff = app.add_subcommand("diff", "report tokens changed by normalization");
  add_lang(diff, true);
  diff->add_option("--mode", o.mode, "nfc, visual or reading")->required();
  diff->add_option("--in", o.in, "input file (default stdin)");
  diff->add_option("--report", o.report, "report TSV (default stdout)");
  diff->add_option("--out", o.out, "also write the normalized lines here");
  add_jobs(diff);

  auto* filter = app.add_subcommand("filter", "keep lines with enough Arabic-script codepoints");
  filter->add_option("--beta", o.beta, "minimum Arabic-script fraction");
  filter->add_option("--lang", o.lang, "use the replication threshold for this language");
  filter->add_option("--in", o.in, "input file (default stdin)");
  filter->add_option("--out", o.out, "output file (default stdout)");
  add_jobs(filter);

  auto* stats = app.add_subcommand("stats", "corpus statistics block");
  add_lang(stats, true);
  stats->add_option("--mode", o.mode, "nfc, visual or reading");
  stats->add_option("--in", o.in, "input file (default stdin)");
  stats->add_option("--out", o.out, "output file (default stdout)");
  add_jobs(stats);

  auto* train = app.add_subcommand("train-lm", "train a modified Kneser-Ney model");
  train->add_option("--unit", o.unit, "char or word");
  train->add_option("--order", o.order, "n-gram order")->required()->check(CLI::Range(1, 32));
  train->add_option("--in", o.in, "training text (default stdin)");
  train->add_option("--model", o.model, "ARPA output (default stdout)");
  train->add_flag("--discount-fallback", o.discount_fallback,
                  "use fixed discounts when the count statistics are degenerate");

  auto* entropy = app.add_subcommand("entropy", "cross-entropy of text in bits per token");
  entropy->add_option("--model", o.model, "ARPA model")->required();
  entropy->add_option("--in", o.in, "test text (default stdin)");

  auto* kfold = app.add_subcommand("kfold", "k-fold baseline vs normalized experiment");
  add_lang(kfold, false);
  kfold->add_option("--config", o.config, "key=value experiment config");
  kfold->add_option("--in", o.in, "corpus (default stdin)")->required();
  kfold->add_option("--seed", o.seed, "shuffle seed")->required();
  kfold->add_option("--results", o.results, "summary TSV (default stdout)");
  kfold->add_option("--folds", o.folds, "per-fold TSV");
  kfold->add_flag("--discount-fallback", o.discount_fallback,
                  "use fixed discounts when the count statistics are degenerate");
  add_jobs(kfold);

  auto* sigtest = app.add_subcommand("sigtest", "Welch, Mann-Whitney and Brunner-Munzel tests");
  sigtest->add_option("--a", o.a, "first sample, one number per line")->required();
  sigtest->add_option("--b", o.b, "second sample, one number per line")->required();
  sigtest->add_option("--out", o.out, "output TSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*normalize) return Normalize(o);
    if (*diff) return Diff(o);
    if (*filter) return Filter(o);
    if (*stats) return Stats(o);
    if (*train) return TrainLm(o);
    if (*entropy) return Entropy(o);
    if (*kfold) return KFold(o);
    if (*sigtest) return SigTest(o);
  } catch (const pernorm::Utf8Error& e) {
    std::cerr << "pernorm: " << e.what() << "\n";
    return kEncoding;
  } catch (const pernorm::UnknownLanguageError& e) {
    std::cerr << "pernorm: " << e.what() << "\n";
    return kUsage;
  } catch (const pernorm::GrammarError& e) {
    std::cerr << "pernorm: grammar error: " << e.what() << "\n";
    return kUsage;
  } catch (const pernorm::ConfigError& e) {
    std::cerr << "pernorm: config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "pernorm: " << e.what() << "\n";
    return kUsage;
  } catch (const pernorm::Error& e) {
    std::cerr << "pernorm: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "pernorm: " << e.what() << "\n";
    return kInvariant;
  }
  return kUsage;
}
