// Copyright 2026 The TENet-KWS Authors
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

// Speech-Commands style corpus handling and the synthetic toy corpus.

#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tenet/audio.hpp"
#include "tenet/error.hpp"
#include "tenet/random.hpp"

namespace tenet {

inline constexpr std::array<std::string_view, 10> kKeywords = {
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};
inline constexpr std::size_t kUnknownLabel = 10;
inline constexpr std::size_t kSilenceLabel = 11;
inline constexpr std::string_view kSilenceDir = "_silence_";
inline constexpr std::string_view kNoiseDir = "_background_noise_";

inline std::string class_name(std::size_t label) {
  if (label < kKeywords.size()) return std::string(kKeywords[label]);
  if (label == kUnknownLabel) return "_unknown_";
  if (label == kSilenceLabel) return std::string(kSilenceDir);
  throw Error(Errc::invalid_argument, "class index out of range: " + std::to_string(label));
}

/// Total mapping from a keyword directory name to one of the 12 classes.
inline std::size_t label_for_keyword(std::string_view dir) {
  for (std::size_t i = 0; i < kKeywords.size(); ++i)
    if (dir == kKeywords[i]) return i;
  if (dir == kSilenceDir) return kSilenceLabel;
  return kUnknownLabel;
}

enum class Split { train, validation, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "validation" || s == "val") return Split::validation;
  if (s == "test") return Split::test;
  throw Error(Errc::invalid_argument, "unknown split '" + std::string(s) + "'");
}

struct SplitConfig {
  double train_pct = 80.0;
  double val_pct = 10.0;
  double test_pct = 10.0;

  void validate() const {
    require(train_pct >= 0 && val_pct >= 0 && test_pct >= 0 &&
                std::abs(train_pct + val_pct + test_pct - 100.0) < 1e-9,
            Errc::invalid_argument, "split percentages must be non-negative and sum to 100");
  }
};

/// Lower-case hex SHA-1 digest.
inline std::string sha1_hex(std::string_view text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  require(EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha1(), nullptr) == 1,
          Errc::numeric, "SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

/// File name with directories removed and any "_nohash_..." suffix stripped,
/// so every clip of one speaker hashes identically.
inline std::string split_key(std::string_view filename) {
  if (auto slash = filename.find_last_of("/\\"); slash != std::string_view::npos)
    filename = filename.substr(slash + 1);
  if (auto tag = filename.find("_nohash_"); tag != std::string_view::npos)
    filename = filename.substr(0, tag);
  return std::string(filename);
}

/// Position of a file name in [0, 100], stable forever:
///   h   = last 8 hex digits of sha1(split_key(name)) as a uint32
///   pct = (h mod 2^27) * 100 / (2^27 - 1)
/// This equals the reference Speech Commands recipe, which takes the full
/// 160-bit digest mod 2^27 (only the low 27 bits survive).
inline double split_percentage(std::string_view filename) {
  const std::string hex = sha1_hex(split_key(filename));
  const auto low = static_cast<std::uint32_t>(std::stoul(hex.substr(hex.size() - 8), nullptr, 16));
  constexpr std::uint32_t kMaxPerClass = (1u << 27) - 1;
  return static_cast<double>(low % (kMaxPerClass + 1u)) * (100.0 / kMaxPerClass);
}

/// pct < train -> train, < train + val -> validation, otherwise test.
inline Split assign_split(std::string_view filename, const SplitConfig& cfg = {}) {
  require(!filename.empty(), Errc::invalid_argument, "empty file name");
  cfg.validate();
  const double pct = split_percentage(filename);
  if (pct < cfg.train_pct) return Split::train;
  if (pct < cfg.train_pct + cfg.val_pct) return Split::validation;
  return Split::test;
}

struct LabeledClip {
  std::string path;     // relative to the corpus root, e.g. "yes/abc_nohash_0.wav"
  std::string keyword;  // directory name
  Split split = Split::train;
  std::size_t label = 0;
  std::uint64_t silence_seed = 0;  // drives the noise crop for silence items

  bool is_silence() const { return label == kSilenceLabel; }
  friend bool operator==(const LabeledClip&, const LabeledClip&) = default;
};

/// Silence clip: a random one-second crop of the noise bank scaled by U(0, 0.1).
inline AudioClip make_silence(const std::vector<AudioClip>& noise_bank, std::uint64_t seed,
                              std::size_t length = 16000, std::uint32_t rate = 16000) {
  AudioClip clip{std::vector<float>(length, 0.0f), rate};
  if (noise_bank.empty()) return clip;
  Rng rng(seed);
  const auto& noise = noise_bank[rng.below(noise_bank.size())];
  const double coeff = rng.uniform(0.0, 0.1);
  const std::size_t span = noise.size() > length ? noise.size() - length : 0;
  const std::size_t offset = rng.below(span + 1);
  for (std::size_t i = 0; i < length && offset + i < noise.size(); ++i)
    clip.samples[i] = static_cast<float>(coeff * noise.samples[offset + i]);
  return clip;
}

struct Corpus {
  std::filesystem::path root;          // empty for in-memory corpora
  std::vector<LabeledClip> items;
  std::vector<AudioClip> noise_bank;
  std::map<std::string, AudioClip> in_memory;  // path -> audio
  std::vector<std::string> warnings;

  AudioClip audio(const LabeledClip& item) const {
    if (item.is_silence()) return make_silence(noise_bank, item.silence_seed);
    if (auto it = in_memory.find(item.path); it != in_memory.end()) return it->second;
    return load_wav(root / item.path);
  }

  std::vector<const LabeledClip*> split(Split s) const {
    std::vector<const LabeledClip*> out;
    for (const auto& item : items)
      if (item.split == s) out.push_back(&item);
    return out;
  }

  /// path,label,split with a header row.
  void write_manifest(std::ostream& os) const {
    os << "path,label,split\n";
    for (const auto& item : items) os << item.path << ',' << item.label << ',' << to_string(item.split) << '\n';
  }
};

struct ScanConfig {
  SplitConfig split;
  double unknown_pct = 10.0;  // unknown items per split, % of that split's keyword items
  double silence_pct = 10.0;  // silence items per split, % of that split's keyword items
  std::uint64_t seed = 0;
};

namespace detail {
inline std::vector<std::filesystem::path> sorted_entries(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}
inline bool is_wav(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".wav";
}
}  // namespace detail

/// Reads root/<keyword>/<clip>.wav plus root/_background_noise_/*.wav.
/// Unknown items are sampled (seeded) from non-target words and silence items
/// are synthesised from the noise bank, both per split in proportion to the
/// split's keyword count. Final item order is a seeded shuffle.
inline Corpus scan_corpus(const std::filesystem::path& root, const ScanConfig& cfg = {}) {
  require(std::filesystem::is_directory(root), Errc::io, "corpus root not found: " + root.string());
  cfg.split.validate();
  Corpus corpus;
  corpus.root = root;

  std::vector<LabeledClip> keywords, unknowns;
  for (const auto& dir : detail::sorted_entries(root)) {
    if (!std::filesystem::is_directory(dir)) continue;
    const std::string name = dir.filename().string();
    if (name == kNoiseDir) {
      for (const auto& f : detail::sorted_entries(dir))
        if (detail::is_wav(f)) {
          auto clip = parse_wav(detail::read_file(f));
          require(clip.sample_rate_hz == 16000, Errc::unsupported_wav,
                  f.string() + ": noise must be 16 kHz");
          corpus.noise_bank.push_back(std::move(clip));
        }
      continue;
    }
    if (name == kSilenceDir) continue;
    for (const auto& f : detail::sorted_entries(dir)) {
      if (!detail::is_wav(f)) continue;
      const std::string file = f.filename().string();
      LabeledClip item{name + "/" + file, name, assign_split(file, cfg.split), label_for_keyword(name), 0};
      (item.label == kUnknownLabel ? unknowns : keywords).push_back(std::move(item));
    }
  }
  require(!keywords.empty() || !unknowns.empty(), Errc::empty_input,
          "no WAV clips found under " + root.string());
  if (unknowns.empty()) corpus.warnings.push_back("corpus has no non-target words; unknown class is empty");
  if (corpus.noise_bank.empty())
    corpus.warnings.push_back("no background noise found; silence items are all-zero");

  Rng rng(cfg.seed);
  for (Split s : {Split::train, Split::validation, Split::test}) {
    std::size_t n_keywords = 0;
    for (const auto& k : keywords)
      if (k.split == s) {
        corpus.items.push_back(k);
        ++n_keywords;
      }
    std::vector<LabeledClip> pool;
    for (const auto& u : unknowns)
      if (u.split == s) pool.push_back(u);
    rng.shuffle(pool.begin(), pool.end());
    const auto n_unknown = std::min<std::size_t>(
        pool.size(), static_cast<std::size_t>(std::lround(cfg.unknown_pct / 100.0 * n_keywords)));
    // keyword-free corpora still get their unknown words
    const std::size_t take = n_keywords == 0 ? pool.size() : n_unknown;
    corpus.items.insert(corpus.items.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    const auto n_silence =
        static_cast<std::size_t>(std::lround(cfg.silence_pct / 100.0 * n_keywords));
    for (std::size_t i = 0; i < n_silence; ++i)
      corpus.items.push_back(LabeledClip{std::string(kSilenceDir) + "/" + std::string(to_string(s)) + "_" +
                                             std::to_string(i),
                                         std::string(kSilenceDir), s, kSilenceLabel, rng.next()});
  }
  rng.shuffle(corpus.items.begin(), corpus.items.end());
  return corpus;
}

// ---------------------------------------------------------------------------
// Synthetic toy corpus
// ---------------------------------------------------------------------------

inline constexpr std::size_t kToyTemplates = 14;  // 10 keywords + 4 unknown words
inline constexpr std::array<std::string_view, 4> kToyUnknownWords = {"bed", "cat", "dog", "tree"};

struct ToyTemplate {
  double f_start_hz;
  double f_end_hz;
  double tremolo_hz;
};

/// Template k: a rising (even k) or falling (odd k) linear chirp plus its
/// second harmonic, with a per-template tremolo rate.
inline ToyTemplate toy_template(std::size_t k) {
  require(k < kToyTemplates, Errc::invalid_argument, "toy template index out of range");
  const double f0 = 250.0 + 230.0 * static_cast<double>(k);
  return {f0, (k % 2 == 0) ? f0 * 1.4 : f0 * 0.7, 3.0 + 1.5 * static_cast<double>(k)};
}

/// Renders template k with the given onset (s) and peak amplitude, 1 s long.
inline AudioClip render_toy_template(std::size_t k, double onset_s = 0.25, double amplitude = 0.5) {
  const ToyTemplate tpl = toy_template(k);
  constexpr double kRate = 16000.0, kDuration = 0.5;
  AudioClip clip{std::vector<float>(16000, 0.0f), 16000};
  double phase = 0.0;
  for (std::size_t i = 0; i < clip.size(); ++i) {
    const double t = static_cast<double>(i) / kRate - onset_s;
    if (t < 0.0 || t >= kDuration) continue;
    const double f = tpl.f_start_hz + (tpl.f_end_hz - tpl.f_start_hz) * t / kDuration;
    phase += 2.0 * std::numbers::pi * f / kRate;
    const double env = std::sin(std::numbers::pi * t / kDuration);
    const double trem = 0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * tpl.tremolo_hz * t);
    const double s = std::sin(phase) + 0.35 * std::sin(2.0 * phase);
    clip.samples[i] = static_cast<float>(amplitude * env * trem * s / 1.35);
  }
  return clip;
}

/// Three 3-second noise recordings: white, integrated (brown) and mains hum.
inline std::vector<AudioClip> toy_noise_bank(std::uint64_t seed) {
  Rng rng(seed);
  constexpr std::size_t kLen = 48000;
  std::vector<AudioClip> bank(3, AudioClip{std::vector<float>(kLen), 16000});
  double brown = 0.0;
  for (std::size_t i = 0; i < kLen; ++i) {
    bank[0].samples[i] = static_cast<float>(std::clamp(0.3 * rng.normal(), -1.0, 1.0));
    brown = 0.995 * brown + 0.05 * rng.normal();
    bank[1].samples[i] = static_cast<float>(std::clamp(brown, -1.0, 1.0));
    const double t = static_cast<double>(i) / 16000.0;
    const double hum = 0.3 * std::sin(2 * std::numbers::pi * 50 * t) +
                       0.15 * std::sin(2 * std::numbers::pi * 150 * t) + 0.05 * rng.normal();
    bank[2].samples[i] = static_cast<float>(std::clamp(hum, -1.0, 1.0));
  }
  return bank;
}

/// 12-class synthetic corpus held in memory. Keyword class k renders template
/// k, unknown items render one of the held-out templates, silence items are
/// noise crops. Each clip gets random onset (+-0.1 s), amplitude and a little
/// white noise. Splits come from assign_split on generated speaker names.
inline Corpus make_toy_corpus(std::uint64_t seed, std::size_t items_per_class) {
  require(items_per_class >= 10, Errc::invalid_argument, "toy corpus needs >= 10 items per class");
  Corpus corpus;
  Rng rng(seed);
  corpus.noise_bank = toy_noise_bank(rng.next());
  static constexpr char kHex[] = "0123456789abcdef";
  for (std::size_t label = 0; label <= kSilenceLabel; ++label) {
    for (std::size_t n = 0; n < items_per_class; ++n) {
      std::string speaker;
      for (int i = 0; i < 8; ++i) speaker += kHex[rng.below(16)];
      LabeledClip item;
      item.label = label;
      if (label == kSilenceLabel) {
        item.keyword = std::string(kSilenceDir);
        item.silence_seed = rng.next();
      } else if (label == kUnknownLabel) {
        item.keyword = std::string(kToyUnknownWords[rng.below(kToyUnknownWords.size())]);
      } else {
        item.keyword = std::string(kKeywords[label]);
      }
      const std::string file = speaker + "_nohash_" + std::to_string(n) + ".wav";
      item.path = item.keyword + "/" + file;
      item.split = assign_split(file);
      if (label != kSilenceLabel) {
        std::size_t tpl = label;
        if (label == kUnknownLabel) {
          const auto it = std::find(kToyUnknownWords.begin(), kToyUnknownWords.end(), item.keyword);
          tpl = kKeywords.size() + static_cast<std::size_t>(it - kToyUnknownWords.begin());
        }
        AudioClip clip =
            render_toy_template(tpl, 0.25 + rng.uniform(-0.1, 0.1), rng.uniform(0.3, 0.7));
        const double noise = rng.uniform(0.002, 0.02);
        for (float& s : clip.samples)
          s = static_cast<float>(std::clamp(s + noise * rng.normal(), -1.0, 1.0));
        corpus.in_memory.emplace(item.path, std::move(clip));
      }
      corpus.items.push_back(std::move(item));
    }
  }
  return corpus;
}

/// Writes an in-memory corpus as <dir>/<keyword>/<clip>.wav plus the noise
/// bank under _background_noise_. Silence items are not written; scan_corpus
/// regenerates them from the noise bank.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / kNoiseDir);
  for (std::size_t i = 0; i < corpus.noise_bank.size(); ++i)
    save_wav(dir / kNoiseDir / ("noise_" + std::to_string(i) + ".wav"), corpus.noise_bank[i]);
  for (const auto& item : corpus.items) {
    if (item.is_silence()) continue;
    const auto path = dir / item.path;
    std::filesystem::create_directories(path.parent_path());
    save_wav(path, corpus.audio(item));
  }
}

}  // namespace tenet
