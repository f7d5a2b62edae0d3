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

// WAV I/O and the MFCC frontend.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tenet/error.hpp"
#include "tenet/tensor.hpp"

namespace tenet {

struct AudioClip {
  std::vector<float> samples;  // PCM in [-1, 1]
  std::uint32_t sample_rate_hz = 16000;

  std::size_t size() const noexcept { return samples.size(); }

  void validate() const {
    require(!samples.empty(), Errc::empty_input, "audio clip is empty");
    require(all_finite<float>(samples), Errc::numeric, "audio clip has non-finite samples");
  }

  friend bool operator==(const AudioClip&, const AudioClip&) = default;
};

/// Zero-pads or truncates to exactly `length` samples.
inline AudioClip fit_length(AudioClip clip, std::size_t length) {
  clip.samples.resize(length, 0.0f);
  return clip;
}

// ---------------------------------------------------------------------------
// RIFF / WAV
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t read_le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t read_le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace detail

/// Decodes a mono 16-bit PCM WAV image by walking its RIFF chunks; chunks
/// other than "fmt " and "data" are skipped in any order.
inline AudioClip parse_wav(std::span<const std::uint8_t> bytes) {
  using detail::read_le16;
  using detail::read_le32;
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          Errc::malformed_wav, "missing RIFF/WAVE header");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_le32(chunk + 4);
    const std::size_t body = pos + 8;
    require(body + size <= bytes.size(), Errc::malformed_wav, "chunk runs past end of file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      require(size >= 16, Errc::malformed_wav, "fmt chunk too short");
      format = read_le16(chunk + 8);
      channels = read_le16(chunk + 10);
      rate = read_le32(chunk + 12);
      bits = read_le16(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1u);  // chunks are word aligned
  }
  require(have_fmt, Errc::malformed_wav, "no fmt chunk");
  require(data != nullptr, Errc::malformed_wav, "no data chunk");
  require(format == 1 && bits == 16, Errc::unsupported_wav,
          "only 16-bit PCM is supported (format " + std::to_string(format) + ", " +
              std::to_string(bits) + " bits)");
  require(channels == 1, Errc::unsupported_wav,
          "only mono is supported (" + std::to_string(channels) + " channels)");

  AudioClip clip;
  clip.sample_rate_hz = rate;
  clip.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(read_le16(data + 2 * i));
    clip.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return clip;
}

/// Loads a mono PCM16 WAV at `expected_rate_hz` and fits it to one second
/// (zero-pad or truncate). No resampling: other rates are rejected.
inline AudioClip load_wav(const std::filesystem::path& path, std::uint32_t expected_rate_hz = 16000) {
  const auto bytes = detail::read_file(path);
  AudioClip clip = parse_wav(bytes);
  require(clip.sample_rate_hz == expected_rate_hz, Errc::unsupported_wav,
          path.string() + ": sample rate " + std::to_string(clip.sample_rate_hz) + " Hz, expected " +
              std::to_string(expected_rate_hz));
  return fit_length(std::move(clip), expected_rate_hz);
}

inline std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  using detail::put_le16;
  using detail::put_le32;
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le32(out, 16);
  put_le16(out, 1);
  put_le16(out, 1);
  put_le32(out, clip.sample_rate_hz);
  put_le32(out, clip.sample_rate_hz * 2);
  put_le16(out, 2);
  put_le16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le32(out, data_bytes);
  for (float s : clip.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const auto v = static_cast<std::int16_t>(std::lround(std::min(c * 32768.0f, 32767.0f)));
    put_le16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

inline void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// MFCC
// ---------------------------------------------------------------------------

struct MfccConfig {
  std::uint32_t sample_rate_hz = 16000;
  double window_ms = 30.0;
  double shift_ms = 10.0;
  std::size_t num_coeffs = 40;
  double mel_low_hz = 20.0;
  double mel_high_hz = 4000.0;
  std::size_t num_mel_filters = 40;
  std::size_t fft_size = 512;
  double preemphasis = 0.97;
  double log_floor = 1e-10;

  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::lround(window_ms * sample_rate_hz / 1000.0));
  }
  std::size_t shift_samples() const {
    return static_cast<std::size_t>(std::lround(shift_ms * sample_rate_hz / 1000.0));
  }
  std::size_t num_bins() const { return fft_size / 2 + 1; }

  /// 1 + floor((L - W) / S).
  std::size_t num_frames(std::size_t length) const {
    const std::size_t w = window_samples();
    return length < w ? 0 : 1 + (length - w) / shift_samples();
  }

  void validate() const {
    require(shift_ms > 0 && window_ms > shift_ms, Errc::invalid_argument,
            "MFCC needs window_ms > shift_ms > 0");
    require(mel_low_hz >= 0 && mel_low_hz < mel_high_hz && mel_high_hz <= sample_rate_hz / 2.0,
            Errc::invalid_argument, "MFCC needs 0 <= mel_low < mel_high <= sample_rate/2");
    require(num_coeffs >= 1 && num_coeffs <= num_mel_filters, Errc::invalid_argument,
            "MFCC needs 1 <= num_coeffs <= num_mel_filters");
    require(fft_size >= window_samples() && (fft_size & (fft_size - 1)) == 0,
            Errc::invalid_argument, "fft_size must be a power of two >= the window");
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filters evenly spaced on the HTK mel scale between mel_low_hz
/// and mel_high_hz, evaluated at each FFT bin centre. Row-major
/// num_mel_filters x num_bins. Bins outside the band get zero weight, which
/// is how the 20 Hz / 4 kHz band limit is applied.
inline std::vector<double> mel_filterbank(const MfccConfig& cfg) {
  cfg.validate();
  const std::size_t bins = cfg.num_bins();
  const std::size_t n = cfg.num_mel_filters;
  const double lo = hz_to_mel(cfg.mel_low_hz);
  const double hi = hz_to_mel(cfg.mel_high_hz);
  std::vector<double> edges(n + 2);
  for (std::size_t i = 0; i < n + 2; ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n + 1));

  std::vector<double> fb(n * bins, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate_hz / static_cast<double>(cfg.fft_size);
      const double up = (f - left) / (centre - left);
      const double down = (right - f) / (right - centre);
      fb[m * bins + b] = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Orthonormal DCT-II basis, row k = coefficient k; num_coeffs x n.
inline std::vector<double> dct2_matrix(std::size_t num_coeffs, std::size_t n) {
  std::vector<double> d(num_coeffs * n);
  for (std::size_t k = 0; k < num_coeffs; ++k) {
    const double norm = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      d[k * n + i] = norm * std::cos(std::numbers::pi * static_cast<double>(k) *
                                     (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
  }
  return d;
}

/// MFCC features as a T x 1 x num_coeffs map: pre-emphasis over the whole
/// clip, then per frame a symmetric Hann window, |FFT|^2, band-limited mel
/// filterbank, log (floored), orthonormal DCT-II.
inline FeatureMap<float> compute_mfcc(const AudioClip& clip, const MfccConfig& cfg = {}) {
  cfg.validate();
  clip.validate();
  require(clip.sample_rate_hz == cfg.sample_rate_hz, Errc::invalid_argument,
          "clip sample rate " + std::to_string(clip.sample_rate_hz) + " != MFCC rate " +
              std::to_string(cfg.sample_rate_hz));
  const std::size_t win = cfg.window_samples();
  const std::size_t hop = cfg.shift_samples();
  const std::size_t frames = cfg.num_frames(clip.size());
  require(frames >= 1, Errc::invalid_argument, "clip shorter than one analysis window");

  std::vector<double> emphasized(clip.size());
  emphasized[0] = clip.samples[0];
  for (std::size_t i = 1; i < clip.size(); ++i)
    emphasized[i] = clip.samples[i] - cfg.preemphasis * clip.samples[i - 1];

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(win - 1));

  const auto fb = mel_filterbank(cfg);
  const auto dct = dct2_matrix(cfg.num_coeffs, cfg.num_mel_filters);
  const std::size_t bins = cfg.num_bins();

  FeatureMap<float> out(frames, cfg.num_coeffs);
  std::vector<std::complex<double>> spectrum(cfg.fft_size);
  std::vector<double> power(bins), log_mel(cfg.num_mel_filters);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(spectrum.begin(), spectrum.end(), std::complex<double>{});
    for (std::size_t i = 0; i < win; ++i) spectrum[i] = emphasized[t * hop + i] * window[i];
    fft(spectrum);
    for (std::size_t b = 0; b < bins; ++b) power[b] = std::norm(spectrum[b]);
    for (std::size_t m = 0; m < cfg.num_mel_filters; ++m) {
      double e = 0.0;
      for (std::size_t b = 0; b < bins; ++b) e += fb[m * bins + b] * power[b];
      log_mel[m] = std::log(std::max(e, cfg.log_floor));
    }
    auto row = out.frame(t);
    for (std::size_t k = 0; k < cfg.num_coeffs; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < cfg.num_mel_filters; ++m)
        c += dct[k * cfg.num_mel_filters + m] * log_mel[m];
      row[k] = static_cast<float>(c);
    }
  }
  return out;
}

}  // namespace tenet
