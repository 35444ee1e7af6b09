// Copyright (c) 2026 The CED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ced/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <map>

namespace ced {

namespace {

// Iterative radix-2 FFT; fft_size is a power of two (512 by default).
void Fft(std::vector<std::complex<double>>* a) {
  const size_t n = a->size();
  auto& x = *a;
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

// Triangular mel filterbank, HTK-style unit-height triangles.
Eigen::MatrixXd BuildMelFilters(const FeatureConfig& cfg) {
  const int bins = cfg.fft_size / 2 + 1;
  Eigen::MatrixXd filters = Eigen::MatrixXd::Zero(cfg.num_mels, bins);
  const double mel_lo = HzToMel(cfg.fmin_hz);
  const double mel_hi = HzToMel(cfg.fmax_hz);
  std::vector<double> centers(cfg.num_mels + 2);
  for (int i = 0; i < cfg.num_mels + 2; ++i) {
    centers[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (cfg.num_mels + 1));
  }
  for (int m = 0; m < cfg.num_mels; ++m) {
    double left = centers[m], center = centers[m + 1], right = centers[m + 2];
    for (int k = 0; k < bins; ++k) {
      double hz = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      if (hz <= left || hz >= right) continue;
      filters(m, k) = hz <= center ? (hz - left) / (center - left)
                                   : (right - hz) / (right - center);
    }
  }
  return filters;
}

std::string SanitizeId(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

uint32_t ReadU32Le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void AppendU32Le(std::string* out, uint32_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
  out->push_back(static_cast<char>((v >> 16) & 0xff));
  out->push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace

int NumFrames(int samples, const FeatureConfig& cfg) {
  if (samples < cfg.window_samples) return 0;
  return 1 + (samples - cfg.window_samples) / cfg.hop_samples;
}

FeatureMatrix ExtractFilterbank(const Waveform& wav, const FeatureConfig& cfg) {
  Check(wav.sample_rate == cfg.sample_rate, ErrorKind::kUnsupportedFormat,
        "expected " + std::to_string(cfg.sample_rate) + " Hz input, got " +
            std::to_string(wav.sample_rate));
  const int len = static_cast<int>(wav.samples.size());
  Check(len >= cfg.window_samples, ErrorKind::kInvalidInput,
        "waveform shorter than one window (" + std::to_string(len) + " < " +
            std::to_string(cfg.window_samples) + " samples)");
  for (float s : wav.samples) {
    Check(std::isfinite(s), ErrorKind::kInvalidInput, "non-finite sample in waveform");
  }

  // Pre-emphasis over the whole signal.
  std::vector<double> emph(static_cast<size_t>(len));
  emph[0] = wav.samples[0] * (1.0 - cfg.preemphasis);
  for (int i = 1; i < len; ++i) {
    emph[static_cast<size_t>(i)] = wav.samples[i] - cfg.preemphasis * wav.samples[i - 1];
  }

  std::vector<double> window(static_cast<size_t>(cfg.window_samples));
  for (int i = 0; i < cfg.window_samples; ++i) {
    window[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / cfg.window_samples);
  }

  const int n_frames = NumFrames(len, cfg);
  const int bins = cfg.fft_size / 2 + 1;
  Eigen::MatrixXd filters = BuildMelFilters(cfg);
  FeatureMatrix out(n_frames, cfg.num_mels);

  std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.fft_size));
  Eigen::VectorXd power(bins);
  for (int t = 0; t < n_frames; ++t) {
    const int start = t * cfg.hop_samples;
    for (int i = 0; i < cfg.fft_size; ++i) {
      double v = i < cfg.window_samples
                     ? emph[static_cast<size_t>(start + i)] * window[static_cast<size_t>(i)]
                     : 0.0;
      buf[static_cast<size_t>(i)] = {v, 0.0};
    }
    Fft(&buf);
    for (int k = 0; k < bins; ++k) power(k) = std::norm(buf[static_cast<size_t>(k)]);
    Eigen::VectorXd mel = filters * power;
    for (int m = 0; m < cfg.num_mels; ++m) {
      out(t, m) = static_cast<float>(std::log(std::max(mel(m), 1e-10)));
    }
  }

  if (cfg.normalize) MeanVarianceNormalize(&out);
  return out;
}

void MeanVarianceNormalize(FeatureMatrix* features) {
  auto& f = *features;
  const auto n = static_cast<float>(f.rows());
  for (int c = 0; c < f.cols(); ++c) {
    float mean = f.col(c).mean();
    float var = (f.col(c).array() - mean).square().sum() / n;
    float std = std::sqrt(std::max(var, 0.0f));
    f.col(c) = (f.col(c).array() - mean) / std::max(std, 1e-10f);
  }
}

Waveform ReadWav(const std::string& path) {
  std::string bytes = ReadFileToString(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  Check(bytes.size() >= 44 && std::memcmp(p, "RIFF", 4) == 0 && std::memcmp(p + 8, "WAVE", 4) == 0,
        ErrorKind::kUnsupportedFormat, "not a RIFF/WAVE file: " + path);

  int audio_format = 0, channels = 0, bits = 0;
  Waveform wav;
  size_t pos = 12;
  bool have_fmt = false, have_data = false;
  while (pos + 8 <= bytes.size()) {
    const char* chunk_id = bytes.data() + pos;
    uint32_t chunk_size = ReadU32Le(p + pos + 4);
    size_t body = pos + 8;
    if (std::memcmp(chunk_id, "fmt ", 4) == 0 && body + 16 <= bytes.size()) {
      audio_format = p[body] | (p[body + 1] << 8);
      channels = p[body + 2] | (p[body + 3] << 8);
      wav.sample_rate = static_cast<int>(ReadU32Le(p + body + 4));
      bits = p[body + 14] | (p[body + 15] << 8);
      have_fmt = true;
    } else if (std::memcmp(chunk_id, "data", 4) == 0) {
      Check(have_fmt, ErrorKind::kUnsupportedFormat, "wav data chunk before fmt: " + path);
      Check(channels == 1, ErrorKind::kUnsupportedFormat, "expected mono wav: " + path);
      size_t end = std::min(bytes.size(), body + chunk_size);
      if (audio_format == 1 && bits == 16) {
        for (size_t i = body; i + 1 < end; i += 2) {
          int16_t v = static_cast<int16_t>(p[i] | (p[i + 1] << 8));
          wav.samples.push_back(static_cast<float>(v) / 32768.0f);
        }
      } else if (audio_format == 3 && bits == 32) {
        for (size_t i = body; i + 3 < end; i += 4) {
          float v;
          std::memcpy(&v, p + i, 4);
          wav.samples.push_back(v);
        }
      } else {
        Throw(ErrorKind::kUnsupportedFormat, "unsupported wav encoding in " + path);
      }
      have_data = true;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  Check(have_data, ErrorKind::kUnsupportedFormat, "wav file has no data chunk: " + path);
  return wav;
}

void WriteWav(const std::string& path, const Waveform& wav) {
  std::string out;
  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  out += "RIFF";
  AppendU32Le(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  AppendU32Le(&out, 16);
  out.push_back(1); out.push_back(0);  // PCM
  out.push_back(1); out.push_back(0);  // mono
  AppendU32Le(&out, static_cast<uint32_t>(wav.sample_rate));
  AppendU32Le(&out, static_cast<uint32_t>(wav.sample_rate * 2));
  out.push_back(2); out.push_back(0);  // block align
  out.push_back(16); out.push_back(0);
  out += "data";
  AppendU32Le(&out, data_bytes);
  for (float s : wav.samples) {
    float clamped = std::clamp(s, -1.0f, 1.0f);
    auto v = static_cast<int16_t>(std::lrint(clamped * 32767.0f));
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  }
  WriteStringToFile(path, out);
}

void SaveFeatures(const FeatureMatrix& features, const std::string& path) {
  Check(features.rows() >= 1, ErrorKind::kInvalidInput, "empty feature matrix");
  std::string out(kFeatureMagic, 4);
  AppendU32Le(&out, kFeatureVersion);
  AppendU32Le(&out, static_cast<uint32_t>(features.rows()));
  AppendU32Le(&out, static_cast<uint32_t>(features.cols()));
  out.append(reinterpret_cast<const char*>(features.data()),
             sizeof(float) * static_cast<size_t>(features.size()));
  WriteStringToFile(path, out);
}

FeatureMatrix LoadFeatures(const std::string& path) {
  std::string bytes = ReadFileToString(path);
  Check(bytes.size() >= 16 && std::memcmp(bytes.data(), kFeatureMagic, 4) == 0,
        ErrorKind::kUnsupportedFormat, "not a feature file: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  uint32_t version = ReadU32Le(p + 4);
  Check(version == kFeatureVersion, ErrorKind::kUnsupportedFormat,
        "unsupported feature file version in " + path);
  uint32_t rows = ReadU32Le(p + 8), cols = ReadU32Le(p + 12);
  Check(bytes.size() == 16 + sizeof(float) * rows * cols, ErrorKind::kIo,
        "truncated feature file: " + path);
  FeatureMatrix out(rows, cols);
  std::memcpy(out.data(), bytes.data() + 16, sizeof(float) * rows * cols);
  return out;
}

bool LooksLikeFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4)) return false;
  return std::memcmp(magic, kFeatureMagic, 4) == 0;
}

FeatureMatrix LoadEntryFeatures(const Manifest& manifest, const ManifestEntry& entry,
                                const FeatureConfig& cfg) {
  std::string path = manifest.ResolveDataPath(entry);
  if (!entry.features_path.empty()) return LoadFeatures(path);
  return ExtractFilterbank(ReadWav(path), cfg);
}

void SyntheticCorpusSpec::Validate() const {
  Check(frames_per_phoneme_lo >= 1, ErrorKind::kInvalidInput, "frames_per_phoneme lo must be >= 1");
  Check(frames_per_phoneme_hi >= frames_per_phoneme_lo, ErrorKind::kInvalidInput,
        "frames_per_phoneme hi must be >= lo");
  Check(noise_stddev >= 0.0f, ErrorKind::kInvalidInput, "noise_stddev must be >= 0");
  Check(utterances_per_keyword >= 1, ErrorKind::kInvalidInput, "utterances_per_keyword must be >= 1");
  Check(words_per_utterance >= 1, ErrorKind::kInvalidInput, "words_per_utterance must be >= 1");
  Check(!keywords.empty(), ErrorKind::kInvalidInput, "keyword list is empty");
  Check(num_mels >= 1, ErrorKind::kInvalidInput, "num_mels must be >= 1");
}

Eigen::RowVectorXf PhonemePrototype(int prototype_seed, int phoneme_id, int num_mels) {
  Rng rng(SplitMix64(static_cast<uint64_t>(prototype_seed)) ^
          (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(phoneme_id + 1)));
  Eigen::RowVectorXf proto(num_mels);
  for (int i = 0; i < num_mels; ++i) proto(i) = static_cast<float>(rng.Gauss());
  return proto;
}

FeatureMatrix SynthesizeUtterance(const PhonemeSequence& phonemes,
                                  const SyntheticCorpusSpec& spec, Rng* rng) {
  Check(!phonemes.empty(), ErrorKind::kInvalidInput, "cannot synthesize empty phoneme sequence");
  std::vector<int> durations(phonemes.size());
  int total = 0;
  for (size_t i = 0; i < phonemes.size(); ++i) {
    durations[i] = static_cast<int>(
        rng->UniformRange(spec.frames_per_phoneme_lo, spec.frames_per_phoneme_hi));
    total += durations[i];
  }
  FeatureMatrix out(total, spec.num_mels);
  int row = 0;
  for (size_t i = 0; i < phonemes.size(); ++i) {
    Eigen::RowVectorXf proto = PhonemePrototype(spec.prototype_seed, phonemes[i], spec.num_mels);
    for (int d = 0; d < durations[i]; ++d, ++row) {
      if (spec.noise_stddev == 0.0f) {
        out.row(row) = proto;
      } else {
        for (int c = 0; c < spec.num_mels; ++c) {
          out(row, c) = proto(c) + spec.noise_stddev * static_cast<float>(rng->Gauss());
        }
      }
    }
  }
  return out;
}

CorpusBuildResult BuildSyntheticCorpus(const SyntheticCorpusSpec& spec, const Lexicon& lexicon,
                                       const std::string& output_dir) {
  spec.Validate();
  EnsureDir(output_dir);
  EnsureDir(JoinPath(output_dir, "feats"));

  Manifest manifest;
  manifest.base_dir = output_dir;
  for (size_t ki = 0; ki < spec.keywords.size(); ++ki) {
    const std::string& keyword = spec.keywords[ki];
    for (int u = 0; u < spec.utterances_per_keyword; ++u) {
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "_%04d", u);
      std::string id = SanitizeId(ToLower(keyword)) + idbuf;
      // Per-utterance child seed keeps records independent of build order.
      Rng rng(SplitMix64(spec.seed) ^ Fnv1a64(id.data(), id.size()));

      std::vector<std::string> words = {ToLower(keyword)};
      for (int w = 1; w < spec.words_per_utterance; ++w) {
        words.push_back(ToLower(spec.keywords[rng.UniformInt(spec.keywords.size())]));
      }
      std::string transcript = JoinStrings(words, " ");
      PhonemeSequence phonemes = GraphemeToPhoneme(transcript, lexicon);
      FeatureMatrix feats = SynthesizeUtterance(phonemes, spec, &rng);

      std::string rel = JoinPath("feats", id + ".fbank");
      SaveFeatures(feats, JoinPath(output_dir, rel));

      ManifestEntry entry;
      entry.id = id;
      entry.features_path = rel;
      entry.transcript = transcript;
      entry.phonemes = lexicon.vocab().ToSymbols(phonemes);
      entry.duration_frames = static_cast<int>(feats.rows());
      manifest.entries.push_back(std::move(entry));
    }
  }

  std::string manifest_path = JoinPath(output_dir, "manifest.jsonl");
  SaveManifest(manifest, manifest_path);
  return {manifest_path, static_cast<int>(manifest.entries.size())};
}

std::vector<Manifest> SplitManifest(const Manifest& manifest,
                                    const std::vector<double>& fractions) {
  Check(!fractions.empty(), ErrorKind::kInvalidInput, "no split fractions");
  double sum = 0;
  for (double f : fractions) {
    Check(f >= 0, ErrorKind::kInvalidInput, "negative split fraction");
    sum += f;
  }
  Check(sum <= 1.0 + 1e-9, ErrorKind::kInvalidInput, "split fractions exceed 1");

  // Group by anchor word (first transcript word), preserving order.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    auto words = SplitWhitespace(manifest.entries[i].transcript);
    std::string key = words.empty() ? "" : words[0];
    if (groups.find(key) == groups.end()) group_order.push_back(key);
    groups[key].push_back(i);
  }

  std::vector<Manifest> out(fractions.size());
  for (auto& m : out) m.base_dir = manifest.base_dir;
  for (const auto& key : group_order) {
    const auto& idx = groups[key];
    size_t start = 0;
    for (size_t s = 0; s < fractions.size(); ++s) {
      size_t take = s + 1 == fractions.size()
                        ? idx.size() - start
                        : static_cast<size_t>(fractions[s] * static_cast<double>(idx.size()) + 1e-9);
      take = std::min(take, idx.size() - start);
      for (size_t k = 0; k < take; ++k) {
        out[s].entries.push_back(manifest.entries[idx[start + k]]);
      }
      start += take;
    }
  }
  return out;
}

}  // namespace ced
