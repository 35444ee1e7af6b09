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

#ifndef CED_FEATURES_H_
#define CED_FEATURES_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ced/common.h"
#include "ced/manifest.h"
#include "ced/phonemes.h"

namespace ced {

// frames x channels, row per frame. 100 frames/second at the standard
// window/hop configuration.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;
};

struct FeatureConfig {
  int sample_rate = 16000;
  int window_samples = 400;  // 25 ms
  int hop_samples = 160;     // 10 ms
  int num_mels = 80;
  int fft_size = 512;
  float preemphasis = 0.97f;
  float fmin_hz = 20.0f;
  float fmax_hz = 8000.0f;
  bool normalize = true;  // per-utterance, per-channel mean/variance
};

// Frames for a waveform of `samples` samples: 1 + floor((len - win) / hop).
int NumFrames(int samples, const FeatureConfig& cfg);

// 80-channel log-mel filterbank. Requires 16 kHz mono input of at least one
// window; shorter input is an invalid-input error, other sample rates are
// unsupported-format.
FeatureMatrix ExtractFilterbank(const Waveform& wav, const FeatureConfig& cfg = {});

// In-place per-utterance mean-variance normalization per channel.
void MeanVarianceNormalize(FeatureMatrix* features);

// Minimal RIFF/WAVE reader: PCM16 or float32, mono.
Waveform ReadWav(const std::string& path);
void WriteWav(const std::string& path, const Waveform& wav);

// Binary feature file: 16-byte header magic|version|n_frames|n_channels
// (little-endian u32 each), then row-major float32 data.
inline constexpr char kFeatureMagic[4] = {'C', 'E', 'D', 'F'};
inline constexpr uint32_t kFeatureVersion = 1;

void SaveFeatures(const FeatureMatrix& features, const std::string& path);
FeatureMatrix LoadFeatures(const std::string& path);
bool LooksLikeFeatureFile(const std::string& path);

// Loads the data behind a manifest entry: features directly, or audio run
// through the filterbank frontend.
FeatureMatrix LoadEntryFeatures(const Manifest& manifest, const ManifestEntry& entry,
                                const FeatureConfig& cfg = {});

// -- synthetic corpus ------------------------------------------------------

// Desk-scale stand-in for a speech corpus: each phoneme gets one fixed
// random prototype frame (a deterministic function of prototype_seed and
// the phoneme id); utterances are noisy runs of prototypes.
struct SyntheticCorpusSpec {
  std::vector<std::string> keywords;
  int prototype_seed = 1;
  int frames_per_phoneme_lo = 6;
  int frames_per_phoneme_hi = 12;
  float noise_stddev = 0.0f;
  int utterances_per_keyword = 10;
  int words_per_utterance = 1;  // >1 builds multi-word transcripts
  uint64_t seed = 1;
  int num_mels = 80;

  void Validate() const;
};

Eigen::RowVectorXf PhonemePrototype(int prototype_seed, int phoneme_id, int num_mels);

// Concatenates, per phoneme, uniform[lo,hi] copies of its prototype plus
// i.i.d. Gaussian noise. Deterministic given the rng state.
FeatureMatrix SynthesizeUtterance(const PhonemeSequence& phonemes,
                                  const SyntheticCorpusSpec& spec, Rng* rng);

struct CorpusBuildResult {
  std::string manifest_path;
  int num_utterances = 0;
};

// Writes one feature file per utterance plus manifest.jsonl under
// output_dir. Returns the manifest path.
CorpusBuildResult BuildSyntheticCorpus(const SyntheticCorpusSpec& spec, const Lexicon& lexicon,
                                       const std::string& output_dir);

// Stratified per-keyword split by utterance index; fractions must sum to
// at most 1, remainder goes to the last split.
std::vector<Manifest> SplitManifest(const Manifest& manifest,
                                    const std::vector<double>& fractions);

}  // namespace ced

#endif  // CED_FEATURES_H_
