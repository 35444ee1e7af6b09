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

#ifndef CED_PHONEMES_H_
#define CED_PHONEMES_H_

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ced/common.h"

namespace ced {

// A phoneme sequence is an ordered list of vocabulary indices. The blank id
// used by CTC lives outside this range and never appears here.
using PhonemeSequence = std::vector<int>;

// 74-symbol phoneme inventory: 5 special tokens, 24 ARPAbet consonants and
// 15 ARPAbet vowels in 3 stress levels. Pronunciations may only use the 69
// ARPAbet symbols; the specials exist to keep the inventory at its nominal
// size and are reserved for future text-side markup.
class PhonemeVocabulary {
 public:
  static PhonemeVocabulary BuildDefault();
  // One symbol per line; line order defines index order.
  static PhonemeVocabulary LoadFromFile(const std::string& path);

  int size() const { return static_cast<int>(symbols_.size()); }
  int blank_id() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& Symbol(int id) const;
  int Id(const std::string& symbol) const;         // -1 when absent
  int RequireId(const std::string& symbol) const;  // throws invalid-input

  bool IsSpecial(int id) const;
  bool IsUsablePhoneme(int id) const { return !IsSpecial(id); }
  // The 69 symbols allowed in pronunciations and confusable generation.
  const std::vector<int>& usable_ids() const { return usable_ids_; }

  // Base vowel symbol -> its stress variants, e.g. OW -> {OW0, OW1, OW2}.
  const std::map<std::string, std::vector<std::string>>& stress_groups() const {
    return stress_groups_;
  }

  std::string hash() const;

  std::vector<std::string> ToSymbols(const PhonemeSequence& seq) const;
  PhonemeSequence FromSymbols(const std::vector<std::string>& symbols) const;

 private:
  PhonemeVocabulary() = default;
  void Finalize();

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> usable_ids_;
  std::map<std::string, std::vector<std::string>> stress_groups_;
};

enum class OovPolicy { kError, kSpellingFallback };

// Word -> pronunciation table standing in for a learned G2P model. Duplicate
// words in the file are kept as alternate pronunciations in file order; the
// first one wins at lookup time.
class Lexicon {
 public:
  Lexicon(const PhonemeVocabulary* vocab, OovPolicy policy = OovPolicy::kError)
      : vocab_(vocab), policy_(policy) {}

  // Plain text, one entry per line: WORD PH1 PH2 ...; '#' starts a comment.
  static Lexicon LoadFromFile(const std::string& path, const PhonemeVocabulary* vocab,
                              OovPolicy policy = OovPolicy::kError);

  void AddEntry(const std::string& word, const PhonemeSequence& pron);
  bool Contains(const std::string& word) const;
  // First pronunciation, or spelling fallback / OOV error per policy.
  PhonemeSequence Pronounce(const std::string& word) const;
  const std::vector<PhonemeSequence>* Pronunciations(const std::string& word) const;

  OovPolicy policy() const { return policy_; }
  void set_policy(OovPolicy p) { policy_ = p; }
  const PhonemeVocabulary& vocab() const { return *vocab_; }
  size_t size() const { return entries_.size(); }

 private:
  PhonemeSequence SpellOut(const std::string& word) const;

  const PhonemeVocabulary* vocab_;
  OovPolicy policy_;
  std::unordered_map<std::string, std::vector<PhonemeSequence>> entries_;
};

// Lowercases and whitespace-normalizes text, then concatenates per-word
// pronunciations in word order. Empty text is an invalid-input error.
PhonemeSequence GraphemeToPhoneme(const std::string& text, const Lexicon& lexicon);

// Levenshtein distance over phoneme tokens, unit costs. Both operands must
// be non-empty.
int PhonemeEditDistance(const PhonemeSequence& a, const PhonemeSequence& b);

// Distance with empty operands permitted; backs CER, where an all-blank
// decode legitimately yields an empty hypothesis.
int LevenshteinAllowEmpty(const PhonemeSequence& a, const PhonemeSequence& b);

// PhonemeEditDistance(reference, hypothesis) / len(reference). The
// reference must be non-empty; the hypothesis may be empty.
double Cer(const PhonemeSequence& reference, const PhonemeSequence& hypothesis);

}  // namespace ced

#endif  // CED_PHONEMES_H_
