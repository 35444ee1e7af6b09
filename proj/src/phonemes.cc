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

#include "ced/phonemes.h"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ced {

namespace {

const char* kSpecials[] = {"<pad>", "<unk>", "<s>", "</s>", "<space>"};

const char* kConsonants[] = {"B",  "CH", "D",  "DH", "F", "G",  "HH", "JH",
                             "K",  "L",  "M",  "N",  "NG", "P", "R",  "S",
                             "SH", "T",  "TH", "V",  "W",  "Y", "Z",  "ZH"};

const char* kVowels[] = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                         "EY", "IH", "IY", "OW", "OY", "UH", "UW"};

// Pronunciations of letter names, used by the spelling fallback. Kept apart
// from the word lexicon so that e.g. the word "a" (AH0) does not shadow the
// letter "a" (EY1).
const std::unordered_map<char, const char*>& LetterTable() {
  static const std::unordered_map<char, const char*> table = {
      {'a', "EY1"},        {'b', "B IY1"},      {'c', "S IY1"},
      {'d', "D IY1"},      {'e', "IY1"},        {'f', "EH1 F"},
      {'g', "JH IY1"},     {'h', "EY1 CH"},     {'i', "AY1"},
      {'j', "JH EY1"},     {'k', "K EY1"},      {'l', "EH1 L"},
      {'m', "EH1 M"},      {'n', "EH1 N"},      {'o', "OW1"},
      {'p', "P IY1"},      {'q', "K Y UW1"},    {'r', "AA1 R"},
      {'s', "EH1 S"},      {'t', "T IY1"},      {'u', "Y UW1"},
      {'v', "V IY1"},      {'w', "D AH1 B AH0 L Y UW0"},
      {'x', "EH1 K S"},    {'y', "W AY1"},      {'z', "Z IY1"},
  };
  return table;
}

}  // namespace

PhonemeVocabulary PhonemeVocabulary::BuildDefault() {
  PhonemeVocabulary v;
  for (const char* s : kSpecials) v.symbols_.emplace_back(s);
  for (const char* s : kConsonants) v.symbols_.emplace_back(s);
  for (const char* s : kVowels) {
    for (int stress = 0; stress <= 2; ++stress) {
      v.symbols_.push_back(std::string(s) + static_cast<char>('0' + stress));
    }
  }
  v.Finalize();
  return v;
}

PhonemeVocabulary PhonemeVocabulary::LoadFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorKind::kIo, "cannot open vocabulary file: " + path);
  PhonemeVocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    v.symbols_.push_back(line);
  }
  v.Finalize();
  return v;
}

void PhonemeVocabulary::Finalize() {
  Check(symbols_.size() == 74, ErrorKind::kInvalidInput,
        "vocabulary must contain exactly 74 symbols, got " + std::to_string(symbols_.size()));
  index_.clear();
  for (size_t i = 0; i < symbols_.size(); ++i) {
    auto [it, inserted] = index_.emplace(symbols_[i], static_cast<int>(i));
    Check(inserted, ErrorKind::kInvalidInput, "duplicate vocabulary symbol: " + symbols_[i]);
  }
  usable_ids_.clear();
  stress_groups_.clear();
  for (size_t i = 0; i < symbols_.size(); ++i) {
    int id = static_cast<int>(i);
    if (IsSpecial(id)) continue;
    usable_ids_.push_back(id);
    const std::string& s = symbols_[i];
    if (std::isdigit(static_cast<unsigned char>(s.back()))) {
      stress_groups_[s.substr(0, s.size() - 1)].push_back(s);
    }
  }
}

const std::string& PhonemeVocabulary::Symbol(int id) const {
  Check(id >= 0 && id < size(), ErrorKind::kInvalidInput,
        "phoneme id out of range: " + std::to_string(id));
  return symbols_[static_cast<size_t>(id)];
}

int PhonemeVocabulary::Id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

int PhonemeVocabulary::RequireId(const std::string& symbol) const {
  int id = Id(symbol);
  Check(id >= 0, ErrorKind::kInvalidInput, "unknown phoneme symbol: " + symbol);
  return id;
}

bool PhonemeVocabulary::IsSpecial(int id) const {
  const std::string& s = Symbol(id);
  return !s.empty() && s.front() == '<';
}

std::string PhonemeVocabulary::hash() const {
  std::string joined = JoinStrings(symbols_, "\n");
  return HashString(joined);
}

std::vector<std::string> PhonemeVocabulary::ToSymbols(const PhonemeSequence& seq) const {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (int id : seq) out.push_back(Symbol(id));
  return out;
}

PhonemeSequence PhonemeVocabulary::FromSymbols(const std::vector<std::string>& symbols) const {
  PhonemeSequence out;
  out.reserve(symbols.size());
  for (const auto& s : symbols) out.push_back(RequireId(s));
  return out;
}

Lexicon Lexicon::LoadFromFile(const std::string& path, const PhonemeVocabulary* vocab,
                              OovPolicy policy) {
  std::ifstream in(path);
  if (!in) Throw(ErrorKind::kIo, "cannot open lexicon file: " + path);
  Lexicon lex(vocab, policy);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    Check(fields.size() >= 2, ErrorKind::kInvalidInput,
          path + ":" + std::to_string(lineno) + ": lexicon entry needs a pronunciation");
    PhonemeSequence pron;
    for (size_t i = 1; i < fields.size(); ++i) {
      int id = vocab->RequireId(fields[i]);
      Check(vocab->IsUsablePhoneme(id), ErrorKind::kInvalidInput,
            path + ":" + std::to_string(lineno) + ": special token in pronunciation: " + fields[i]);
      pron.push_back(id);
    }
    lex.AddEntry(ToLower(fields[0]), pron);
  }
  return lex;
}

void Lexicon::AddEntry(const std::string& word, const PhonemeSequence& pron) {
  Check(!word.empty() && !pron.empty(), ErrorKind::kInvalidInput, "empty lexicon entry");
  for (int id : pron) {
    Check(vocab_->IsUsablePhoneme(id), ErrorKind::kInvalidInput,
          "special token in pronunciation for word: " + word);
  }
  entries_[ToLower(word)].push_back(pron);
}

bool Lexicon::Contains(const std::string& word) const {
  return entries_.count(ToLower(word)) > 0;
}

const std::vector<PhonemeSequence>* Lexicon::Pronunciations(const std::string& word) const {
  auto it = entries_.find(ToLower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

PhonemeSequence Lexicon::Pronounce(const std::string& word) const {
  auto it = entries_.find(word);
  if (it != entries_.end()) return it->second.front();
  if (policy_ == OovPolicy::kSpellingFallback) return SpellOut(word);
  Throw(ErrorKind::kOov, "out-of-vocabulary word: " + word);
}

PhonemeSequence Lexicon::SpellOut(const std::string& word) const {
  PhonemeSequence out;
  const auto& table = LetterTable();
  for (char c : word) {
    auto it = table.find(c);
    Check(it != table.end(), ErrorKind::kOov,
          "cannot spell out word with non-letter characters: " + word);
    for (const auto& sym : SplitWhitespace(it->second)) {
      out.push_back(vocab_->RequireId(sym));
    }
  }
  Check(!out.empty(), ErrorKind::kOov, "spelling fallback produced nothing for: " + word);
  return out;
}

PhonemeSequence GraphemeToPhoneme(const std::string& text, const Lexicon& lexicon) {
  auto words = SplitWhitespace(ToLower(text));
  Check(!words.empty(), ErrorKind::kInvalidInput, "empty text");
  PhonemeSequence out;
  for (const auto& word : words) {
    PhonemeSequence pron = lexicon.Pronounce(word);
    out.insert(out.end(), pron.begin(), pron.end());
  }
  return out;
}

int LevenshteinAllowEmpty(const PhonemeSequence& a, const PhonemeSequence& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

int PhonemeEditDistance(const PhonemeSequence& a, const PhonemeSequence& b) {
  Check(!a.empty() && !b.empty(), ErrorKind::kInvalidInput,
        "phoneme edit distance requires non-empty operands");
  return LevenshteinAllowEmpty(a, b);
}

double Cer(const PhonemeSequence& reference, const PhonemeSequence& hypothesis) {
  Check(!reference.empty(), ErrorKind::kInvalidInput, "CER reference must be non-empty");
  int dist = LevenshteinAllowEmpty(reference, hypothesis);
  return static_cast<double>(dist) / static_cast<double>(reference.size());
}

}  // namespace ced
