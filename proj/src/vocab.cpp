// SPDX-License-Identifier: Apache-2.0
#include "lat/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lat {

namespace {
const char* kReservedNames[kNumReserved] = {
    "⟨pad⟩",  "⟨sop⟩", "⟨mask⟩",
    "⟨eos⟩",  "⟨unk⟩", "⟨length⟩",
};
}  // namespace

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream stream(line);
  std::string tok;
  while (stream >> tok) out.push_back(tok);
  return out;
}

Vocabulary::Vocabulary() {
  for (int i = 0; i < kNumReserved; ++i) {
    id_to_token_.emplace_back(kReservedNames[i]);
  }
}

void Vocabulary::append(const std::string& token) {
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& lines, int min_count) {
  if (lines.empty()) throw std::runtime_error("empty corpus");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::unordered_map<std::string, long long> counts;
  for (const auto& line : lines) {
    for (auto& tok : split_whitespace(line)) ++counts[tok];
  }
  // frequency-descending, ties lexicographic
  std::vector<std::pair<std::string, long long>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [tok, n] : kept) v.append(tok);
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const auto& tok : tokens) v.append(tok);
  return v;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("id out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(const std::string& line) const {
  std::vector<TokenId> ids;
  for (auto& tok : split_whitespace(line)) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (int i = kNumReserved; i < size(); ++i) f << id_to_token_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file not found: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return from_tokens(tokens);
}

}  // namespace lat
