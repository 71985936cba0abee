// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lat/types.hpp"

namespace lat {

/// Immutable id<->string map. Reserved symbols sit below kNumReserved;
/// the rest are ordered by corpus frequency (ties lexicographic).
class Vocabulary {
 public:
  Vocabulary();

  /// Builds from pre-tokenized lines, keeping tokens seen >= min_count times.
  /// Throws std::runtime_error("empty corpus") if no line is given.
  static Vocabulary build(const std::vector<std::string>& lines, int min_count = 1);

  /// Rebuilds from an ordered non-reserved token list (vocab-file order).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(id_to_token_.size()); }

  /// UNK for out-of-vocabulary tokens.
  TokenId id(const std::string& token) const;
  /// Throws std::out_of_range("id out of range"). Reserved symbols render
  /// as U+27E8/27E9 bracketed names ("⟨mask⟩" etc.).
  const std::string& token(TokenId id) const;

  /// Whitespace split; OOV -> UNK; no implicit EOS.
  std::vector<TokenId> encode(const std::string& line) const;
  /// Space-joined inverse of encode.
  std::string decode(const std::vector<TokenId>& ids) const;

  /// One non-reserved token per line; line number = id - kNumReserved.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;

  void append(const std::string& token);
};

std::vector<std::string> split_whitespace(const std::string& line);

}  // namespace lat
