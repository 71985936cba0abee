// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lat {

/// One JSONL line of the piece file format:
///   {"pieces": [[{"t": "tok", "s": -0.12}, ...], ...]}
/// Anchors are implicit from list order.
using TextPiece = std::vector<std::pair<std::string, double>>;

/// Throws std::runtime_error with a parse diagnostic on malformed input.
std::vector<TextPiece> parse_piece_line(const std::string& line);

std::string format_piece_line(const std::vector<TextPiece>& pieces);

}  // namespace lat
