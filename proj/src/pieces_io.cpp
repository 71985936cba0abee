// SPDX-License-Identifier: Apache-2.0
#include "lat/pieces_io.hpp"

#include <json.hpp>
#include <stdexcept>

namespace lat {

std::vector<TextPiece> parse_piece_line(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("pieces") || !doc["pieces"].is_array()) {
    throw std::runtime_error("expected an object with a \"pieces\" array");
  }
  std::vector<TextPiece> out;
  for (const auto& piece : doc["pieces"]) {
    if (!piece.is_array()) throw std::runtime_error("piece is not an array");
    TextPiece tokens;
    for (const auto& tok : piece) {
      if (!tok.is_object() || !tok.contains("t") || !tok["t"].is_string() ||
          !tok.contains("s") || !tok["s"].is_number()) {
        throw std::runtime_error("token must be {\"t\": string, \"s\": number}");
      }
      tokens.emplace_back(tok["t"].get<std::string>(), tok["s"].get<double>());
    }
    out.push_back(std::move(tokens));
  }
  return out;
}

std::string format_piece_line(const std::vector<TextPiece>& pieces) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& piece : pieces) {
    nlohmann::json p = nlohmann::json::array();
    for (const auto& [t, s] : piece) p.push_back({{"t", t}, {"s", s}});
    arr.push_back(std::move(p));
  }
  return nlohmann::json{{"pieces", std::move(arr)}}.dump();
}

}  // namespace lat
