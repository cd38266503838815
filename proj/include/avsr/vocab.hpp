#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "avsr/error.hpp"

namespace avsr {

using TokenId = std::int32_t;

inline constexpr std::string_view kSpaceLabel = "[space]";
inline constexpr std::string_view kBlankLabel = "[blank]";
inline constexpr std::string_view kEosSosLabel = "[EOS/SOS]";

enum class SequenceRole { kReference, kHypothesis, kTeacherForcingTarget };

struct TokenSequence {
  std::vector<TokenId> ids;
  SequenceRole role = SequenceRole::kHypothesis;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }

  friend bool operator==(const TokenSequence& a, const TokenSequence& b) {
    return a.ids == b.ids;
  }
};

/// Output symbol inventory. The standard table has 40 entries:
/// A-Z (0-25), 0-9 (26-35), apostrophe (36), [space] (37), [blank] (38),
/// [EOS/SOS] (39). Smaller custom tables are accepted for experiments as long
/// as they carry [blank] and [EOS/SOS]; every other label is one character.
class Vocabulary {
 public:
  static constexpr std::size_t kStandardSize = 40;

  static Vocabulary standard() {
    std::vector<std::string> labels;
    labels.reserve(kStandardSize);
    for (char c = 'A'; c <= 'Z'; ++c) labels.emplace_back(1, c);
    for (char c = '0'; c <= '9'; ++c) labels.emplace_back(1, c);
    labels.emplace_back("'");
    labels.emplace_back(kSpaceLabel);
    labels.emplace_back(kBlankLabel);
    labels.emplace_back(kEosSosLabel);
    return Vocabulary(std::move(labels));
  }

  explicit Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::optional<TokenId> blank, eos;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const std::string& label = labels_[i];
      const auto id = static_cast<TokenId>(i);
      if (!by_label_.emplace(label, id).second) {
        throw Error(ErrorCode::kInvalidVocabulary, "duplicate symbol '" + label + "'");
      }
      if (label == kBlankLabel) {
        blank = id;
      } else if (label == kEosSosLabel) {
        eos = id;
      } else if (label == kSpaceLabel) {
        space_ = id;
        char_to_id_[static_cast<unsigned char>(' ')] = id;
      } else if (label.size() == 1) {
        const auto ch = static_cast<unsigned char>(label[0]);
        if (std::islower(ch) || ch == ' ') {
          throw Error(ErrorCode::kInvalidVocabulary, "symbol '" + label + "' is not uppercase");
        }
        char_to_id_[ch] = id;
      } else {
        throw Error(ErrorCode::kInvalidVocabulary,
                    "symbol '" + label + "' is neither a character nor a reserved token");
      }
    }
    if (!blank || !eos) {
      throw Error(ErrorCode::kInvalidVocabulary, "vocabulary needs [blank] and [EOS/SOS]");
    }
    blank_ = *blank;
    eos_sos_ = *eos;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::kParseError, "vocabulary must be a JSON array");
    std::vector<std::string> labels;
    for (const auto& item : j) {
      if (!item.is_string()) throw Error(ErrorCode::kParseError, "vocabulary entries must be strings");
      labels.push_back(item.get<std::string>());
    }
    return Vocabulary(std::move(labels));
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open vocabulary " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ": " + e.what());
    }
  }

  nlohmann::json to_json() const { return nlohmann::json(labels_); }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(TokenId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& labels() const { return labels_; }
  TokenId blank_id() const { return blank_; }
  TokenId eos_sos_id() const { return eos_sos_; }
  std::optional<TokenId> space_id() const { return space_; }

  std::optional<TokenId> find(std::string_view label) const {
    auto it = by_label_.find(std::string(label));
    if (it == by_label_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<TokenId> id_of_char(char ch) const {
    const TokenId id = char_to_id_[static_cast<unsigned char>(ch)];
    if (id < 0) return std::nullopt;
    return id;
  }

  /// The decodable set: every symbol except [blank], ascending by id.
  std::vector<TokenId> decodable() const {
    std::vector<TokenId> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (static_cast<TokenId>(i) != blank_) out.push_back(static_cast<TokenId>(i));
    }
    return out;
  }

  /// Text rendering of one symbol: space for [space], nothing for [EOS/SOS].
  std::string render(TokenId id) const {
    if (id == eos_sos_) return {};
    if (space_ && id == *space_) return " ";
    return label(id);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, TokenId> by_label_;
  std::array<TokenId, 256> char_to_id_ = make_unmapped();
  TokenId blank_ = -1;
  TokenId eos_sos_ = -1;
  std::optional<TokenId> space_;

  static std::array<TokenId, 256> make_unmapped() {
    std::array<TokenId, 256> a{};
    a.fill(-1);
    return a;
  }
};

/// Case-folds to uppercase, then maps characters to symbols.
inline TokenSequence encode_text(std::string_view text, const Vocabulary& vocab,
                                 SequenceRole role = SequenceRole::kReference) {
  TokenSequence out;
  out.role = role;
  out.ids.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    const auto id = vocab.id_of_char(upper);
    if (!id) {
      throw Error(ErrorCode::kUnknownCharacter,
                  "character '" + std::string(1, text[i]) + "' at position " + std::to_string(i), i);
    }
    out.ids.push_back(*id);
  }
  return out;
}

inline TokenSequence encode_text(std::string_view text) {
  static const Vocabulary kStandard = Vocabulary::standard();
  return encode_text(text, kStandard);
}

inline std::string decode_tokens(const TokenSequence& tokens, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : tokens.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
    }
    if (id == vocab.blank_id()) throw Error(ErrorCode::kBlankInText, "blank symbol in token sequence");
    out += vocab.render(id);
  }
  return out;
}

/// Appends [EOS] to an encoded transcript for teacher forcing.
inline TokenSequence teacher_forcing_target(std::string_view text, const Vocabulary& vocab) {
  TokenSequence t = encode_text(text, vocab, SequenceRole::kTeacherForcingTarget);
  t.ids.push_back(vocab.eos_sos_id());
  return t;
}

}  // namespace avsr
