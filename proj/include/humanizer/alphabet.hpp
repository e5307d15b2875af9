#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace humanizer {

/// Number of canonical amino acids.
inline constexpr std::size_t kAlphabetSize = 20;

/// Canonical one-letter codes in fixed index order. Every 20-vector in the
/// library (logits rows, probability rows, oracle score rows) uses this
/// column order.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";

/// Residue index. 0..19 are canonical amino acids; kMaskResidue marks a
/// masked position and is deliberately outside the alphabet.
using Residue = std::uint8_t;

inline constexpr Residue kMaskResidue = 20;

/// Text rendering of a masked position. 'X' is reserved for "unknown residue"
/// in FASTA conventions and is rejected on input.
inline constexpr char kMaskChar = '#';

constexpr bool is_canonical(Residue r) { return r < kAlphabetSize; }

constexpr char residue_to_char(Residue r) {
  return r == kMaskResidue ? kMaskChar : kAlphabet[r];
}

namespace detail {
constexpr std::array<std::int8_t, 128> make_char_table() {
  std::array<std::int8_t, 128> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
    table[static_cast<unsigned char>(kAlphabet[i] - 'A' + 'a')] = static_cast<std::int8_t>(i);
  }
  table[static_cast<unsigned char>(kMaskChar)] = static_cast<std::int8_t>(kMaskResidue);
  return table;
}
inline constexpr auto kCharTable = make_char_table();
}  // namespace detail

/// Maps a character to a residue index ('#' -> MASK). Returns nullopt for
/// anything else, including the non-standard codes B, J, O, U, X, Z.
constexpr std::optional<Residue> residue_from_char(char c) {
  const auto uc = static_cast<unsigned char>(c);
  if (uc >= 128) return std::nullopt;
  const std::int8_t v = detail::kCharTable[uc];
  if (v < 0) return std::nullopt;
  return static_cast<Residue>(v);
}

}  // namespace humanizer
