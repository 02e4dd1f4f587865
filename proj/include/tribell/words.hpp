#pragma once

// Projector words and their canonical moment keys.
//
// Only the outcome-0 projector of each measurement is represented. Projectors
// of different parties commute and every projector is idempotent, so a
// reduced word is a product of one alternating local word per party. With
// two settings an alternating word is fixed by its first setting and length.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace tribell {

struct Projector {
  int party = 0;    // 0=A, 1=B, 2=C
  int setting = 0;  // outcome 0 of this setting
  auto operator<=>(const Projector&) const = default;
};

/// Raw operator product, left to right, before any rewriting.
using Word = std::vector<Projector>;

/// Alternating product of one party's projectors. length 0 is the identity.
struct LocalWord {
  std::uint8_t length = 0;
  std::uint8_t first = 0;  // setting of the leftmost projector (0 when length == 0)

  int setting_at(int k) const { return (first + k) & 1; }
  int last() const { return setting_at(length - 1); }
  LocalWord reversed() const {
    if (length == 0) return {};
    return {length, static_cast<std::uint8_t>(last())};
  }
  bool palindromic() const { return length == 0 || (length & 1) == 1; }
  auto operator<=>(const LocalWord&) const = default;
};

/// rev(u) * v reduced by idempotence at the junction.
LocalWord local_adjoint_product(const LocalWord& u, const LocalWord& v);

/// Reduced word: parties sorted A < B < C, idempotence applied.
struct CanonicalWord {
  std::array<LocalWord, 3> parts{};

  int length() const { return parts[0].length + parts[1].length + parts[2].length; }
  CanonicalWord reversed() const {
    return {{parts[0].reversed(), parts[1].reversed(), parts[2].reversed()}};
  }
  bool palindromic() const {
    return parts[0].palindromic() && parts[1].palindromic() && parts[2].palindromic();
  }
  /// Flattened projector sequence.
  Word projectors() const;
  /// 18-bit packed code, stable across runs.
  std::uint32_t code() const;

  bool operator==(const CanonicalWord&) const = default;
};

/// Lexicographic order on the flattened projector sequence.
bool word_less(const CanonicalWord& a, const CanonicalWord& b);

/// Moment-class key: the reversal-canonical representative of a reduced word
/// and whether the input was its reverse (complex conjugate moment).
struct MomentKey {
  CanonicalWord word;
  bool conjugated = false;

  /// Real moment: the word equals its own reverse.
  bool is_real() const { return word.palindromic(); }
};

/// Sorts parties (commutation) and collapses repeated projectors.
CanonicalWord reduce(const Word& w);

/// Applies reduce, then picks the lexicographically smaller of the word and
/// its reverse.
MomentKey canonicalize(const Word& w);
MomentKey canonicalize(const CanonicalWord& w);

/// Word for O_i^dagger O_j.
Word adjoint_product(const Word& left, const Word& right);

/// "A0B1A0", "1" for the identity.
std::string to_string(const Word& w);
std::string to_string(const CanonicalWord& w);

/// Parses the to_string form; throws ParseError.
Word parse_word(const std::string& text);

}  // namespace tribell
