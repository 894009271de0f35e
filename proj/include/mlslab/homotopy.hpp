#pragma once
// Free-homotopy classes: integer pairs on the torus, cyclic words in the
// genus-2 surface group <a,b,c,d | [a,b][c,d]>.

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mlslab {

// Order of the enumerators is the canonical tie-break order
// a < a^-1 < b < b^-1 < c < c^-1 < d < d^-1.
enum class Letter : std::uint8_t { a, A, b, B, c, C, d, D };

constexpr Letter inverse(Letter x) {
  return static_cast<Letter>(static_cast<std::uint8_t>(x) ^ 1u);
}
char to_char(Letter x);
Letter letter_from_char(char ch);

using Word = std::vector<Letter>;

// Accepts the compact form "abA" (uppercase = inverse) as well as spaced
// forms with "^-1" or the superscript inverse, e.g. "a b a⁻¹".
Word parse_word(std::string_view text);
std::string to_string(std::span<const Letter> w);
Word inverse(std::span<const Letter> w);
Word free_reduce(std::span<const Letter> w);

// Relator [a,b][c,d] = a b A B c d C D.
const std::array<Letter, 8>& relator();

struct TorusClass {
  int p = 0;
  int q = 0;
  auto operator<=>(const TorusClass&) const = default;
};

class CyclicWord {
 public:
  CyclicWord() = default;
  const Word& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  auto operator<=>(const CyclicWord&) const = default;

  // Wraps a word already known to be canonical (no checks).
  static CyclicWord unchecked(Word w) { return CyclicWord(std::move(w)); }

 private:
  explicit CyclicWord(Word w) : letters_(std::move(w)) {}
  Word letters_;
};

using ConjugacyClass = std::variant<TorusClass, CyclicWord>;

// Conjugacy normal form in the surface group. Throws TrivialClassError when
// the word is trivial in the group.
CyclicWord canonicalize(std::span<const Letter> word);
CyclicWord canonicalize(std::string_view text);

// Cyclic Dehn reduction only (may return an empty word).
Word cyclic_dehn_reduce(std::span<const Letter> word);

// Torus "p,q"; surface words in compact form.
std::string class_id(const ConjugacyClass& c);
ConjugacyClass parse_class_id(std::string_view text, bool torus);

ConjugacyClass inverse(const ConjugacyClass& c);
ConjugacyClass power(const ConjugacyClass& c, int k);
// Same key for c and c^-1.
std::string pairing_key(const ConjugacyClass& c);
bool is_trivial(const ConjugacyClass& c);

// Unsorted enumerations. Torus: max(|p|,|q|) <= bound, one class per +- pair.
// Surface: canonical words of length <= bound, ordered by (length, word).
std::vector<TorusClass> enumerate_torus_classes(int bound);
std::vector<CyclicWord> enumerate_surface_classes(int bound);

}  // namespace mlslab
