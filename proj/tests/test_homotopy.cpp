#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mlslab/errors.hpp"
#include "mlslab/homotopy.hpp"
#include "mlslab/models.hpp"

using namespace mlslab;

namespace {

Word random_reduced(std::mt19937_64& rng, int len) {
  Word w;
  while (static_cast<int>(w.size()) < len) {
    Letter l = static_cast<Letter>(rng() % 8);
    if (!w.empty() && inverse(w.back()) == l) continue;
    w.push_back(l);
  }
  return w;
}

Word concat(std::initializer_list<Word> parts) {
  Word out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void all_reduced_words(int max_len, std::vector<Word>& out) {
  std::vector<Word> layer{Word{}};
  for (int n = 1; n <= max_len; ++n) {
    std::vector<Word> next;
    for (const auto& w : layer)
      for (int x = 0; x < 8; ++x) {
        Letter l = static_cast<Letter>(x);
        if (!w.empty() && inverse(w.back()) == l) continue;
        Word v = w;
        v.push_back(l);
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
}

}  // namespace

TEST_CASE("parse and print words") {
  CHECK(to_string(parse_word("a b a⁻¹")) == "abA");
  CHECK(to_string(parse_word("a b^-1 c")) == "aBc");
  CHECK(to_string(parse_word("abCD")) == "abCD");
  CHECK_THROWS_AS(parse_word("axb"), ConfigError);
  CHECK(to_string(free_reduce(parse_word("abBAc"))) == "c");
}

TEST_CASE("canonical form examples") {
  CHECK(to_string(canonicalize("a b a⁻¹").letters()) == "b");
  CHECK(to_string(canonicalize("b a").letters()) == "ab");
  CHECK_THROWS_AS(canonicalize("a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹"), TrivialClassError);
  CHECK_THROWS_AS(canonicalize("aA"), TrivialClassError);
  // inverse classes stay distinct
  CHECK(canonicalize("a") != canonicalize("A"));
  CHECK(pairing_key(ConjugacyClass{canonicalize("a")}) == pairing_key(ConjugacyClass{canonicalize("A")}));
}

TEST_CASE("relator consequences") {
  // abABcdCD = 1
  CHECK(canonicalize("abABcd") == canonicalize("dc"));
  CHECK(canonicalize("abABcdC") == canonicalize("d"));
  CHECK(canonicalize("abAB") == canonicalize("dcDC"));
}

TEST_CASE("canonicalization is idempotent and conjugation invariant") {
  std::mt19937_64 rng(42);
  int tested = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Word w = random_reduced(rng, 1 + static_cast<int>(rng() % 12));
    CyclicWord c;
    try {
      c = canonicalize(w);
    } catch (const TrivialClassError&) {
      continue;
    }
    ++tested;
    CHECK(canonicalize(c.letters()) == c);
    Word g = random_reduced(rng, 1 + static_cast<int>(rng() % 5));
    CHECK(canonicalize(concat({g, w, inverse(g)})) == c);
    // insert a conjugated relator rotation at a random position
    std::size_t pos = rng() % (w.size() + 1);
    std::size_t rot = rng() % 8;
    Word r(relator().begin(), relator().end());
    std::rotate(r.begin(), r.begin() + rot, r.end());
    if (rng() % 2) r = inverse(r);
    Word ins(w.begin(), w.begin() + pos);
    ins.insert(ins.end(), r.begin(), r.end());
    ins.insert(ins.end(), w.begin() + pos, w.end());
    CHECK(canonicalize(ins) == c);
    for (std::size_t k = 1; k < w.size(); ++k) {
      Word rw = w;
      std::rotate(rw.begin(), rw.begin() + k, rw.end());
      CHECK(canonicalize(rw) == c);
    }
  }
  CHECK(tested > 300);
}

TEST_CASE("canonical partition matches brute-force conjugacy in the Bolza representation") {
  // Words of length <= 3, conjugators of length <= 3. Conjugacy is decided in
  // the faithful matrix representation (up to sign), independently of the
  // combinatorial normal form.
  FuchsianModel fm = FuchsianModel::bolza();
  std::vector<Word> words, conj{Word{}};
  all_reduced_words(3, words);
  all_reduced_words(3, conj);
  auto key = [](const Mobius& m) {
    std::array<double, 4> v{m.a.real(), m.a.imag(), m.b.real(), m.b.imag()};
    double s = 1.0;
    for (double x : v)
      if (std::abs(x) > 1e-9) {
        s = x > 0 ? 1.0 : -1.0;
        break;
      }
    std::array<long long, 4> k{};
    for (int i = 0; i < 4; ++i) k[i] = std::llround(s * v[i] * 1e6);
    return k;
  };
  std::map<std::array<long long, 4>, std::size_t> index;
  for (std::size_t i = 0; i < words.size(); ++i) index.emplace(key(fm.word_matrix(words[i])), i);
  std::vector<std::size_t> parent(words.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (std::size_t i = 0; i < words.size(); ++i)
    for (const auto& g : conj) {
      Mobius m = fm.word_matrix(g) * fm.word_matrix(words[i]) * fm.word_matrix(g).inv();
      auto it = index.find(key(m));
      if (it != index.end()) parent[find(i)] = find(it->second);
    }
  std::map<CyclicWord, std::size_t> by_canon;
  std::size_t mismatches = 0;
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < words.size(); ++i) {
    CyclicWord c = canonicalize(words[i]);
    auto [it, fresh] = by_canon.emplace(c, find(i));
    if (!fresh && find(it->second) != find(i)) ++mismatches;
    roots.insert(find(i));
  }
  CHECK(mismatches == 0);
  CHECK(roots.size() == by_canon.size());
}

TEST_CASE("torus enumeration") {
  auto b1 = enumerate_torus_classes(1);
  std::set<TorusClass> s(b1.begin(), b1.end());
  CHECK(s == std::set<TorusClass>{{1, 0}, {0, 1}, {1, 1}, {1, -1}});
  CHECK(enumerate_torus_classes(2).size() == 12);
  CHECK(enumerate_torus_classes(10).size() == 220);
}

TEST_CASE("surface enumeration") {
  auto b1 = enumerate_surface_classes(1);
  CHECK(b1.size() == 8);
  auto b3 = enumerate_surface_classes(3);
  std::set<CyclicWord> s(b3.begin(), b3.end());
  CHECK(s.size() == b3.size());
  for (const auto& c : b3) CHECK(canonicalize(c.letters()) == c);
}

TEST_CASE("class ids, inverses and powers") {
  CHECK(class_id(ConjugacyClass{TorusClass{2, -1}}) == "2,-1");
  auto c = parse_class_id("2,-1", true);
  CHECK(std::get<TorusClass>(c) == TorusClass{2, -1});
  auto w = parse_class_id("ab", false);
  CHECK(class_id(inverse(w)) == class_id(ConjugacyClass{canonicalize("BA")}));
  CHECK(class_id(power(w, 2)) == class_id(ConjugacyClass{canonicalize("abab")}));
  CHECK(is_trivial(ConjugacyClass{TorusClass{0, 0}}));
  CHECK_FALSE(is_trivial(c));
}
