#include "mlslab/homotopy.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <set>

#include "mlslab/errors.hpp"

namespace mlslab {
namespace {

using enum Letter;

constexpr std::array<Letter, 8> kRelator{a, b, A, B, c, d, C, D};
constexpr std::array<Letter, 8> kRelatorInv{d, c, D, C, b, a, B, A};

// Position of each direction in the cyclic order of the vertex link of the
// {8,8} Cayley complex: a, B, A, b, c, D, C, d.
constexpr int kLinkPos[8] = {0, 2, 3, 1, 4, 6, 7, 5};

inline int idx(Letter x) { return static_cast<int>(x); }

// 1: y follows x along a relator face; 7: along an inverse-relator face.
inline int turn(Letter x, Letter y) {
  return (kLinkPos[idx(y)] - kLinkPos[idx(inverse(x))] + 8) % 8;
}

// The 8-letter face boundary starting with x on the given side (1 or 7).
std::array<Letter, 8> face(Letter x, int side) {
  const auto& r = side == 1 ? kRelator : kRelatorInv;
  std::size_t k = std::find(r.begin(), r.end(), x) - r.begin();
  std::array<Letter, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = r[(k + i) % 8];
  return out;
}

Word cyclic_free_reduce(std::span<const Letter> in) {
  Word w = free_reduce(in);
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == inverse(w[hi - 1])) {
    ++lo;
    --hi;
  }
  return Word(w.begin() + lo, w.begin() + hi);
}

Word rotate_to(const Word& w, std::size_t start) {
  Word r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[(start + i) % w.size()];
  return r;
}

Word rotmin(const Word& w) {
  Word best = w;
  for (std::size_t s = 1; s < w.size(); ++s) {
    Word r = rotate_to(w, s);
    if (r < best) best = std::move(r);
  }
  return best;
}

std::vector<int> turns(const Word& w) {
  std::vector<int> t(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    t[i] = turn(w[i], w[(i + 1) % w.size()]);
  return t;
}

struct Run {
  std::size_t start;  // index of first letter
  std::size_t turns;  // number of consecutive equal unit turns
  int side;
};

// Maximal cyclic runs of unit turns. A run with k turns spans k+1 letters.
// Returns a single run with turns == n when the whole word is one face walk.
std::vector<Run> unit_runs(const std::vector<int>& t) {
  std::vector<Run> runs;
  const std::size_t n = t.size();
  for (int side : {1, 7}) {
    std::size_t cnt = std::count(t.begin(), t.end(), side);
    if (cnt == 0) continue;
    if (cnt == n) {
      runs.push_back({0, n, side});
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (t[i] != side || t[(i + n - 1) % n] == side) continue;
      std::size_t k = 0;
      while (t[(i + k) % n] == side) ++k;
      runs.push_back({i, k, side});
    }
  }
  return runs;
}

// Replaces the first k letters of w (a face path) by the complementary path.
Word replace_prefix_by_complement(const Word& w, std::size_t k, int side) {
  auto f = face(w[0], side);
  Word out;
  out.reserve(w.size() + 8);
  for (std::size_t i = 8; i > k; --i) out.push_back(inverse(f[i - 1]));
  out.insert(out.end(), w.begin() + k, w.end());
  return out;
}

Word dehn(std::span<const Letter> in) {
  Word w = cyclic_free_reduce(in);
  for (;;) {
    if (w.size() < 5) return w;
    auto runs = unit_runs(turns(w));
    const Run* hit = nullptr;
    for (const auto& r : runs)
      if (r.turns >= 4) {
        hit = &r;
        break;
      }
    if (!hit) return w;
    Word rot = rotate_to(w, hit->start);
    std::size_t k = std::min<std::size_t>(hit->turns + 1, 8);
    if (k == 8)
      rot.erase(rot.begin(), rot.begin() + 8);
    else
      rot = replace_prefix_by_complement(rot, k, hit->side);
    w = cyclic_free_reduce(rot);
  }
}

// Ring of m faces on one side: turn pattern (s, s, 2s)^m up to rotation.
// Returns the swapped word or an empty word if w is not a ring.
Word ring_swap(const Word& w, const std::vector<int>& t) {
  const std::size_t n = w.size();
  if (n < 3 || n % 3 != 0) return {};
  for (int s : {1, 7}) {
    const int junction = s == 1 ? 2 : 6;
    for (std::size_t o = 0; o < 3; ++o) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        ok = t[(o + i) % n] == (i % 3 == 2 ? junction : s);
      if (!ok) continue;
      Word x = replace_prefix_by_complement(rotate_to(w, o), 3, s);
      const std::size_t m = n / 3;
      std::size_t p = 4;
      for (std::size_t j = 1; j < m; ++j, p += 3) {
        if (p + 4 > x.size()) return {};
        for (std::size_t i = 0; i < 3; ++i)
          if (turn(x[p + i], x[p + i + 1]) != s) return {};
        Word tail(x.begin() + p, x.end());
        tail = replace_prefix_by_complement(tail, 4, s);
        x.resize(p);
        x.insert(x.end(), tail.begin(), tail.end());
      }
      Word r = cyclic_free_reduce(x);
      if (r.size() == n) return r;
      return {};
    }
  }
  return {};
}

// Equal-or-shorter words conjugate to w reachable by one move.
std::vector<Word> neighbours(const Word& w) {
  std::vector<Word> out;
  auto t = turns(w);
  for (const auto& r : unit_runs(t)) {
    if (r.turns != 3) continue;
    out.push_back(replace_prefix_by_complement(rotate_to(w, r.start), 4, r.side));
  }
  Word ring = ring_swap(w, t);
  if (!ring.empty()) out.push_back(std::move(ring));
  return out;
}

}  // namespace

char to_char(Letter x) { return "aAbBcCdD"[idx(x)]; }

Letter letter_from_char(char ch) {
  switch (ch) {
    case 'a': return a;
    case 'A': return A;
    case 'b': return b;
    case 'B': return B;
    case 'c': return c;
    case 'C': return C;
    case 'd': return d;
    case 'D': return D;
  }
  throw ConfigError(std::string("invalid letter '") + ch + "'");
}

Word parse_word(std::string_view text) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == ' ' || ch == '\t' || ch == '.' || ch == '*') {
      ++i;
      continue;
    }
    Letter x = letter_from_char(ch);
    ++i;
    if (text.substr(i, 3) == "^-1") {
      x = inverse(x);
      i += 3;
    } else if (text.substr(i, 5) == "⁻¹") {
      x = inverse(x);
      i += 5;
    }
    w.push_back(x);
  }
  return w;
}

std::string to_string(std::span<const Letter> w) {
  std::string s;
  for (Letter x : w) s.push_back(to_char(x));
  return s;
}

Word inverse(std::span<const Letter> w) {
  Word r(w.rbegin(), w.rend());
  for (auto& x : r) x = inverse(x);
  return r;
}

Word free_reduce(std::span<const Letter> w) {
  Word st;
  st.reserve(w.size());
  for (Letter x : w) {
    if (!st.empty() && st.back() == inverse(x))
      st.pop_back();
    else
      st.push_back(x);
  }
  return st;
}

const std::array<Letter, 8>& relator() { return kRelator; }

Word cyclic_dehn_reduce(std::span<const Letter> word) { return dehn(word); }

CyclicWord canonicalize(std::span<const Letter> word) {
  Word cur = dehn(word);
  if (cur.empty()) throw TrivialClassError("word is trivial in the surface group");
restart:
  std::set<Word> seen;
  std::deque<Word> queue;
  {
    Word r = rotmin(cur);
    seen.insert(r);
    queue.push_back(std::move(r));
  }
  while (!queue.empty()) {
    Word x = std::move(queue.front());
    queue.pop_front();
    for (auto& y0 : neighbours(x)) {
      Word y = dehn(y0);
      if (y.empty()) throw TrivialClassError("word is trivial in the surface group");
      if (y.size() < cur.size()) {
        cur = std::move(y);
        goto restart;
      }
      Word r = rotmin(y);
      if (seen.insert(r).second) queue.push_back(std::move(r));
    }
  }
  return CyclicWord::unchecked(*seen.begin());
}

CyclicWord canonicalize(std::string_view text) { return canonicalize(parse_word(text)); }

std::string class_id(const ConjugacyClass& cls) {
  if (auto* t = std::get_if<TorusClass>(&cls))
    return std::to_string(t->p) + "," + std::to_string(t->q);
  return to_string(std::get<CyclicWord>(cls).letters());
}

ConjugacyClass parse_class_id(std::string_view text, bool torus) {
  if (!torus) return canonicalize(text);
  auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ConfigError("torus class must be \"p,q\"");
  auto num = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError("bad integer in class id");
    return v;
  };
  return TorusClass{num(text.substr(0, comma)), num(text.substr(comma + 1))};
}

ConjugacyClass inverse(const ConjugacyClass& cls) {
  if (auto* t = std::get_if<TorusClass>(&cls)) return TorusClass{-t->p, -t->q};
  return canonicalize(inverse(std::span<const Letter>(std::get<CyclicWord>(cls).letters())));
}

ConjugacyClass power(const ConjugacyClass& cls, int k) {
  if (k == 0) throw TrivialClassError("zeroth power is trivial");
  if (auto* t = std::get_if<TorusClass>(&cls)) return TorusClass{k * t->p, k * t->q};
  Word base = std::get<CyclicWord>(cls).letters();
  if (k < 0) {
    base = inverse(std::span<const Letter>(base));
    k = -k;
  }
  Word w;
  for (int i = 0; i < k; ++i) w.insert(w.end(), base.begin(), base.end());
  return canonicalize(w);
}

std::string pairing_key(const ConjugacyClass& cls) {
  if (auto* t = std::get_if<TorusClass>(&cls)) {
    TorusClass u = *t;
    if (u.p < 0 || (u.p == 0 && u.q < 0)) u = {-u.p, -u.q};
    return class_id(u);
  }
  return std::min(class_id(cls), class_id(inverse(cls)));
}

bool is_trivial(const ConjugacyClass& cls) {
  if (auto* t = std::get_if<TorusClass>(&cls)) return t->p == 0 && t->q == 0;
  return std::get<CyclicWord>(cls).size() == 0;
}

std::vector<TorusClass> enumerate_torus_classes(int bound) {
  std::vector<TorusClass> out;
  for (int p = 0; p <= bound; ++p)
    for (int q = -bound; q <= bound; ++q)
      if (p > 0 || q > 0) out.push_back({p, q});
  return out;
}

namespace {

struct SurfaceEnumerator {
  std::size_t n;
  Word w;
  std::vector<CyclicWord>* out;

  // run = number of consecutive equal unit turns ending at the last letter
  void extend(std::size_t run, int last_turn) {
    if (w.size() == n) {
      finish();
      return;
    }
    for (int li = 0; li < 8; ++li) {
      Letter x = static_cast<Letter>(li);
      if (!w.empty()) {
        if (x == inverse(w.back())) continue;
        if (x < w.front()) continue;  // not a lexmin rotation
      }
      std::size_t nrun = 0;
      int t = 0;
      if (!w.empty()) {
        t = turn(w.back(), x);
        nrun = (t == 1 || t == 7) ? (t == last_turn ? run + 1 : 1) : 0;
        if (nrun >= 4) continue;  // 5-letter face path
      }
      w.push_back(x);
      extend(nrun, t);
      w.pop_back();
    }
  }

  void finish() {
    if (n > 1 && w.front() == inverse(w.back())) return;
    if (rotmin(w) != w) return;
    auto t = turns(w);
    for (const auto& r : unit_runs(t))
      if (r.turns >= 4) return;
    CyclicWord cw = canonicalize(w);
    if (cw.letters() == w) out->push_back(std::move(cw));
  }
};

}  // namespace

std::vector<CyclicWord> enumerate_surface_classes(int bound) {
  std::vector<CyclicWord> out;
  for (int n = 1; n <= bound; ++n) {
    SurfaceEnumerator e{static_cast<std::size_t>(n), {}, &out};
    e.extend(0, 0);
  }
  return out;
}

}  // namespace mlslab
