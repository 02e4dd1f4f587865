#include "tribell/words.hpp"

#include <algorithm>

#include "tribell/errors.hpp"

namespace tribell {

LocalWord local_adjoint_product(const LocalWord& u, const LocalWord& v) {
  const LocalWord ru = u.reversed();
  if (ru.length == 0) return v;
  if (v.length == 0) return ru;
  int len = ru.length + v.length;
  if (ru.last() == v.first) --len;
  return {static_cast<std::uint8_t>(len), ru.first};
}

Word CanonicalWord::projectors() const {
  Word w;
  w.reserve(length());
  for (int p = 0; p < 3; ++p) {
    for (int k = 0; k < parts[p].length; ++k) w.push_back({p, parts[p].setting_at(k)});
  }
  return w;
}

std::uint32_t CanonicalWord::code() const {
  std::uint32_t c = 0;
  for (const auto& part : parts) c = (c << 6) | (static_cast<std::uint32_t>(part.length) << 1) | part.first;
  return c;
}

bool word_less(const CanonicalWord& a, const CanonicalWord& b) {
  // Projector sequences; a proper prefix sorts first.
  int pa = 0;
  int ka = 0;
  int pb = 0;
  int kb = 0;
  while (true) {
    while (pa < 3 && ka >= a.parts[pa].length) {
      ++pa;
      ka = 0;
    }
    while (pb < 3 && kb >= b.parts[pb].length) {
      ++pb;
      kb = 0;
    }
    if (pa == 3 || pb == 3) return pa == 3 && pb != 3;
    const Projector x{pa, a.parts[pa].setting_at(ka)};
    const Projector y{pb, b.parts[pb].setting_at(kb)};
    if (x != y) return x < y;
    ++ka;
    ++kb;
  }
}

CanonicalWord reduce(const Word& w) {
  Word sorted = w;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Projector& a, const Projector& b) { return a.party < b.party; });
  CanonicalWord out;
  int prev_party = -1;
  int prev_setting = -1;
  for (const auto& pr : sorted) {
    auto& part = out.parts[pr.party];
    if (pr.party == prev_party && pr.setting == prev_setting) continue;
    if (part.length == 0) part.first = static_cast<std::uint8_t>(pr.setting);
    ++part.length;
    prev_party = pr.party;
    prev_setting = pr.setting;
  }
  return out;
}

MomentKey canonicalize(const CanonicalWord& w) {
  const CanonicalWord r = w.reversed();
  if (word_less(r, w)) return {r, true};
  return {w, false};
}

MomentKey canonicalize(const Word& w) { return canonicalize(reduce(w)); }

Word adjoint_product(const Word& left, const Word& right) {
  Word out(left.rbegin(), left.rend());
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

std::string to_string(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (const auto& p : w) {
    s += static_cast<char>('A' + p.party);
    s += static_cast<char>('0' + p.setting);
  }
  return s;
}

std::string to_string(const CanonicalWord& w) { return to_string(w.projectors()); }

Word parse_word(const std::string& text) {
  if (text == "1") return {};
  if (text.empty() || text.size() % 2 != 0) throw ParseError("", "malformed word '" + text + "'");
  Word w;
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int party = text[i] - 'A';
    const int setting = text[i + 1] - '0';
    if (party < 0 || party > 2 || setting < 0 || setting > 1) {
      throw ParseError("", "malformed word '" + text + "'");
    }
    w.push_back({party, setting});
  }
  return w;
}

}  // namespace tribell
