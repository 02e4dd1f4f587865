#include "tribell/catalog.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#ifndef TRIBELL_DEFAULT_CATALOG
#define TRIBELL_DEFAULT_CATALOG "data/catalog.json"
#endif

namespace tribell {

using nlohmann::json;

namespace {

std::string line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return "line " + std::to_string(line);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (v.is_string()) return v.get<std::string>();
  // Integers are accepted for rationals.
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(where + "." + key, "expected a string");
}

Rational field_rational(const json& obj, const char* key, const std::string& where) {
  const std::string text = require_string(obj, key, where);
  try {
    return parse_rational(text);
  } catch (const ParseError& e) {
    throw ParseError(where + "." + key, e.what());
  }
}

}  // namespace

std::vector<BellFunctional> parse_catalog(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  if (!doc.is_array()) throw ParseError("line 1", "catalog must be a JSON array");

  std::vector<BellFunctional> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const json& entry = doc[k];
    std::string where = "entry[" + std::to_string(k) + "]";
    if (!entry.is_object()) throw ParseError(where, "expected an object");
    BellFunctional f;
    f.id = require_string(entry, "id", where);
    if (f.id.empty()) throw ParseError(where + ".id", "empty id");
    where += " (" + f.id + ")";
    if (!seen.insert(f.id).second) throw DuplicateIdError("duplicate catalog id '" + f.id + "'");

    const std::string basis = require_string(entry, "basis", where);
    if (basis == "correlator") {
      f.basis = Basis::Correlator;
    } else if (basis == "probability") {
      f.basis = Basis::Probability;
    } else {
      throw ParseError(where + ".basis", "unknown basis '" + basis + "'");
    }
    if (entry.contains("bound") && !entry["bound"].is_null()) f.local_bound = field_rational(entry, "bound", where);
    if (entry.contains("notes")) f.notes = entry["notes"].get<std::string>();

    const json& terms = require(entry, "terms", where);
    if (!terms.is_array()) throw ParseError(where + ".terms", "expected an array");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tw = where + ".terms[" + std::to_string(t) + "]";
      if (!terms[t].is_object()) throw ParseError(tw, "expected an object");
      Term term;
      const std::string mon = require_string(terms[t], "mon", tw);
      try {
        term.monomial = parse_monomial(mon);
      } catch (const ParseError& e) {
        throw ParseError(tw + ".mon", e.what());
      }
      term.coefficient = field_rational(terms[t], "coef", tw);
      const bool is_corr = term.monomial.kind == Monomial::Kind::Correlator;
      const bool is_prob = term.monomial.kind == Monomial::Kind::Probability;
      if ((f.basis == Basis::Correlator && is_prob) || (f.basis == Basis::Probability && is_corr)) {
        throw ParseError(tw + ".mon", "monomial '" + mon + "' does not belong to basis " + basis);
      }
      f.terms.push_back(term);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<BellFunctional> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open catalog file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

std::string catalog_to_json(const std::vector<BellFunctional>& catalog) {
  std::string out = "[\n";
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    const auto& f = catalog[k];
    json entry;
    entry["id"] = f.id;
    entry["basis"] = to_string(f.basis);
    if (f.local_bound) entry["bound"] = to_string(*f.local_bound);
    json terms = json::array();
    for (const auto& t : f.terms) terms.push_back({{"mon", to_string(t.monomial)}, {"coef", to_string(t.coefficient)}});
    entry["terms"] = terms;
    if (!f.notes.empty()) entry["notes"] = f.notes;
    out += "  " + entry.dump();
    out += k + 1 < catalog.size() ? ",\n" : "\n";
  }
  return out + "]\n";
}

std::string catalog_hash(const std::vector<BellFunctional>& catalog) {
  const std::string text = catalog_to_json(catalog);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const BellFunctional& find_functional(const std::vector<BellFunctional>& catalog, std::string_view id) {
  for (const auto& f : catalog) {
    if (f.id == id) return f;
  }
  throw KeyMismatch("no catalog entry with id '" + std::string(id) + "'");
}

std::filesystem::path default_catalog_path() { return TRIBELL_DEFAULT_CATALOG; }

}  // namespace tribell
