#include "tribell/reference_table.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

#include "tribell/errors.hpp"

namespace tribell {

namespace {

struct Row {
  int number;
  std::array<const char*, 9> cells;  // columns in reference_columns() order
};

// Columns L, Q, aq, npa(2), NS, aq+T_A, aq+T_B, aq+T_C, aq+T_all.
const Row kRows[] = {
    {1, {"1", "1", "1", "1", "1", "1", "1", "1", "1"}},
    {2, {"2", "4", "4", "4", "4", "2.8284", "2.8284", "2.8284", "2.0000"}},
    {3, {"2", "2.8284", "2.8284", "2.8284", "4", "2.0000", "2.8284", "2.8284", "2.0000"}},
    {4, {"2", "2(2sqrt2-1)", "3.6569", "3.6569", "6", "3.6569", "2", "2", "2"}},
    {5, {"3", "4.8885", "4.8885", "4.8885", "7", "4.6569", "4.6569", "4.6569", "3.2097"}},
    {6, {"3", "4.6569", "4.6569", "4.6617", "7", "4.6569", "4.6569", "3.0000", "3.0000"}},
    {7, {"4", "20/3", "6.6667", "6.6667", "10", "5.6569", "5.6569", "5.6569", "4.0000"}},
    {8, {"4", "6.6667", "6.6667", "6.6667", "8", "5.6569", "5.6569", "5.6569", "4.0000"}},
    {9, {"4", "5.6569", "5.6569", "5.6569", "8", "5.6569", "4.0000", "5.6569", "4.0000"}},
    {10, {"4", "4", "4", "5.3211", "20/3", "4", "4", "4", "4"}},
    {11, {"4", "5.6569", "5.6569", "5.6569", "8", "4.0000", "4.0000", "5.6569", "4.0000"}},
    {12, {"4", "5.6569", "5.6569", "5.6569", "8", "4.3695", "4.3695", "5.6569", "4.2830"}},
    {13, {"4", "5.6569", "5.6569", "5.6569", "8", "5.6569", "4.0000", "5.6569", "4.0000"}},
    {14, {"4", "5.6569", "5.6569", "5.6569", "8", "4.0000", "4.0000", "5.6569", "4.0000"}},
    {15, {"4", "6.0000", "6.0000", "6.0000", "8", "5.6569", "4.4517", "5.6569", "4.2243"}},
    {16, {"4", "6.1289", "6.1289", "6.1289", "8", "5.6569", "5.6569", "5.6569", "4.0000"}},
    {17, {"4", "5.6569", "5.6569", "5.6569", "8", "4.0000", "5.6569", "5.6569", "4.0000"}},
    {18, {"4", "5.7538", "5.7538", "5.7538", "8", "5.6569", "4.3130", "4.3130", "4.2247"}},
    {19, {"4", "5.7829", "5.7829", "5.7829", "8", "5.6569", "5.6569", "4.3063", "4.1865"}},
    {20, {"4", "6.4853", "6.4853", "6.4853", "10", "6.4853", "4.5000", "4.6903", "4.1328"}},
    {21, {"4", "5.9555", "5.9555", "5.9555", "60/7", "5.6569", "5.6569", "5.6569", "4.1749"}},
    {22, {"4", "6.1980", "6.1980", "6.1980", "8", "5.6569", "5.6569", "5.6569", "4.2748"}},
    {23, {"4", "4.6847", "4.7754", "5.2939", "8", "4.5000", "4.5000", "4.6847", "4.1135"}},
    {24, {"5", "7.9401", "7.9401", "7.9401", "31/3", "6.6569", "6.6569", "6.6569", "5.2372"}},
    {25, {"5", "6.8243", "6.8243", "6.8415", "31/3", "6.6569", "6.6569", "6.4272", "5.1652"}},
    {26, {"5", "7.9282", "7.9282", "7.9282", "31/3", "6.4272", "6.4272", "6.4272", "5.1819"}},
    {27, {"5", "6.9547", "6.9547", "6.9588", "31/3", "6.4272", "6.6569", "6.6569", "5.1808"}},
    {28, {"6", "9.9098", "9.9098", "9.9098", "14", "9.3137", "7.4272", "7.4272", "6.2123"}},
    {29, {"6", "9.3137", "9.3137", "9.3137", "14", "9.3137", "7.4272", "7.4272", "6.1624"}},
    {30, {"6", "9.3137", "9.3137", "9.3137", "14", "9.3137", "7.4272", "7.4272", "6.1723"}},
    {31, {"6", "7.8043", "7.8043", "7.9226", "12", "7.6569", "7.4272", "7.4272", "6.1866"}},
    {32, {"6", "8.1516", "8.1516", "8.1754", "12", "7.6569", "7.6569", "7.4272", "6.2086"}},
    {33, {"6", "9.7899", "9.7899", "9.7899", "12", "7.6569", "7.6569", "7.6569", "6.3217"}},
    {34, {"6", "8.2515", "8.2515", "8.2723", "12", "7.6569", "7.4272", "7.4272", "6.2444"}},
    {35, {"6", "7.8553", "7.8553", "8.0776", "12", "7.4272", "7.4272", "7.4272", "6.1794"}},
    {36, {"6", "9.4614", "9.4614", "9.4614", "14", "9.3137", "7.4272", "7.4272", "6.1904"}},
    {37, {"6", "9.3137", "9.3137", "9.3137", "14", "9.3137", "7.4272", "7.4272", "6.1817"}},
    {38, {"6", "9.3137", "9.3137", "9.3137", "14", "9.3137", "7.4272", "7.4272", "6.1627"}},
    {39, {"6", "9.3253", "9.3253", "9.3253", "12", "7.6569", "7.6569", "7.6569", "6.4378"}},
    {40, {"6", "8.1298", "8.1298", "8.1458", "12", "7.4272", "7.6569", "7.4272", "6.2677"}},
    {41, {"7", "10.3677", "10.3735", "10.3769", "15", "10.3137", "10.3137", "8.4272", "7.2012"}},
    {42, {"8", "13.0470", "13.0470", "13.0470", "16", "10.9852", "10.9852", "11.3137", "8.2933"}},
    {43, {"8", "11.3137", "11.3137", "11.3137", "16", "10.9852", "9.4272", "11.3137", "8.2481"}},
    {44, {"8", "12.9706", "12.9706", "12.9706", "20", "12.9706", "9.3693", "9.3693", "8.2812"}},
    {45, {"8", "12.9706", "12.9706", "12.9706", "20", "12.9706", "9.3693", "9.3693", "8.2675"}},
    {46, {"10", "12.9852", "12.9852", "13.2668", "62/3", "12.8543", "12.8543", "12.9852", "10.4006"}},
};

}  // namespace

const std::vector<std::string>& reference_columns() {
  static const std::vector<std::string> cols{column::kLocal, column::kQuantum, column::kAlmostQuantum,
                                             column::kNpa2,  column::kNoSignalling, column::kAqTA,
                                             column::kAqTB,  column::kAqTC,  column::kAqTAll};
  return cols;
}

ReferenceValue parse_reference_value(const std::string& text) {
  ReferenceValue v;
  v.printed = text;
  std::string t = text;
  if (!t.empty() && t.back() == '*') {
    v.starred = true;
    t.pop_back();
  }
  if (t == "2(2sqrt2-1)") {
    v.value = 2.0 * (2.0 * std::sqrt(2.0) - 1.0);
    return v;
  }
  if (t.find('.') != std::string::npos) {
    char* end = nullptr;
    v.value = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw ParseError("reference", "bad value '" + text + "'");
    return v;
  }
  v.exact = parse_rational(t);
  v.value = to_double(*v.exact);
  return v;
}

const ReferenceValue* ReferenceTable::find(const std::string& id, const std::string& col) const {
  const auto it = cells.find({id, col});
  return it == cells.end() ? nullptr : &it->second;
}

std::vector<std::string> ReferenceTable::ids() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : cells) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

const ReferenceTable& reference_table() {
  static const ReferenceTable table = [] {
    ReferenceTable t;
    const auto& cols = reference_columns();
    for (const auto& row : kRows) {
      const std::string id = "sliwa-" + std::to_string(row.number);
      for (std::size_t c = 0; c < cols.size(); ++c) t.cells[{id, cols[c]}] = parse_reference_value(row.cells[c]);
    }
    t.cells[{kSeparatorId, column::kLocal}] = parse_reference_value("30/31");
    t.cells[{kSeparatorId, column::kAlmostQuantum}] = parse_reference_value("1.0232");
    t.cells[{kSeparatorId, column::kNpa2}] = parse_reference_value("0.9724");
    return t;
  }();
  return table;
}

}  // namespace tribell
