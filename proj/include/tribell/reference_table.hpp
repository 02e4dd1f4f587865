#pragma once

// Reference values for the 46 facet classes and the separating
// inequality, used to diff computed bounds.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tribell/rational.hpp"

namespace tribell {

/// Column tags shared by reports and the reference table.
namespace column {
inline const std::string kLocal = "L";
inline const std::string kQuantum = "Q";
inline const std::string kAlmostQuantum = "aq";
inline const std::string kNpa2 = "npa(2)";
inline const std::string kNoSignalling = "NS";
inline const std::string kAqTA = "aq+T_A";
inline const std::string kAqTB = "aq+T_B";
inline const std::string kAqTC = "aq+T_C";
inline const std::string kAqTAll = "aq+T_all";
}  // namespace column

/// Columns in table order.
const std::vector<std::string>& reference_columns();

struct ReferenceValue {
  double value = 0.0;
  std::optional<Rational> exact;  // printed as an exact fraction or integer
  std::string printed;            // text as printed in the reference
  bool starred = false;           // not known to be saturated; upper-bound use only
};

struct ReferenceTable {
  /// (inequality id, column tag) -> value.
  std::map<std::pair<std::string, std::string>, ReferenceValue> cells;

  const ReferenceValue* find(const std::string& id, const std::string& column) const;
  std::vector<std::string> ids() const;
};

/// Ids "sliwa-1" .. "sliwa-46" plus the separating inequality.
const ReferenceTable& reference_table();

/// Catalog id of the inequality separating the almost-quantum set from npa(2).
inline const std::string kSeparatorId = "aq-npa2-separator";
/// Catalog id of the biseparable witness form of class 7.
inline const std::string kBisepWitnessId = "bisep-witness-7";

/// Parses a printed cell: integer, fraction, decimal, optional trailing '*',
/// or "2(2sqrt2-1)". Throws ParseError.
ReferenceValue parse_reference_value(const std::string& text);

}  // namespace tribell
