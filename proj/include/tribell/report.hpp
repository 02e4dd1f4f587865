#pragma once

// Bound sweeps over the catalog, reference diffs and the separation
// certificate.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tribell/moment.hpp"
#include "tribell/reference_table.hpp"
#include "tribell/scenario.hpp"
#include "tribell/sdp.hpp"
#include "tribell/seesaw.hpp"

namespace tribell {

inline constexpr const char* kReportSchema = "tribell-report/1";

/// One column of a sweep.
struct SetSpec {
  enum class Kind { Local, NoSignalling, Moment, Seesaw, SeesawBisep };
  Kind kind = Kind::Local;
  GeneratingSet set;      // Moment
  PartyMask ppt = 0;      // Moment
  Bipartition cut{};      // SeesawBisep

  /// Canonical column tag: "L", "NS", "Q", "Q:A|BC", "aq", "npa(2)",
  /// "local(2)", with "+T_A", ..., or "+T_all" appended for PPT blocks.
  std::string tag() const;
};

/// Parses a column tag (see SetSpec::tag; "local(1)" and "aq" are the same
/// set). Throws ParseError.
SetSpec parse_set_spec(const std::string& tag);

struct RunConfig {
  std::vector<std::string> ineqs;  // empty: the whole catalog
  std::vector<std::string> sets;   // column tags
  sdp::SolverConfig solver;
  SeesawConfig seesaw;
  bool complex_moments = false;
  /// Tolerance for re-validating every SDP optimum.
  double certify_tol = 1e-8;
  std::optional<std::filesystem::path> cache_dir;
  int threads = 1;
};

struct Cell {
  std::string id;
  std::string column;
  double value = 0.0;
  std::optional<Rational> exact;
  double duality_gap = 0.0;
  std::string status;      // solver status, "exact" or "seesaw"
  int iterations = 0;
  bool certified = false;  // SDP optimum re-validated
  std::optional<nlohmann::json> model;  // seesaw achieving model
};

struct Report {
  std::string schema = kReportSchema;
  std::string catalog_hash;
  nlohmann::json config;
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  std::vector<Cell> cells;  // row-major over ids x columns

  const Cell* find(const std::string& id, const std::string& column) const;
};

/// Value rounded to 12 significant digits, the precision of all emitted
/// reports.
double round12(double x);

/// One bound. Moment optima are certified; a non-Optimal status or a failed
/// certificate throws SolverError naming the inequality.
Cell compute_cell(const BellFunctional& f, const SetSpec& spec, const RunConfig& cfg);

/// Rows are the selected inequalities in catalog order. Throws KeyMismatch
/// for unknown ids.
Report run_table(const std::vector<BellFunctional>& catalog, const RunConfig& cfg);

nlohmann::json report_to_json(const Report& report);
std::string report_json_text(const Report& report);
std::string report_csv_text(const Report& report);

// ---------------------------------------------------------------------------
// Reference comparison

struct CellDiff {
  std::string id;
  std::string column;
  double computed = 0.0;
  double reference = 0.0;
  double difference = 0.0;
  bool starred = false;
  bool pass = false;
};

struct DiffReport {
  double tolerance = 1e-3;
  std::vector<CellDiff> cells;
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

/// Diffs every report cell that has a reference counterpart. Starred cells
/// pass when the computed value does not undercut the reference. Throws
/// KeyMismatch when no cell has a counterpart.
DiffReport compare_reference(const Report& report, const ReferenceTable& ref, double tol = 1e-3);

nlohmann::json diff_to_json(const DiffReport& diff);

// ---------------------------------------------------------------------------
// Separations

struct SeparationIds {
  std::string gap_a = "sliwa-23";  // almost-quantum above quantum, npa(2) above almost-quantum
  std::string gap_b = "sliwa-41";  // almost-quantum above quantum
  std::string separator = kSeparatorId;
};

struct SeparationCheck {
  std::string name;
  std::string larger;   // "aq(sliwa-23)"
  std::string smaller;  // "Q(sliwa-23)"
  double larger_value = 0.0;
  double smaller_value = 0.0;
  double required = 0.0;
  double margin() const { return larger_value - smaller_value; }
  bool holds() const { return margin() >= required; }
};

struct SeparationSummary {
  std::vector<SeparationCheck> checks;
  bool all_hold() const;
  std::string verdict() const;  // human-readable, one line per check
  nlohmann::json to_json() const;
};

/// Computes the four headline margins without throwing on failure.
SeparationSummary evaluate_separations(const std::vector<BellFunctional>& catalog, const RunConfig& cfg,
                                       const SeparationIds& ids = {});

/// As evaluate_separations, throwing SeparationNotReproduced naming the
/// first margin that falls short.
SeparationSummary certify_separations(const std::vector<BellFunctional>& catalog, const RunConfig& cfg,
                                      const SeparationIds& ids = {});

}  // namespace tribell
