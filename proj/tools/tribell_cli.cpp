// tribell: bounds, reference tables and separation certificates for the
// three-party, two-setting, two-outcome Bell scenario.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tribell/catalog.hpp"
#include "tribell/errors.hpp"
#include "tribell/moment.hpp"
#include "tribell/reference_table.hpp"
#include "tribell/report.hpp"
#include "tribell/sdpa_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSeparation = 4;

struct Options {
  std::string ineq = "all";
  std::vector<std::string> sets;
  std::string ppt;
  int level = 0;
  int restarts = 200;
  std::uint64_t seed = 1;
  double gap_tol = 1e-9;
  std::string out;
  std::string format = "json";
  bool allow_large = false;
  bool complex_moments = false;
  std::string catalog;
  std::string cache;
  double tol = 1e-3;
  std::string behavior;
  int threads = 1;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw tribell::ParseError("--out", "cannot write '" + o.out + "'");
  f << text;
}

tribell::RunConfig run_config(const Options& o) {
  tribell::RunConfig cfg;
  if (o.ineq != "all") cfg.ineqs = split(o.ineq);
  cfg.solver.gap_tol = o.gap_tol;
  cfg.solver.allow_large = o.allow_large;
  cfg.seesaw.restarts = o.restarts;
  cfg.seesaw.seed = o.seed;
  cfg.complex_moments = o.complex_moments;
  cfg.threads = o.threads;
  if (!o.cache.empty()) cfg.cache_dir = o.cache;

  std::vector<std::string> sets;
  for (const auto& s : o.sets) {
    for (const auto& t : split(s)) sets.push_back(t);
  }
  if (o.level > 0) sets.push_back("local(" + std::to_string(o.level) + ")");
  if (!o.ppt.empty()) {
    // --ppt applies to every moment set that is product structured.
    const std::string suffix = tribell::parse_ppt(o.ppt) == 7u ? "+T_all" : "+T_" + o.ppt;
    for (auto& s : sets) {
      const auto spec = tribell::parse_set_spec(s);
      if (spec.kind == tribell::SetSpec::Kind::Moment && spec.set.product_structured()) s += suffix;
    }
  }
  // Normalize and validate tags up front so config errors exit with code 2.
  for (auto& s : sets) s = tribell::parse_set_spec(s).tag();
  cfg.sets = sets;
  return cfg;
}

std::vector<tribell::BellFunctional> load(const Options& o) {
  return tribell::load_catalog(o.catalog.empty() ? tribell::default_catalog_path() : std::filesystem::path(o.catalog));
}

tribell::Behavior read_behavior(const std::string& spec) {
  if (spec == "uniform") return tribell::Behavior::uniform();
  if (spec.rfind("strategy:", 0) == 0) {
    const int code = std::stoi(spec.substr(9));
    if (code < 0 || code >= 64) throw tribell::ParseError("--behavior", "strategy code must be in 0..63");
    return tribell::to_floating(tribell::DeterministicStrategy::from_encoding(code).behavior());
  }
  std::ifstream in(spec);
  if (!in) throw tribell::ParseError("--behavior", "cannot read '" + spec + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw tribell::ParseError("--behavior", e.what());
  }
  if (!j.is_array() || j.size() != tribell::kProbEntries) {
    throw tribell::ParseError("--behavior", "expected a JSON array of 64 probabilities");
  }
  tribell::Behavior::Table t{};
  for (int i = 0; i < tribell::kProbEntries; ++i) t[i] = j[i].get<double>();
  return tribell::Behavior::from_probabilities(t);
}

// Fixed-width grid: one row per inequality, exact values where known.
std::string report_text(const tribell::Report& report) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "id";
  for (const auto& c : report.columns) os << std::right << std::setw(14) << c;
  os << "\n";
  for (const auto& id : report.ids) {
    os << std::left << std::setw(20) << id;
    for (const auto& col : report.columns) {
      const auto* cell = report.find(id, col);
      std::ostringstream v;
      if (cell->exact) {
        v << tribell::to_string(*cell->exact);
      } else {
        v << std::fixed << std::setprecision(6) << cell->value;
      }
      os << std::right << std::setw(14) << v.str();
    }
    os << "\n";
  }
  return os.str();
}

int cmd_bounds(const Options& o) {
  auto cfg = run_config(o);
  if (cfg.sets.empty()) throw tribell::ParseError("--set", "no set selected");
  const auto catalog = load(o);
  const auto report = tribell::run_table(catalog, cfg);
  if (o.format == "csv") {
    emit(o, tribell::report_csv_text(report));
  } else if (o.format == "text") {
    emit(o, report_text(report));
  } else {
    emit(o, tribell::report_json_text(report));
  }
  return kExitOk;
}

int cmd_table(const Options& o) {
  Options oo = o;
  if (oo.sets.empty() && oo.level == 0) oo.sets = tribell::reference_columns();
  auto cfg = run_config(oo);
  const auto catalog = load(oo);
  const auto report = tribell::run_table(catalog, cfg);
  const auto diff = tribell::compare_reference(report, tribell::reference_table(), o.tol);
  if (o.format == "csv") {
    emit(oo, tribell::report_csv_text(report));
  } else if (o.format == "text") {
    emit(oo, report_text(report));
  } else {
    nlohmann::json j = tribell::report_to_json(report);
    j["reference_diff"] = tribell::diff_to_json(diff);
    emit(oo, j.dump(2) + "\n");
  }
  std::cerr << "reference cells: " << diff.passed << " pass, " << diff.failed << " fail (tol " << o.tol << ")\n";
  for (const auto& d : diff.cells) {
    if (!d.pass) {
      std::cerr << "  " << d.id << " " << d.column << ": computed " << d.computed << ", reference " << d.reference
                << "\n";
    }
  }
  return kExitOk;
}

int cmd_certify(const Options& o) {
  const auto catalog = load(o);
  const auto cfg = run_config(o);
  const auto summary = tribell::evaluate_separations(catalog, cfg);
  if (o.format == "json") {
    emit(o, summary.to_json().dump(2) + "\n");
    std::cerr << summary.verdict();
  } else {
    emit(o, summary.verdict());
  }
  return summary.all_hold() ? kExitOk : kExitSeparation;
}

int cmd_membership(const Options& o) {
  if (o.behavior.empty()) throw tribell::ParseError("--behavior", "required");
  const auto beh = read_behavior(o.behavior);
  auto cfg = run_config(o);
  if (cfg.sets.empty()) cfg.sets = {"aq"};
  nlohmann::json out = nlohmann::json::array();
  for (const auto& tag : cfg.sets) {
    const auto spec = tribell::parse_set_spec(tag);
    if (spec.kind != tribell::SetSpec::Kind::Moment) {
      throw tribell::ParseError("--set", "membership needs a moment set, got '" + tag + "'");
    }
    const auto res = tribell::membership(spec.set, beh, spec.ppt, cfg.solver);
    out.push_back({{"set", tag},
                   {"member", res.member},
                   {"margin", tribell::round12(res.margin)},
                   {"reason", res.reason}});
  }
  emit(o, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_export(const Options& o) {
  const auto cfg = run_config(o);
  if (cfg.sets.size() != 1) throw tribell::ParseError("--set", "export-sdpa needs exactly one set");
  const auto ids = split(o.ineq);
  if (ids.size() != 1 || ids[0] == "all") throw tribell::ParseError("--ineq", "export-sdpa needs exactly one id");
  const auto spec = tribell::parse_set_spec(cfg.sets[0]);
  if (spec.kind != tribell::SetSpec::Kind::Moment) {
    throw tribell::ParseError("--set", "export-sdpa needs a moment set");
  }
  const auto catalog = load(o);
  const auto& f = tribell::find_functional(catalog, ids[0]);
  tribell::AssembleOptions opt;
  opt.ppt = spec.ppt;
  opt.complex_moments = o.complex_moments;
  const auto mp = tribell::assemble(spec.set, f, opt);
  emit(o, tribell::sdp::to_sdpa(mp.sdp, f.id + " over " + spec.tag()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-functional bounds over local, no-signalling, moment-relaxation and quantum sets"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--ineq", o.ineq, "Inequality id(s), comma separated, or 'all'");
    sub->add_option("--set", o.sets, "Set tag(s): L, NS, Q, Q:A|BC, aq, npa(k), local(l), with +T_A.. suffixes");
    sub->add_option("--ppt", o.ppt, "Partial transpose blocks for moment sets: A, B, C or all");
    sub->add_option("--level", o.level, "Shortcut for --set local(l)");
    sub->add_option("--restarts", o.restarts, "Seesaw restarts")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Seesaw seed");
    sub->add_option("--gap-tol", o.gap_tol, "Relative duality gap tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_flag("--allow-large", o.allow_large, "Allow solves beyond the size gate");
    sub->add_flag("--complex", o.complex_moments, "Free imaginary moment parts");
    sub->add_option("--catalog", o.catalog, "Catalog JSON file");
    sub->add_option("--cache", o.cache, "Result cache directory");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* bounds = app.add_subcommand("bounds", "Bounds for selected inequalities and sets");
  common(bounds);
  auto* table = app.add_subcommand("table", "Reference table sweep with a diff against reference values");
  common(table);
  table->add_option("--tol", o.tol, "Reference comparison tolerance");
  auto* certify = app.add_subcommand("certify", "Check the four separation margins");
  common(certify);
  auto* member = app.add_subcommand("membership", "Membership of a behavior in moment relaxations");
  common(member);
  member->add_option("--behavior", o.behavior, "JSON file with 64 probabilities, 'uniform' or 'strategy:N'");
  auto* exporter = app.add_subcommand("export-sdpa", "Write one moment problem in SDPA sparse format");
  common(exporter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*bounds) return cmd_bounds(o);
    if (*table) return cmd_table(o);
    if (*certify) return cmd_certify(o);
    if (*member) return cmd_membership(o);
    if (*exporter) return cmd_export(o);
  } catch (const tribell::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::KeyMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::DuplicateIdError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::UnsupportedLevel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::StructureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::DimensionGate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tribell::SeparationNotReproduced& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSeparation;
  } catch (const tribell::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
