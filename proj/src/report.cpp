#include "tribell/report.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tribell/catalog.hpp"
#include "tribell/classical.hpp"
#include "tribell/errors.hpp"

namespace tribell {

// ---------------------------------------------------------------------------
// Set specs

std::string SetSpec::tag() const {
  switch (kind) {
    case Kind::Local:
      return column::kLocal;
    case Kind::NoSignalling:
      return column::kNoSignalling;
    case Kind::Seesaw:
      return column::kQuantum;
    case Kind::SeesawBisep:
      return column::kQuantum + ":" + to_string(cut);
    case Kind::Moment:
      break;
  }
  std::string t = set.family == SetFamily::LocalLevel && set.level == 1 ? column::kAlmostQuantum : set.descriptor();
  if (ppt == 7u) return t + "+T_all";
  for (int p = 0; p < 3; ++p) {
    if (ppt & (1u << p)) t += "+" + ppt_tag(1u << p);
  }
  return t;
}

SetSpec parse_set_spec(const std::string& raw) {
  std::string tag;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) tag += c;
  }
  SetSpec spec;
  if (tag == "L") return spec;
  if (tag == "NS") {
    spec.kind = SetSpec::Kind::NoSignalling;
    return spec;
  }
  if (tag == "Q") {
    spec.kind = SetSpec::Kind::Seesaw;
    return spec;
  }
  if (tag.rfind("Q:", 0) == 0) {
    spec.kind = SetSpec::Kind::SeesawBisep;
    spec.cut = parse_bipartition(tag.substr(2));
    return spec;
  }
  spec.kind = SetSpec::Kind::Moment;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : tag) {
    if (c == '+') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  spec.set = parse_set(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::string p = parts[i];
    if (p.rfind("T_", 0) == 0) p = p.substr(2);
    spec.ppt |= parse_ppt(p);
  }
  if (spec.ppt != 0 && !spec.set.product_structured()) {
    throw ParseError("set", "partial transposition is undefined for " + spec.set.descriptor());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Cells

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void round_numbers(nlohmann::json& j) {
  if (j.is_number_float()) {
    j = round12(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v);
  }
}

nlohmann::json cell_to_json(const Cell& c) {
  nlohmann::json j = nlohmann::json::object();
  j["value"] = round12(c.value);
  if (c.exact) j["exact"] = to_string(*c.exact);
  j["status"] = c.status;
  if (c.status != "exact" && c.status != "seesaw") {
    j["duality_gap"] = round12(c.duality_gap);
    j["iterations"] = c.iterations;
    j["certified"] = c.certified;
  }
  if (c.model) {
    j["model"] = *c.model;
    round_numbers(j["model"]);
  }
  return j;
}

Cell cell_from_json(const nlohmann::json& j, const std::string& id, const std::string& column) {
  Cell c;
  c.id = id;
  c.column = column;
  c.value = j.at("value").get<double>();
  if (j.contains("exact")) c.exact = parse_rational(j.at("exact").get<std::string>());
  c.status = j.at("status").get<std::string>();
  c.duality_gap = j.value("duality_gap", 0.0);
  c.iterations = j.value("iterations", 0);
  c.certified = j.value("certified", false);
  if (j.contains("model")) c.model = j.at("model");
  return c;
}

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {{"solver",
           {{"gap_tol", cfg.solver.gap_tol},
            {"feas_tol", cfg.solver.feas_tol},
            {"accept_tol", cfg.solver.accept_tol},
            {"max_iter", cfg.solver.max_iter},
            {"allow_large", cfg.solver.allow_large}}},
          {"seesaw",
           {{"restarts", cfg.seesaw.restarts},
            {"seed", cfg.seesaw.seed},
            {"tol", cfg.seesaw.tol},
            {"max_sweeps", cfg.seesaw.max_sweeps}}},
          {"complex_moments", cfg.complex_moments},
          {"certify_tol", cfg.certify_tol}};
}

std::string cache_key(const std::string& catalog_hash, const std::string& id, const std::string& column,
                      const RunConfig& cfg) {
  return catalog_hash + "|" + id + "|" + column + "|" + config_json(cfg).dump();
}

std::optional<Cell> cache_load(const RunConfig& cfg, const std::string& key, const std::string& id,
                               const std::string& column) {
  if (!cfg.cache_dir) return std::nullopt;
  const auto path = *cfg.cache_dir / (fnv_hex(key) + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("key").get<std::string>() != key) return std::nullopt;
    return cell_from_json(j.at("cell"), id, column);
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
}

void cache_store(const RunConfig& cfg, const std::string& key, const Cell& cell) {
  if (!cfg.cache_dir) return;
  std::filesystem::create_directories(*cfg.cache_dir);
  const auto name = fnv_hex(key);
  const auto final_path = *cfg.cache_dir / (name + ".json");
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const auto tmp = *cfg.cache_dir / (name + ".tmp." + fnv_hex(tid.str()));
  {
    std::ofstream out(tmp);
    out << nlohmann::json{{"key", key}, {"cell", cell_to_json(cell)}}.dump(1) << "\n";
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace

Cell compute_cell(const BellFunctional& f, const SetSpec& spec, const RunConfig& cfg) {
  Cell cell;
  cell.id = f.id;
  cell.column = spec.tag();
  switch (spec.kind) {
    case SetSpec::Kind::Local: {
      const BoundResult r = local_bound(f);
      cell.value = r.value;
      cell.exact = r.exact;
      cell.status = "exact";
      return cell;
    }
    case SetSpec::Kind::NoSignalling: {
      const BoundResult r = ns_bound(f, cfg.solver);
      cell.value = r.value;
      cell.exact = r.exact;
      cell.duality_gap = r.duality_gap;
      cell.iterations = r.iterations;
      cell.status = sdp::to_string(sdp::Status::Optimal);
      const sdp::StandardForm lp = ns_program(f);
      // Re-solve is cheap; certify the exact program that produced the value.
      const sdp::Solution sol = sdp::solve(lp, cfg.solver);
      const auto rep = sdp::check_certificate(lp, sol, cfg.certify_tol);
      if (!rep.ok()) throw SolverError("'" + f.id + "' NS bound failed certification: " + rep.failures.front());
      cell.certified = true;
      return cell;
    }
    case SetSpec::Kind::Seesaw:
    case SetSpec::Kind::SeesawBisep: {
      const SeesawResult r = spec.kind == SetSpec::Kind::Seesaw ? seesaw_max(f, cfg.seesaw)
                                                                 : seesaw_bisep(f, spec.cut, cfg.seesaw);
      cell.value = r.value;
      cell.status = "seesaw";
      nlohmann::json m;
      to_json(m, r.model);
      m["restart"] = r.best_restart;
      cell.model = m;
      return cell;
    }
    case SetSpec::Kind::Moment:
      break;
  }
  AssembleOptions opt;
  opt.ppt = spec.ppt;
  opt.complex_moments = cfg.complex_moments;
  const MomentProblem mp = assemble(spec.set, f, opt);
  const sdp::Solution sol = solve(mp, cfg.solver);
  if (sol.status != sdp::Status::Optimal) {
    throw SolverError("'" + f.id + "' over " + cell.column + " ended with status " + sdp::to_string(sol.status));
  }
  const auto rep = sdp::check_certificate(mp.sdp, sol, cfg.certify_tol);
  if (!rep.ok()) {
    throw SolverError("'" + f.id + "' over " + cell.column + " failed certification: " + rep.failures.front());
  }
  cell.value = sol.value;
  cell.duality_gap = sol.duality_gap;
  cell.iterations = sol.iterations;
  cell.status = sdp::to_string(sol.status);
  cell.certified = true;
  return cell;
}

const Cell* Report::find(const std::string& id, const std::string& column) const {
  for (const auto& c : cells) {
    if (c.id == id && c.column == column) return &c;
  }
  return nullptr;
}

Report run_table(const std::vector<BellFunctional>& catalog, const RunConfig& cfg) {
  Report rep;
  rep.catalog_hash = catalog_hash(catalog);
  rep.config = config_json(cfg);
  std::vector<const BellFunctional*> rows;
  if (cfg.ineqs.empty() || (cfg.ineqs.size() == 1 && cfg.ineqs[0] == "all")) {
    for (const auto& f : catalog) rows.push_back(&f);
  } else {
    for (const auto& id : cfg.ineqs) rows.push_back(&find_functional(catalog, id));
  }
  std::vector<SetSpec> specs;
  for (const auto& s : cfg.sets) specs.push_back(parse_set_spec(s));
  for (const auto* f : rows) rep.ids.push_back(f->id);
  for (const auto& s : specs) rep.columns.push_back(s.tag());

  const std::size_t total = rows.size() * specs.size();
  rep.cells.resize(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < total; k = next++) {
      const BellFunctional& f = *rows[k / specs.size()];
      const SetSpec& spec = specs[k % specs.size()];
      try {
        const std::string key = cache_key(rep.catalog_hash, f.id, spec.tag(), cfg);
        if (auto cached = cache_load(cfg, key, f.id, spec.tag())) {
          rep.cells[k] = std::move(*cached);
          continue;
        }
        rep.cells[k] = compute_cell(f, spec, cfg);
        cache_store(cfg, key, rep.cells[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(total)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rep;
}

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j = nlohmann::json::object();
  j["schema"] = report.schema;
  j["catalog_hash"] = report.catalog_hash;
  j["config"] = report.config;
  j["columns"] = report.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& id : report.ids) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& col : report.columns) {
      if (const Cell* c = report.find(id, col)) cells[col] = cell_to_json(*c);
    }
    rows.push_back({{"id", id}, {"cells", cells}});
  }
  j["rows"] = rows;
  return j;
}

std::string report_json_text(const Report& report) { return report_to_json(report).dump(2) + "\n"; }

std::string report_csv_text(const Report& report) {
  std::ostringstream os;
  os << "id,column,value,exact,status,duality_gap\n";
  for (const auto& id : report.ids) {
    for (const auto& col : report.columns) {
      const Cell* c = report.find(id, col);
      if (!c) continue;
      os << id << ",\"" << col << "\"," << fmt12(round12(c->value)) << "," << (c->exact ? to_string(*c->exact) : "")
         << "," << c->status << ",";
      if (c->status != "exact" && c->status != "seesaw") os << fmt12(round12(c->duality_gap));
      os << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Reference comparison

DiffReport compare_reference(const Report& report, const ReferenceTable& ref, double tol) {
  DiffReport diff;
  diff.tolerance = tol;
  for (const auto& c : report.cells) {
    const ReferenceValue* r = ref.find(c.id, c.column);
    if (!r) continue;
    CellDiff d;
    d.id = c.id;
    d.column = c.column;
    d.computed = c.value;
    d.reference = r->value;
    d.difference = c.value - r->value;
    d.starred = r->starred;
    d.pass = r->starred ? c.value >= r->value - tol : std::abs(d.difference) <= tol;
    (d.pass ? diff.passed : diff.failed)++;
    diff.cells.push_back(d);
  }
  if (diff.cells.empty()) throw KeyMismatch("no report cell has a reference counterpart");
  return diff;
}

nlohmann::json diff_to_json(const DiffReport& diff) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& d : diff.cells) {
    cells.push_back({{"id", d.id},
                     {"column", d.column},
                     {"computed", round12(d.computed)},
                     {"reference", round12(d.reference)},
                     {"difference", round12(d.difference)},
                     {"starred", d.starred},
                     {"pass", d.pass}});
  }
  return {{"tolerance", diff.tolerance}, {"passed", diff.passed}, {"failed", diff.failed}, {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Separations

bool SeparationSummary::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const SeparationCheck& c) { return c.holds(); });
}

std::string SeparationSummary::verdict() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.holds() ? "HOLDS " : "FAILS ") << c.name << ": " << c.larger << " - " << c.smaller << " = "
       << fmt12(round12(c.margin())) << " (required >= " << c.required << ")\n";
  }
  os << (all_hold() ? "all separations reproduced" : "separation not reproduced") << "\n";
  return os.str();
}

nlohmann::json SeparationSummary::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"larger", c.larger},
                   {"smaller", c.smaller},
                   {"larger_value", round12(c.larger_value)},
                   {"smaller_value", round12(c.smaller_value)},
                   {"margin", round12(c.margin())},
                   {"required", c.required},
                   {"holds", c.holds()}});
  }
  return {{"schema", kReportSchema}, {"checks", arr}, {"all_hold", all_hold()}};
}

SeparationSummary evaluate_separations(const std::vector<BellFunctional>& catalog, const RunConfig& cfg,
                                       const SeparationIds& ids) {
  const BellFunctional& a = find_functional(catalog, ids.gap_a);
  const BellFunctional& b = find_functional(catalog, ids.gap_b);
  const BellFunctional& s = find_functional(catalog, ids.separator);
  const SetSpec aq = parse_set_spec(column::kAlmostQuantum);
  const SetSpec q2 = parse_set_spec(column::kNpa2);
  const SetSpec q = parse_set_spec(column::kQuantum);

  const double aq_a = compute_cell(a, aq, cfg).value;
  const double q_a = compute_cell(a, q, cfg).value;
  const double q2_a = compute_cell(a, q2, cfg).value;
  const double aq_b = compute_cell(b, aq, cfg).value;
  const double q_b = compute_cell(b, q, cfg).value;
  const double aq_s = compute_cell(s, aq, cfg).value;
  const double q2_s = compute_cell(s, q2, cfg).value;

  auto label = [](const std::string& set, const std::string& id) { return set + "(" + id + ")"; };
  SeparationSummary sum;
  sum.checks.push_back({"almost-quantum exceeds quantum", label("aq", a.id), label("Q", a.id), aq_a, q_a, 0.05});
  sum.checks.push_back({"almost-quantum exceeds quantum", label("aq", b.id), label("Q", b.id), aq_b, q_b, 0.004});
  sum.checks.push_back({"npa(2) exceeds almost-quantum", label("npa(2)", a.id), label("aq", a.id), q2_a, aq_a, 0.4});
  sum.checks.push_back({"almost-quantum exceeds npa(2)", label("aq", s.id), label("npa(2)", s.id), aq_s, q2_s, 0.04});
  return sum;
}

SeparationSummary certify_separations(const std::vector<BellFunctional>& catalog, const RunConfig& cfg,
                                      const SeparationIds& ids) {
  SeparationSummary sum = evaluate_separations(catalog, cfg, ids);
  for (const auto& c : sum.checks) {
    if (!c.holds()) {
      throw SeparationNotReproduced(c.name + ": " + c.larger + " - " + c.smaller + " = " + fmt12(c.margin()) +
                                    " < " + fmt12(c.required));
    }
  }
  return sum;
}

}  // namespace tribell
