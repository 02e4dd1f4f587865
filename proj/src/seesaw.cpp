#include "tribell/seesaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "tribell/errors.hpp"

namespace tribell {

namespace {

// Qubit of `party` in the flat index q = qA*4 + qB*2 + qC.
inline int bit(int q, int party) { return (q >> (2 - party)) & 1; }

// Flat index from the lone party's qubit and the two-qubit index of the
// other parties (in increasing party order).
inline int join(int party, int lone, int rest) {
  int q = 0;
  int k = 0;
  for (int p = 0; p < 3; ++p) {
    int v;
    if (p == party) {
      v = lone;
    } else {
      v = (rest >> (1 - k)) & 1;
      ++k;
    }
    q |= v << (2 - p);
  }
  return q;
}

Qubit hermitian_sign(const Qubit& r, const Qubit& previous) {
  if (r.norm() < 1e-12) return previous;
  Eigen::SelfAdjointEigenSolver<Qubit> es(0.5 * (r + r.adjoint()));
  const auto& v = es.eigenvectors();
  Qubit o = Qubit::Zero();
  for (int k = 0; k < 2; ++k) {
    const double s = es.eigenvalues()(k) >= 0.0 ? 1.0 : -1.0;
    o += s * v.col(k) * v.col(k).adjoint();
  }
  return o;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::Vector3d random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d n;
  do {
    n = Eigen::Vector3d(g(rng), g(rng), g(rng));
  } while (n.norm() < 1e-9);
  return n.normalized();
}

template <int N>
Eigen::Matrix<Complex, N, 1> random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix<Complex, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();
  return v;
}

template <int N>
Eigen::Matrix<Complex, N, 1> top_eigenvector(const Eigen::Matrix<Complex, N, N>& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> es(0.5 * (h + h.adjoint()));
  Eigen::Matrix<Complex, N, 1> v = es.eigenvectors().col(N - 1);
  fix_phase(v);
  return v;
}

double expectation(const Operator8& b, const State8& psi) { return (psi.adjoint() * b * psi)(0, 0).real(); }

struct Problem {
  DenseFunctional dense;
  std::array<double, kProbEntries> w{};
  double constant = 0.0;

  explicit Problem(const BellFunctional& f) : dense(to_dense(f)) {
    for (int i = 0; i < kProbEntries; ++i) w[i] = to_double(dense.weights[i]);
    constant = to_double(dense.constant);
  }
};

Operator8 build_operator(const Problem& pr, const Observables& obs) {
  Operator8 b = pr.constant * Operator8::Identity();
  for (int idx = 0; idx < kProbEntries; ++idx) {
    if (pr.w[idx] == 0.0) continue;
    const std::array<int, 3> out{(idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
    const std::array<int, 3> set{(idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1};
    const Qubit pa = obs[0].projector(set[0], out[0]);
    const Qubit pb = obs[1].projector(set[1], out[1]);
    const Qubit pc = obs[2].projector(set[2], out[2]);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        b(r, c) += pr.w[idx] * pa(bit(r, 0), bit(c, 0)) * pb(bit(r, 1), bit(c, 1)) * pc(bit(r, 2), bit(c, 2));
      }
    }
  }
  return b;
}

// Optimal observables of one party for a fixed state.
void party_step(const Problem& pr, int party, const State8& psi, Observables& obs) {
  // Psi(lone, rest) and the other two parties.
  Eigen::Matrix<Complex, 2, 4> m;
  for (int l = 0; l < 2; ++l) {
    for (int s = 0; s < 4; ++s) m(l, s) = psi(join(party, l, s));
  }
  std::array<int, 2> others{};
  for (int p = 0, k = 0; p < 3; ++p) {
    if (p != party) others[k++] = p;
  }
  for (int x = 0; x < 2; ++x) {
    std::array<Eigen::Matrix4cd, 2> xa{Eigen::Matrix4cd::Zero(), Eigen::Matrix4cd::Zero()};
    for (int idx = 0; idx < kProbEntries; ++idx) {
      if (pr.w[idx] == 0.0) continue;
      const std::array<int, 3> out{(idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
      const std::array<int, 3> set{(idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1};
      if (set[party] != x) continue;
      const Qubit p1 = obs[others[0]].projector(set[others[0]], out[others[0]]);
      const Qubit p2 = obs[others[1]].projector(set[others[1]], out[others[1]]);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) xa[out[party]](r, c) += pr.w[idx] * p1(r >> 1, c >> 1) * p2(r & 1, c & 1);
      }
    }
    // K_a = Psi X_a^T Psi^dagger is the lone party's conditioned operator.
    const Qubit k0 = m * xa[0].transpose() * m.adjoint();
    const Qubit k1 = m * xa[1].transpose() * m.adjoint();
    obs[party].op[x] = hermitian_sign(0.5 * (k0 - k1), obs[party].op[x]);
  }
}

struct RunOutcome {
  double value = -std::numeric_limits<double>::infinity();
  QuantumModel model;
  int sweeps = 0;
  int violations = 0;
  std::vector<double> trace;
};

State8 product_state(Bipartition cut, const Eigen::Vector2cd& lone, const Eigen::Vector4cd& rest) {
  State8 psi;
  const int party = lone_party(cut);
  for (int l = 0; l < 2; ++l) {
    for (int s = 0; s < 4; ++s) psi(join(party, l, s)) = lone(l) * rest(s);
  }
  return psi;
}

RunOutcome run_once(const Problem& pr, std::optional<Bipartition> cut, const SeesawConfig& cfg, int restart) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(restart))));
  RunOutcome out;
  QuantumModel& model = out.model;
  for (int p = 0; p < 3; ++p) model.observables[p] = LocalObservable::from_bloch(random_direction(rng), random_direction(rng));
  Eigen::Vector2cd lone = random_state<2>(rng);
  Eigen::Vector4cd rest = random_state<4>(rng);

  double prev = -std::numeric_limits<double>::infinity();
  double last = prev;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    const Operator8 b = build_operator(pr, model.observables);
    if (!cut) {
      model.state = top_eigenvector<8>(b);
    } else {
      // Alternate the two factors; each half-step is a top-eigenvector solve.
      const int party = lone_party(*cut);
      Eigen::Matrix<Complex, 8, 8> bp;
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) bp(r, c) = b(join(party, r >> 2, r & 3), join(party, c >> 2, c & 3));
      }
      double inner_prev = -std::numeric_limits<double>::infinity();
      for (int it = 0; it < 200; ++it) {
        Eigen::Matrix2cd hl = Eigen::Matrix2cd::Zero();
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) hl(i, j) = (rest.adjoint() * bp.block<4, 4>(4 * i, 4 * j) * rest)(0, 0);
        }
        lone = top_eigenvector<2>(hl);
        Eigen::Matrix4cd hr = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) hr += std::conj(lone(i)) * lone(j) * bp.block<4, 4>(4 * i, 4 * j);
        }
        rest = top_eigenvector<4>(hr);
        const double v = (rest.adjoint() * hr * rest)(0, 0).real();
        if (v - inner_prev <= cfg.tol) break;
        inner_prev = v;
      }
      model.state = product_state(*cut, lone, rest);
    }
    for (int p = 0; p < 3; ++p) party_step(pr, p, model.state, model.observables);
    const double value = expectation(build_operator(pr, model.observables), model.state);
    ++out.sweeps;
    if (cfg.record_trace) out.trace.push_back(value);
    if (value < prev - 1e-12 * (1.0 + std::abs(prev))) ++out.violations;
    const bool done = value - prev <= cfg.tol;
    prev = std::max(prev, value);
    last = value;
    if (done) break;
  }
  // The reported value belongs to the final model, not the running maximum.
  out.value = last;
  if (cut) {
    model.product = cut;
    model.lone_factor = lone;
    model.rest_factor = rest;
  }
  return out;
}

SeesawResult run(const BellFunctional& f, std::optional<Bipartition> cut, const SeesawConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("seesaw needs at least one restart");
  const Problem pr(f);
  SeesawResult res;
  res.value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    RunOutcome o = run_once(pr, cut, cfg, r);
    res.total_sweeps += o.sweeps;
    res.monotonicity_violations += o.violations;
    if (o.value > res.value) {
      res.value = o.value;
      res.model = std::move(o.model);
      res.best_restart = r;
      res.trace = std::move(o.trace);
    }
  }
  return res;
}

}  // namespace

LocalObservable LocalObservable::from_bloch(const Eigen::Vector3d& n0, const Eigen::Vector3d& n1) {
  auto op = [](Eigen::Vector3d n) {
    n.normalize();
    Qubit o;
    o << Complex(n.z(), 0), Complex(n.x(), -n.y()), Complex(n.x(), n.y()), Complex(-n.z(), 0);
    return o;
  };
  LocalObservable lo;
  lo.op = {op(n0), op(n1)};
  return lo;
}

Qubit LocalObservable::projector(int setting, int outcome) const {
  const double s = outcome == 0 ? 1.0 : -1.0;
  return 0.5 * (Qubit::Identity() + s * op[setting]);
}

Eigen::Vector3d LocalObservable::bloch(int setting) const {
  const Qubit& o = op[setting];
  return {o(1, 0).real(), o(1, 0).imag(), 0.5 * (o(0, 0) - o(1, 1)).real()};
}

std::string to_string(Bipartition b) {
  switch (b) {
    case Bipartition::A_BC:
      return "A|BC";
    case Bipartition::B_AC:
      return "B|AC";
    case Bipartition::C_AB:
      return "C|AB";
  }
  return "?";
}

Bipartition parse_bipartition(const std::string& text) {
  if (text == "A|BC" || text == "A") return Bipartition::A_BC;
  if (text == "B|AC" || text == "B") return Bipartition::B_AC;
  if (text == "C|AB" || text == "C") return Bipartition::C_AB;
  throw ParseError("bipartition", "unknown bipartition '" + text + "'");
}

Behavior QuantumModel::behavior() const {
  Behavior::Table t{};
  for (int idx = 0; idx < kProbEntries; ++idx) {
    const std::array<int, 3> out{(idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
    const std::array<int, 3> set{(idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1};
    const Qubit pa = observables[0].projector(set[0], out[0]);
    const Qubit pb = observables[1].projector(set[1], out[1]);
    const Qubit pc = observables[2].projector(set[2], out[2]);
    Complex v = 0.0;
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        v += std::conj(state(r)) * pa(bit(r, 0), bit(c, 0)) * pb(bit(r, 1), bit(c, 1)) * pc(bit(r, 2), bit(c, 2)) *
             state(c);
      }
    }
    t[idx] = std::clamp(v.real(), 0.0, 1.0);
  }
  return Behavior::from_probabilities(t);
}

Operator8 bell_operator(const BellFunctional& f, const Observables& observables) {
  return build_operator(Problem(f), observables);
}

SeesawResult seesaw_max(const BellFunctional& f, const SeesawConfig& config) { return run(f, std::nullopt, config); }

SeesawResult seesaw_bisep(const BellFunctional& f, Bipartition cut, const SeesawConfig& config) {
  return run(f, cut, config);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json complex_list(const Complex* data, int n) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < n; ++i) a.push_back({data[i].real(), data[i].imag()});
  return a;
}

template <class Vec>
void read_complex(const nlohmann::json& a, Vec& v) {
  if (!a.is_array() || static_cast<int>(a.size()) != v.size()) {
    throw ParseError("model", "complex vector has the wrong length");
  }
  for (int i = 0; i < v.size(); ++i) v(i) = Complex(a[i].at(0).get<double>(), a[i].at(1).get<double>());
}

}  // namespace

void to_json(nlohmann::json& j, const QuantumModel& m) {
  j = nlohmann::json::object();
  j["state"] = complex_list(m.state.data(), 8);
  nlohmann::json obs = nlohmann::json::array();
  for (int p = 0; p < 3; ++p) {
    nlohmann::json party = nlohmann::json::object();
    party["party"] = std::string(1, party_name(p));
    nlohmann::json settings = nlohmann::json::array();
    for (int x = 0; x < 2; ++x) {
      const Qubit& o = m.observables[p].op[x];
      const Eigen::Vector3d b = m.observables[p].bloch(x);
      // Row-major entries of the observable.
      const Complex entries[4] = {o(0, 0), o(0, 1), o(1, 0), o(1, 1)};
      settings.push_back({{"bloch", {b.x(), b.y(), b.z()}},
                          {"trace", o.trace().real()},
                          {"matrix", complex_list(entries, 4)}});
    }
    party["settings"] = settings;
    obs.push_back(party);
  }
  j["observables"] = obs;
  if (m.product) {
    j["product"] = to_string(*m.product);
    j["lone_factor"] = complex_list(m.lone_factor.data(), 2);
    j["rest_factor"] = complex_list(m.rest_factor.data(), 4);
  }
}

void from_json(const nlohmann::json& j, QuantumModel& m) {
  read_complex(j.at("state"), m.state);
  const auto& obs = j.at("observables");
  if (!obs.is_array() || obs.size() != 3) throw ParseError("model", "expected three parties");
  for (int p = 0; p < 3; ++p) {
    const auto& settings = obs[p].at("settings");
    if (!settings.is_array() || settings.size() != 2) throw ParseError("model", "expected two settings");
    for (int x = 0; x < 2; ++x) {
      Eigen::Vector4cd e;
      read_complex(settings[x].at("matrix"), e);
      m.observables[p].op[x] << e(0), e(1), e(2), e(3);
    }
  }
  m.product.reset();
  if (j.contains("product")) {
    m.product = parse_bipartition(j.at("product").get<std::string>());
    read_complex(j.at("lone_factor"), m.lone_factor);
    read_complex(j.at("rest_factor"), m.rest_factor);
  }
}

}  // namespace tribell
