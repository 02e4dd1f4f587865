#include "tribell/sdpa_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "tribell/errors.hpp"

namespace tribell::sdp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_sdpa(std::ostream& out, const StandardForm& p, const std::string& comment) {
  p.validate();
  const int rows = static_cast<int>(p.eq_matrix.rows());
  if (!comment.empty()) out << "\" " << comment << "\n";
  out << "* objective constant " << fmt(p.objective_constant) << "\n";
  const int nblocks = static_cast<int>(p.blocks.size()) + (rows > 0 ? 1 : 0);
  out << p.num_vars << "\n" << nblocks << "\n";
  for (const auto& b : p.blocks) out << b.dim << " ";
  if (rows > 0) out << -2 * rows;
  out << "\n";
  for (int i = 0; i < p.num_vars; ++i) out << (i ? " " : "") << fmt(-p.objective(i));
  out << "\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const auto& b = p.blocks[k];
    for (const auto& e : b.constant) {
      if (e.value != 0.0) out << 0 << " " << k + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << fmt(-e.value) << "\n";
    }
    for (const auto& [var, mat] : b.coefficients) {
      for (const auto& e : mat) {
        if (e.value != 0.0) {
          out << var + 1 << " " << k + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << fmt(e.value) << "\n";
        }
      }
    }
  }
  if (rows > 0) {
    const std::size_t blk = p.blocks.size() + 1;
    for (int r = 0; r < rows; ++r) {
      const int up = 2 * r + 1;
      const int down = 2 * r + 2;
      if (p.eq_rhs(r) != 0.0) {
        out << 0 << " " << blk << " " << up << " " << up << " " << fmt(p.eq_rhs(r)) << "\n";
        out << 0 << " " << blk << " " << down << " " << down << " " << fmt(-p.eq_rhs(r)) << "\n";
      }
      for (int i = 0; i < p.num_vars; ++i) {
        const double a = p.eq_matrix(r, i);
        if (a == 0.0) continue;
        out << i + 1 << " " << blk << " " << up << " " << up << " " << fmt(a) << "\n";
        out << i + 1 << " " << blk << " " << down << " " << down << " " << fmt(-a) << "\n";
      }
    }
  }
}

std::string to_sdpa(const StandardForm& problem, const std::string& comment) {
  std::ostringstream os;
  write_sdpa(os, problem, comment);
  return os.str();
}

StandardForm read_sdpa(std::istream& in) {
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  double constant = 0.0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line.compare(first, 20, "* objective constant") == 0) {
      constant = std::strtod(line.c_str() + first + 20, nullptr);
      continue;
    }
    if (line[first] == '"' || line[first] == '*') continue;
    for (char& c : line) {
      if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
    }
    lines.emplace_back(number, line);
  }
  std::size_t cursor = 0;
  auto need = [&](const char* what) -> std::pair<int, std::string>& {
    if (cursor >= lines.size()) throw ParseError("end of input", std::string("missing ") + what);
    return lines[cursor++];
  };
  auto where = [](int n) { return "line " + std::to_string(n); };

  StandardForm p;
  p.objective_constant = constant;
  {
    auto& [n, text] = need("variable count");
    std::istringstream is(text);
    if (!(is >> p.num_vars) || p.num_vars < 1) throw ParseError(where(n), "bad variable count");
  }
  int nblocks = 0;
  {
    auto& [n, text] = need("block count");
    std::istringstream is(text);
    if (!(is >> nblocks) || nblocks < 1) throw ParseError(where(n), "bad block count");
  }
  std::vector<int> sizes(nblocks);
  {
    auto& [n, text] = need("block structure");
    std::istringstream is(text);
    for (auto& s : sizes) {
      if (!(is >> s) || s == 0) throw ParseError(where(n), "bad block structure");
    }
  }
  p.objective = Eigen::VectorXd(p.num_vars);
  {
    auto& [n, text] = need("objective");
    std::istringstream is(text);
    for (int i = 0; i < p.num_vars; ++i) {
      double v;
      if (!(is >> v)) throw ParseError(where(n), "objective needs " + std::to_string(p.num_vars) + " entries");
      p.objective(i) = -v;
    }
  }

  // Diagonal SDPA blocks expand to runs of 1x1 blocks.
  std::vector<int> first_block(nblocks);
  for (int b = 0; b < nblocks; ++b) {
    first_block[b] = static_cast<int>(p.blocks.size());
    if (sizes[b] > 0) {
      p.blocks.push_back(LmiBlock{sizes[b], {}, {}});
    } else {
      for (int i = 0; i < -sizes[b]; ++i) p.blocks.push_back(LmiBlock{1, {}, {}});
    }
  }
  std::vector<std::vector<std::pair<int, SparseSymmetric>>> coef(p.blocks.size());
  while (cursor < lines.size()) {
    auto& [n, text] = lines[cursor++];
    std::istringstream is(text);
    int mat = 0;
    int blk = 0;
    int i = 0;
    int j = 0;
    double v = 0.0;
    if (!(is >> mat >> blk >> i >> j >> v)) throw ParseError(where(n), "expected 'mat block i j value'");
    if (mat < 0 || mat > p.num_vars || blk < 1 || blk > nblocks) throw ParseError(where(n), "index out of range");
    const int size = sizes[blk - 1];
    const int dim = size > 0 ? size : -size;
    if (i < 1 || j < 1 || i > dim || j > dim) throw ParseError(where(n), "entry outside its block");
    if (i > j) std::swap(i, j);
    int target = first_block[blk - 1];
    Entry e{i - 1, j - 1, v};
    if (size < 0) {
      if (i != j) throw ParseError(where(n), "off-diagonal entry in a diagonal block");
      target += i - 1;
      e = {0, 0, v};
    }
    if (mat == 0) {
      e.value = -e.value;
      p.blocks[target].constant.push_back(e);
    } else {
      auto& list = coef[target];
      if (list.empty() || list.back().first != mat - 1) list.emplace_back(mat - 1, SparseSymmetric{});
      list.back().second.push_back(e);
    }
  }
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    // Merge runs for the same variable.
    std::vector<std::pair<int, SparseSymmetric>> merged;
    for (auto& [var, m] : coef[b]) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& x) { return x.first == var; });
      if (it == merged.end()) {
        merged.emplace_back(var, std::move(m));
      } else {
        it->second.insert(it->second.end(), m.begin(), m.end());
      }
    }
    p.blocks[b].coefficients = std::move(merged);
  }
  p.eq_matrix = Eigen::MatrixXd::Zero(0, p.num_vars);
  p.eq_rhs = Eigen::VectorXd::Zero(0);
  return p;
}

StandardForm from_sdpa(const std::string& text) {
  std::istringstream is(text);
  return read_sdpa(is);
}

}  // namespace tribell::sdp
