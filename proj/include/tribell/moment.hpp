#pragma once

// Generating sets, moment classes, behavior linkage and assembly of moment
// matrix relaxations into block LMIs.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tribell/scenario.hpp"
#include "tribell/sdp.hpp"
#include "tribell/words.hpp"

namespace tribell {

enum class SetFamily { Npa, LocalLevel };

inline constexpr int kMaxNpaLevel = 3;
inline constexpr int kMaxLocalLevel = 6;
/// Local levels above this are assembled but not solved without an override.
inline constexpr int kMaxSolvableLocalLevel = 5;

struct GeneratingSet {
  SetFamily family = SetFamily::LocalLevel;
  int level = 1;
  std::vector<CanonicalWord> words;
  /// Per-party local words for product-structured sets; word index is
  /// (iA * L + iB) * L + iC with L = local_words.size().
  std::vector<LocalWord> local_words;

  bool product_structured() const { return family == SetFamily::LocalLevel; }
  int size() const { return static_cast<int>(words.size()); }
  /// "npa(2)", "local(1)".
  std::string descriptor() const;
};

/// Throws UnsupportedLevel outside npa 1..3 and local 1..6.
GeneratingSet generating_set(SetFamily family, int level);
GeneratingSet npa_set(int level);
GeneratingSet local_level_set(int level);

/// Parses "npa(2)", "npa2", "aq", "local(1)", "local2"; throws ParseError.
GeneratingSet parse_set(const std::string& tag);

// ---------------------------------------------------------------------------
// Moment classes

/// Entry of a Hermitian moment block: moment class, conjugated or not.
struct MomentRef {
  int cls = 0;
  bool conjugated = false;
};

/// Distinct moment classes; class 0 is always the identity.
class MomentClasses {
 public:
  MomentClasses();
  /// Returns the class of w, registering it when absent.
  MomentRef intern(const CanonicalWord& w);
  /// -1 when the key is not registered.
  int find(const CanonicalWord& canonical) const;
  const CanonicalWord& word(int cls) const { return words_[cls]; }
  int size() const { return static_cast<int>(words_.size()); }

 private:
  std::vector<CanonicalWord> words_;
  std::unordered_map<std::uint32_t, int> index_;
};

/// Upper triangle (row-major, i <= j) of a Hermitian moment block.
struct HermitianBlock {
  int dim = 0;
  std::string tag;  // "base", "T_A", "T_BC", ...
  std::vector<MomentRef> entries;

  const MomentRef& at(int i, int j) const;  // i <= j
};

/// Subset of parties as a bitmask, bit p for party p (A=1, B=2, C=4).
using PartyMask = unsigned;
std::string ppt_tag(PartyMask subset);
/// Parses "A", "B", "C", "all", "A,B"; "all" means one block per party.
PartyMask parse_ppt(const std::string& text);

/// Base moment matrix O_i^dagger O_j with classes registered in `classes`.
HermitianBlock moment_block(const GeneratingSet& set, MomentClasses& classes);

/// Partial transpose of the base block over the parties in `subset`: the
/// local indices i_P and j_P are swapped for P in subset. Throws
/// StructureError for non-product sets or an empty/full subset.
HermitianBlock ppt_block(const GeneratingSet& set, PartyMask subset, MomentClasses& classes);

struct MomentCensus {
  int set_size = 0;
  int classes = 0;          // including the identity
  int real_classes = 0;     // palindromic words
  int complex_classes = 0;  // classes with a free imaginary part
  /// Free real scalars in the complex formulation (identity excluded).
  int real_parameters() const { return classes - 1 + complex_classes; }
};

/// Counts distinct moment classes of the base block without storing it.
MomentCensus moment_census(const GeneratingSet& set);

// ---------------------------------------------------------------------------
// Behavior linkage

/// p(abc|xyz) = sum of integer coefficient * moment over 0-outcome moments.
struct BehaviorLinkage {
  std::array<std::vector<std::pair<int, int>>, kProbEntries> terms;  // (class, coefficient)
};

/// Canonical word of the 0-outcome moment for the parties with settings >= 0.
CanonicalWord behavior_word(const std::array<int, 3>& settings);

/// Throws IncompleteSet when a needed moment is not among the classes.
BehaviorLinkage behavior_constraints(const MomentClasses& classes);
/// Registers the classes of `set` and links them; throws IncompleteSet.
BehaviorLinkage behavior_constraints(const GeneratingSet& set);

// ---------------------------------------------------------------------------
// Assembly

struct AssembleOptions {
  /// Each set bit adds one partially transposed block for that party.
  PartyMask ppt = 0;
  /// Free imaginary parts via the real doubling embedding.
  bool complex_moments = false;
  /// Membership mode: pin the behavior moments and maximize the smallest
  /// eigenvalue margin instead of the objective.
  std::optional<Behavior> membership;
};

struct MomentProblem {
  GeneratingSet set;
  PartyMask ppt = 0;
  bool complex_moments = false;
  bool membership = false;
  MomentClasses classes;
  std::vector<int> re_var;  // per class, -1 for the identity
  std::vector<int> im_var;  // per class, -1 when the imaginary part is 0
  std::vector<HermitianBlock> blocks;
  BehaviorLinkage linkage;
  /// Classes added only for the behavior map (npa(1) lacks three-body moments).
  int extra_classes = 0;
  int margin_var = -1;
  sdp::StandardForm sdp;

  /// Assembled but over the solve budget (local level 6).
  bool requires_override() const;
  std::string descriptor() const;
  /// Behavior read off a solver point; entries within 1e-7 below zero are
  /// clipped. Throws SolverError for larger violations.
  Behavior behavior(const Eigen::VectorXd& y) const;
  /// Value of a moment class at y (real part).
  double moment(int cls, const Eigen::VectorXd& y) const;
};

/// Doubling embedding [[X, -Y], [Y, X]] of a Hermitian block. With
/// `doubled` false only X is emitted (imaginary parts pinned to 0).
sdp::LmiBlock realify(const HermitianBlock& block, const std::vector<int>& re_var,
                      const std::vector<int>& im_var, bool doubled, int margin_var = -1);

/// Bound mode maximizes `objective` (either basis) over the relaxation.
MomentProblem assemble(const GeneratingSet& set, const BellFunctional& objective, const AssembleOptions& options = {});

/// Throws UnsupportedLevel when the problem needs the override and
/// config.allow_large is not set.
sdp::Solution solve(const MomentProblem& problem, const sdp::SolverConfig& config = {});

struct MembershipResult {
  bool member = false;
  double margin = 0.0;  // optimal smallest-eigenvalue margin
  std::string reason;
  sdp::Solution solution;
};

inline constexpr double kMembershipTol = 1e-7;

/// Signalling behaviors are reported as non-members without solving.
MembershipResult membership(const GeneratingSet& set, const Behavior& behavior, PartyMask ppt = 0,
                            const sdp::SolverConfig& config = {});

}  // namespace tribell
