#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svart/priors.hpp"
#include "svart/random.hpp"
#include "svart/sampler.hpp"

namespace svart {

// M x N signed selection matrix: each row holds a single +1 or -1 and the
// constraint is R * response >= 0, checked on the impulse responses at every
// listed horizon (0 = impact).
struct ConstraintMatrix {
  Matrix entries;
  std::string name;
  std::vector<int> horizons{0};

  // One sign per variable: +1 / -1 constrain, 0 leaves the variable free.
  static ConstraintMatrix from_signs(const std::vector<int>& signs, std::string name = {});

  Eigen::Index variables() const { return entries.cols(); }
  void validate() const;
  int max_horizon() const;
};

bool satisfies(const ConstraintMatrix& R, const Vector& response);

// Column permutation and signs mapping a draw onto a reference:
// B_aligned.col(j) = signs(j) * B.col(permutation[j]).
struct Alignment {
  std::vector<int> permutation;
  Vector signs;
};

// Maximises sum_j |cos(B.col(perm[j]), Bref.col(j))| over all permutations;
// ties keep the lexicographically first permutation. Signs make each matched
// inner product non-negative.
Alignment find_alignment(const Matrix& B, const Matrix& reference_B);

// Observationally equivalent draw: columns of B permuted and sign-flipped,
// rows of Binv and entries of lambda reordered to match.
StructuralDraw apply_alignment(const StructuralDraw& draw, const Alignment& alignment);

StructuralDraw canonicalize(const StructuralDraw& draw, const Matrix& reference_B);
StructuralDraw canonicalize(const StructuralDraw& draw, const StructuralDraw& reference);

// Aligns every draw against a reference B. Without an explicit reference the
// first draw seeds a pilot pass and the posterior mean of the aligned B is
// used for `passes` further passes.
Chain canonicalize_chain(const Chain& chain, const Matrix* reference_B = nullptr, int passes = 2);

// Flips every column of B whose response of variable `row` is positive (and
// the matching row of Binv). Zero responses are left alone.
StructuralDraw normalize_sign(const StructuralDraw& draw, Eigen::Index row);

// normalize_sign on variable 0 (real GDP growth by convention).
StructuralDraw normalize_gdp_negative(const StructuralDraw& draw);

Chain normalize_chain(const Chain& chain, Eigen::Index row = 0);

// Membership of each shock's responses in Q_1 and Q_2.
struct ShockMembership {
  std::vector<bool> in_q1;
  std::vector<bool> in_q2;
};

ShockMembership membership(const StructuralDraw& draw, const ConstraintMatrix& R1,
                           const ConstraintMatrix& R2);
ShockMembership membership(const StructuralDraw& draw, const Matrix& B,
                           const ConstraintMatrix& R1, const ConstraintMatrix& R2);

// Per-draw event: shock i in Q_1, shock k in Q_2, and no other shock in
// Q_1 or Q_2. Returns the pair or nothing.
std::optional<std::pair<Eigen::Index, Eigen::Index>> matched_pair(const ShockMembership& m);

// Event probabilities indexed (R1 shock, R2 shock); the diagonal is unused.
struct PairProbabilities {
  Matrix prob;
  Eigen::MatrixX<long> count;
  std::size_t draws = 0;

  double std_error(Eigen::Index i, Eigen::Index k) const;
};

// Share of draws in which each ordered pair satisfies the constraints and no
// other shock satisfies either. Expects a canonicalised, sign-normalised chain.
PairProbabilities pair_posterior_probs(const Chain& chain, const ConstraintMatrix& R1,
                                       const ConstraintMatrix& R2);

// The same event under the prior: draw Binv (and a, when horizons beyond
// impact are constrained), invert, normalise the sign of `normalize_row`
// (skipped when negative), count. Draws with singular Binv are discarded.
PairProbabilities pair_prior_probs(const PriorSet& priors, const ConstraintMatrix& R1,
                                   const ConstraintMatrix& R2, std::size_t n_draws, Rng& rng,
                                   Eigen::Index normalize_row = 0);

// Single-shock event: shock i in Q and no other shock in Q.
Vector single_posterior_probs(const Chain& chain, const ConstraintMatrix& R);
Vector single_prior_probs(const PriorSet& priors, const ConstraintMatrix& R, std::size_t n_draws,
                          Rng& rng, Eigen::Index normalize_row = 0);

enum class LabelDecision { Unsupported, Selected, Ambiguous };
std::string_view to_string(LabelDecision d);

inline constexpr double kBayesFactorThreshold = 3.2;

struct LabelingResult {
  Matrix pair_probs;
  Matrix prior_probs;
  Matrix bayes_factors;  // NaN where undefined (zero prior estimate) and on the diagonal
  std::vector<std::pair<Eigen::Index, Eigen::Index>> undefined;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> supported;  // BF > threshold, best first
  LabelDecision decision = LabelDecision::Unsupported;
  std::optional<std::pair<Eigen::Index, Eigen::Index>> selected;
  double top_two_ratio = 0.0;  // posterior odds of the two best supported pairs
  double threshold = kBayesFactorThreshold;
};

// BF(i,k) = posterior share / prior share. Selection: no pair above the
// threshold -> unsupported; one -> selected; several -> the two best are
// compared by the ratio of their posterior probabilities (their prior
// probabilities agree by symmetry) and the best is selected only if that
// ratio exceeds the threshold, otherwise the result is ambiguous.
LabelingResult bayes_factors(const Matrix& pair_probs, const Matrix& prior_probs,
                             double threshold = kBayesFactorThreshold);

}  // namespace svart
