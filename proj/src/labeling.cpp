#include "svart/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "svart/errors.hpp"

namespace svart {

ConstraintMatrix ConstraintMatrix::from_signs(const std::vector<int>& signs, std::string name) {
  const auto N = static_cast<Eigen::Index>(signs.size());
  std::vector<Eigen::Index> rows;
  for (Eigen::Index j = 0; j < N; ++j)
    if (signs[static_cast<std::size_t>(j)] != 0) rows.push_back(j);
  ConstraintMatrix R;
  R.name = std::move(name);
  R.entries = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), N);
  for (std::size_t r = 0; r < rows.size(); ++r)
    R.entries(static_cast<Eigen::Index>(r), rows[r]) =
        signs[static_cast<std::size_t>(rows[r])] > 0 ? 1.0 : -1.0;
  return R;
}

void ConstraintMatrix::validate() const {
  if (entries.rows() > entries.cols())
    throw SizingError("identification", "constraint matrix has more rows than variables");
  for (Eigen::Index r = 0; r < entries.rows(); ++r) {
    int nonzero = 0;
    for (Eigen::Index c = 0; c < entries.cols(); ++c) {
      const double v = entries(r, c);
      if (v == 0.0) continue;
      if (v != 1.0 && v != -1.0)
        throw ConfigError("constraint entries must be 0, +1 or -1");
      ++nonzero;
    }
    if (nonzero != 1) throw ConfigError("each constraint row needs exactly one nonzero entry");
  }
  if (horizons.empty()) throw ConfigError("constraint '" + name + "' has no horizons");
  for (int h : horizons)
    if (h < 0) throw ConfigError("constraint horizons must be non-negative");
}

int ConstraintMatrix::max_horizon() const {
  return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

bool satisfies(const ConstraintMatrix& R, const Vector& response) {
  if (response.size() != R.variables())
    throw SizingError("identification", "response length differs from constraint width");
  return ((R.entries * response).array() >= 0.0).all();
}

Alignment find_alignment(const Matrix& B, const Matrix& reference_B) {
  const auto N = B.cols();
  if (reference_B.rows() != B.rows() || reference_B.cols() != N)
    throw SizingError("identification", "reference has different dimensions");
  if (N > 9) throw SizingError("identification", "alignment enumerates permutations; N <= 9");

  // cosine similarity between draw column i and reference column j
  Matrix sim(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      const double denom = B.col(i).norm() * reference_B.col(j).norm();
      sim(i, j) = denom > 0.0 ? B.col(i).dot(reference_B.col(j)) / denom : 0.0;
    }

  std::vector<int> perm(static_cast<std::size_t>(N));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) score += std::abs(sim(perm[static_cast<std::size_t>(j)], j));
    if (score > best_score + 1e-12) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Alignment out;
  out.permutation = best;
  out.signs.resize(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const double ip = B.col(best[static_cast<std::size_t>(j)]).dot(reference_B.col(j));
    out.signs(j) = ip < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

StructuralDraw apply_alignment(const StructuralDraw& draw, const Alignment& alignment) {
  StructuralDraw out = draw;
  for (Eigen::Index j = 0; j < draw.variables(); ++j) {
    const int src = alignment.permutation[static_cast<std::size_t>(j)];
    out.Binv.row(j) = alignment.signs(j) * draw.Binv.row(src);
    out.lambda(j) = draw.lambda(src);
  }
  return out;
}

StructuralDraw canonicalize(const StructuralDraw& draw, const Matrix& reference_B) {
  return apply_alignment(draw, find_alignment(draw.impact(), reference_B));
}

StructuralDraw canonicalize(const StructuralDraw& draw, const StructuralDraw& reference) {
  return canonicalize(draw, reference.impact());
}

Chain canonicalize_chain(const Chain& chain, const Matrix* reference_B, int passes) {
  if (chain.empty()) throw Error("identification", "cannot canonicalize an empty chain");
  Matrix reference = reference_B ? *reference_B : chain.draws.front().impact();
  const int total_passes = reference_B ? 1 : 1 + std::max(passes, 0);

  Chain out = chain;
  for (int pass = 0; pass < total_passes; ++pass) {
    Matrix mean_B = Matrix::Zero(reference.rows(), reference.cols());
    for (std::size_t d = 0; d < chain.draws.size(); ++d) {
      out.draws[d] = canonicalize(chain.draws[d], reference);
      mean_B += out.draws[d].impact();
    }
    reference = mean_B / static_cast<double>(chain.draws.size());
  }
  return out;
}

StructuralDraw normalize_sign(const StructuralDraw& draw, Eigen::Index row) {
  const Matrix B = draw.impact();
  if (row < 0 || row >= B.rows()) throw SizingError("identification", "normalization row out of range");
  StructuralDraw out = draw;
  for (Eigen::Index i = 0; i < B.cols(); ++i)
    if (B(row, i) > 0.0) out.Binv.row(i) *= -1.0;
  return out;
}

StructuralDraw normalize_gdp_negative(const StructuralDraw& draw) { return normalize_sign(draw, 0); }

Chain normalize_chain(const Chain& chain, Eigen::Index row) {
  Chain out = chain;
  for (auto& d : out.draws) d = normalize_sign(d, row);
  return out;
}

namespace {

std::vector<bool> in_set(const StructuralDraw& draw, const Matrix& B,
                         const std::vector<Matrix>& psi, const ConstraintMatrix& R) {
  const auto N = B.cols();
  std::vector<bool> out(static_cast<std::size_t>(N), true);
  for (int h : R.horizons) {
    const Matrix theta = h == 0 ? B : Matrix(psi[static_cast<std::size_t>(h)] * B);
    for (Eigen::Index i = 0; i < N; ++i)
      if (out[static_cast<std::size_t>(i)] && !satisfies(R, theta.col(i)))
        out[static_cast<std::size_t>(i)] = false;
  }
  (void)draw;
  return out;
}

PairProbabilities finish(Eigen::MatrixX<long> count, std::size_t draws) {
  PairProbabilities out;
  out.count = std::move(count);
  out.draws = draws;
  out.prob = out.count.cast<double>() / static_cast<double>(draws);
  return out;
}

}  // namespace

ShockMembership membership(const StructuralDraw& draw, const Matrix& B,
                           const ConstraintMatrix& R1, const ConstraintMatrix& R2) {
  const int h = std::max(R1.max_horizon(), R2.max_horizon());
  const std::vector<Matrix> psi = h > 0 ? reduced_form_ma(draw, h) : std::vector<Matrix>{};
  return {in_set(draw, B, psi, R1), in_set(draw, B, psi, R2)};
}

ShockMembership membership(const StructuralDraw& draw, const ConstraintMatrix& R1,
                           const ConstraintMatrix& R2) {
  return membership(draw, draw.impact(), R1, R2);
}

std::optional<std::pair<Eigen::Index, Eigen::Index>> matched_pair(const ShockMembership& m) {
  std::vector<Eigen::Index> in_union;
  for (std::size_t i = 0; i < m.in_q1.size(); ++i)
    if (m.in_q1[i] || m.in_q2[i]) in_union.push_back(static_cast<Eigen::Index>(i));
  if (in_union.size() != 2) return std::nullopt;
  const auto a = in_union[0], b = in_union[1];
  const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
  // (a, b) and (b, a) can both hold only when a response sits exactly on a
  // constraint boundary; the first ordering is reported then.
  if (m.in_q1[ua] && m.in_q2[ub]) return std::make_pair(a, b);
  if (m.in_q1[ub] && m.in_q2[ua]) return std::make_pair(b, a);
  return std::nullopt;
}

double PairProbabilities::std_error(Eigen::Index i, Eigen::Index k) const {
  const double p = prob(i, k);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
}

PairProbabilities pair_posterior_probs(const Chain& chain, const ConstraintMatrix& R1,
                                       const ConstraintMatrix& R2) {
  if (chain.empty()) throw Error("identification", "empty chain");
  const auto N = chain.variables();
  R1.validate();
  R2.validate();
  if (R1.variables() != N || R2.variables() != N)
    throw SizingError("identification", "constraint width differs from the number of variables");
  Eigen::MatrixX<long> count = Eigen::MatrixX<long>::Zero(N, N);
  for (const auto& d : chain.draws)
    if (auto pair = matched_pair(membership(d, R1, R2))) ++count(pair->first, pair->second);
  return finish(std::move(count), chain.draws.size());
}

PairProbabilities pair_prior_probs(const PriorSet& priors, const ConstraintMatrix& R1,
                                   const ConstraintMatrix& R2, std::size_t n_draws, Rng& rng,
                                   Eigen::Index normalize_row) {
  if (n_draws == 0) throw ConfigError("prior Monte Carlo needs at least one draw");
  priors.validate();
  const auto N = priors.variables();
  R1.validate();
  R2.validate();
  if (R1.variables() != N || R2.variables() != N)
    throw SizingError("identification", "constraint width differs from the number of variables");
  const bool dynamic = std::max(R1.max_horizon(), R2.max_horizon()) > 0;

  Eigen::MatrixX<long> count = Eigen::MatrixX<long>::Zero(N, N);
  std::size_t used = 0;
  for (std::size_t n = 0; n < n_draws; ++n) {
    StructuralDraw draw;
    if (dynamic) {
      draw = draw_from_prior(priors, rng);
    } else {
      const Vector b = priors.b_mean + priors.b_sd * standard_normal_vector(rng, N * N);
      draw.a0 = Vector::Zero(N);
      draw.A = {Matrix::Zero(N, N)};
      draw.Binv = Eigen::Map<const Matrix>(b.data(), N, N);
      draw.lambda = Vector::Constant(N, 10.0);
    }
    const Eigen::PartialPivLU<Matrix> lu(draw.Binv);
    if (!(std::abs(lu.determinant()) > 0.0)) continue;
    Matrix B = lu.inverse();
    if (normalize_row >= 0)
      for (Eigen::Index i = 0; i < N; ++i)
        if (B(normalize_row, i) > 0.0) B.col(i) *= -1.0;
    ++used;
    if (auto pair = matched_pair(membership(draw, B, R1, R2))) ++count(pair->first, pair->second);
  }
  return finish(std::move(count), used);
}

Vector single_posterior_probs(const Chain& chain, const ConstraintMatrix& R) {
  if (chain.empty()) throw Error("identification", "empty chain");
  R.validate();
  const auto N = chain.variables();
  Vector count = Vector::Zero(N);
  for (const auto& d : chain.draws) {
    const auto m = membership(d, R, R).in_q1;
    if (std::count(m.begin(), m.end(), true) == 1)
      count(std::find(m.begin(), m.end(), true) - m.begin()) += 1.0;
  }
  return count / static_cast<double>(chain.draws.size());
}

Vector single_prior_probs(const PriorSet& priors, const ConstraintMatrix& R, std::size_t n_draws,
                          Rng& rng, Eigen::Index normalize_row) {
  const auto N = priors.variables();
  Vector count = Vector::Zero(N);
  std::size_t used = 0;
  for (std::size_t n = 0; n < n_draws; ++n) {
    StructuralDraw draw = draw_from_prior(priors, rng);
    const Eigen::PartialPivLU<Matrix> lu(draw.Binv);
    if (!(std::abs(lu.determinant()) > 0.0)) continue;
    Matrix B = lu.inverse();
    if (normalize_row >= 0)
      for (Eigen::Index i = 0; i < N; ++i)
        if (B(normalize_row, i) > 0.0) B.col(i) *= -1.0;
    ++used;
    const auto m = membership(draw, B, R, R).in_q1;
    if (std::count(m.begin(), m.end(), true) == 1)
      count(std::find(m.begin(), m.end(), true) - m.begin()) += 1.0;
  }
  if (used == 0) throw NumericError("identification", "no usable prior draws");
  return count / static_cast<double>(used);
}

std::string_view to_string(LabelDecision d) {
  switch (d) {
    case LabelDecision::Unsupported: return "unsupported";
    case LabelDecision::Selected: return "selected";
    case LabelDecision::Ambiguous: return "ambiguous";
  }
  return "?";
}

LabelingResult bayes_factors(const Matrix& pair_probs, const Matrix& prior_probs,
                             double threshold) {
  const auto N = pair_probs.rows();
  if (pair_probs.cols() != N || prior_probs.rows() != N || prior_probs.cols() != N)
    throw SizingError("identification", "probability tables must be N x N");
  LabelingResult r;
  r.pair_probs = pair_probs;
  r.prior_probs = prior_probs;
  r.threshold = threshold;
  r.bayes_factors = Matrix::Constant(N, N, std::numeric_limits<double>::quiet_NaN());

  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < N; ++k) {
      if (i == k) continue;
      if (prior_probs(i, k) > 0.0)
        r.bayes_factors(i, k) = pair_probs(i, k) / prior_probs(i, k);
      else
        r.undefined.emplace_back(i, k);
    }

  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < N; ++k)
      if (i != k && r.bayes_factors(i, k) > threshold) r.supported.emplace_back(i, k);
  std::stable_sort(r.supported.begin(), r.supported.end(), [&](const auto& x, const auto& y) {
    return r.bayes_factors(x.first, x.second) > r.bayes_factors(y.first, y.second);
  });

  if (r.supported.empty()) {
    r.decision = LabelDecision::Unsupported;
  } else if (r.supported.size() == 1) {
    r.decision = LabelDecision::Selected;
    r.selected = r.supported.front();
  } else {
    const auto& best = r.supported[0];
    const auto& second = r.supported[1];
    r.top_two_ratio = pair_probs(best.first, best.second) / pair_probs(second.first, second.second);
    if (r.top_two_ratio > threshold) {
      r.decision = LabelDecision::Selected;
      r.selected = best;
    } else {
      r.decision = LabelDecision::Ambiguous;
    }
  }
  return r;
}

}  // namespace svart
