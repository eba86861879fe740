#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace svart {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A calendar quarter, e.g. 1980Q1.
struct Quarter {
  int year = 0;
  int quarter = 1;  // 1..4

  Quarter next() const { return quarter == 4 ? Quarter{year + 1, 1} : Quarter{year, quarter + 1}; }
  int ordinal() const { return year * 4 + (quarter - 1); }
  std::string str() const;
  friend bool operator==(const Quarter&, const Quarter&) = default;
};

// Accepts "1980Q1", "1980:Q1", "1980-Q1" and ISO first-of-quarter dates
// ("1980-01-01", "1980-04-01", ...). Throws std::invalid_argument otherwise.
Quarter parse_quarter(std::string_view text);

enum class Transform { LogDiff100, Diff, Level };

Transform parse_transform(std::string_view tag);
std::string_view to_string(Transform t);

// One transform tag per variable, in column order.
struct TransformSpec {
  std::vector<Transform> tags;

  bool differences() const;
};

struct TimeSeriesPanel {
  std::vector<Quarter> dates;
  std::vector<std::string> names;
  Matrix values;  // T x N, transformed units

  Eigen::Index periods() const { return values.rows(); }
  Eigen::Index variables() const { return values.cols(); }

  // Throws if dates are not consecutive quarters or dimensions disagree.
  void validate() const;
};

// Applies one transform to a raw series. Difference transforms return
// length T-1.
Vector apply_transform(const Vector& raw, Transform t);

// Inverse of apply_transform given the dropped initial raw observation.
Vector invert_transform(const Vector& transformed, Transform t, double initial_level);

// Raw panel straight from a delimited file, before transforms.
TimeSeriesPanel read_delimited(const std::filesystem::path& path);

// Reads a delimited table (comma or tab, header row, first column dates) and
// applies the per-variable transforms. When any variable is differenced the
// first row is dropped for all variables.
TimeSeriesPanel load_panel(const std::filesystem::path& path, const TransformSpec& spec);
TimeSeriesPanel transform_panel(const TimeSeriesPanel& raw, const TransformSpec& spec);

void write_panel(const std::filesystem::path& path, const TimeSeriesPanel& panel);

// Regression layout for a VAR(p) with intercept.
//
// Row r of X corresponds to observation t = p + r of the panel and holds
//   [1, y_{t-1}(0..N-1), y_{t-2}(0..N-1), ..., y_{t-p}(0..N-1)]
// i.e. the constant first, then one block of N columns per lag.
struct RegressionLayout {
  Matrix Y;  // (T-p) x N
  Matrix X;  // (T-p) x (N p + 1)
  Matrix presample;  // p x N, y_{1-p..0} in chronological order
  int lags = 0;
  std::vector<Quarter> dates;  // dates of the rows of Y

  Eigen::Index observations() const { return Y.rows(); }
  Eigen::Index variables() const { return Y.cols(); }
  Eigen::Index regressors() const { return X.cols(); }
};

// Column of X holding variable `var` at lag `lag` (1-based lag).
inline Eigen::Index lag_column(Eigen::Index n_vars, int lag, Eigen::Index var) {
  return 1 + (lag - 1) * n_vars + var;
}

RegressionLayout build_layout(const TimeSeriesPanel& panel, int lags);

// Layout on the common sample that starts at `first_row` (>= lags). Used for
// lag selection so every candidate is fit on the same observations.
RegressionLayout build_layout(const TimeSeriesPanel& panel, int lags, Eigen::Index first_row);

// Least-squares fit of Y on X. Coefficients are (N p + 1) x N.
struct OlsFit {
  Matrix coefficients;
  Matrix residuals;
};
OlsFit ols(const RegressionLayout& layout);

// AIC per candidate lag (index 0 holds p = 1).
std::vector<double> aic_values(const TimeSeriesPanel& panel, int max_lags);

// 1-based lag of the smallest value; the first (smallest) lag wins ties.
int argmin_lag(const std::vector<double>& aic);

// argmin of AIC = log det(Sigma_p) + 2 (N^2 p + N) / T_eff over p = 1..max_lags,
// on the common sample truncated at max_lags. Ties go to the smaller lag.
int select_lag_aic(const TimeSeriesPanel& panel, int max_lags);

}  // namespace svart
