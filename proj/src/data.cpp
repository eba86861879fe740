#include "svart/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "svart/errors.hpp"

namespace svart {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::string Quarter::str() const {
  return std::to_string(year) + "Q" + std::to_string(quarter);
}

Quarter parse_quarter(std::string_view text) {
  text = trim(text);
  Quarter q;
  const auto qpos = text.find_first_of("Qq");
  if (qpos != std::string_view::npos) {
    auto year_part = text.substr(0, qpos);
    while (!year_part.empty() && (year_part.back() == ':' || year_part.back() == '-' ||
                                  year_part.back() == ' '))
      year_part.remove_suffix(1);
    if (!parse_int(year_part, q.year) || !parse_int(text.substr(qpos + 1), q.quarter) ||
        q.quarter < 1 || q.quarter > 4)
      throw std::invalid_argument("bad quarter label '" + std::string(text) + "'");
    return q;
  }
  // ISO first day of a quarter.
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    int month = 0, day = 0;
    if (parse_int(text.substr(0, 4), q.year) && parse_int(text.substr(5, 2), month) &&
        parse_int(text.substr(8, 2), day) && day == 1 && (month - 1) % 3 == 0 && month >= 1 &&
        month <= 10) {
      q.quarter = (month - 1) / 3 + 1;
      return q;
    }
  }
  throw std::invalid_argument("bad date '" + std::string(text) +
                              "' (expected YYYYQn or first-of-quarter YYYY-MM-01)");
}

Transform parse_transform(std::string_view tag) {
  if (tag == "logdiff100" || tag == "log-difference-times-100") return Transform::LogDiff100;
  if (tag == "diff" || tag == "first-difference") return Transform::Diff;
  if (tag == "level") return Transform::Level;
  throw std::invalid_argument("unknown transform '" + std::string(tag) + "'");
}

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::LogDiff100: return "logdiff100";
    case Transform::Diff: return "diff";
    case Transform::Level: return "level";
  }
  return "?";
}

bool TransformSpec::differences() const {
  for (auto t : tags)
    if (t != Transform::Level) return true;
  return false;
}

void TimeSeriesPanel::validate() const {
  if (static_cast<Eigen::Index>(dates.size()) != values.rows())
    throw SizingError("data", "panel has " + std::to_string(dates.size()) + " dates but " +
                                  std::to_string(values.rows()) + " rows");
  if (static_cast<Eigen::Index>(names.size()) != values.cols())
    throw SizingError("data", "panel has " + std::to_string(names.size()) + " names but " +
                                  std::to_string(values.cols()) + " columns");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i] == dates[i - 1].next()))
      throw FrequencyError("non-consecutive quarters: " + dates[i - 1].str() + " followed by " +
                           dates[i].str());
  }
  if (!values.allFinite()) throw DegenerateDataError("data", "panel contains non-finite values");
}

Vector apply_transform(const Vector& raw, Transform t) {
  const auto n = raw.size();
  switch (t) {
    case Transform::Level: return raw;
    case Transform::Diff:
      if (n < 2) return Vector(0);
      return raw.tail(n - 1) - raw.head(n - 1);
    case Transform::LogDiff100: {
      if (n < 2) return Vector(0);
      if ((raw.array() <= 0.0).any())
        throw DegenerateDataError("data", "log-difference of a non-positive series");
      const Vector logs = raw.array().log().matrix();
      return 100.0 * (logs.tail(n - 1) - logs.head(n - 1));
    }
  }
  return raw;
}

Vector invert_transform(const Vector& transformed, Transform t, double initial_level) {
  if (t == Transform::Level) return transformed;
  Vector out(transformed.size() + 1);
  out(0) = initial_level;
  if (t == Transform::Diff) {
    for (Eigen::Index i = 0; i < transformed.size(); ++i) out(i + 1) = out(i) + transformed(i);
  } else {
    double log_level = std::log(initial_level);
    for (Eigen::Index i = 0; i < transformed.size(); ++i) {
      log_level += transformed(i) / 100.0;
      out(i + 1) = std::exp(log_level);
    }
  }
  return out;
}

TimeSeriesPanel read_delimited(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0, 0);

  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty file", 1, 0);
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto head = split(header, delim);
  if (head.size() < 2) throw ParseError("need a date column and at least one series", 1, 0);

  TimeSeriesPanel panel;
  for (std::size_t c = 1; c < head.size(); ++c) panel.names.emplace_back(head[c]);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, delim);
    if (cells.size() != head.size())
      throw ParseError("expected " + std::to_string(head.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no, cells.size());
    try {
      panel.dates.push_back(parse_quarter(cells[0]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no, 1);
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(v))
        throw ParseError("missing or non-numeric value '" + std::string(cell) + "'", line_no,
                         c + 1);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(panel.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  panel.validate();
  return panel;
}

TimeSeriesPanel transform_panel(const TimeSeriesPanel& raw, const TransformSpec& spec) {
  if (static_cast<Eigen::Index>(spec.tags.size()) != raw.variables())
    throw SizingError("data", "transform spec has " + std::to_string(spec.tags.size()) +
                                  " tags for " + std::to_string(raw.variables()) + " variables");
  const Eigen::Index drop = spec.differences() ? 1 : 0;
  const Eigen::Index T = raw.periods() - drop;
  if (T < 1) throw SizingError("data", "too few observations to transform");

  TimeSeriesPanel out;
  out.names = raw.names;
  out.dates.assign(raw.dates.begin() + drop, raw.dates.end());
  out.values.resize(T, raw.variables());
  for (Eigen::Index j = 0; j < raw.variables(); ++j) {
    const Vector col = apply_transform(raw.values.col(j), spec.tags[static_cast<std::size_t>(j)]);
    out.values.col(j) = col.tail(T);
  }
  out.validate();
  return out;
}

TimeSeriesPanel load_panel(const std::filesystem::path& path, const TransformSpec& spec) {
  return transform_panel(read_delimited(path), spec);
}

void write_panel(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
  std::ofstream out(path);
  if (!out) throw Error("data", "cannot write '" + path.string() + "'");
  out << "date";
  for (const auto& n : panel.names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index t = 0; t < panel.periods(); ++t) {
    out << panel.dates[static_cast<std::size_t>(t)].str();
    for (Eigen::Index j = 0; j < panel.variables(); ++j) out << ',' << panel.values(t, j);
    out << '\n';
  }
}

RegressionLayout build_layout(const TimeSeriesPanel& panel, int lags, Eigen::Index first_row) {
  const Eigen::Index T = panel.periods();
  const Eigen::Index N = panel.variables();
  if (lags < 1) throw SizingError("data", "lag count must be at least 1");
  if (first_row < lags) throw SizingError("data", "first row precedes the available lags");
  if (lags > T - N - 1 || T - first_row < 2)
    throw SizingError("data", "sample of " + std::to_string(T) + " periods is too short for " +
                                  std::to_string(lags) + " lags of " + std::to_string(N) +
                                  " variables");

  RegressionLayout layout;
  layout.lags = lags;
  const Eigen::Index rows = T - first_row;
  layout.Y = panel.values.bottomRows(rows);
  layout.X.resize(rows, N * lags + 1);
  layout.X.col(0).setOnes();
  for (int l = 1; l <= lags; ++l)
    layout.X.middleCols(lag_column(N, l, 0), N) = panel.values.middleRows(first_row - l, rows);
  layout.presample = panel.values.middleRows(first_row - lags, lags);
  if (!panel.dates.empty())
    layout.dates.assign(panel.dates.begin() + first_row, panel.dates.end());
  return layout;
}

RegressionLayout build_layout(const TimeSeriesPanel& panel, int lags) {
  return build_layout(panel, lags, lags);
}

OlsFit ols(const RegressionLayout& layout) {
  OlsFit fit;
  fit.coefficients = layout.X.colPivHouseholderQr().solve(layout.Y);
  fit.residuals = layout.Y - layout.X * fit.coefficients;
  return fit;
}

std::vector<double> aic_values(const TimeSeriesPanel& panel, int max_lags) {
  if (max_lags < 1) throw SizingError("data", "maximum lag must be at least 1");
  const auto N = static_cast<double>(panel.variables());
  std::vector<double> out;
  for (int p = 1; p <= max_lags; ++p) {
    const auto layout = build_layout(panel, p, max_lags);
    const auto fit = ols(layout);
    const auto T_eff = static_cast<double>(layout.observations());
    const Matrix sigma = fit.residuals.transpose() * fit.residuals / T_eff;
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw DegenerateDataError("data", "singular residual covariance at p = " + std::to_string(p));
    const Matrix L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    if (!std::isfinite(log_det))
      throw DegenerateDataError("data", "singular residual covariance at p = " + std::to_string(p));
    out.push_back(log_det + 2.0 * (N * N * p + N) / T_eff);
  }
  return out;
}

int argmin_lag(const std::vector<double>& aic) {
  if (aic.empty()) throw SizingError("data", "no candidate lags");
  int best = 1;
  for (int p = 2; p <= static_cast<int>(aic.size()); ++p)
    if (aic[static_cast<std::size_t>(p - 1)] < aic[static_cast<std::size_t>(best - 1)]) best = p;
  return best;
}

int select_lag_aic(const TimeSeriesPanel& panel, int max_lags) {
  return argmin_lag(aic_values(panel, max_lags));
}

}  // namespace svart
