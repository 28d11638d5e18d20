#include "igt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "igt/errors.hpp"

namespace igt {

void CalibrationConfig::validate() const {
  if (!(t_min > 0 && t_min < t_max)) throw ConfigError("calibration needs 0 < t_min < t_max");
  if (!(tol > 0) || !(t_tol > 0)) throw ConfigError("calibration tolerances must be positive");
  if (max_iter == 0) throw ConfigError("calibration needs max_iter >= 1");
}

void EntropyTracker::add(std::span<const double> row_entropies) {
  for (double h : row_entropies) sum_ += h;
  count_ += row_entropies.size();
}

double EntropyTracker::mean() const {
  if (count_ == 0) throw UsageError("no attention entropies recorded");
  return sum_ / static_cast<double>(count_);
}

namespace {

void check_square(const Tensor& e) {
  if (e.rank() != 2 || e.rows() != e.cols() || e.rows() == 0) {
    throw DimensionError("attention logits must be a nonempty square matrix, got " +
                         shape_str(e.shape()));
  }
}

// Tempered probabilities of one row into p; returns the row's entropy.
double row_probs(std::span<const double> row, double t, std::vector<double>& p) {
  const double mx = *std::max_element(row.begin(), row.end());
  double s = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    p[j] = std::exp((row[j] - mx) / t);
    s += p[j];
  }
  double h = 0;
  for (auto& v : p) {
    v /= s;
    if (v > 0) h -= v * std::log(v);
  }
  return h;
}

template <class RowFn>
double mean_over_rows(const Tensor& e, RowFn fn) {
  check_square(e);
  const auto n = e.rows();
  auto data = e.data();
  std::vector<double> p(n);
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += fn(data.subspan(i * n, n), p);
  return acc / static_cast<double>(n);
}

bool all_rows_constant(const Tensor& e) {
  const auto n = e.rows();
  auto data = e.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j < n; ++j) {
      if (data[i * n + j] != data[i * n]) return false;
    }
  }
  return true;
}

}  // namespace

double mean_entropy(const Tensor& e, double t) {
  if (!(t > 0)) throw DomainError("temperature must be positive");
  return mean_over_rows(e, [t](std::span<const double> row, std::vector<double>& p) {
    return row_probs(row, t, p);
  });
}

double mean_entropy_derivative(const Tensor& e, double t) {
  if (!(t > 0)) throw DomainError("temperature must be positive");
  return mean_over_rows(e, [t](std::span<const double> row, std::vector<double>& p) {
    row_probs(row, t, p);
    double m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < row.size(); ++j) m1 += p[j] * row[j];
    for (std::size_t j = 0; j < row.size(); ++j) m2 += p[j] * (row[j] - m1) * (row[j] - m1);
    return m2 / (t * t * t);
  });
}

double mean_entropy_derivative_diagonal(const Tensor& e, double t) {
  if (!(t > 0)) throw DomainError("temperature must be positive");
  return mean_over_rows(e, [t](std::span<const double> row, std::vector<double>& p) {
    row_probs(row, t, p);
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * row[j] * p[j] * (1 - p[j]);
    return s / (t * t * t);
  });
}

TemperatureSolution solve_temperature(const Tensor& e, double h_bar,
                                      const CalibrationConfig& config) {
  config.validate();
  check_square(e);
  TemperatureSolution s;
  if (all_rows_constant(e)) {
    s.t = 1.0;
    s.unadjustable = true;
    s.gap = std::abs(h_bar - mean_entropy(e, 1.0));
    s.converged = s.gap <= config.tol;
    return s;
  }
  const double h_lo = mean_entropy(e, config.t_min);
  const double h_hi = mean_entropy(e, config.t_max);
  if (h_bar <= h_lo || h_bar >= h_hi) {
    s.clamped = true;
    s.t = h_bar <= h_lo ? config.t_min : config.t_max;
    s.gap = std::abs(h_bar - (h_bar <= h_lo ? h_lo : h_hi));
    s.converged = s.gap <= config.tol;
    return s;
  }
  double lo = config.t_min, hi = config.t_max;
  double best_t = 1.0, best_gap = INFINITY;
  while (s.iterations < config.max_iter && hi - lo > config.t_tol) {
    const double mid = 0.5 * (lo + hi);
    const double h = mean_entropy(e, mid);
    ++s.iterations;
    const double gap = std::abs(h - h_bar);
    if (gap < best_gap) {
      best_gap = gap;
      best_t = mid;
    }
    if (h == h_bar) break;
    (h < h_bar ? lo : hi) = mid;
  }
  s.t = best_t;
  s.gap = best_gap;
  s.converged = s.gap <= config.tol;
  return s;
}

}  // namespace igt
