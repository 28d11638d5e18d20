#pragma once

#include <cstddef>
#include <span>

#include "igt/tensor.hpp"

namespace igt {

struct CalibrationConfig {
  double t_min = 1e-3;
  double t_max = 10.0;
  double tol = 1e-4;     // on |H_bar - H(t)|
  double t_tol = 1e-12;  // bisection stops once the bracket is this narrow
  std::size_t max_iter = 60;

  void validate() const;
};

// Streaming arithmetic mean of per-row attention entropies.
class EntropyTracker {
 public:
  void add(std::span<const double> row_entropies);
  void add(const Tensor& row_entropies) { add(row_entropies.data()); }
  void reset() noexcept { sum_ = 0; count_ = 0; }
  double mean() const;
  std::size_t count() const noexcept { return count_; }

 private:
  double sum_ = 0;
  std::size_t count_ = 0;
};

// Mean per-row entropy of Softmax_t(E) (no autodiff).
double mean_entropy(const Tensor& e, double t);
// Exact derivative dH/dt of mean_entropy: mean over rows of Var_p(e) / t^3.
double mean_entropy_derivative(const Tensor& e, double t);
// The per-row sum sum_i e_i^2 / t^3 p_i (1 - p_i), averaged over rows.
double mean_entropy_derivative_diagonal(const Tensor& e, double t);

struct TemperatureSolution {
  double t = 1.0;
  double gap = 0.0;  // |H_bar - H(t)|
  std::size_t iterations = 0;
  bool converged = false;     // gap <= tol
  bool clamped = false;       // H_bar outside [H(t_min), H(t_max)]
  bool unadjustable = false;  // every row of E is constant
};

// Bisection for H(t) = H_bar using the strict monotonicity of H in t.
TemperatureSolution solve_temperature(const Tensor& e, double h_bar,
                                      const CalibrationConfig& config = {});

}  // namespace igt
