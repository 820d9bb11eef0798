#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iphs/data/trajectory.hpp"

namespace iphs::baselines {

/// Multivariate ARX with exogenous inputs and a bias:
///
///   y[t+1] = Σ_{l<lags} A_l y[t−l] + Σ_{l<lags} B_l u[t−l] + c
///
/// Coefficients are stored per output as one regressor row
/// [y lags (lag-major), u lags (lag-major), bias].
struct ArxModel {
  std::size_t lags = 12;
  std::size_t n_out = 0;
  std::size_t n_in = 0;
  std::vector<double> coef;  // n_out × regressor_dim(), row-major
  bool rank_deficient = false;

  std::size_t regressor_dim() const noexcept { return lags * (n_out + n_in) + 1; }

  /// Regressor row built from the window ending at time t.
  std::vector<double> regressor(std::span<const std::vector<double>> outputs,
                                std::span<const std::vector<double>> inputs, std::size_t t) const;
  /// One-step prediction from a regressor row.
  std::vector<double> apply(std::span<const double> regressor) const;
};

/// Least-squares fit of the stacked one-step regression over every trajectory
/// (QR with column pivoting on column-scaled regressors). A rank-deficient
/// problem returns the minimum-norm solution and sets `rank_deficient`.
ArxModel arx_fit(std::span<const data::Trajectory> data, std::size_t lags = 12);

/// Sum of squared one-step residuals over the same rows arx_fit regresses on.
double arx_residual(const ArxModel& model, std::span<const data::Trajectory> data);

/// Recursive multistep prediction that feeds its own outputs back.
///
/// `past_outputs` must hold at least `lags` rows ending with the current
/// output y[t]; `past_inputs` holds the inputs before t (at least lags − 1
/// rows, ending with u[t−1]); `future_inputs` supplies u[t], u[t+1], ...
/// Returns steps + 1 rows, the first being y[t].
std::vector<std::vector<double>> arx_predict(const ArxModel& model,
                                             std::span<const std::vector<double>> past_outputs,
                                             std::span<const std::vector<double>> past_inputs,
                                             std::span<const std::vector<double>> future_inputs,
                                             std::size_t steps);

}  // namespace iphs::baselines
