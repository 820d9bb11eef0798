#include "iphs/baselines/arx.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "iphs/error.hpp"

namespace iphs::baselines {

std::vector<double> ArxModel::regressor(std::span<const std::vector<double>> outputs,
                                        std::span<const std::vector<double>> inputs,
                                        std::size_t t) const {
  if (t + 1 < lags) throw Error("ARX regressor needs " + std::to_string(lags) + " past samples");
  std::vector<double> r;
  r.reserve(regressor_dim());
  for (std::size_t l = 0; l < lags; ++l) {
    const auto& y = outputs[t - l];
    if (y.size() != n_out) throw DimensionError("ARX output", n_out, y.size());
    r.insert(r.end(), y.begin(), y.end());
  }
  for (std::size_t l = 0; l < lags; ++l) {
    const auto& u = inputs[t - l];
    if (u.size() != n_in) throw DimensionError("ARX input", n_in, u.size());
    r.insert(r.end(), u.begin(), u.end());
  }
  r.push_back(1.0);
  return r;
}

std::vector<double> ArxModel::apply(std::span<const double> reg) const {
  const std::size_t p = regressor_dim();
  if (reg.size() != p) throw DimensionError("ARX regressor", p, reg.size());
  std::vector<double> y(n_out, 0.0);
  for (std::size_t d = 0; d < n_out; ++d)
    for (std::size_t j = 0; j < p; ++j) y[d] += coef[d * p + j] * reg[j];
  return y;
}

ArxModel arx_fit(std::span<const data::Trajectory> data, std::size_t lags) {
  if (lags == 0) throw Error("arx_fit: lags must be positive");
  if (data.empty()) throw Error("arx_fit: no trajectories");
  ArxModel model;
  model.lags = lags;
  model.n_out = data.front().state_dim();
  model.n_in = data.front().input_dim();
  const std::size_t p = model.regressor_dim();

  std::size_t rows = 0;
  for (const auto& t : data) {
    if (t.steps() < lags) throw Error("arx_fit: trajectory shorter than the lag count");
    rows += t.steps() - (lags - 1);
  }
  Eigen::MatrixXd x(rows, p);
  Eigen::MatrixXd y(rows, model.n_out);
  std::size_t r = 0;
  for (const auto& traj : data) {
    for (std::size_t t = lags - 1; t < traj.steps(); ++t, ++r) {
      const auto reg = model.regressor(traj.states, traj.inputs, t);
      for (std::size_t j = 0; j < p; ++j) x(r, j) = reg[j];
      for (std::size_t d = 0; d < model.n_out; ++d) y(r, d) = traj.states[t + 1][d];
    }
  }

  // Column scaling only conditions the problem; the solution is mapped back below.
  Eigen::VectorXd scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double rms = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(rows));
    scale(j) = rms > 0.0 ? rms : 1.0;
    x.col(j) /= scale(j);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  model.rank_deficient = cod.rank() < static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd b = cod.solve(y);

  model.coef.assign(model.n_out * p, 0.0);
  for (std::size_t d = 0; d < model.n_out; ++d)
    for (std::size_t j = 0; j < p; ++j) model.coef[d * p + j] = b(j, d) / scale(j);
  return model;
}

double arx_residual(const ArxModel& model, std::span<const data::Trajectory> data) {
  double acc = 0.0;
  for (const auto& traj : data) {
    for (std::size_t t = model.lags - 1; t < traj.steps(); ++t) {
      const auto yhat = model.apply(model.regressor(traj.states, traj.inputs, t));
      for (std::size_t d = 0; d < model.n_out; ++d) {
        const double e = traj.states[t + 1][d] - yhat[d];
        acc += e * e;
      }
    }
  }
  return acc;
}

std::vector<std::vector<double>> arx_predict(const ArxModel& model,
                                             std::span<const std::vector<double>> past_outputs,
                                             std::span<const std::vector<double>> past_inputs,
                                             std::span<const std::vector<double>> future_inputs,
                                             std::size_t steps) {
  const std::size_t lags = model.lags;
  if (past_outputs.size() < lags) throw DimensionError("ARX output history", lags, past_outputs.size());
  if (past_inputs.size() < lags - 1) throw DimensionError("ARX input history", lags - 1, past_inputs.size());
  if (future_inputs.size() < steps) throw DimensionError("ARX future inputs", steps, future_inputs.size());

  std::vector<std::vector<double>> ys(past_outputs.end() - static_cast<std::ptrdiff_t>(lags),
                                      past_outputs.end());
  std::vector<std::vector<double>> us(past_inputs.end() - static_cast<std::ptrdiff_t>(lags - 1),
                                      past_inputs.end());
  us.insert(us.end(), future_inputs.begin(), future_inputs.begin() + static_cast<std::ptrdiff_t>(steps));

  std::vector<std::vector<double>> out{ys.back()};
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = lags - 1 + s;
    ys.push_back(model.apply(model.regressor(ys, us, t)));
    out.push_back(ys.back());
  }
  return out;
}

}  // namespace iphs::baselines
