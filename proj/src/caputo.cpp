#include "fractrace/caputo.hpp"

#include <cmath>
#include <sstream>

#include "fractrace/errors.hpp"

namespace fractrace {

std::vector<TimedState> caputo_l1(const std::vector<TimedState>& samples, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParam("L1 scheme needs 0 < alpha < 1");
  if (samples.size() < 2) throw InvalidParam("L1 scheme needs at least two samples");
  const std::size_t n = samples.size() - 1;
  const double h = (samples.back().t - samples.front().t) / static_cast<double>(n);
  if (!(h > 0.0)) throw GridError("sample times must increase");
  if (std::abs(samples.front().t) > 1e-12 * h) throw GridError("sample grid must start at t = 0");
  for (std::size_t j = 0; j <= n; ++j) {
    if (std::abs(samples[j].t - static_cast<double>(j) * h) > 1e-12 * samples.back().t) {
      std::ostringstream msg;
      msg << "sample " << j << " at t = " << samples[j].t << " is off the uniform grid with step "
          << h;
      throw GridError(msg.str());
    }
    if (samples[j].x.size() != samples[0].x.size())
      throw InvalidParam("samples have different state dimensions");
  }

  // b_k = (k+1)^(1-alpha) - k^(1-alpha)
  std::vector<double> b(n);
  for (std::size_t k = 0; k < n; ++k)
    b[k] = std::pow(static_cast<double>(k + 1), 1.0 - alpha) -
           std::pow(static_cast<double>(k), 1.0 - alpha);

  std::vector<Eigen::VectorXd> dx(n);
  for (std::size_t j = 0; j < n; ++j) dx[j] = samples[j + 1].x - samples[j].x;

  const double scale = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
  std::vector<TimedState> out;
  out.reserve(n);
  for (std::size_t m = 1; m <= n; ++m) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(samples[0].x.size());
    for (std::size_t k = 0; k < m; ++k) acc += b[k] * dx[m - 1 - k];
    out.push_back({samples[m].t, scale * acc});
  }
  return out;
}

}  // namespace fractrace
