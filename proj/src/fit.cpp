// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nvsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "nvsim/types.hpp"

namespace nvsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Value and gradient of the model at x.
double evaluate(FitModel model, const std::vector<double>& p, double x, double* grad) {
  switch (model) {
    case FitModel::CosineDecay: {
      const double e = std::exp(-p[2] * x);
      const double arg = kTwoPi * p[3] * x + p[4];
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      if (grad) {
        grad[0] = 1.0;
        grad[1] = e * c;
        grad[2] = -x * p[1] * e * c;
        grad[3] = -p[1] * e * s * kTwoPi * x;
        grad[4] = -p[1] * e * s;
      }
      return p[0] + p[1] * e * c;
    }
    case FitModel::ExponentialDecay: {
      const double e = std::exp(-p[2] * x);
      if (grad) {
        grad[0] = 1.0;
        grad[1] = e;
        grad[2] = -x * p[1] * e;
      }
      return p[0] + p[1] * e;
    }
    case FitModel::ExponentialApproach: {
      const double e = std::exp(-p[2] * x);
      if (grad) {
        grad[0] = 1.0;
        grad[1] = -e;
        grad[2] = x * p[1] * e;
      }
      return p[0] - p[1] * e;
    }
    case FitModel::DoubleSigmoid: {
      const double u1 = (x - p[1]) / p[2];
      const double u2 = -(x - p[4]) / p[5];
      const double s1 = 1.0 / (1.0 + std::exp(u1));
      const double s2 = 1.0 / (1.0 + std::exp(u2));
      if (grad) {
        // d s/du = -s(1-s) for s = 1/(1+e^u)
        const double d1 = -s1 * (1.0 - s1);
        const double d2 = -s2 * (1.0 - s2);
        grad[0] = s1;
        grad[1] = p[0] * d1 * (-1.0 / p[2]);
        grad[2] = p[0] * d1 * (-u1 / p[2]);
        grad[3] = s2;
        grad[4] = p[3] * d2 * (1.0 / p[5]);
        grad[5] = p[3] * d2 * (-u2 / p[5]);
      }
      return p[0] * s1 + p[3] * s2;
    }
  }
  return 0.0;
}

void natural_bounds(FitModel model, std::vector<double>& lo, std::vector<double>& hi) {
  const int n = parameter_count(model);
  lo.assign(n, -kInf);
  hi.assign(n, kInf);
  switch (model) {
    case FitModel::CosineDecay:
      lo[1] = 0.0;
      lo[2] = 0.0;
      lo[3] = 0.0;
      break;
    case FitModel::ExponentialDecay:
    case FitModel::ExponentialApproach:
      lo[2] = 0.0;
      break;
    case FitModel::DoubleSigmoid:
      lo[2] = 1e-6;
      lo[5] = 1e-6;
      break;
  }
}

double sum_squares(FitModel model, const std::vector<double>& p, const std::vector<double>& x,
                   const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = evaluate(model, p, x[i], nullptr) - y[i];
    s += r * r;
  }
  return s;
}

// Least squares for y = a + b g(x) given g values; returns (a, b, ssr).
struct Linear2 {
  double a = 0.0;
  double b = 0.0;
  double ssr = kInf;
};

Linear2 linear_fit(const std::vector<double>& g, const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double sg = 0, sy = 0, sgg = 0, sgy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sg += g[i];
    sy += y[i];
    sgg += g[i] * g[i];
    sgy += g[i] * y[i];
  }
  Linear2 out;
  const double det = n * sgg - sg * sg;
  if (std::abs(det) < 1e-300) {
    out.a = sy / n;
    out.b = 0.0;
  } else {
    out.b = (n * sgy - sg * sy) / det;
    out.a = (sy - out.b * sg) / n;
  }
  out.ssr = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = out.a + out.b * g[i] - y[i];
    out.ssr += r * r;
  }
  return out;
}

double span_of(const std::vector<double>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

// Best rate on a log grid for a + b exp(-k x).
std::pair<double, Linear2> best_rate(const std::vector<double>& x, const std::vector<double>& y) {
  const double span = std::max(span_of(x), 1e-300);
  std::pair<double, Linear2> best{0.0, Linear2{}};
  std::vector<double> g(x.size());
  for (int i = 0; i <= 120; ++i) {
    const double k = 0.01 / span * std::pow(10.0, i / 30.0);  // 0.01/span .. 100/span
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = std::exp(-k * x[j]);
    const Linear2 lf = linear_fit(g, y);
    if (lf.ssr < best.second.ssr) best = {k, lf};
  }
  return best;
}

}  // namespace

std::string_view to_string(FitModel model) {
  switch (model) {
    case FitModel::CosineDecay: return "cosine-with-decay";
    case FitModel::ExponentialDecay: return "exponential-decay";
    case FitModel::ExponentialApproach: return "exponential-approach";
    case FitModel::DoubleSigmoid: return "double-sigmoid";
  }
  return "?";
}

std::vector<std::string> parameter_names(FitModel model) {
  switch (model) {
    case FitModel::CosineDecay: return {"offset", "amplitude", "rate", "frequency", "phase"};
    case FitModel::ExponentialDecay: return {"offset", "amplitude", "rate"};
    case FitModel::ExponentialApproach: return {"plateau", "amplitude", "rate"};
    case FitModel::DoubleSigmoid: return {"m1", "x1", "w1", "m2", "x2", "w2"};
  }
  return {};
}

int parameter_count(FitModel model) { return static_cast<int>(parameter_names(model).size()); }

double model_value(FitModel model, const std::vector<double>& params, double x) {
  if (static_cast<int>(params.size()) != parameter_count(model)) {
    throw Error(ErrorCode::InvalidArgument, "wrong number of fit parameters");
  }
  return evaluate(model, params, x, nullptr);
}

FitSpec guess_spec(FitModel model, const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw Error(ErrorCode::Fit, "fit data must be non-empty with matching x and y");
  }
  FitSpec spec;
  spec.model = model;
  natural_bounds(model, spec.lower, spec.upper);
  switch (model) {
    case FitModel::ExponentialDecay: {
      const auto [k, lf] = best_rate(x, y);
      spec.initial = {lf.a, lf.b, k};
      break;
    }
    case FitModel::ExponentialApproach: {
      const auto [k, lf] = best_rate(x, y);
      spec.initial = {lf.a, -lf.b, k};
      break;
    }
    case FitModel::CosineDecay: {
      // Periodogram peak for the frequency, then a grid over the decay rate
      // with linear least squares for offset and quadratures.
      const double span = std::max(span_of(x), 1e-300);
      double min_dx = span;
      std::vector<double> xs = x;
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] > xs[i - 1]) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);
      }
      double mean = 0.0;
      for (double v : y) mean += v;
      mean /= static_cast<double>(y.size());
      const double f_max = 0.5 / min_dx;
      const double df = 1.0 / (20.0 * span);
      double best_f = df;
      double best_power = -1.0;
      for (double f = df; f <= f_max; f += df) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          re += (y[i] - mean) * std::cos(kTwoPi * f * x[i]);
          im += (y[i] - mean) * std::sin(kTwoPi * f * x[i]);
        }
        const double power = re * re + im * im;
        if (power > best_power) {
          best_power = power;
          best_f = f;
        }
      }
      double best_ssr = kInf;
      std::vector<double> best{mean, 0.0, 0.0, best_f, 0.0};
      const int n = static_cast<int>(x.size());
      for (int i = -1; i <= 80; ++i) {
        const double k = i < 0 ? 0.0 : 0.01 / span * std::pow(10.0, i / 20.0);
        Eigen::MatrixXd a(n, 3);
        Eigen::VectorXd b(n);
        for (int j = 0; j < n; ++j) {
          const double e = std::exp(-k * x[j]);
          a(j, 0) = 1.0;
          a(j, 1) = e * std::cos(kTwoPi * best_f * x[j]);
          a(j, 2) = -e * std::sin(kTwoPi * best_f * x[j]);
          b(j) = y[j];
        }
        const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
        const double ssr = (a * c - b).squaredNorm();
        if (ssr < best_ssr) {
          best_ssr = ssr;
          best = {c(0), std::hypot(c(1), c(2)), k, best_f, std::atan2(c(2), c(1))};
        }
      }
      spec.initial = best;
      break;
    }
    case FitModel::DoubleSigmoid: {
      const double span = std::max(span_of(x), 1e-300);
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], y[i]);
      std::sort(pts.begin(), pts.end());
      const std::size_t n = pts.size();
      std::size_t bottom = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (pts[i].second < pts[bottom].second) bottom = i;
      }
      const double left = pts.front().second, right = pts.back().second, floor = pts[bottom].second;
      // Half-level crossing on [from, to] with the local slope turned into a width.
      auto edge = [&](std::size_t from, std::size_t to, double step, double fallback) {
        const double level = 0.5 * (step + floor);
        for (std::size_t i = from; i < to; ++i) {
          const auto [xa, ya] = pts[i];
          const auto [xb, yb] = pts[i + 1];
          if ((ya - level) * (yb - level) <= 0 && ya != yb && xb > xa) {
            const double slope = std::abs((yb - ya) / (xb - xa));
            const double w = std::max(std::abs(step - floor) / (4.0 * slope), span / 200.0);
            return std::pair<double, double>{xa + (level - ya) / (yb - ya) * (xb - xa), w};
          }
        }
        return std::pair<double, double>{fallback, span / 20.0};
      };
      const auto [x1, w1] = edge(0, bottom, left, pts.front().first + span / 3.0);
      const auto [x2, w2] = edge(bottom, n - 1, right, pts.back().first - span / 3.0);
      spec.initial = {left, x1, w1, right, x2, w2};
      break;
    }
  }
  return spec;
}

FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y, const FitSpec& spec) {
  const int np = parameter_count(spec.model);
  const int n = static_cast<int>(x.size());
  if (x.size() != y.size()) throw Error(ErrorCode::Fit, "fit data x and y differ in length");
  if (n < 2 * np) {
    throw Error(ErrorCode::Fit, "under-determined fit: " + std::to_string(n) + " points for " +
                                    std::to_string(np) + " parameters (need at least 2x)");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorCode::Fit, "non-finite fit data");
  }
  FitSpec s = spec;
  if (s.initial.empty()) s.initial = guess_spec(s.model, x, y).initial;
  std::vector<double> lo = s.lower, hi = s.upper;
  if (lo.empty() || hi.empty()) natural_bounds(s.model, lo, hi);
  if (static_cast<int>(s.initial.size()) != np || static_cast<int>(lo.size()) != np ||
      static_cast<int>(hi.size()) != np) {
    throw Error(ErrorCode::Fit, "fit spec has the wrong number of parameters");
  }
  for (int i = 0; i < np; ++i) {
    if (!(lo[i] <= s.initial[i] && s.initial[i] <= hi[i])) {
      throw Error(ErrorCode::Fit, "initial guess outside bounds for parameter " +
                                      parameter_names(s.model)[i]);
    }
  }

  std::vector<double> p = s.initial;
  auto jacobian = [&](const std::vector<double>& q, Eigen::MatrixXd& jac, Eigen::VectorXd& res) {
    jac.resize(n, np);
    res.resize(n);
    std::vector<double> g(np);
    for (int i = 0; i < n; ++i) {
      res(i) = evaluate(s.model, q, x[i], g.data()) - y[i];
      for (int k = 0; k < np; ++k) jac(i, k) = g[k];
    }
  };

  FitResult out;
  out.model = s.model;
  double cost = sum_squares(s.model, p, x, y);
  double lambda = 1e-3;
  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  int it = 0;
  for (; it < s.max_iterations; ++it) {
    jacobian(p, jac, res);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * res;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-300 || cost == 0.0) {
      out.converged = true;
      break;
    }
    bool improved = false;
    bool tiny_step = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd a = jtj;
      for (int k = 0; k < np; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      std::vector<double> trial = p;
      double step_norm = 0.0, p_norm = 0.0;
      for (int k = 0; k < np; ++k) {
        trial[k] = std::clamp(p[k] + step(k), lo[k], hi[k]);
        step_norm += (trial[k] - p[k]) * (trial[k] - p[k]);
        p_norm += p[k] * p[k];
      }
      const double trial_cost = sum_squares(s.model, trial, x, y);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        tiny_step = std::sqrt(step_norm) <= 1e-14 * (std::sqrt(p_norm) + 1e-14) ||
                    (cost - trial_cost) <= 1e-15 * cost;
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved || tiny_step) {
      out.converged = true;
      break;
    }
  }
  out.iterations = it;
  if (!out.converged) out.message = "no convergence after " + std::to_string(it) + " iterations";

  out.params = p;
  out.residual_sum = cost;
  out.dof = n - np;
  jacobian(p, jac, res);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double s2 = cost / out.dof;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(np, np, kInf);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) cov = s2 * lu.inverse();
  const double t = boost::math::quantile(boost::math::students_t(out.dof), 0.975);
  out.errors.resize(np);
  out.ci_low.resize(np);
  out.ci_high.resize(np);
  for (int k = 0; k < np; ++k) {
    const double var = cov(k, k);
    out.errors[k] = var >= 0 ? std::sqrt(var) : kInf;
    out.ci_low[k] = p[k] - t * out.errors[k];
    out.ci_high[k] = p[k] + t * out.errors[k];
  }
  if (!out.converged) out.message += ", residual " + std::to_string(cost);
  return out;
}

FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y, FitModel model) {
  return fit_curve(x, y, guess_spec(model, x, y));
}

}  // namespace nvsim
