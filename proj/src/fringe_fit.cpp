#include <tandem/correlator.hpp>

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tandem::corr {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_phase(double p) {
  p = std::fmod(p, kTwoPi);
  if (p > kPi)
    p -= kTwoPi;
  else if (p <= -kPi)
    p += kTwoPi;
  return p;
}

struct LinearFit {
  double a{0.0}, b{0.0}, c{0.0};
  double ssr{std::numeric_limits<double>::infinity()};
  Eigen::Matrix3d cov_unscaled = Eigen::Matrix3d::Zero();
};

// y ~ a + b cos(2 pi f x) + c sin(2 pi f x)
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, double f) {
  const std::size_t n = x.size();
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = kTwoPi * f * x[i];
    A(i, 0) = 1.0;
    A(i, 1) = std::cos(th);
    A(i, 2) = std::sin(th);
    rhs(i) = y[i];
  }
  const Eigen::Matrix3d ata = A.transpose() * A;
  const auto dec = ata.completeOrthogonalDecomposition();
  const Eigen::Vector3d sol = dec.solve(A.transpose() * rhs);
  LinearFit out;
  out.a = sol(0);
  out.b = sol(1);
  out.c = sol(2);
  out.ssr = (A * sol - rhs).squaredNorm();
  out.cov_unscaled = dec.pseudoInverse();
  return out;
}

struct Params {
  double baseline;
  double visibility;
  double freq;
  double phase;
};

double model(const Params &p, double x) {
  return p.baseline * (1.0 + p.visibility * std::cos(kTwoPi * p.freq * x + p.phase));
}

double ssr_of(const Params &p, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - model(p, x[i]);
    s += r * r;
  }
  return s;
}

} // namespace

FringeFit fit_fringe(std::span<const double> x_in, std::span<const double> y, FitMode mode, double period_hint,
                     double fixed_visibility) {
  FringeFit fit;
  fit.mode = mode;
  const std::size_t n = std::min(x_in.size(), y.size());
  fit.n_points = n;
  const bool free_vis = mode == FitMode::Free;
  const std::size_t n_params = free_vis ? 4 : 3;
  if (x_in.size() != y.size())
    fit.notes.push_back("x and y lengths differ; extra points ignored");
  if (n < n_params + 1) {
    fit.notes.push_back(fmt::format("too few points ({}) for a {}-parameter fit", n, n_params));
    if (n > 0)
      fit.baseline = std::accumulate(y.begin(), y.begin() + static_cast<long>(n), 0.0) / static_cast<double>(n);
    fit.period = period_hint;
    fit.visibility = free_vis ? 0.0 : fixed_visibility;
    return fit;
  }

  const double x_mean = std::accumulate(x_in.begin(), x_in.begin() + static_cast<long>(n), 0.0) / n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = x_in[i] - x_mean;
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;
  std::span<const double> ys = y.first(n);

  const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double y_var = 0.0;
  for (double v : ys)
    y_var += (v - y_mean) * (v - y_mean);
  if (!(span > 0.0)) {
    fit.notes.push_back("scan coordinate does not vary; period undetermined");
    fit.baseline = y_mean;
    fit.period = period_hint;
    fit.visibility = free_vis ? 0.0 : fixed_visibility;
    return fit;
  }

  double f_hint = (std::isfinite(period_hint) && period_hint > 0.0) ? 1.0 / period_hint : 0.0;
  if (f_hint == 0.0) {
    fit.notes.push_back("no usable period hint; assuming two periods across the scan");
    f_hint = 2.0 / span;
  }

  if (y_var <= 1e-30 * std::max(1.0, y_mean * y_mean)) {
    fit.notes.push_back("constant data: no modulation, period and phase undetermined (wide confidence)");
    fit.baseline = y_mean;
    fit.visibility = free_vis ? 0.0 : fixed_visibility;
    fit.period = 1.0 / f_hint;
    fit.visibility_stderr = free_vis ? std::numeric_limits<double>::infinity() : 0.0;
    fit.period_stderr = std::numeric_limits<double>::infinity();
    fit.phase_stderr = std::numeric_limits<double>::infinity();
    return fit;
  }

  // Coarse frequency scan around the hint with linear fits at each frequency.
  const double f_lo = 0.5 * f_hint;
  const double f_hi = 2.0 * f_hint;
  const std::size_t steps = std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil(8.0 * (f_hi - f_lo) * span)));
  double best_f = f_hint;
  LinearFit best;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double f = f_lo + (f_hi - f_lo) * static_cast<double>(k) / static_cast<double>(steps);
    LinearFit lf = linear_fit(x, ys, f);
    if (lf.ssr < best.ssr) {
      best = lf;
      best_f = f;
    }
  }

  Params p{best.a, 0.0, best_f, 0.0};
  const double amp = std::hypot(best.b, best.c);
  p.visibility = (best.a != 0.0) ? amp / std::abs(best.a) : 0.0;
  p.phase = std::atan2(-best.c, best.b);
  if (!free_vis)
    p.visibility = fixed_visibility;
  else
    p.visibility = std::clamp(p.visibility, 0.0, 1.0);

  // Levenberg-Marquardt on (baseline, [visibility], freq, phase).
  auto jacobian_row = [&](const Params &q, double xi, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const double th = kTwoPi * q.freq * xi + q.phase;
    const double c = std::cos(th);
    const double s = std::sin(th);
    int col = 0;
    row(col++) = 1.0 + q.visibility * c;
    if (free_vis)
      row(col++) = q.baseline * c;
    row(col++) = -q.baseline * q.visibility * s * kTwoPi * xi;
    row(col++) = -q.baseline * q.visibility * s;
  };
  auto apply_step = [&](const Params &q, const Eigen::VectorXd &d) {
    Params r = q;
    int col = 0;
    r.baseline += d(col++);
    if (free_vis)
      r.visibility += d(col++);
    r.freq += d(col++);
    r.phase += d(col++);
    if (free_vis && r.visibility < 0.0) {
      r.visibility = -r.visibility;
      r.phase += kPi;
    }
    if (free_vis && r.visibility > 1.0)
      r.visibility = 1.0;
    // Outside the scanned band the model trades period for baseline drift.
    r.freq = std::clamp(r.freq, f_lo, f_hi);
    return r;
  };

  const auto np = static_cast<Eigen::Index>(n_params);
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), np);
  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  double ssr = ssr_of(p, x, ys);
  double lambda = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      jacobian_row(p, x[i], J.row(static_cast<Eigen::Index>(i)));
      r(static_cast<Eigen::Index>(i)) = ys[i] - model(p, x[i]);
    }
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd jtr = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < np; ++k)
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::VectorXd d = damped.completeOrthogonalDecomposition().solve(jtr);
      const Params trial = apply_step(p, d);
      const double trial_ssr = ssr_of(trial, x, ys);
      if (trial_ssr <= ssr) {
        const double rel = (ssr - trial_ssr) / std::max(ssr, 1e-300);
        const double step = d.norm();
        p = trial;
        ssr = trial_ssr;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-14 || step < 1e-15 * (1.0 + std::abs(p.baseline) + std::abs(p.freq)))
          converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved)
      converged = true;
  }

  // Covariance from the final Jacobian.
  for (std::size_t i = 0; i < n; ++i)
    jacobian_row(p, x[i], J.row(static_cast<Eigen::Index>(i)));
  const double dof = static_cast<double>(n) - static_cast<double>(n_params);
  const double s2 = ssr / dof;
  const Eigen::MatrixXd cov = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse() * s2;
  int col = 0;
  fit.baseline = p.baseline;
  fit.baseline_stderr = std::sqrt(std::max(cov(col, col), 0.0));
  ++col;
  fit.visibility = p.visibility;
  if (free_vis) {
    fit.visibility_stderr = std::sqrt(std::max(cov(col, col), 0.0));
    ++col;
  }
  fit.period = 1.0 / p.freq;
  fit.period_stderr = std::sqrt(std::max(cov(col, col), 0.0)) / (p.freq * p.freq);
  ++col;
  fit.phase = wrap_phase(p.phase - kTwoPi * p.freq * x_mean);
  fit.phase_stderr = std::sqrt(std::max(cov(col, col), 0.0));
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n)) / std::abs(p.baseline);

  if (span * p.freq < 2.0)
    fit.notes.push_back(fmt::format("data cover only {:.3g} fringe periods (>= 2 recommended)", span * p.freq));
  if (p.freq <= f_lo || p.freq >= f_hi)
    fit.notes.push_back(fmt::format("period reached the search bound [{:.4g}, {:.4g}]", 1.0 / f_hi, 1.0 / f_lo));
  if (free_vis && p.visibility >= 1.0)
    fit.notes.push_back("visibility reached the upper bound 1");
  if (free_vis && p.visibility < 3.0 * fit.visibility_stderr)
    fit.notes.push_back("visibility not significant; period and phase poorly determined");
  return fit;
}

FringeFit fit_fringe(const FringeSeries &points, FitMode mode, double period_hint, double fixed_visibility) {
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto &pt : points) {
    x.push_back(pt.wall_time);
    y.push_back(pt.normalized);
  }
  return fit_fringe(x, y, mode, period_hint, fixed_visibility);
}

FringeFit fit_fringe_fixed_period(std::span<const double> x, std::span<const double> y, double period) {
  FringeFit fit;
  fit.mode = FitMode::Free;
  fit.period = period;
  const std::size_t n = std::min(x.size(), y.size());
  fit.n_points = n;
  if (n < 4 || !(period > 0.0)) {
    fit.notes.push_back("fixed-period fit needs >= 4 points and a positive period");
    return fit;
  }
  const LinearFit lf = linear_fit(x.first(n), y.first(n), 1.0 / period);
  const double s2 = lf.ssr / static_cast<double>(n - 3);
  const Eigen::Matrix3d cov = lf.cov_unscaled * s2;
  const double amp = std::hypot(lf.b, lf.c);
  fit.baseline = lf.a;
  fit.baseline_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.visibility = lf.a != 0.0 ? amp / std::abs(lf.a) : 0.0;
  fit.phase = std::atan2(-lf.c, lf.b);
  // delta method for V = hypot(b, c) / a
  if (amp > 0.0 && lf.a != 0.0) {
    Eigen::Vector3d grad(-amp / (lf.a * lf.a), lf.b / (amp * lf.a), lf.c / (amp * lf.a));
    fit.visibility_stderr = std::sqrt(std::max(grad.dot(cov * grad), 0.0));
  }
  fit.residual_rms = std::sqrt(lf.ssr / static_cast<double>(n)) / std::abs(lf.a);
  return fit;
}

} // namespace tandem::corr
