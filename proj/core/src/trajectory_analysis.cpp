#include "spopo/trajectory_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spopo {

using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SectorSums {
  cd s_plus;
  cd s_minus;
  cd sp_plus;
  cd sp_minus;
};

SectorSums project_sectors(const Eigen::VectorXd& rho, const StateVec& x) {
  const int m = static_cast<int>(rho.size());
  SectorSums sums{};
  for (int i = 0; i < m; ++i) {
    sums.s_plus += rho[i] * x[i];
    sums.s_minus += rho[i] * x[m + i];
    sums.sp_plus += rho[i] * x[2 * m + i];
    sums.sp_minus += rho[i] * x[3 * m + i];
  }
  return sums;
}

}  // namespace

double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w = kPi;  // close the interval at +pi
  return w;
}

ThetaEstimate estimate_theta(const Eigen::VectorXd& rho, const StateVec& x) {
  const double rho_norm2 = rho.squaredNorm();
  if (rho_norm2 == 0.0) {
    throw std::domain_error("orientation is undefined for a zero profile");
  }
  const SectorSums sums = project_sectors(rho, x);
  const cd z1 = sums.s_minus * std::conj(sums.s_plus);
  const cd z2 = sums.sp_plus * std::conj(sums.sp_minus);
  const double thr = (1e-6 * rho_norm2) * (1e-6 * rho_norm2);

  ThetaEstimate est;
  cd accum = 0.0;
  for (const cd& z : {z1, z2}) {
    const double mag = std::abs(z);
    if (mag < thr) {
      est.degenerate = true;
    } else {
      accum += z / mag;
    }
  }
  const double mag = std::abs(accum);
  if (mag < 1e-6) est.degenerate = true;
  est.theta = mag > 0.0 ? 0.5 * std::arg(accum) : 0.0;
  return est;
}

UnwrapResult unwrap_phase_series(const Eigen::VectorXd& wrapped) {
  UnwrapResult res;
  res.theta.resize(wrapped.size());
  if (wrapped.size() == 0) return res;
  res.theta[0] = wrapped[0];
  for (Eigen::Index i = 1; i < wrapped.size(); ++i) {
    // The estimate lives modulo pi, so increments are tracked on the
    // doubled angle and halved back.
    const double du = wrap_angle(2.0 * (wrapped[i] - wrapped[i - 1]));
    if (std::abs(du) > kPi / 2.0) ++res.flagged_steps;
    res.theta[i] = res.theta[i - 1] + 0.5 * du;
  }
  return res;
}

DarkQuadratures dark_quadratures(const Eigen::VectorXd& rho, const StateVec& x,
                                 double theta) {
  const double rho_norm = rho.norm();
  if (rho_norm == 0.0) {
    throw std::domain_error("dark quadratures need a nonzero profile");
  }
  const SectorSums sums = project_sectors(rho, x);
  const cd ep = std::exp(cd(0.0, theta));
  const cd em = std::exp(cd(0.0, -theta));
  const cd i_unit(0.0, 1.0);
  const double scale = 1.0 / (std::sqrt(2.0) * rho_norm);
  const cd s_d = i_unit * scale * (ep * sums.s_plus - em * sums.s_minus);
  const cd sp_d = -i_unit * scale * (em * sums.sp_plus - ep * sums.sp_minus);
  DarkQuadratures q;
  q.x = sp_d + s_d;
  q.y = i_unit * (sp_d - s_d);
  return q;
}

Eigen::VectorXcd correlogram(const Eigen::VectorXcd& series, int n_lags) {
  const int n = static_cast<int>(series.size());
  if (n_lags < 0 || n_lags >= n) {
    throw std::invalid_argument("lag count must lie in [0, series size)");
  }
  Eigen::VectorXcd out(n_lags + 1);
  for (int j = 0; j <= n_lags; ++j) {
    cd sum = 0.0;
    for (int t = 0; t + j < n; ++t) sum += series[t] * series[t + j];
    out[j] = sum / static_cast<double>(n - j);
  }
  return out;
}

Eigen::VectorXd spectrum_from_correlogram(const Eigen::VectorXcd& corr,
                                          double dtau,
                                          const Eigen::VectorXd& omegas,
                                          double gamma) {
  const int lags = static_cast<int>(corr.size()) - 1;
  if (lags < 1) {
    throw std::invalid_argument("need at least two correlogram entries");
  }
  if (!(dtau > 0.0)) {
    throw std::invalid_argument("sample spacing must be positive");
  }
  Eigen::VectorXd out(omegas.size());
  for (Eigen::Index k = 0; k < omegas.size(); ++k) {
    cd s = 0.5 * (1.0 + std::cos(0.0)) * corr[0];
    for (int j = 1; j <= lags; ++j) {
      const double w = 0.5 * (1.0 + std::cos(kPi * j / lags));
      s += 2.0 * w * corr[j] * std::cos(omegas[k] * j * dtau);
    }
    out[k] = 1.0 + 2.0 * gamma * (dtau * s).real();
  }
  return out;
}

LineFit weighted_line_fit(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights) {
  if (t.size() != y.size() || t.size() != weights.size() || t.size() < 2) {
    throw std::invalid_argument("line fit needs matching vectors, size >= 2");
  }
  double sw = 0.0, swt = 0.0, swtt = 0.0, swy = 0.0, swty = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double w = weights[i];
    sw += w;
    swt += w * t[i];
    swtt += w * t[i] * t[i];
    swy += w * y[i];
    swty += w * t[i] * y[i];
  }
  const double denom = sw * swtt - swt * swt;
  if (denom == 0.0) {
    throw std::invalid_argument("line fit is degenerate");
  }
  LineFit fit;
  fit.slope = (sw * swty - swt * swy) / denom;
  fit.intercept = (swtt * swy - swt * swty) / denom;
  return fit;
}

PhaseDiffusionAnalysis::PhaseDiffusionAnalysis(Eigen::VectorXd rho,
                                               Eigen::VectorXd save_times,
                                               int n_chunks)
    : rho_(std::move(rho)), save_times_(std::move(save_times)) {
  if (rho_.norm() == 0.0) {
    throw std::invalid_argument("phase diffusion needs a nonzero profile");
  }
  if (save_times_.size() < 2 || n_chunks <= 0) {
    throw std::invalid_argument("need at least two saves and one chunk");
  }
  chunks_.resize(n_chunks);
  for (ChunkPartial& chunk : chunks_) {
    chunk.sum = Eigen::VectorXd::Zero(save_times_.size());
    chunk.sum_sq = Eigen::VectorXd::Zero(save_times_.size());
  }
}

void PhaseDiffusionAnalysis::accumulate(const TrajectoryRecord& record) {
  const int n_saves = static_cast<int>(save_times_.size());
  if (record.escaped || record.valid_saves < n_saves) return;
  ChunkPartial& chunk = chunks_.at(record.chunk_index);

  Eigen::VectorXd wrapped(n_saves);
  for (int j = 0; j < n_saves; ++j) {
    const ThetaEstimate est = estimate_theta(rho_, record.states->col(j));
    if (est.degenerate) ++chunk.degenerate;
    wrapped[j] = est.theta;
  }
  const UnwrapResult unwrapped = unwrap_phase_series(wrapped);
  for (int j = 0; j < n_saves; ++j) {
    const double delta = unwrapped.theta[j] - unwrapped.theta[0];
    chunk.sum[j] += delta;
    chunk.sum_sq[j] += delta * delta;
  }
  chunk.count += 1;
  chunk.flagged += unwrapped.flagged_steps;
  chunk.steps += n_saves - 1;
}

PhaseDiffusionAnalysis::Result PhaseDiffusionAnalysis::finalize(
    double gamma, double fit_t_min) const {
  const int n_saves = static_cast<int>(save_times_.size());
  long n_used = 0, flagged = 0, steps = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_saves);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n_saves);
  for (const ChunkPartial& chunk : chunks_) {
    n_used += chunk.count;
    flagged += chunk.flagged;
    steps += chunk.steps;
    sum += chunk.sum;
    sum_sq += chunk.sum_sq;
  }
  if (n_used < 100) {
    throw std::runtime_error(
        "phase diffusion needs at least 100 surviving trajectories");
  }
  const double flag_rate =
      steps > 0 ? static_cast<double>(flagged) / steps : 0.0;
  if (flag_rate > 0.01) {
    throw std::runtime_error(
        "too many unreliable unwrap steps; reduce the save stride");
  }

  const auto variance_curve = [n_saves](const Eigen::VectorXd& s,
                                        const Eigen::VectorXd& ss, long count) {
    Eigen::VectorXd v(n_saves);
    for (int j = 0; j < n_saves; ++j) {
      const double mean = s[j] / count;
      v[j] = ss[j] / count - mean * mean;
    }
    return v;
  };
  const auto fit_curve = [&](const Eigen::VectorXd& v) {
    std::vector<double> ts, ys, ws;
    for (int j = 0; j < n_saves; ++j) {
      if (save_times_[j] < fit_t_min) continue;
      ts.push_back(save_times_[j]);
      ys.push_back(v[j]);
      ws.push_back(v[j] > 0.0 ? 1.0 / (v[j] * v[j]) : 0.0);
    }
    if (ts.size() < 2) {
      throw std::runtime_error("fit window holds fewer than two save times");
    }
    const Eigen::Map<const Eigen::VectorXd> tv(ts.data(), ts.size());
    const Eigen::Map<const Eigen::VectorXd> yv(ys.data(), ys.size());
    const Eigen::Map<const Eigen::VectorXd> wv(ws.data(), ws.size());
    return weighted_line_fit(tv, yv, wv);
  };

  Result result;
  result.t = save_times_;
  result.variance = variance_curve(sum, sum_sq, n_used);
  const LineFit fit = fit_curve(result.variance);
  result.slope = fit.slope;
  result.intercept = fit.intercept;
  result.predicted_slope = gamma / (4.0 * rho_.squaredNorm());
  result.n_used = static_cast<int>(n_used);
  result.flag_rate = flag_rate;

  // Delete-one-block jackknife over the occupied chunk blocks.
  Eigen::VectorXd block_sum[kJackknifeBlocks];
  Eigen::VectorXd block_sum_sq[kJackknifeBlocks];
  long block_count[kJackknifeBlocks] = {};
  for (int b = 0; b < kJackknifeBlocks; ++b) {
    block_sum[b] = Eigen::VectorXd::Zero(n_saves);
    block_sum_sq[b] = Eigen::VectorXd::Zero(n_saves);
  }
  for (std::size_t c = 0; c < chunks_.size(); ++c) {
    const int b = static_cast<int>(c) % kJackknifeBlocks;
    block_sum[b] += chunks_[c].sum;
    block_sum_sq[b] += chunks_[c].sum_sq;
    block_count[b] += chunks_[c].count;
  }
  std::vector<Eigen::VectorXd> leave_out_var;
  std::vector<double> leave_out_slope;
  for (int b = 0; b < kJackknifeBlocks; ++b) {
    if (block_count[b] == 0) continue;
    const long rest = n_used - block_count[b];
    if (rest <= 0) continue;
    const Eigen::VectorXd v =
        variance_curve(sum - block_sum[b], sum_sq - block_sum_sq[b], rest);
    leave_out_var.push_back(v);
    leave_out_slope.push_back(fit_curve(v).slope);
  }
  const int nb = static_cast<int>(leave_out_var.size());
  result.variance_err = Eigen::VectorXd::Zero(n_saves);
  if (nb >= 2) {
    for (int j = 0; j < n_saves; ++j) {
      double mean = 0.0;
      for (const auto& v : leave_out_var) mean += v[j] / nb;
      double ss = 0.0;
      for (const auto& v : leave_out_var) {
        ss += (v[j] - mean) * (v[j] - mean);
      }
      result.variance_err[j] = std::sqrt(ss * (nb - 1.0) / nb);
    }
    double mean = 0.0;
    for (double s : leave_out_slope) mean += s / nb;
    double ss = 0.0;
    for (double s : leave_out_slope) ss += (s - mean) * (s - mean);
    result.slope_err = std::sqrt(ss * (nb - 1.0) / nb);
  }
  return result;
}

HomodyneAnalysis::HomodyneAnalysis(Eigen::VectorXd rho,
                                   Eigen::VectorXd save_times, int n_chunks,
                                   double gamma, HomodyneOptions options)
    : rho_(std::move(rho)),
      save_times_(std::move(save_times)),
      gamma_(gamma),
      options_(options) {
  if (rho_.norm() == 0.0) {
    throw std::invalid_argument("homodyne analysis needs a nonzero profile");
  }
  if (!(gamma_ > 0.0) || options_.decimate <= 0 || n_chunks <= 0) {
    throw std::invalid_argument("invalid homodyne configuration");
  }
  const int n_saves = static_cast<int>(save_times_.size());
  int first = 0;
  while (first < n_saves &&
         save_times_[first] < options_.transient - 1e-12) {
    ++first;
  }
  for (int i = first; i < n_saves; i += options_.decimate) {
    used_saves_.push_back(i);
  }
  if (used_saves_.size() < 2) {
    throw std::invalid_argument("transient leaves no stationary segment");
  }
  const double span = save_times_[used_saves_.back()] -
                      save_times_[used_saves_.front()];
  if (span * gamma_ < options_.min_segment - 1e-9) {
    throw std::invalid_argument(
        "stationary segment is shorter than the required span");
  }
  dtau_ = save_times_[used_saves_[1]] - save_times_[used_saves_[0]];
  const double window =
      options_.window_time > 0.0 ? options_.window_time : 8.0 / gamma_;
  n_lags_ = static_cast<int>(std::llround(window / dtau_));
  if (n_lags_ < 1 || n_lags_ >= static_cast<int>(used_saves_.size())) {
    throw std::invalid_argument(
        "lag window does not fit the stationary segment");
  }
  chunks_.resize(n_chunks);
  for (ChunkPartial& chunk : chunks_) {
    chunk.corr_sum = Eigen::VectorXcd::Zero(n_lags_ + 1);
  }
}

void HomodyneAnalysis::accumulate(const TrajectoryRecord& record) {
  if (record.escaped ||
      record.valid_saves < static_cast<int>(save_times_.size())) {
    return;
  }
  ChunkPartial& chunk = chunks_.at(record.chunk_index);
  const int n = static_cast<int>(used_saves_.size());

  Eigen::VectorXd wrapped(n);
  for (int k = 0; k < n; ++k) {
    wrapped[k] =
        estimate_theta(rho_, record.states->col(used_saves_[k])).theta;
  }
  const Eigen::VectorXd theta = unwrap_phase_series(wrapped).theta;

  Eigen::VectorXcd series(n);
  for (int k = 0; k < n; ++k) {
    const DarkQuadratures q =
        dark_quadratures(rho_, record.states->col(used_saves_[k]), theta[k]);
    series[k] = options_.channel == QuadratureChannel::dark_y ? q.y : q.x;
  }
  chunk.corr_sum += correlogram(series, n_lags_);

  // Stationarity statistic: difference of the mean squared quadrature
  // between the two segment halves.
  const int h = n / 2;
  double first_half = 0.0, second_half = 0.0;
  for (int k = 0; k < h; ++k) {
    first_half += (series[k] * series[k]).real();
    second_half += (series[n - h + k] * series[n - h + k]).real();
  }
  const double delta = (first_half - second_half) / h;
  chunk.half_diff_sum += delta;
  chunk.half_diff_sq_sum += delta * delta;
  chunk.count += 1;
}

HomodyneAnalysis::Result HomodyneAnalysis::finalize(
    const Eigen::VectorXd& omegas) const {
  long n_used = 0;
  Eigen::VectorXcd total = Eigen::VectorXcd::Zero(n_lags_ + 1);
  cd diff_sum = 0.0;
  double diff_sq_sum = 0.0;
  for (const ChunkPartial& chunk : chunks_) {
    n_used += chunk.count;
    total += chunk.corr_sum;
    diff_sum += chunk.half_diff_sum;
    diff_sq_sum += chunk.half_diff_sq_sum;
  }
  if (n_used < 100) {
    throw std::runtime_error(
        "homodyne analysis needs at least 100 surviving trajectories");
  }
  const double mean_diff = diff_sum.real() / n_used;
  const double var_diff =
      std::max(0.0, diff_sq_sum / n_used - mean_diff * mean_diff);
  const double se = std::sqrt(var_diff / n_used);
  if (std::abs(mean_diff) > 3.0 * se) {
    throw std::runtime_error(
        "segment halves disagree; the series is not stationary");
  }

  const Eigen::VectorXcd mean_corr = total / static_cast<double>(n_used);
  Result result;
  result.omega = omegas;
  result.variance = spectrum_from_correlogram(mean_corr, dtau_, omegas, gamma_);
  result.equal_time = mean_corr[0];
  result.n_used = static_cast<int>(n_used);

  Eigen::VectorXcd block_sum[kJackknifeBlocks];
  long block_count[kJackknifeBlocks] = {};
  for (int b = 0; b < kJackknifeBlocks; ++b) {
    block_sum[b] = Eigen::VectorXcd::Zero(n_lags_ + 1);
  }
  for (std::size_t c = 0; c < chunks_.size(); ++c) {
    const int b = static_cast<int>(c) % kJackknifeBlocks;
    block_sum[b] += chunks_[c].corr_sum;
    block_count[b] += chunks_[c].count;
  }
  std::vector<Eigen::VectorXd> leave_out;
  std::vector<cd> leave_out_equal;
  for (int b = 0; b < kJackknifeBlocks; ++b) {
    if (block_count[b] == 0) continue;
    const long rest = n_used - block_count[b];
    if (rest <= 0) continue;
    const Eigen::VectorXcd corr =
        (total - block_sum[b]) / static_cast<double>(rest);
    leave_out.push_back(spectrum_from_correlogram(corr, dtau_, omegas, gamma_));
    leave_out_equal.push_back(corr[0]);
  }
  const int nb = static_cast<int>(leave_out.size());
  result.variance_err = Eigen::VectorXd::Zero(omegas.size());
  if (nb >= 2) {
    for (Eigen::Index k = 0; k < omegas.size(); ++k) {
      double mean = 0.0;
      for (const auto& v : leave_out) mean += v[k] / nb;
      double ss = 0.0;
      for (const auto& v : leave_out) ss += (v[k] - mean) * (v[k] - mean);
      result.variance_err[k] = std::sqrt(ss * (nb - 1.0) / nb);
    }
    cd mean = 0.0;
    for (const cd& v : leave_out_equal) mean += v / static_cast<double>(nb);
    double ss = 0.0;
    for (const cd& v : leave_out_equal) ss += std::norm(v - mean);
    result.equal_time_err = std::sqrt(ss * (nb - 1.0) / nb);
  }
  return result;
}

}  // namespace spopo
