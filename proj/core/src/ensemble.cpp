#include "spopo/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spopo/rng.hpp"

namespace spopo {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPOPO_THREADS")) {
    try {
      const int parsed = std::stoi(env);
      if (parsed > 0) return parsed;
    } catch (const std::exception&) {
      // fall through to the hardware count
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Eigen::VectorXd ensemble_save_times(const EnsembleSpec& spec) {
  if (!(spec.dt > 0.0) || !(spec.t_max > 0.0) || spec.save_stride <= 0) {
    throw std::invalid_argument("ensemble needs positive dt, t_max and stride");
  }
  const long long n_steps = std::llround(spec.t_max / spec.dt);
  const long long n_saves = n_steps / spec.save_stride + 1;
  Eigen::VectorXd times(n_saves);
  for (long long j = 0; j < n_saves; ++j) {
    times[j] = static_cast<double>(j) * spec.save_stride * spec.dt;
  }
  return times;
}

EnsembleSummary run_ensemble(const CombModel& model, const OpoParams& params,
                             const EnsembleSpec& spec,
                             const TrajectoryVisitor& visitor) {
  validate(params);
  const int m = model.modes();
  if (spec.rho.size() != m) {
    throw std::invalid_argument("rho size does not match the comb");
  }
  if (spec.n_trajectories <= 0) {
    throw std::invalid_argument("need a positive trajectory count");
  }
  const Eigen::VectorXd save_times = ensemble_save_times(spec);
  const long long n_steps = std::llround(spec.t_max / spec.dt);
  const int n_saves = static_cast<int>(save_times.size());
  const int n_chunks =
      (spec.n_trajectories + kChunkSize - 1) / kChunkSize;
  const double escape_radius =
      spec.escape_factor * std::max(1.0, spec.rho.norm());
  const int n_noise = noise_dimension(m, spec.noise_mode);
  const double sqrt_dt = std::sqrt(spec.dt);

  std::atomic<int> next_chunk{0};
  std::atomic<int> n_escaped{0};

  auto worker = [&]() {
    std::vector<double> dw(n_noise);
    Eigen::MatrixXcd states(4 * m, n_saves);
    for (;;) {
      const int chunk = next_chunk.fetch_add(1);
      if (chunk >= n_chunks) return;
      const int begin = chunk * kChunkSize;
      const int end =
          std::min(begin + kChunkSize, spec.n_trajectories);
      for (int traj = begin; traj < end; ++traj) {
        StreamRng rng(spec.seed, static_cast<std::uint64_t>(traj));
        const double theta0 =
            2.0 * 3.14159265358979323846 * rng.next_uniform();
        StateVec x = classical_state(spec.rho, theta0);
        states.setZero();
        states.col(0) = x;
        int valid_saves = 1;
        bool escaped = false;
        for (long long step_idx = 1; step_idx <= n_steps; ++step_idx) {
          for (int k = 0; k < n_noise; k += 2) {
            const auto [g1, g2] = rng.next_gaussian_pair();
            dw[k] = g1 * sqrt_dt;
            dw[k + 1] = g2 * sqrt_dt;
          }
          step(model, params, x, spec.dt, dw, spec.stepper, spec.noise_mode);
          if (x.cwiseAbs().maxCoeff() > escape_radius || !x.allFinite()) {
            escaped = true;
            break;
          }
          if (step_idx % spec.save_stride == 0) {
            states.col(static_cast<int>(step_idx / spec.save_stride)) = x;
            ++valid_saves;
          }
        }
        if (escaped) n_escaped.fetch_add(1);
        if (visitor) {
          TrajectoryRecord record;
          record.trajectory_index = traj;
          record.chunk_index = chunk;
          record.escaped = escaped;
          record.valid_saves = valid_saves;
          record.states = &states;
          visitor(record);
        }
      }
    }
  };

  const int n_threads =
      std::min(resolve_threads(spec.threads), n_chunks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  EnsembleSummary summary;
  summary.n_trajectories = spec.n_trajectories;
  summary.n_escaped = n_escaped.load();
  summary.discard_fraction =
      static_cast<double>(summary.n_escaped) / spec.n_trajectories;
  summary.n_chunks = n_chunks;
  summary.save_times = save_times;
  return summary;
}

}  // namespace spopo
