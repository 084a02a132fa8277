#pragma once

// Trajectory ensembles. Work is split into fixed chunks of 64 consecutive
// trajectories; worker threads claim whole chunks, process them in order
// internally and report each trajectory through the visitor. Per-chunk
// reductions merged in chunk order are therefore bitwise independent of
// the thread count. Chunk index modulo kJackknifeBlocks assigns resampling
// blocks for error estimation downstream.

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "spopo/positive_p.hpp"

namespace spopo {

inline constexpr int kChunkSize = 64;
inline constexpr int kJackknifeBlocks = 20;

struct EnsembleSpec {
  Eigen::VectorXd rho;   // classical profile; sets initial state and escape radius
  int n_trajectories = 0;
  double t_max = 0.0;
  double dt = 1e-3;
  int save_stride = 10;  // state recorded every save_stride steps
  std::uint64_t seed = 1;
  Stepper stepper = Stepper::euler_maruyama;
  NoiseMode noise_mode = NoiseMode::reduced;
  double escape_factor = 1e3;  // escape radius = escape_factor * max(1, ||rho||)
  int threads = 0;             // 0: SPOPO_THREADS env var, else hardware count
};

struct TrajectoryRecord {
  int trajectory_index = 0;
  int chunk_index = 0;
  bool escaped = false;
  // Number of saves actually recorded; equal to the full save count unless
  // the trajectory escaped. Columns past valid_saves are zero.
  int valid_saves = 0;
  const Eigen::MatrixXcd* states = nullptr;  // 4M x n_saves, one column per save
};

// Called once per trajectory. Calls for different chunks may come from
// different threads concurrently; calls within a chunk are sequential in
// trajectory order. The pointed-to snapshot matrix is only valid during
// the call.
using TrajectoryVisitor = std::function<void(const TrajectoryRecord&)>;

struct EnsembleSummary {
  int n_trajectories = 0;
  int n_escaped = 0;
  double discard_fraction = 0.0;
  int n_chunks = 0;
  Eigen::VectorXd save_times;
};

// Thread-count resolution used across the tools: a positive request wins,
// otherwise the SPOPO_THREADS environment variable, otherwise the hardware
// concurrency; always at least 1.
int resolve_threads(int requested);

// Save instants implied by a spec: t_j = j * save_stride * dt for every
// step j * save_stride <= round(t_max / dt). Step 0 is always recorded.
// Analyses that consume the visitor stream need this grid up front.
Eigen::VectorXd ensemble_save_times(const EnsembleSpec& spec);

// Initial condition per trajectory: theta0 = 2 pi u with u the first
// uniform draw of its stream, state = classical_state(rho, theta0). Noise
// draws follow within the same stream, so a trajectory's content depends
// only on (seed, index). Escaped trajectories (max-norm beyond the escape
// radius, or non-finite) stop integrating and are flagged; they are kept
// out of every shipped statistic but still visit the callback so dumps can
// record them.
EnsembleSummary run_ensemble(const CombModel& model, const OpoParams& params,
                             const EnsembleSpec& spec,
                             const TrajectoryVisitor& visitor);

}  // namespace spopo
