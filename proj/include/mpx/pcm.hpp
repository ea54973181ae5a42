#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mpx/random.hpp"

namespace mpx {

/// Noise law for the simulated devices: multiplicative Gaussian on write
/// (frozen at programming time) and on read (fresh per access), both
/// relative. Conductances clamp into [g_min, g_max] when programmed.
struct PcmDeviceModel {
  double write_noise_sigma = 0.02;
  double read_noise_sigma = 0.01;
  double g_min = 0.0;
  double g_max = 1.0;

  void validate() const;
};

/// A rows x cols crossbar with K replica devices per logical element.
/// Targets are given in [0, 1] and mapped affinely onto the conductance
/// range; programming freezes one write-noise draw per device.
class PcmArray {
 public:
  static PcmArray program(std::span<const double> targets01, int rows, int cols, int replicas,
                          const PcmDeviceModel& model, RandomSource& rng);

  /// y_i = mean over replicas of sum_j g_ijk * (1 + eta) * x_j with fresh
  /// read noise per device per read. Entries of y are rounded to float32 on
  /// the way out.
  std::vector<double> matvec(std::span<const double> x, RandomSource& rng) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int replicas() const { return replicas_; }
  /// Stored (noisy) value of one replica, mapped back to target units.
  double stored(int i, int j, int k) const;

 private:
  PcmArray() = default;
  int rows_ = 0, cols_ = 0, replicas_ = 1;
  PcmDeviceModel model_;
  std::vector<double> conductance_; // rows * cols * replicas
};

struct ScalarExperimentResult {
  std::vector<double> errors; // theta_hat - theta, one per trial
  double mean = 0.0;
  double stddev = 0.0; // sample standard deviation
};

/// The Fig.-style scalar multiplication experiment: per trial draw beta,
/// gamma uniform in [0,1], program a 1x1 array with K replicas with beta,
/// read it with input gamma, record theta_hat - theta. The reference theta
/// passes through the same float32 output rounding as the analog readout so
/// a noise-free run reports exactly zero.
ScalarExperimentResult scalar_experiment(int replicas, int trials, const PcmDeviceModel& model,
                                         RandomSource& rng);

struct SolveCounts {
  long analog_matvecs = 0;
  // float64 work: residual gemvs, norms and vector updates of the outer
  // loop plus the Richardson vector updates
  long digital_flops = 0;
};

struct SolveResult {
  std::vector<double> x;
  int outer_iterations = 0;
  std::vector<double> residual_history; // relative residual after each outer step
  bool converged = false;
  bool stagnated = false;
  SolveCounts counts;
};

/// Hybrid iterative refinement: float64 residuals outside, Richardson
/// iterations running entirely on the noisy analog operator inside.
/// Requires a symmetric positive definite, well-conditioned system
/// (condition estimate < 10^6); negative entries are handled by a
/// differential pair of arrays. Residual history must shrink strictly;
/// otherwise the solve stops and reports stagnation with the best iterate.
SolveResult mixed_precision_solve(const std::vector<double>& a, int n, const std::vector<double>& b,
                                  int replicas, const PcmDeviceModel& model, double tol,
                                  int max_outer, RandomSource& rng, int inner_iterations = 10);

/// The contrast arm: Richardson on the analog operator alone, no digital
/// residual correction. Returns the iterate after `iterations` steps.
std::vector<double> analog_only_solve(const std::vector<double>& a, int n,
                                      const std::vector<double>& b, int replicas,
                                      const PcmDeviceModel& model, int iterations,
                                      RandomSource& rng);

/// Random SPD test matrix with spectrum uniform on [lambda_min, lambda_max]
/// (both endpoints included) and a random orthogonal eigenbasis.
std::vector<double> make_spd_matrix(int n, double lambda_min, double lambda_max, RandomSource& rng);

class Config;

struct PcmRunOutcome {
  bool stagnated = false;
};

/// Config-file front end: mode=scalar emits per-trial `trial,error` rows,
/// mode=solve emits per-outer `outer,relative_residual` rows for a bundled
/// random SPD system. Keys: mode, n, K, trials, write_noise, read_noise,
/// tol, max_outer, inner_iterations, lambda_min, lambda_max, seed.
PcmRunOutcome run_pcm_config(const Config& cfg, std::ostream& os, uint64_t default_seed = 1);

} // namespace mpx
