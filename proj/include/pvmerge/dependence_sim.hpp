#pragma once

// Generators for dependent p-value vectors, the Monte Carlo
// rejection-probability estimator, rho-sweep size/power experiments, and
// empirical independence-comonotonicity balance checks.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pvmerge/combiners.hpp"
#include "pvmerge/rng.hpp"
#include "pvmerge/thresholds.hpp"

namespace pvmerge {

/// One-factor Gaussian model: p_i = Phi(rho Z + sqrt(1-rho^2) Z_i - mu_i)
/// with iid standard normal Z, Z_1..Z_K. rho = 0 gives independent
/// p-variables, rho = 1 comonotone ones; mu_i >= 0 are signal means.
struct OneFactorGaussian {
  double rho;
  std::vector<double> mu;
};

/// Independence-comonotonicity mixture: with probability lambda the vector is
/// K independent uniforms, otherwise K copies of a single uniform.
struct ICMixture {
  double lambda;
  int K;
};

using DependenceModel = std::variant<OneFactorGaussian, ICMixture>;

/// Throws std::domain_error on invalid parameters.
void validate_model(const DependenceModel& model);
int model_dimension(const DependenceModel& model);

/// Draw one p-value vector into `out` (resized to K).
void sample_pvalues_into(const DependenceModel& model, rng::RandomStream& stream,
                         std::vector<double>& out);
PValueVector sample_pvalues(const DependenceModel& model, std::uint64_t seed,
                            std::uint32_t replication = 0);

struct MethodSpec {
  MergingMethod method;
  ThresholdKind kind;
  ThresholdMode mode = ThresholdMode::Exact;
};

struct ExperimentConfig {
  DependenceModel model;
  std::vector<MethodSpec> specs;
  double epsilon = 0.01;
  int N = 15000;
  std::uint64_t master_seed = 1;
  std::uint32_t stream_base = 0;  // offset into the simulation lane
  int threads = 0;                // 0 = hardware concurrency
};

/// Monte Carlo rejection probability with its binomial standard error.
struct RPEstimate {
  double rp;
  double std_error;  // sqrt(rp(1-rp)/N)
  int N;
};

/// One RPEstimate per config.specs entry. All methods are evaluated on the
/// same sampled vectors per replication; the result is deterministic for a
/// fixed master_seed regardless of thread count.
std::vector<RPEstimate> estimate_rp(const ExperimentConfig& config);

enum class SignalCase { NoSignal, Needle, Sparse, Dense };

std::string to_string(SignalCase c);

/// Signal means per case: NoSignal = all 0; Needle = 2% of entries at 4;
/// Sparse = 10% at 3; Dense = all at 2. Throws std::domain_error when the
/// percentages are not integral for K.
std::vector<double> make_signal_vector(SignalCase c, int K);

struct CurveRow {
  SignalCase signal_case;
  int K;
  double epsilon;
  double rho;
  std::string method;
  ThresholdKind kind;
  double rp;
  double std_error;
  int N;
  std::uint64_t seed;
};

struct CurveTable {
  std::vector<CurveRow> rows;
};

/// One RP row per (rho, method, kind).
CurveTable sweep_rho(const std::vector<MethodSpec>& specs, SignalCase c, int K,
                     double epsilon, const std::vector<double>& rho_grid,
                     int N, std::uint64_t master_seed, int threads = 0);

std::string curve_table_csv(const CurveTable& t, int significant_digits = 6);
std::string curve_table_json(const CurveTable& t);

// ---------------------------------------------------------------- KS check ---

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value at the given level.
double ks_critical_value(std::size_t n, std::size_t m, double level);

struct IcBalanceResult {
  double ks_statistic;
  double critical_value;
  double level;
  int N;
  bool balanced;  // ks_statistic <= critical_value
};

/// Samples the combiner under independence and under comonotonicity
/// (N draws each) and compares the two distributions with a two-sample KS
/// test at `level`.
IcBalanceResult ic_balance_check(const MergingMethod& method, int K, int N,
                                 std::uint64_t seed, double level = 0.01);

}  // namespace pvmerge
