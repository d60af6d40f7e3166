#pragma once

// Critical-value (threshold) functions per merging method:
//   VAD — valid under arbitrary dependence of the p-variables,
//   VI  — valid under independence,
//   VC  — valid under comonotonicity,
// plus the root-equation solvers behind the VAD multipliers, prices for
// validity, and a price-table generator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvmerge/combiners.hpp"

namespace pvmerge {

enum class ThresholdKind { VAD, VI, VC };

/// How a threshold is computed.
///  - Exact: closed form or root-based form.
///  - SmallEpsAsymptotic: r<0 VI, leading order as eps -> 0: K^{-1-1/r} eps.
///  - LargeKAsymptotic: r<0 VI via the one-sided stable law
///    ((C_a F_a^{-1}(1-eps) + b_K)/K)^{1/r}; r>0 VI via the CLT form.
///  - MinTailAsymptotic: r<0 VI via the smallest-entry tail,
///    K^{-1/r} (1-(1-eps)^{1/K}); exact as eps -> 0 and the form behind the
///    published reference tables this module reproduces.
///  - MonteCarlo: empirical eps-quantile of the combiner over N independent
///    uniform vectors (fixed seed, standard error reported).
enum class ThresholdMode {
  Exact,
  SmallEpsAsymptotic,
  LargeKAsymptotic,
  MinTailAsymptotic,
  MonteCarlo,
};

std::string to_string(ThresholdKind k);
std::string to_string(ThresholdMode m);

struct MonteCarloSettings {
  std::uint64_t n = 1'000'000;
  std::uint64_t seed = 1;
};

struct ThresholdQuery {
  MergingMethod method;
  ThresholdKind kind;
  double epsilon;
  int K;
  ThresholdMode mode = ThresholdMode::Exact;
  MonteCarloSettings mc{};
};

struct ThresholdDiagnostics {
  std::optional<double> root_value;   // c_K, y_K or x_K where applicable
  std::optional<double> residual;     // back-substitution residual
  std::optional<double> mc_standard_error;
};

struct ThresholdResult {
  double value;
  ThresholdMode mode_used;
  ThresholdDiagnostics diagnostics;
};

ThresholdResult vad_threshold(const ThresholdQuery& q);
ThresholdResult vi_threshold(const ThresholdQuery& q);
ThresholdResult vc_threshold(const ThresholdQuery& q);

/// Dispatch on q.kind.
ThresholdResult threshold(const ThresholdQuery& q);

// ------------------------------------------------------------- root solvers ---

/// Root of log(1/c - (K-1)) = K - K^2 c on (0, 1/K), solved in log space
/// (c_K ~ e^-K underflows long before the derived multiplier does).
struct CkRoot {
  double c;        // may underflow to 0 for K > ~745
  double log_c;    // always finite
  double residual; // log-space equation residual
};
CkRoot solve_cK(int K);          // K >= 3

struct YkRoot {
  double y;
  double residual;
};
YkRoot solve_yK(int K);          // K >= 3

struct XkRoot {
  double x;
  double residual;   // relative to the equation scale
  double H_at_root;
};
XkRoot solve_xK(double epsilon, int K);  // eps in (0, 1/2), K >= 2

/// VAD multipliers a_F(eps) = m * eps for the homogeneous methods
/// (cached per K; concurrent first-fill is idempotent).
double vad_multiplier_geometric(int K);       // c_K exp((K-1)(1-K c_K))
double vad_multiplier_harmonic(int K);        // (y_K+1) K/(y_K+K)^2
double vad_multiplier_negative_quartic(int K);// (3/4) K^(-3/4)

/// Normalizing constants of the one-sided stable approximation behind the
/// r<0 LargeKAsymptotic VI form ((C F_alpha^{-1}(1-eps) + b)/K)^{1/r},
/// alpha = -1/r. The alpha = 1 centering is evaluated by quadrature.
struct StableTailConstants {
  double C;
  double b;
  double alpha;
};
StableTailConstants stable_tail_constants(double r, int K);

// ------------------------------------------------------------------ prices ---

enum class DependenceAssumption { Independence, Comonotonicity };

struct PriceResult {
  double price;                 // g(eps)/a(eps)
  ThresholdMode numerator_mode;
  ThresholdMode denominator_mode;
};

PriceResult price_for_validity(const MergingMethod& method, double epsilon,
                               int K, DependenceAssumption assumption,
                               ThresholdMode mode = ThresholdMode::Exact,
                               MonteCarloSettings mc = {});

// ------------------------------------------------------------------ tables ---

/// Mode policy for table cells: Exact wherever a closed/root form exists;
/// the policy below selects the mode for r<0 VI cells (no closed form).
/// Default = MinTail for epsilon > 1e-4 and SmallEps at epsilon <= 1e-4,
/// the combination that reproduces the published reference tables.
enum class TableModePolicy { Default, MinTail, SmallEps, LargeK, MonteCarlo };

struct PriceCell {
  std::string method;
  int K = 0;
  double epsilon = 0;
  std::optional<double> b_over_a;   // price under independence
  ThresholdMode b_mode = ThresholdMode::Exact;
  std::optional<double> c_over_a;   // price under comonotonicity
  ThresholdMode c_mode = ThresholdMode::Exact;
  std::optional<double> mc_standard_error;
  std::string error;                // non-empty if this cell failed
};

struct PriceTable {
  double epsilon;
  std::vector<PriceCell> cells;
};

/// The six methods the reference tables cover, in display order.
std::vector<MergingMethod> standard_table_methods();

/// Prices b/a and c/a for every (method, K). Per-cell errors are reported in
/// the cell instead of aborting the table.
PriceTable generate_table(double epsilon, const std::vector<int>& K_list,
                          const std::vector<MergingMethod>& methods,
                          TableModePolicy policy = TableModePolicy::Default,
                          MonteCarloSettings mc = {});

/// CSV with columns
/// method,K,epsilon,b_over_a,b_mode,c_over_a,c_mode,mc_standard_error,error
std::string price_table_csv(const PriceTable& t, int significant_digits = 6);
std::string price_table_json(const PriceTable& t);

/// Threshold-value rows (method,K,epsilon,kind,value,mode,diagnostics).
struct ThresholdRow {
  std::string method;
  int K;
  double epsilon;
  ThresholdKind kind;
  ThresholdResult result;
};
std::string threshold_rows_csv(const std::vector<ThresholdRow>& rows,
                               int significant_digits = 6);
std::string threshold_rows_json(const std::vector<ThresholdRow>& rows);

/// Format a double with the given number of significant digits (%.*g).
std::string format_sig(double v, int significant_digits);

}  // namespace pvmerge
