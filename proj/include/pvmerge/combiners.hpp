#pragma once

// Combining functions F: [0,1]^K -> [0, inf): generalized means (with the
// extended-real order r as a first-class tagged value), the Cauchy
// combination, and order-statistics combiners including the Simes function.

#include <limits>
#include <string>
#include <vector>

namespace pvmerge {

/// Validated vector of K p-values, each in [0,1]. Immutable after
/// construction; construction throws std::domain_error (naming the offending
/// index) on any out-of-range or non-finite entry, or if empty.
class PValueVector {
 public:
  explicit PValueVector(std::vector<double> values);

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[static_cast<size_t>(i)]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Extended real in [-inf, +inf], used for the generalized-mean order r.
struct ExtendedReal {
  enum class Kind { NegInf, Finite, PosInf };
  Kind kind;
  double value;  // meaningful only when kind == Finite

  static ExtendedReal neg_inf() { return {Kind::NegInf, 0.0}; }
  static ExtendedReal pos_inf() { return {Kind::PosInf, 0.0}; }
  static ExtendedReal finite(double r);

  bool is_finite() const { return kind == Kind::Finite; }
  bool operator==(const ExtendedReal& o) const;
};

enum class MethodKind {
  Bonferroni,        // min(p); canonical form of GeneralizedMean(-inf)
  GeneralizedMean,   // M_r with finite or +inf r
  CauchyCombination,
  OrderStatistics,   // min over i of p_(i)/alpha_i
  Simes,             // canonical form of OrderStatistics with alpha_i = i/K
};

/// Tagged union selecting a combining function and its parameters. Each
/// method has one canonical representation: generalized_mean(-inf) yields
/// Bonferroni, order_statistics with alpha_i = i/K yields Simes. Order-stat
/// weights are lifted to their running maximum (value-preserving) and must
/// have at least one positive entry.
class MergingMethod {
 public:
  static MergingMethod bonferroni();
  static MergingMethod generalized_mean(ExtendedReal r);
  static MergingMethod generalized_mean(double finite_r);
  static MergingMethod cauchy();
  static MergingMethod simes();
  static MergingMethod order_statistics(std::vector<double> alpha);

  MethodKind kind() const { return kind_; }
  ExtendedReal r() const;                   // GeneralizedMean / Bonferroni only
  const std::vector<double>& alpha() const; // OrderStatistics only

  /// Stable display name: "bonferroni", "geometric", "harmonic",
  /// "negative-quartic", "arithmetic", "maximum", "mean(r=…)", "cauchy",
  /// "simes", "order-stat(…)".
  std::string name() const;

  bool operator==(const MergingMethod& o) const;

 private:
  MergingMethod(MethodKind k, ExtendedReal r, std::vector<double> alpha)
      : kind_(k), r_(r), alpha_(std::move(alpha)) {}
  MethodKind kind_;
  ExtendedReal r_;
  std::vector<double> alpha_;
};

/// Generalized mean M_r(p). Limit cases r = -inf, 0, +inf use min, geometric
/// mean and max. r < 0 requires every entry positive (the reciprocal-power
/// sum is accumulated in extended precision after factoring out the minimum,
/// so a single tiny entry cannot overflow).
double combine_mean(ExtendedReal r, const PValueVector& p);

/// Cauchy combination C(mean of C^{-1}(p_i)); every p_i must be in (0,1).
double combine_cauchy(const PValueVector& p);

/// Order-statistics combiner min_i p_(i)/alpha_i with p_(i)/0 = +inf.
/// `alpha` must be canonical (see MergingMethod::order_statistics).
double combine_order_stat(const std::vector<double>& alpha,
                          const PValueVector& p);

/// Evaluate any method.
double combine(const MergingMethod& method, const PValueVector& p);

/// K-th harmonic number, accumulated in extended precision.
double ell(int K);

namespace detail {

// Validation-free evaluation paths for simulation loops. Inputs must already
// be in [0,1]; the Cauchy and r<0 domain checks (no exact 0/1) still apply.
double combine_mean_raw(ExtendedReal r, const std::vector<double>& p);
double combine_cauchy_raw(const std::vector<double>& p);
double combine_order_stat_raw(const std::vector<double>& alpha,
                              const std::vector<double>& p,
                              std::vector<double>& scratch);
double combine_simes_raw(const std::vector<double>& p,
                         std::vector<double>& scratch);
double combine_raw(const MergingMethod& method, const std::vector<double>& p,
                   std::vector<double>& scratch);

}  // namespace detail

}  // namespace pvmerge
