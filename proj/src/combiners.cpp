#include "pvmerge/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pvmerge/special_functions.hpp"

namespace pvmerge {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PValueVector::PValueVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty())
    throw std::domain_error("PValueVector: need at least one p-value");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::domain_error("PValueVector: value " + std::to_string(v) +
                              " at index " + std::to_string(i) +
                              " is outside [0,1]");
  }
}

ExtendedReal ExtendedReal::finite(double r) {
  if (!std::isfinite(r))
    throw std::domain_error("ExtendedReal::finite: non-finite r");
  return {Kind::Finite, r};
}

bool ExtendedReal::operator==(const ExtendedReal& o) const {
  if (kind != o.kind) return false;
  return kind != Kind::Finite || value == o.value;
}

MergingMethod MergingMethod::bonferroni() {
  return MergingMethod(MethodKind::Bonferroni, ExtendedReal::neg_inf(), {});
}

MergingMethod MergingMethod::generalized_mean(ExtendedReal r) {
  if (r.kind == ExtendedReal::Kind::NegInf) return bonferroni();
  return MergingMethod(MethodKind::GeneralizedMean, r, {});
}

MergingMethod MergingMethod::generalized_mean(double finite_r) {
  return generalized_mean(ExtendedReal::finite(finite_r));
}

MergingMethod MergingMethod::cauchy() {
  return MergingMethod(MethodKind::CauchyCombination, ExtendedReal::neg_inf(),
                       {});
}

MergingMethod MergingMethod::simes() {
  return MergingMethod(MethodKind::Simes, ExtendedReal::neg_inf(), {});
}

MergingMethod MergingMethod::order_statistics(std::vector<double> alpha) {
  if (alpha.empty())
    throw std::domain_error("order_statistics: empty weight vector");
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (!std::isfinite(alpha[i]) || alpha[i] < 0.0)
      throw std::domain_error("order_statistics: weight at index " +
                              std::to_string(i) + " must be >= 0");
  // lifting each weight to the running maximum never changes the combiner
  double run = 0.0;
  for (double& a : alpha) run = a = std::max(run, a);
  if (run == 0.0)
    throw std::domain_error("order_statistics: all weights are zero");
  const int K = static_cast<int>(alpha.size());
  bool is_simes = true;
  for (int i = 0; i < K; ++i)
    if (alpha[static_cast<size_t>(i)] != static_cast<double>(i + 1) / K) {
      is_simes = false;
      break;
    }
  if (is_simes) return simes();
  return MergingMethod(MethodKind::OrderStatistics, ExtendedReal::neg_inf(),
                       std::move(alpha));
}

ExtendedReal MergingMethod::r() const {
  if (kind_ == MethodKind::Bonferroni) return ExtendedReal::neg_inf();
  if (kind_ != MethodKind::GeneralizedMean)
    throw std::logic_error("MergingMethod::r: not a generalized mean");
  return r_;
}

const std::vector<double>& MergingMethod::alpha() const {
  if (kind_ != MethodKind::OrderStatistics)
    throw std::logic_error(
        "MergingMethod::alpha: not an order-statistics method");
  return alpha_;
}

std::string MergingMethod::name() const {
  switch (kind_) {
    case MethodKind::Bonferroni: return "bonferroni";
    case MethodKind::CauchyCombination: return "cauchy";
    case MethodKind::Simes: return "simes";
    case MethodKind::OrderStatistics: {
      std::string s = "order-stat(";
      for (std::size_t i = 0; i < alpha_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(alpha_[i]);
      }
      return s + ")";
    }
    case MethodKind::GeneralizedMean:
      if (r_.kind == ExtendedReal::Kind::PosInf) return "maximum";
      if (r_.value == -4.0) return "negative-quartic";
      if (r_.value == -1.0) return "harmonic";
      if (r_.value == 0.0) return "geometric";
      if (r_.value == 1.0) return "arithmetic";
      return "mean(r=" + std::to_string(r_.value) + ")";
  }
  return "?";
}

bool MergingMethod::operator==(const MergingMethod& o) const {
  return kind_ == o.kind_ && r_ == o.r_ && alpha_ == o.alpha_;
}

namespace detail {

double combine_mean_raw(ExtendedReal r, const std::vector<double>& v) {
  const int K = static_cast<int>(v.size());
  if (r.kind == ExtendedReal::Kind::NegInf)
    return *std::min_element(v.begin(), v.end());
  if (r.kind == ExtendedReal::Kind::PosInf)
    return *std::max_element(v.begin(), v.end());
  const double rr = r.value;
  if (rr == 0.0) {
    long double acc = 0.0L;
    for (double x : v) {
      if (x == 0.0) return 0.0;
      acc += std::log(static_cast<long double>(x));
    }
    return static_cast<double>(std::exp(acc / K));
  }
  if (rr > 0.0) {
    long double acc = 0.0L;
    for (double x : v) acc += std::pow(static_cast<long double>(x), rr);
    return static_cast<double>(std::pow(acc / K, 1.0L / rr));
  }
  // r < 0: factor out the minimum so reciprocal powers cannot overflow
  double m = kInf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0)
      throw std::domain_error("combine_mean: p-value of 0 at index " +
                              std::to_string(i) +
                              " is outside the domain for r = " +
                              std::to_string(rr));
    m = std::min(m, v[i]);
  }
  const long double log_m = std::log(static_cast<long double>(m));
  long double acc = 0.0L;
  for (double x : v)
    acc += std::exp(static_cast<long double>(rr) *
                    (std::log(static_cast<long double>(x)) - log_m));
  return static_cast<double>(m * std::exp(std::log(acc / K) / rr));
}

double combine_cauchy_raw(const std::vector<double>& v) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (x <= 0.0 || x >= 1.0)
      throw std::domain_error("combine_cauchy: p-value " + std::to_string(x) +
                              " at index " + std::to_string(i) +
                              " is outside (0,1)");
    acc += special::cauchy_quantile(x);
  }
  return special::cauchy_cdf(
      static_cast<double>(acc / static_cast<long double>(v.size())));
}

double combine_order_stat_raw(const std::vector<double>& alpha,
                              const std::vector<double>& v,
                              std::vector<double>& scratch) {
  const std::size_t K = v.size();
  if (alpha.size() != K)
    throw std::domain_error("combine_order_stat: weight length " +
                            std::to_string(alpha.size()) +
                            " does not match K = " + std::to_string(K));
  scratch = v;
  std::stable_sort(scratch.begin(), scratch.end());
  double best = kInf;
  for (std::size_t i = 0; i < K; ++i)
    if (alpha[i] > 0.0) best = std::min(best, scratch[i] / alpha[i]);
  return best;
}

double combine_simes_raw(const std::vector<double>& v,
                         std::vector<double>& scratch) {
  const std::size_t K = v.size();
  scratch = v;
  std::stable_sort(scratch.begin(), scratch.end());
  double best = kInf;
  for (std::size_t i = 0; i < K; ++i)
    best = std::min(best, scratch[i] * static_cast<double>(K) /
                              static_cast<double>(i + 1));
  return best;
}

double combine_raw(const MergingMethod& method, const std::vector<double>& v,
                   std::vector<double>& scratch) {
  switch (method.kind()) {
    case MethodKind::Bonferroni:
      return combine_mean_raw(ExtendedReal::neg_inf(), v);
    case MethodKind::GeneralizedMean:
      return combine_mean_raw(method.r(), v);
    case MethodKind::CauchyCombination:
      return combine_cauchy_raw(v);
    case MethodKind::Simes:
      return combine_simes_raw(v, scratch);
    case MethodKind::OrderStatistics:
      return combine_order_stat_raw(method.alpha(), v, scratch);
  }
  throw std::logic_error("combine_raw: unknown method");
}

}  // namespace detail

double combine_mean(ExtendedReal r, const PValueVector& p) {
  return detail::combine_mean_raw(r, p.values());
}

double combine_cauchy(const PValueVector& p) {
  return detail::combine_cauchy_raw(p.values());
}

double combine_order_stat(const std::vector<double>& alpha,
                          const PValueVector& p) {
  std::vector<double> scratch;
  return detail::combine_order_stat_raw(alpha, p.values(), scratch);
}

double combine(const MergingMethod& method, const PValueVector& p) {
  std::vector<double> scratch;
  return detail::combine_raw(method, p.values(), scratch);
}

double ell(int K) {
  if (K < 1) throw std::domain_error("ell: K must be >= 1");
  long double acc = 0.0L;
  for (int k = 1; k <= K; ++k) acc += 1.0L / k;
  return static_cast<double>(acc);
}

}  // namespace pvmerge
