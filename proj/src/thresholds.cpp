#include "pvmerge/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "pvmerge/rng.hpp"
#include "pvmerge/special_functions.hpp"

namespace pvmerge {

namespace sf = special;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void validate_query(const ThresholdQuery& q) {
  if (!(q.epsilon > 0.0 && q.epsilon < 1.0))
    throw std::domain_error("threshold: epsilon must be in (0,1), got " +
                            std::to_string(q.epsilon));
  if (q.K < 1)
    throw std::domain_error("threshold: K must be >= 1, got " +
                            std::to_string(q.K));
}

const char* kVadSupported =
    "bonferroni, simes, cauchy, geometric (r=0), harmonic (r=-1), "
    "negative-quartic (r=-4)";

// per-K multiplier cache; first fill is idempotent so concurrent insertion
// of the same value is harmless
class MultiplierCache {
 public:
  double get(int K, double (*compute)(int)) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = map_.find(K);
      if (it != map_.end()) return it->second;
    }
    const double v = compute(K);
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.emplace(K, v).first->second;
  }

 private:
  std::mutex mutex_;
  std::unordered_map<int, double> map_;
};

double compute_geometric_multiplier(int K) {
  // at the root, c exp((K-1)(1-Kc)) = (1/e)(1-(K-1)c) exp(Kc); the latter
  // form stays exact as c underflows and keeps the multiplier >= 1/e
  const CkRoot root = solve_cK(K);
  return std::exp(-1.0) * (1.0 - (K - 1) * root.c) * std::exp(K * root.c);
}

double compute_harmonic_multiplier(int K) {
  const YkRoot root = solve_yK(K);
  return (root.y + 1.0) * K / ((root.y + K) * (root.y + K));
}

}  // namespace

std::string to_string(ThresholdKind k) {
  switch (k) {
    case ThresholdKind::VAD: return "vad";
    case ThresholdKind::VI: return "vi";
    case ThresholdKind::VC: return "vc";
  }
  return "?";
}

std::string to_string(ThresholdMode m) {
  switch (m) {
    case ThresholdMode::Exact: return "exact";
    case ThresholdMode::SmallEpsAsymptotic: return "small-eps";
    case ThresholdMode::LargeKAsymptotic: return "large-k";
    case ThresholdMode::MinTailAsymptotic: return "min-tail";
    case ThresholdMode::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

// ------------------------------------------------------------- root solvers ---

CkRoot solve_cK(int K) {
  if (K < 3) throw std::domain_error("solve_cK: K must be >= 3, got " +
                                     std::to_string(K));
  // log-space form of  log(1/c - (K-1)) = K - K^2 c, c = exp(L)
  auto psi = [K](double L) {
    const double k2eL = K * static_cast<double>(K) * std::exp(L);
    if (-L > 700.0) return -L - K + k2eL;
    return std::log(std::exp(-L) - (K - 1.0)) - K + k2eL;
  };
  const double lo = -3.0 * K - 10.0;
  const double hi = std::log((1.0 - 1e-4) / K);
  const auto bracket = sf::bracket_sign_change(psi, lo, hi, 512);
  const auto root = sf::find_root(psi, bracket, 0.0);
  CkRoot out;
  out.log_c = root.x;
  out.c = std::exp(root.x);
  out.residual = std::abs(root.f_x) / std::max(1.0, static_cast<double>(K));
  return out;
}

YkRoot solve_yK(int K) {
  if (K < 3) throw std::domain_error("solve_yK: K must be >= 3, got " +
                                     std::to_string(K));
  auto f = [K](double y) {
    return y * y - K * ((y + 1.0) * std::log1p(y) - y);
  };
  double hi = 10.0;
  int guard = 0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("solve_yK: no bracket");
  }
  const sf::RootBracket bracket(1e-8, hi, f(1e-8), f(hi));
  const auto root = sf::find_root(f, bracket, 0.0);
  YkRoot out;
  out.y = root.x;
  out.residual = std::abs(root.f_x) / std::max(1.0, root.x * root.x);
  return out;
}

namespace {

// C^{-1}(1 - t) for t in (0, 1/2), computed without the 1-t round trip
// (t can be far below the double spacing at 1)
double upper_cauchy_quantile(double t) { return 1.0 / std::tan(kPi * t); }

double cauchy_H(double eps, int K, double x) {
  return (K - 1) * upper_cauchy_quantile(eps - (K - 1) * x) +
         upper_cauchy_quantile(x);
}

// int_x^{eps/K} H(t) dt, via the antiderivative of the Cauchy quantile:
// int C^{-1}(p) dp = -(1/pi) log sin(pi p)
double cauchy_intH(double eps, int K, double x) {
  return (std::log(std::sin(kPi * (eps - (K - 1) * x))) -
          std::log(std::sin(kPi * x))) / kPi;
}

}  // namespace

XkRoot solve_xK(double eps, int K) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::domain_error("solve_xK: epsilon must be in (0, 1/2), got " +
                            std::to_string(eps));
  if (K < 2) throw std::domain_error("solve_xK: K must be >= 2");
  if (K == 2) {
    // degenerate: the two quantile levels coincide at x = eps/2 and the
    // mean condition holds exactly at the interval endpoint
    XkRoot out;
    out.x = eps / 2.0;
    out.H_at_root = 2.0 * sf::cauchy_quantile(1.0 - eps / 2.0);
    out.residual = 0.0;
    return out;
  }
  auto g = [eps, K](double x) {
    return K * cauchy_intH(eps, K, x) - (eps - K * x) * cauchy_H(eps, K, x);
  };
  // g > 0 near eps/K, g -> -inf at 0+
  double hi = (eps / K) * (1.0 - 1e-6);
  double lo = hi / 2.0;
  int guard = 0;
  while (g(lo) > 0.0) {
    lo /= 4.0;
    if (++guard > 500)
      throw std::runtime_error("solve_xK: no sign change on (0, " +
                               std::to_string(eps / K) + ")");
  }
  const sf::RootBracket bracket(lo, hi, g(lo), g(hi));
  const auto root = sf::find_root(g, bracket, 0.0);
  XkRoot out;
  out.x = root.x;
  out.H_at_root = cauchy_H(eps, K, root.x);
  const double scale = std::max(
      {1.0, std::abs(K * cauchy_intH(eps, K, root.x)),
       std::abs((eps - K * root.x) * out.H_at_root)});
  out.residual = std::abs(root.f_x) / scale;
  return out;
}

double vad_multiplier_geometric(int K) {
  static MultiplierCache cache;
  return cache.get(K, compute_geometric_multiplier);
}

double vad_multiplier_harmonic(int K) {
  static MultiplierCache cache;
  return cache.get(K, compute_harmonic_multiplier);
}

double vad_multiplier_negative_quartic(int K) {
  return 0.75 * std::pow(static_cast<double>(K), -0.75);
}

// -------------------------------------------------------------------- VAD ---

ThresholdResult vad_threshold(const ThresholdQuery& q) {
  validate_query(q);
  if (q.mode != ThresholdMode::Exact)
    throw std::invalid_argument(
        "vad_threshold: only Exact mode exists (closed/root-based forms); "
        "got mode " + to_string(q.mode));
  const double eps = q.epsilon;
  const int K = q.K;
  ThresholdResult res{0.0, ThresholdMode::Exact, {}};

  if (K == 1) {  // every combiner of a single p-value is the identity
    res.value = eps;
    return res;
  }

  switch (q.method.kind()) {
    case MethodKind::Bonferroni:
      res.value = eps / K;
      return res;
    case MethodKind::Simes:
      res.value = eps / ell(K);
      return res;
    case MethodKind::CauchyCombination: {
      if (!(eps < 0.5))
        throw std::domain_error(
            "vad_threshold: the Cauchy VAD threshold requires epsilon < 1/2, "
            "got " + std::to_string(eps));
      const XkRoot root = solve_xK(eps, K);
      res.value = sf::cauchy_cdf(-root.H_at_root / K);
      res.diagnostics.root_value = root.x;
      res.diagnostics.residual = root.residual;
      return res;
    }
    case MethodKind::GeneralizedMean: {
      const ExtendedReal r = q.method.r();
      if (r.is_finite() && r.value == -4.0) {
        res.value = vad_multiplier_negative_quartic(K) * eps;
        return res;
      }
      if (r.is_finite() && (r.value == 0.0 || r.value == -1.0)) {
        if (K < 3)
          throw std::domain_error(
              "vad_threshold: geometric/harmonic multipliers are defined for "
              "K >= 3, got K = " + std::to_string(K));
        if (r.value == 0.0) {
          const CkRoot root = solve_cK(K);
          res.value = vad_multiplier_geometric(K) * eps;
          res.diagnostics.root_value = root.c;
          res.diagnostics.residual = root.residual;
        } else {
          const YkRoot root = solve_yK(K);
          res.value = vad_multiplier_harmonic(K) * eps;
          res.diagnostics.root_value = root.y;
          res.diagnostics.residual = root.residual;
        }
        return res;
      }
      break;
    }
    case MethodKind::OrderStatistics:
      break;
  }
  throw std::invalid_argument(
      "vad_threshold: not implemented for method " + q.method.name() +
      "; supported: " + std::string(kVadSupported));
}

// --------------------------------------------------------------------- VI ---

namespace {

ThresholdResult vi_monte_carlo(const ThresholdQuery& q) {
  const std::uint64_t n = q.mc.n;
  if (n < 100) throw std::domain_error("vi_threshold: MonteCarlo needs n >= 100");
  std::vector<double> stats(n);
  const int K = q.K;
  unsigned hw = std::thread::hardware_concurrency();
  unsigned T = std::clamp(hw, 1u, 16u);
  std::vector<std::thread> workers;
  auto run = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<double> draw(static_cast<std::size_t>(K));
    std::vector<double> scratch;
    for (std::uint64_t i = begin; i < end; ++i) {
      rng::RandomStream stream(q.mc.seed, rng::kLaneMonteCarloThreshold,
                               static_cast<std::uint32_t>(i));
      for (int j = 0; j < K; ++j) draw[static_cast<std::size_t>(j)] = stream.uniform();
      stats[i] = detail::combine_raw(q.method, draw, scratch);
    }
  };
  const std::uint64_t chunk = (n + T - 1) / T;
  for (unsigned t = 0; t < T; ++t) {
    const std::uint64_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    workers.emplace_back(run, b, e);
  }
  for (auto& w : workers) w.join();

  std::sort(stats.begin(), stats.end());
  const double nn = static_cast<double>(n);
  const auto rank = [&](double x) {
    return std::clamp(x, 1.0, nn);
  };
  const std::size_t k = static_cast<std::size_t>(
      rank(std::ceil(q.epsilon * nn)));
  const double spread = 3.0 * std::sqrt(nn * q.epsilon * (1.0 - q.epsilon));
  const std::size_t k_lo = static_cast<std::size_t>(
      rank(std::floor(q.epsilon * nn - spread)));
  const std::size_t k_hi = static_cast<std::size_t>(
      rank(std::ceil(q.epsilon * nn + spread)));
  ThresholdResult res{stats[k - 1], ThresholdMode::MonteCarlo, {}};
  res.diagnostics.mc_standard_error = (stats[k_hi - 1] - stats[k_lo - 1]) / 6.0;
  return res;
}

}  // namespace

StableTailConstants stable_tail_constants(double r, int K) {
  const double alpha = -1.0 / r;
  StableTailConstants out{0.0, 0.0, alpha};
  const double Kd = K;
  if (alpha > 2.0) {
    out.C = std::sqrt(Kd * (alpha / (alpha - 2.0) -
                            (alpha / (alpha - 1.0)) * (alpha / (alpha - 1.0))));
    out.b = Kd * alpha / (alpha - 1.0);
  } else if (alpha == 2.0) {
    out.C = std::sqrt(Kd * std::log(Kd));
    out.b = Kd * alpha / (alpha - 1.0);
  } else if (std::abs(alpha - 1.0) < 1e-9) {
    out.C = Kd * kPi / 2.0;
    // oscillatory tail; 1e-8 relative is far below the effect of b on the
    // threshold and keeps the panel count moderate
    const double sine_integral = sf::integrate(
        [Kd](double x) {
          return std::sin(2.0 * x / (Kd * kPi)) / (x * x);
        },
        1.0, std::numeric_limits<double>::infinity(), 1e-8);
    out.b = (kPi * Kd * Kd / 2.0) * sine_integral;
  } else {
    // Gamma(1-a) cos(pi a/2) = pi / (2 sin(pi a/2) Gamma(a)), positive on (0,2)
    const double t = kPi / (2.0 * std::sin(kPi * alpha / 2.0) *
                            std::exp(sf::ln_gamma(alpha)));
    out.C = std::pow(Kd * t, 1.0 / alpha);
    out.b = (alpha < 1.0) ? 0.0 : Kd * alpha / (alpha - 1.0);
  }
  return out;
}

namespace {

double stable_vi_quantile(double alpha, double p) {
  if (alpha >= 2.0) return sf::normal_quantile(p);
  return sf::stable_quantile(sf::StableLaw(alpha), p);
}

}  // namespace

ThresholdResult vi_threshold(const ThresholdQuery& q) {
  validate_query(q);
  const double eps = q.epsilon;
  const int K = q.K;

  if (q.mode == ThresholdMode::MonteCarlo) return vi_monte_carlo(q);

  ThresholdResult res{0.0, ThresholdMode::Exact, {}};
  if (K == 1) {
    res.value = eps;
    return res;
  }

  switch (q.method.kind()) {
    case MethodKind::Bonferroni:
      if (q.mode != ThresholdMode::Exact) break;
      res.value = -std::expm1(std::log1p(-eps) / K);
      return res;
    case MethodKind::Simes:
    case MethodKind::CauchyCombination:
      if (q.mode != ThresholdMode::Exact) break;
      res.value = eps;
      return res;
    case MethodKind::GeneralizedMean: {
      const ExtendedReal r = q.method.r();
      if (r.kind == ExtendedReal::Kind::PosInf) {
        if (q.mode != ThresholdMode::Exact) break;
        res.value = std::exp(std::log(eps) / K);
        return res;
      }
      const double rr = r.value;
      if (rr == 0.0) {
        if (q.mode != ThresholdMode::Exact) break;
        res.value = std::exp(-sf::chisq_quantile(1.0 - eps, 2 * K) / (2.0 * K));
        return res;
      }
      if (rr > 0.0) {
        if (q.mode == ThresholdMode::Exact) {
          const double log_bound =
              K * sf::ln_gamma(1.0 + 1.0 / rr) - sf::ln_gamma(1.0 + K / rr);
          if (std::log(eps) > log_bound)
            throw std::domain_error(
                "vi_threshold: closed form for r > 0 is valid only for "
                "epsilon <= Gamma(1+1/r)^K / Gamma(1+K/r) = " +
                std::to_string(std::exp(log_bound)) +
                "; got epsilon = " + std::to_string(eps) +
                " (use LargeKAsymptotic)");
          res.value = std::exp((sf::ln_gamma(1.0 + K / rr) + std::log(eps)) / K -
                               std::log(static_cast<double>(K)) / rr -
                               sf::ln_gamma(1.0 + 1.0 / rr));
          return res;
        }
        if (q.mode == ThresholdMode::LargeKAsymptotic) {
          const double mu = 1.0 / (rr + 1.0);
          const double sigma =
              rr / ((1.0 + rr) * std::sqrt(1.0 + 2.0 * rr));
          const double base = mu + sigma * sf::normal_quantile(eps) / std::sqrt(K);
          if (!(base > 0.0))
            throw std::domain_error(
                "vi_threshold: CLT form has non-positive base for these "
                "parameters");
          res.value = std::pow(base, 1.0 / rr);
          res.mode_used = ThresholdMode::LargeKAsymptotic;
          return res;
        }
        break;
      }
      // r < 0: no closed form
      switch (q.mode) {
        case ThresholdMode::Exact:
          throw std::invalid_argument(
              "vi_threshold: no closed form for r < 0; choose "
              "SmallEpsAsymptotic, LargeKAsymptotic, MinTailAsymptotic or "
              "MonteCarlo");
        case ThresholdMode::SmallEpsAsymptotic:
          res.value = std::pow(static_cast<double>(K), -1.0 - 1.0 / rr) * eps;
          res.mode_used = ThresholdMode::SmallEpsAsymptotic;
          return res;
        case ThresholdMode::MinTailAsymptotic:
          res.value = std::pow(static_cast<double>(K), -1.0 / rr) *
                      (-std::expm1(std::log1p(-eps) / K));
          res.mode_used = ThresholdMode::MinTailAsymptotic;
          return res;
        case ThresholdMode::LargeKAsymptotic: {
          const StableTailConstants c = stable_tail_constants(rr, K);
          const double F = stable_vi_quantile(c.alpha, 1.0 - eps);
          const double base = (c.C * F + c.b) / K;
          if (!(base > 0.0))
            throw std::domain_error(
                "vi_threshold: stable asymptotic has non-positive base");
          res.value = std::exp(std::log(base) / rr);
          res.mode_used = ThresholdMode::LargeKAsymptotic;
          return res;
        }
        case ThresholdMode::MonteCarlo:
          break;  // handled above
      }
      break;
    }
    case MethodKind::OrderStatistics:
      throw std::invalid_argument(
          "vi_threshold: no closed form for general order-statistics weights "
          "(MonteCarlo mode is available)");
  }
  throw std::invalid_argument("vi_threshold: mode " + to_string(q.mode) +
                              " is not available for method " +
                              q.method.name());
}

// --------------------------------------------------------------------- VC ---

ThresholdResult vc_threshold(const ThresholdQuery& q) {
  validate_query(q);
  switch (q.method.kind()) {
    case MethodKind::Bonferroni:
    case MethodKind::Simes:
    case MethodKind::CauchyCombination:
    case MethodKind::GeneralizedMean:
      // the combined value of K identical inputs is that input
      return {q.epsilon, ThresholdMode::Exact, {}};
    case MethodKind::OrderStatistics:
      throw std::invalid_argument(
          "vc_threshold: general order-statistics weights are not in the "
          "supported method set");
  }
  throw std::logic_error("vc_threshold: unknown method");
}

ThresholdResult threshold(const ThresholdQuery& q) {
  switch (q.kind) {
    case ThresholdKind::VAD: return vad_threshold(q);
    case ThresholdKind::VI: return vi_threshold(q);
    case ThresholdKind::VC: return vc_threshold(q);
  }
  throw std::logic_error("threshold: unknown kind");
}

// ------------------------------------------------------------------ prices ---

PriceResult price_for_validity(const MergingMethod& method, double epsilon,
                               int K, DependenceAssumption assumption,
                               ThresholdMode mode, MonteCarloSettings mc) {
  ThresholdQuery num{method,
                     assumption == DependenceAssumption::Independence
                         ? ThresholdKind::VI
                         : ThresholdKind::VC,
                     epsilon, K, mode, mc};
  if (num.kind == ThresholdKind::VC) num.mode = ThresholdMode::Exact;
  ThresholdQuery den{method, ThresholdKind::VAD, epsilon, K,
                     ThresholdMode::Exact, {}};
  const ThresholdResult g = threshold(num);
  const ThresholdResult a = vad_threshold(den);
  return {g.value / a.value, g.mode_used, a.mode_used};
}

// ------------------------------------------------------------------ tables ---

std::vector<MergingMethod> standard_table_methods() {
  return {MergingMethod::bonferroni(),
          MergingMethod::generalized_mean(-4.0),
          MergingMethod::simes(),
          MergingMethod::cauchy(),
          MergingMethod::generalized_mean(-1.0),
          MergingMethod::generalized_mean(0.0)};
}

namespace {

ThresholdMode policy_mode_for(const MergingMethod& m, TableModePolicy policy,
                              double epsilon) {
  // only r < 0 generalized means lack an exact VI form
  if (m.kind() == MethodKind::GeneralizedMean && m.r().is_finite() &&
      m.r().value < 0.0) {
    switch (policy) {
      case TableModePolicy::Default:
        return epsilon <= 1e-4 ? ThresholdMode::SmallEpsAsymptotic
                               : ThresholdMode::MinTailAsymptotic;
      case TableModePolicy::MinTail: return ThresholdMode::MinTailAsymptotic;
      case TableModePolicy::SmallEps: return ThresholdMode::SmallEpsAsymptotic;
      case TableModePolicy::LargeK: return ThresholdMode::LargeKAsymptotic;
      case TableModePolicy::MonteCarlo: return ThresholdMode::MonteCarlo;
    }
  }
  return ThresholdMode::Exact;
}

}  // namespace

PriceTable generate_table(double epsilon, const std::vector<int>& K_list,
                          const std::vector<MergingMethod>& methods,
                          TableModePolicy policy, MonteCarloSettings mc) {
  PriceTable table;
  table.epsilon = epsilon;
  for (const auto& m : methods) {
    for (int K : K_list) {
      PriceCell cell;
      cell.method = m.name();
      cell.K = K;
      cell.epsilon = epsilon;
      try {
        const ThresholdQuery aq{m, ThresholdKind::VAD, epsilon, K,
                                ThresholdMode::Exact, {}};
        const double a = vad_threshold(aq).value;
        const ThresholdQuery bq{m, ThresholdKind::VI, epsilon, K,
                                policy_mode_for(m, policy, epsilon), mc};
        const ThresholdResult b = vi_threshold(bq);
        cell.b_over_a = b.value / a;
        cell.b_mode = b.mode_used;
        if (b.diagnostics.mc_standard_error)
          cell.mc_standard_error = *b.diagnostics.mc_standard_error / a;
        const ThresholdQuery cq{m, ThresholdKind::VC, epsilon, K,
                                ThresholdMode::Exact, {}};
        const ThresholdResult c = vc_threshold(cq);
        cell.c_over_a = c.value / a;
        cell.c_mode = c.mode_used;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

std::string format_sig(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

std::string price_table_csv(const PriceTable& t, int digits) {
  std::string out =
      "method,K,epsilon,b_over_a,b_mode,c_over_a,c_mode,mc_standard_error,error\n";
  for (const auto& c : t.cells) {
    out += c.method + "," + std::to_string(c.K) + "," +
           format_sig(c.epsilon, digits) + ",";
    out += (c.b_over_a ? format_sig(*c.b_over_a, digits) : "") + ",";
    out += (c.b_over_a ? to_string(c.b_mode) : "") + ",";
    out += (c.c_over_a ? format_sig(*c.c_over_a, digits) : "") + ",";
    out += (c.c_over_a ? to_string(c.c_mode) : "") + ",";
    out += (c.mc_standard_error ? format_sig(*c.mc_standard_error, digits) : "");
    out += ",";
    if (!c.error.empty()) {
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out += msg;
    }
    out += "\n";
  }
  return out;
}

std::string price_table_json(const PriceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : t.cells) {
    nlohmann::json row{{"method", c.method},
                       {"K", c.K},
                       {"epsilon", c.epsilon}};
    if (c.b_over_a) {
      row["b_over_a"] = *c.b_over_a;
      row["b_mode"] = to_string(c.b_mode);
    }
    if (c.c_over_a) {
      row["c_over_a"] = *c.c_over_a;
      row["c_mode"] = to_string(c.c_mode);
    }
    if (c.mc_standard_error) row["mc_standard_error"] = *c.mc_standard_error;
    if (!c.error.empty()) row["error"] = c.error;
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"epsilon", t.epsilon}, {"cells", rows}}.dump(2);
}

std::string threshold_rows_csv(const std::vector<ThresholdRow>& rows,
                               int digits) {
  std::string out = "method,K,epsilon,kind,value,mode,root_value,residual,mc_standard_error\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.K) + "," +
           format_sig(r.epsilon, digits) + "," + to_string(r.kind) + "," +
           format_sig(r.result.value, digits) + "," +
           to_string(r.result.mode_used) + ",";
    out += (r.result.diagnostics.root_value
                ? format_sig(*r.result.diagnostics.root_value, digits) : "");
    out += ",";
    out += (r.result.diagnostics.residual
                ? format_sig(*r.result.diagnostics.residual, digits) : "");
    out += ",";
    out += (r.result.diagnostics.mc_standard_error
                ? format_sig(*r.result.diagnostics.mc_standard_error, digits)
                : "");
    out += "\n";
  }
  return out;
}

std::string threshold_rows_json(const std::vector<ThresholdRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"method", r.method},
                       {"K", r.K},
                       {"epsilon", r.epsilon},
                       {"kind", to_string(r.kind)},
                       {"value", r.result.value},
                       {"mode", to_string(r.result.mode_used)}};
    if (r.result.diagnostics.root_value)
      row["root_value"] = *r.result.diagnostics.root_value;
    if (r.result.diagnostics.residual)
      row["residual"] = *r.result.diagnostics.residual;
    if (r.result.diagnostics.mc_standard_error)
      row["mc_standard_error"] = *r.result.diagnostics.mc_standard_error;
    arr.push_back(std::move(row));
  }
  return arr.dump(2);
}

}  // namespace pvmerge
