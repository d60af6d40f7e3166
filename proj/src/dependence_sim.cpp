#include "pvmerge/dependence_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pvmerge/special_functions.hpp"

namespace pvmerge {

namespace sf = special;

void validate_model(const DependenceModel& model) {
  if (const auto* g = std::get_if<OneFactorGaussian>(&model)) {
    if (!(g->rho >= 0.0 && g->rho <= 1.0))
      throw std::domain_error("OneFactorGaussian: rho must be in [0,1], got " +
                              std::to_string(g->rho));
    if (g->mu.empty())
      throw std::domain_error("OneFactorGaussian: mu must have length K >= 1");
    for (double m : g->mu)
      if (!(m >= 0.0) || !std::isfinite(m))
        throw std::domain_error("OneFactorGaussian: signal means must be >= 0");
    return;
  }
  const auto& mix = std::get<ICMixture>(model);
  if (!(mix.lambda >= 0.0 && mix.lambda <= 1.0))
    throw std::domain_error("ICMixture: lambda must be in [0,1], got " +
                            std::to_string(mix.lambda));
  if (mix.K < 1) throw std::domain_error("ICMixture: K must be >= 1");
}

int model_dimension(const DependenceModel& model) {
  if (const auto* g = std::get_if<OneFactorGaussian>(&model))
    return static_cast<int>(g->mu.size());
  return std::get<ICMixture>(model).K;
}

void sample_pvalues_into(const DependenceModel& model,
                         rng::RandomStream& stream, std::vector<double>& out) {
  if (const auto* g = std::get_if<OneFactorGaussian>(&model)) {
    const int K = static_cast<int>(g->mu.size());
    out.resize(static_cast<std::size_t>(K));
    const double rho = g->rho;
    const double idio = std::sqrt(1.0 - rho * rho);
    const double z = stream.normal();
    for (int i = 0; i < K; ++i) {
      const double x = rho * z + idio * stream.normal() -
                       g->mu[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = sf::normal_cdf(x);
    }
    return;
  }
  const auto& mix = std::get<ICMixture>(model);
  out.resize(static_cast<std::size_t>(mix.K));
  const double pick = stream.uniform();
  if (pick < mix.lambda) {
    for (auto& v : out) v = stream.uniform();
  } else {
    const double u = stream.uniform();
    for (auto& v : out) v = u;
  }
}

PValueVector sample_pvalues(const DependenceModel& model, std::uint64_t seed,
                            std::uint32_t replication) {
  validate_model(model);
  rng::RandomStream stream(seed, rng::kLaneSimulation, replication);
  std::vector<double> buf;
  sample_pvalues_into(model, stream, buf);
  return PValueVector(std::move(buf));
}

std::vector<RPEstimate> estimate_rp(const ExperimentConfig& config) {
  validate_model(config.model);
  if (config.N < 1) throw std::domain_error("estimate_rp: N must be >= 1");
  if (config.specs.empty())
    throw std::domain_error("estimate_rp: no method specs");
  const int K = model_dimension(config.model);

  // resolve one critical value per spec, and one combiner slot per distinct
  // method so shared draws are combined exactly once per replication
  const std::size_t S = config.specs.size();
  std::vector<double> critical(S);
  std::vector<std::size_t> slot_of(S);
  std::vector<MergingMethod> unique_methods;
  for (std::size_t s = 0; s < S; ++s) {
    const auto& spec = config.specs[s];
    const ThresholdQuery q{spec.method, spec.kind, config.epsilon, K,
                           spec.mode, {}};
    critical[s] = threshold(q).value;
    auto it = std::find(unique_methods.begin(), unique_methods.end(),
                        spec.method);
    if (it == unique_methods.end()) {
      slot_of[s] = unique_methods.size();
      unique_methods.push_back(spec.method);
    } else {
      slot_of[s] = static_cast<std::size_t>(it - unique_methods.begin());
    }
  }

  unsigned T = config.threads > 0
                   ? static_cast<unsigned>(config.threads)
                   : std::clamp(std::thread::hardware_concurrency(), 1u, 16u);
  const int N = config.N;
  std::vector<std::vector<std::int64_t>> counts(
      T, std::vector<std::int64_t>(S, 0));
  std::vector<std::string> worker_errors(T);

  auto run = [&](unsigned t, int begin, int end) {
    std::vector<double> draw;
    std::vector<double> scratch;
    std::vector<double> combined(unique_methods.size());
    for (int i = begin; i < end; ++i) {
      rng::RandomStream stream(
          config.master_seed, rng::kLaneSimulation,
          config.stream_base + static_cast<std::uint32_t>(i));
      sample_pvalues_into(config.model, stream, draw);
      for (std::size_t m = 0; m < unique_methods.size(); ++m) {
        try {
          combined[m] = detail::combine_raw(unique_methods[m], draw, scratch);
        } catch (const std::exception& e) {
          worker_errors[t] = "replication " + std::to_string(i) + ", method " +
                             unique_methods[m].name() + ": " + e.what();
          return;
        }
      }
      for (std::size_t s = 0; s < S; ++s)
        if (combined[slot_of[s]] < critical[s]) ++counts[t][s];
    }
  };

  std::vector<std::thread> workers;
  const int chunk = (N + static_cast<int>(T) - 1) / static_cast<int>(T);
  for (unsigned t = 0; t < T; ++t) {
    const int b = static_cast<int>(t) * chunk;
    const int e = std::min(N, b + chunk);
    if (b >= e) break;
    workers.emplace_back(run, t, b, e);
  }
  for (auto& w : workers) w.join();
  for (const auto& err : worker_errors)
    if (!err.empty())
      throw std::runtime_error("estimate_rp: combiner rejected a sampled vector at " + err);

  std::vector<RPEstimate> out(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::int64_t total = 0;
    for (unsigned t = 0; t < T; ++t) total += counts[t][s];
    const double rp = static_cast<double>(total) / N;
    out[s] = {rp, std::sqrt(rp * (1.0 - rp) / N), N};
  }
  return out;
}

std::string to_string(SignalCase c) {
  switch (c) {
    case SignalCase::NoSignal: return "no-signal";
    case SignalCase::Needle: return "needle";
    case SignalCase::Sparse: return "sparse";
    case SignalCase::Dense: return "dense";
  }
  return "?";
}

std::vector<double> make_signal_vector(SignalCase c, int K) {
  if (K < 1) throw std::domain_error("make_signal_vector: K must be >= 1");
  std::vector<double> mu(static_cast<std::size_t>(K), 0.0);
  auto signal_count = [K](int percent) {
    if ((K * percent) % 100 != 0)
      throw std::domain_error(
          "make_signal_vector: " + std::to_string(percent) + "% of K = " +
          std::to_string(K) + " is not an integer signal count");
    return K * percent / 100;
  };
  switch (c) {
    case SignalCase::NoSignal:
      break;
    case SignalCase::Needle: {
      const int m = signal_count(2);
      std::fill_n(mu.begin(), m, 4.0);
      break;
    }
    case SignalCase::Sparse: {
      const int m = signal_count(10);
      std::fill_n(mu.begin(), m, 3.0);
      break;
    }
    case SignalCase::Dense:
      std::fill(mu.begin(), mu.end(), 2.0);
      break;
  }
  return mu;
}

CurveTable sweep_rho(const std::vector<MethodSpec>& specs, SignalCase c, int K,
                     double epsilon, const std::vector<double>& rho_grid,
                     int N, std::uint64_t master_seed, int threads) {
  if (rho_grid.empty()) throw std::domain_error("sweep_rho: empty rho grid");
  const std::vector<double> mu = make_signal_vector(c, K);
  CurveTable table;
  for (std::size_t gi = 0; gi < rho_grid.size(); ++gi) {
    ExperimentConfig config{OneFactorGaussian{rho_grid[gi], mu},
                            specs,
                            epsilon,
                            N,
                            master_seed,
                            static_cast<std::uint32_t>(gi) *
                                static_cast<std::uint32_t>(N),
                            threads};
    const auto estimates = estimate_rp(config);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      table.rows.push_back(CurveRow{c, K, epsilon, rho_grid[gi],
                                    specs[s].method.name(), specs[s].kind,
                                    estimates[s].rp, estimates[s].std_error, N,
                                    master_seed});
    }
  }
  return table;
}

std::string curve_table_csv(const CurveTable& t, int digits) {
  std::string out =
      "case,K,epsilon,rho,method,threshold_kind,rp,std_error,N,seed\n";
  for (const auto& r : t.rows) {
    out += to_string(r.signal_case) + "," + std::to_string(r.K) + "," +
           format_sig(r.epsilon, digits) + "," + format_sig(r.rho, digits) +
           "," + r.method + "," + to_string(r.kind) + "," +
           format_sig(r.rp, digits) + "," + format_sig(r.std_error, digits) +
           "," + std::to_string(r.N) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string curve_table_json(const CurveTable& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : t.rows) {
    arr.push_back({{"case", to_string(r.signal_case)},
                   {"K", r.K},
                   {"epsilon", r.epsilon},
                   {"rho", r.rho},
                   {"method", r.method},
                   {"threshold_kind", to_string(r.kind)},
                   {"rp", r.rp},
                   {"std_error", r.std_error},
                   {"N", r.N},
                   {"seed", r.seed}});
  }
  return arr.dump(2);
}

// ---------------------------------------------------------------- KS check ---

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::domain_error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("ks_critical_value: level must be in (0,1)");
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

IcBalanceResult ic_balance_check(const MergingMethod& method, int K, int N,
                                 std::uint64_t seed, double level) {
  if (K < 1 || N < 1) throw std::domain_error("ic_balance_check: K, N >= 1");
  std::vector<double> independent(static_cast<std::size_t>(N));
  std::vector<double> comonotone(static_cast<std::size_t>(N));
  std::vector<double> draw(static_cast<std::size_t>(K));
  std::vector<double> scratch;
  for (int i = 0; i < N; ++i) {
    rng::RandomStream s_ind(seed, rng::kLaneIcIndependent,
                            static_cast<std::uint32_t>(i));
    for (auto& v : draw) v = s_ind.uniform();
    independent[static_cast<std::size_t>(i)] =
        detail::combine_raw(method, draw, scratch);
    rng::RandomStream s_com(seed, rng::kLaneIcComonotone,
                            static_cast<std::uint32_t>(i));
    const double u = s_com.uniform();
    std::fill(draw.begin(), draw.end(), u);
    comonotone[static_cast<std::size_t>(i)] =
        detail::combine_raw(method, draw, scratch);
  }
  IcBalanceResult res;
  res.ks_statistic = ks_two_sample(std::move(independent), std::move(comonotone));
  res.critical_value = ks_critical_value(static_cast<std::size_t>(N),
                                         static_cast<std::size_t>(N), level);
  res.level = level;
  res.N = N;
  res.balanced = res.ks_statistic <= res.critical_value;
  return res;
}

}  // namespace pvmerge
