#include "pvmerge/sequential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pvmerge/special_functions.hpp"

namespace pvmerge {

namespace sf = special;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

PValueVector ingest_pvalues(const std::string& path, InputFormat format,
                            const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_pvalues: cannot open " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }

  // locate the first non-empty line
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size())
    throw std::runtime_error("ingest_pvalues: " + path + " contains no data");

  bool csv = false;
  if (format == InputFormat::Csv) {
    csv = true;
  } else if (format == InputFormat::Auto) {
    csv = lines[first].find(',') != std::string::npos ||
          (path.size() > 4 && path.substr(path.size() - 4) == ".csv");
  }

  std::vector<double> values;
  auto check_range = [&](double v, std::size_t line_no) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::runtime_error("ingest_pvalues: value " + std::to_string(v) +
                               " at line " + std::to_string(line_no) +
                               " is outside [0,1]");
  };

  if (csv) {
    const auto header = split_csv_line(lines[first]);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == column) col = i;
    if (col == header.size())
      throw std::runtime_error("ingest_pvalues: no column named '" + column +
                               "' in " + path);
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
      const std::string row = trim(lines[li]);
      if (row.empty()) continue;
      const auto fields = split_csv_line(row);
      if (col >= fields.size())
        throw std::runtime_error("ingest_pvalues: line " +
                                 std::to_string(li + 1) + " has no column '" +
                                 column + "'");
      double v;
      if (!parse_double(fields[col], v))
        throw std::runtime_error("ingest_pvalues: cannot parse '" +
                                 fields[col] + "' at line " +
                                 std::to_string(li + 1));
      check_range(v, li + 1);
      values.push_back(v);
    }
  } else {
    std::size_t start = first;
    double v;
    // a single non-numeric leading line is treated as a header
    if (!parse_double(trim(lines[first]), v)) start = first + 1;
    for (std::size_t li = start; li < lines.size(); ++li) {
      const std::string row = trim(lines[li]);
      if (row.empty()) continue;
      if (!parse_double(row, v))
        throw std::runtime_error("ingest_pvalues: cannot parse '" + row +
                                 "' at line " + std::to_string(li + 1));
      check_range(v, li + 1);
      values.push_back(v);
    }
  }
  if (values.empty())
    throw std::runtime_error("ingest_pvalues: " + path + " contains no data");
  return PValueVector(std::move(values));
}

namespace {

bool needs_positive_entries(const MergingMethod& m) {
  if (m.kind() == MethodKind::CauchyCombination) return true;
  return m.kind() == MethodKind::GeneralizedMean && m.r().is_finite() &&
         m.r().value < 0.0;
}

// g_K^{-1}(combined) for the VI threshold of an r<0 mean under `mode`.
double invert_vi_negative_r(double r, int K, double combined,
                            ThresholdMode mode) {
  const double Kd = K;
  switch (mode) {
    case ThresholdMode::SmallEpsAsymptotic:
      return combined * std::pow(Kd, 1.0 + 1.0 / r);
    case ThresholdMode::MinTailAsymptotic: {
      const double t = combined * std::pow(Kd, 1.0 / r);
      if (t >= 1.0) return 1.0;
      return -std::expm1(Kd * std::log1p(-t));
    }
    case ThresholdMode::LargeKAsymptotic: {
      // b = ((C F^{-1}(1-eps) + b_K)/K)^{1/r}  =>  eps = 1 - F((K b^r - b_K)/C)
      const StableTailConstants c = stable_tail_constants(r, K);
      const double base = Kd * std::exp(r * std::log(combined));
      const double arg = (base - c.b) / c.C;
      const double cdf = (c.alpha >= 2.0)
                             ? sf::normal_cdf(arg)
                             : sf::stable_cdf(sf::StableLaw(c.alpha), arg);
      return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    default:
      throw std::invalid_argument(
          "invert_threshold: r < 0 VI inversion needs SmallEpsAsymptotic, "
          "MinTailAsymptotic or LargeKAsymptotic mode");
  }
}

}  // namespace

double invert_threshold(const MergingMethod& method, ThresholdKind kind,
                        int K, double combined, ThresholdMode mode) {
  if (combined <= 0.0) return 0.0;
  if (K == 1 || kind == ThresholdKind::VC) return std::min(combined, 1.0);

  if (kind == ThresholdKind::VI) {
    switch (method.kind()) {
      case MethodKind::Bonferroni: {
        const double c = std::min(combined, 1.0);
        return -std::expm1(K * std::log1p(-c));
      }
      case MethodKind::Simes:
      case MethodKind::CauchyCombination:
        return std::min(combined, 1.0);
      case MethodKind::GeneralizedMean: {
        const ExtendedReal r = method.r();
        if (r.kind == ExtendedReal::Kind::PosInf)
          return std::exp(K * std::log(std::min(combined, 1.0)));
        if (r.value == 0.0) {
          // invert exp(-q_{1-eps}(chi2_{2K})/(2K)) by monotone bisection
          auto g = [K](double eps) {
            return std::exp(-sf::chisq_quantile(1.0 - eps, 2 * K) / (2.0 * K));
          };
          const double lo = 1e-14, hi = 1.0 - 1e-14;
          if (combined <= g(lo)) return 0.0;
          if (combined >= g(hi)) return 1.0;
          auto f = [&](double eps) { return g(eps) - combined; };
          const sf::RootBracket br(lo, hi, g(lo) - combined, g(hi) - combined);
          return sf::find_root(f, br, 1e-12).x;
        }
        if (r.value < 0.0)
          return std::min(1.0, invert_vi_negative_r(r.value, K, combined, mode));
        throw std::invalid_argument(
            "invert_threshold: positive-order means have no invertible VI form "
            "across all levels");
      }
      case MethodKind::OrderStatistics:
        throw std::invalid_argument(
            "invert_threshold: general order-statistics weights are not supported");
    }
  }

  // VAD
  switch (method.kind()) {
    case MethodKind::Bonferroni:
      return std::min(1.0, combined * K);
    case MethodKind::Simes:
      return std::min(1.0, combined * ell(K));
    case MethodKind::GeneralizedMean: {
      const ExtendedReal r = method.r();
      if (r.is_finite() && r.value == -4.0)
        return std::min(1.0, combined / vad_multiplier_negative_quartic(K));
      if (r.is_finite() && r.value == 0.0)
        return std::min(1.0, combined / vad_multiplier_geometric(K));
      if (r.is_finite() && r.value == -1.0)
        return std::min(1.0, combined / vad_multiplier_harmonic(K));
      throw std::invalid_argument(
          "invert_threshold: VAD inversion not implemented for method " +
          method.name());
    }
    case MethodKind::CauchyCombination: {
      auto a = [K](double eps) {
        const XkRoot root = solve_xK(eps, K);
        return sf::cauchy_cdf(-root.H_at_root / K);
      };
      const double lo = 1e-12, hi = 0.5 - 1e-9;
      const double a_hi = a(hi);
      if (combined >= a_hi) return 1.0;  // beyond the VAD domain; capped
      const double a_lo = a(lo);
      if (combined <= a_lo) return combined * lo / a_lo;  // linear regime
      auto f = [&](double eps) { return a(eps) - combined; };
      const sf::RootBracket br(lo, hi, a_lo - combined, a_hi - combined);
      return sf::find_root(f, br, 1e-12).x;
    }
    case MethodKind::OrderStatistics:
      throw std::invalid_argument(
          "invert_threshold: general order-statistics weights are not supported");
    default:
      throw std::invalid_argument(
          "invert_threshold: VAD inversion not implemented for method " +
          method.name());
  }
}

SequentialReport run_sequential(const PValueVector& p,
                                const MergingMethod& method,
                                ThresholdKind kind, double epsilon,
                                ThresholdMode mode) {
  if (kind != ThresholdKind::VAD && kind != ThresholdKind::VI)
    throw std::invalid_argument("run_sequential: kind must be VAD or VI");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("run_sequential: epsilon must be in (0,1)");
  if (mode == ThresholdMode::MonteCarlo)
    throw std::invalid_argument(
        "run_sequential: MonteCarlo mode is not supported here (a fresh "
        "empirical quantile per removal step is not tractable)");

  std::vector<double> sorted = p.values();
  std::stable_sort(sorted.begin(), sorted.end());
  const int K = static_cast<int>(sorted.size());

  SequentialReport report;
  report.stop_index = K;
  std::vector<double> scratch;
  for (int n = 0; n < K; ++n) {
    const int k_remaining = K - n;
    std::vector<double> current(sorted.begin() + n, sorted.end());
    double combined, adjusted;
    if (current.front() == 0.0 && needs_positive_entries(method)) {
      // boundary rule: a zero drives the transform to its lower limit
      combined = 0.0;
      adjusted = 0.0;
    } else {
      combined = detail::combine_raw(method, current, scratch);
      adjusted = invert_threshold(method, kind, k_remaining, combined, mode);
    }
    adjusted = std::min(adjusted, 1.0);
    const bool significant = adjusted < epsilon;
    report.steps.push_back(
        SequentialStep{n, k_remaining, combined, adjusted, significant});
    if (!significant) {
      report.stop_index = n;
      break;
    }
  }
  return report;
}

std::string sequential_csv(const SequentialReport& r, int digits) {
  std::string out = "n_removed,K_remaining,combined,adjusted,significant\n";
  for (const auto& s : r.steps) {
    out += std::to_string(s.n_removed) + "," + std::to_string(s.k_remaining) +
           "," + format_sig(s.combined, digits) + "," +
           format_sig(s.adjusted, digits) + "," +
           (s.significant ? "true" : "false") + "\n";
  }
  return out;
}

std::string sequential_json(const SequentialReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"n_removed", s.n_removed},
                     {"K_remaining", s.k_remaining},
                     {"combined", s.combined},
                     {"adjusted", s.adjusted},
                     {"significant", s.significant}});
  return nlohmann::json{{"stop_index", r.stop_index}, {"steps", steps}}.dump(2);
}

}  // namespace pvmerge
