// pvmerge: merge p-values, compute validity thresholds and prices, run
// size/power sweeps, balance checks and sequential removal analysis.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pvmerge/combiners.hpp"
#include "pvmerge/dependence_sim.hpp"
#include "pvmerge/sequential.hpp"
#include "pvmerge/thresholds.hpp"

using namespace pvmerge;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 1;
  int digits = 6;
};

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw std::runtime_error("cannot open output file " + g.out);
  f << text;
}

void echo_config(const json& cfg) { std::cerr << "# config " << cfg.dump() << "\n"; }

MergingMethod parse_method(const std::string& name, std::optional<double> r,
                           const std::vector<double>& alpha) {
  if (name == "bonferroni" || name == "min") return MergingMethod::bonferroni();
  if (name == "simes") return MergingMethod::simes();
  if (name == "cauchy") return MergingMethod::cauchy();
  if (name == "harmonic") return MergingMethod::generalized_mean(-1.0);
  if (name == "geometric") return MergingMethod::generalized_mean(0.0);
  if (name == "negative-quartic" || name == "neg-quartic")
    return MergingMethod::generalized_mean(-4.0);
  if (name == "arithmetic") return MergingMethod::generalized_mean(1.0);
  if (name == "maximum" || name == "max")
    return MergingMethod::generalized_mean(ExtendedReal::pos_inf());
  if (name == "mean") {
    if (!r) throw CLI::ValidationError("--method mean requires --r");
    return MergingMethod::generalized_mean(*r);
  }
  if (name == "order-stat") {
    if (alpha.empty())
      throw CLI::ValidationError("--method order-stat requires --alpha");
    return MergingMethod::order_statistics(alpha);
  }
  throw CLI::ValidationError("unknown method '" + name + "'");
}

ThresholdKind parse_kind(const std::string& kind) {
  if (kind == "vad") return ThresholdKind::VAD;
  if (kind == "vi") return ThresholdKind::VI;
  if (kind == "vc") return ThresholdKind::VC;
  throw CLI::ValidationError("unknown kind '" + kind + "' (vad|vi|vc)");
}

ThresholdMode parse_mode(const std::string& mode) {
  if (mode == "exact") return ThresholdMode::Exact;
  if (mode == "small-eps") return ThresholdMode::SmallEpsAsymptotic;
  if (mode == "large-k") return ThresholdMode::LargeKAsymptotic;
  if (mode == "min-tail") return ThresholdMode::MinTailAsymptotic;
  if (mode == "mc" || mode == "monte-carlo") return ThresholdMode::MonteCarlo;
  throw CLI::ValidationError("unknown mode '" + mode + "'");
}

// default VI mode for methods without a closed form
ThresholdMode default_mode(const MergingMethod& m, ThresholdKind kind,
                           const std::optional<std::string>& requested) {
  if (requested) return parse_mode(*requested);
  if (kind == ThresholdKind::VI && m.kind() == MethodKind::GeneralizedMean &&
      m.r().is_finite() && m.r().value < 0.0)
    return ThresholdMode::MinTailAsymptotic;
  return ThresholdMode::Exact;
}

SignalCase parse_case(const std::string& c) {
  if (c == "no-signal" || c == "none") return SignalCase::NoSignal;
  if (c == "needle") return SignalCase::Needle;
  if (c == "sparse") return SignalCase::Sparse;
  if (c == "dense") return SignalCase::Dense;
  throw CLI::ValidationError("unknown case '" + c +
                             "' (no-signal|needle|sparse|dense)");
}

std::vector<double> parse_rho_grid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream ss(spec);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
      throw CLI::ValidationError("bad rho grid '" + spec + "' (lo:hi:step)");
    for (double r = lo; r <= hi + 1e-12; r += step)
      grid.push_back(std::min(r, 1.0));
    return grid;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
  return grid;
}

InputFormat parse_input_format(const std::string& f) {
  if (f == "auto") return InputFormat::Auto;
  if (f == "plain") return InputFormat::PlainColumn;
  if (f == "csv") return InputFormat::Csv;
  throw CLI::ValidationError("unknown input format '" + f + "'");
}

// minimal self-contained SVG line chart
struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::vector<SvgSeries>& series,
                           const std::string& x_label,
                           const std::string& y_label) {
  const int W = 720, H = 480, ML = 60, MR = 160, MT = 20, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x); xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > xmin)) { xmax = xmin + 1.0; }
  if (!(ymax > ymin)) { ymax = ymin + 1.0; }
  ymax *= 1.05;
  const double pw = W - ML - MR, ph = H - MT - MB;
  auto X = [&](double x) { return ML + pw * (x - xmin) / (xmax - xmin); };
  auto Y = [&](double y) { return MT + ph * (1.0 - (y - ymin) / (ymax - ymin)); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf", "#393b79", "#637939",
                          "#8c6d31", "#843c39", "#7b4173", "#3182bd",
                          "#e6550d", "#31a354"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    svg << "<text x=\"" << X(fx) << "\" y=\"" << H - MB + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_sig(fx, 3)
        << "</text>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << Y(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << format_sig(fy, 3)
        << "</text>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << Y(fy) << "\" x2=\"" << ML + pw
        << "\" y2=\"" << Y(fy) << "\" stroke=\"#dddddd\"/>\n";
  }
  svg << "<text x=\"" << ML + pw / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"15\" y=\"" << MT + ph / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << MT + ph / 2 << ")\">" << y_label << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 18];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) svg << X(x) << "," << Y(y) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << ML + pw + 10 << "\" y=\"" << MT + 16 + 16 * ci
        << "\" font-size=\"11\" fill=\"" << color << "\">" << s.label
        << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-value merging, validity thresholds and dependence experiments"};
  app.require_subcommand(1);

  GlobalOptions g;
  if (const char* env_seed = std::getenv("PVMERGE_SEED"))
    g.seed = std::strtoull(env_seed, nullptr, 10);
  app.add_option("--format", g.format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--seed", g.seed, "master seed (env PVMERGE_SEED)");
  app.add_option("--digits", g.digits, "significant digits in CSV output")
      ->check(CLI::Range(1, 17));

  // shared method flags
  std::string method_name = "simes", kind_name = "vad";
  std::optional<double> method_r;
  std::vector<double> method_alpha;
  std::optional<std::string> mode_name;
  double epsilon = 0.05;
  auto add_method_flags = [&](CLI::App* cmd, bool with_kind = true) {
    cmd->add_option("--method", method_name,
                    "bonferroni|negative-quartic|simes|cauchy|harmonic|"
                    "geometric|arithmetic|maximum|mean|order-stat");
    cmd->add_option("--r", method_r, "order for --method mean");
    cmd->add_option("--alpha", method_alpha,
                    "weights for --method order-stat")->delimiter(',');
    if (with_kind) cmd->add_option("--kind", kind_name, "vad|vi|vc");
    cmd->add_option("--mode", mode_name,
                    "exact|small-eps|large-k|min-tail|mc");
    cmd->add_option("--epsilon", epsilon, "significance level");
  };

  // ---- merge ----
  auto* merge = app.add_subcommand("merge", "combine p-values and decide");
  std::string values_csv, input_path, column = "p", input_format = "auto";
  add_method_flags(merge);
  merge->add_option("--values", values_csv, "comma-separated p-values");
  merge->add_option("--input", input_path, "file of p-values");
  merge->add_option("--column", column, "CSV column name");
  merge->add_option("--input-format", input_format, "auto|plain|csv");
  std::uint64_t mc_n = 1'000'000;
  merge->add_option("--mc-n", mc_n, "Monte Carlo replications");

  // ---- threshold ----
  auto* thr = app.add_subcommand("threshold", "threshold values per K");
  std::vector<int> K_list{50};
  add_method_flags(thr);
  thr->add_option("--K", K_list, "list of K values")->delimiter(',');
  thr->add_option("--mc-n", mc_n, "Monte Carlo replications");

  // ---- table ----
  auto* table = app.add_subcommand("table", "prices for validity table");
  std::vector<int> table_K{50, 100, 200, 400};
  std::string policy_name = "default";
  std::vector<std::string> table_methods;
  bool per_log_k = false;
  table->add_option("--epsilon", epsilon, "significance level");
  table->add_option("--K", table_K, "list of K values")->delimiter(',');
  table->add_option("--methods", table_methods, "subset of methods")
      ->delimiter(',');
  table->add_option("--mode-policy", policy_name,
                    "default|min-tail|small-eps|large-k|mc (for r<0 cells)");
  table->add_option("--mc-n", mc_n, "Monte Carlo replications");
  table->add_flag("--per-log-k", per_log_k,
                  "emit price under independence divided by log K");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "rejection-probability sweep");
  std::string case_name = "no-signal", rho_spec = "0:1:0.05";
  int sim_K = 50, sim_N = 15000, threads = 0;
  std::vector<std::string> kinds_filter{"vad", "vi", "vc"};
  std::vector<std::string> sim_methods;
  std::string svg_path;
  sim->add_option("--case", case_name, "no-signal|needle|sparse|dense");
  sim->add_option("--K", sim_K, "number of p-values");
  sim->add_option("--epsilon", epsilon, "significance level");
  sim->add_option("--rho-grid", rho_spec, "lo:hi:step or comma list");
  sim->add_option("--N", sim_N, "replications per grid point");
  sim->add_option("--threads", threads, "worker threads (0 = auto)");
  sim->add_option("--kinds", kinds_filter, "threshold kinds")->delimiter(',');
  sim->add_option("--methods", sim_methods, "subset of methods")->delimiter(',');
  sim->add_option("--svg", svg_path, "also write an SVG chart here");

  // ---- ic-check ----
  auto* ic = app.add_subcommand("ic-check",
                                "independence/comonotonicity balance check");
  int ic_K = 50, ic_N = 100000;
  double ic_level = 0.01;
  add_method_flags(ic, /*with_kind=*/false);
  ic->add_option("--K", ic_K, "number of p-values");
  ic->add_option("--N", ic_N, "sample size per dependence structure");
  ic->add_option("--level", ic_level, "test level");

  // ---- sequential ----
  auto* seq = app.add_subcommand("sequential", "remove-smallest analysis");
  add_method_flags(seq);
  seq->add_option("--input", input_path, "file of p-values")->required();
  seq->add_option("--column", column, "CSV column name");
  seq->add_option("--input-format", input_format, "auto|plain|csv");
  seq->add_option("--svg", svg_path, "also write an SVG chart here");

  // global flags remain usable after a subcommand name
  for (CLI::App* sub : {merge, thr, table, sim, ic, seq}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (merge->parsed()) {
      const MergingMethod m = parse_method(method_name, method_r, method_alpha);
      const ThresholdKind kind = parse_kind(kind_name);
      std::vector<double> vals;
      if (!values_csv.empty())
        vals = parse_values(values_csv);
      else if (!input_path.empty())
        vals = ingest_pvalues(input_path, parse_input_format(input_format),
                              column).values();
      else
        throw CLI::ValidationError("merge needs --values or --input");
      const PValueVector p(vals);
      const ThresholdMode mode = default_mode(m, kind, mode_name);
      echo_config(json{{"cmd", "merge"}, {"method", m.name()},
                       {"kind", kind_name}, {"epsilon", epsilon},
                       {"K", p.size()}, {"mode", to_string(mode)},
                       {"seed", g.seed}});
      const double combined = combine(m, p);
      ThresholdQuery q{m, kind, epsilon, p.size(), mode,
                       MonteCarloSettings{mc_n, g.seed}};
      const ThresholdResult t = threshold(q);
      const double adjusted =
          (mode == ThresholdMode::MonteCarlo)
              ? std::numeric_limits<double>::quiet_NaN()
              : invert_threshold(m, kind, p.size(), combined, mode);
      const bool reject = combined < t.value;
      if (g.format == "json") {
        emit(g, json{{"method", m.name()}, {"K", p.size()},
                     {"kind", kind_name}, {"epsilon", epsilon},
                     {"combined", combined}, {"threshold", t.value},
                     {"adjusted", adjusted}, {"reject", reject}}.dump(2) + "\n");
      } else {
        std::string out = "method,K,kind,epsilon,combined,threshold,adjusted,reject\n";
        out += m.name() + "," + std::to_string(p.size()) + "," + kind_name +
               "," + format_sig(epsilon, g.digits) + "," +
               format_sig(combined, g.digits) + "," +
               format_sig(t.value, g.digits) + "," +
               format_sig(adjusted, g.digits) + "," +
               (reject ? "true" : "false") + "\n";
        emit(g, out);
      }
      return 0;
    }

    if (thr->parsed()) {
      const MergingMethod m = parse_method(method_name, method_r, method_alpha);
      const ThresholdKind kind = parse_kind(kind_name);
      const ThresholdMode mode = default_mode(m, kind, mode_name);
      echo_config(json{{"cmd", "threshold"}, {"method", m.name()},
                       {"kind", kind_name}, {"epsilon", epsilon},
                       {"K", K_list}, {"mode", to_string(mode)},
                       {"seed", g.seed}});
      std::vector<ThresholdRow> rows;
      for (int K : K_list) {
        ThresholdQuery q{m, kind, epsilon, K, mode,
                         MonteCarloSettings{mc_n, g.seed}};
        rows.push_back(ThresholdRow{m.name(), K, epsilon, kind, threshold(q)});
      }
      emit(g, g.format == "json" ? threshold_rows_json(rows) + "\n"
                                 : threshold_rows_csv(rows, g.digits));
      return 0;
    }

    if (table->parsed()) {
      std::vector<MergingMethod> methods;
      if (table_methods.empty())
        methods = standard_table_methods();
      else
        for (const auto& name : table_methods)
          methods.push_back(parse_method(name, method_r, method_alpha));
      TableModePolicy policy = TableModePolicy::Default;
      if (policy_name == "min-tail") policy = TableModePolicy::MinTail;
      else if (policy_name == "small-eps") policy = TableModePolicy::SmallEps;
      else if (policy_name == "large-k") policy = TableModePolicy::LargeK;
      else if (policy_name == "mc") policy = TableModePolicy::MonteCarlo;
      else if (policy_name != "default")
        throw CLI::ValidationError("unknown mode policy '" + policy_name + "'");
      echo_config(json{{"cmd", "table"}, {"epsilon", epsilon}, {"K", table_K},
                       {"policy", policy_name}, {"seed", g.seed}});
      const PriceTable t = generate_table(epsilon, table_K, methods, policy,
                                          MonteCarloSettings{mc_n, g.seed});
      if (per_log_k) {
        std::string out = "method,K,epsilon,b_over_a_per_logK\n";
        json arr = json::array();
        for (const auto& c : t.cells) {
          if (!c.b_over_a) continue;
          const double v = *c.b_over_a / std::log(static_cast<double>(c.K));
          out += c.method + "," + std::to_string(c.K) + "," +
                 format_sig(c.epsilon, g.digits) + "," +
                 format_sig(v, g.digits) + "\n";
          arr.push_back({{"method", c.method}, {"K", c.K},
                         {"epsilon", c.epsilon}, {"b_over_a_per_logK", v}});
        }
        emit(g, g.format == "json" ? arr.dump(2) + "\n" : out);
      } else {
        emit(g, g.format == "json" ? price_table_json(t) + "\n"
                                   : price_table_csv(t, g.digits));
      }
      return 0;
    }

    if (sim->parsed()) {
      const SignalCase c = parse_case(case_name);
      const auto rho_grid = parse_rho_grid(rho_spec);
      std::vector<MergingMethod> methods;
      if (sim_methods.empty())
        methods = standard_table_methods();
      else
        for (const auto& name : sim_methods)
          methods.push_back(parse_method(name, method_r, method_alpha));
      std::vector<MethodSpec> specs;
      for (const auto& m : methods)
        for (const auto& kn : kinds_filter) {
          const ThresholdKind kind = parse_kind(kn);
          specs.push_back(MethodSpec{m, kind, default_mode(m, kind, mode_name)});
        }
      echo_config(json{{"cmd", "simulate"}, {"case", case_name}, {"K", sim_K},
                       {"epsilon", epsilon}, {"N", sim_N},
                       {"rho_grid", rho_grid}, {"seed", g.seed},
                       {"threads", threads}});
      const CurveTable t =
          sweep_rho(specs, c, sim_K, epsilon, rho_grid, sim_N, g.seed, threads);
      emit(g, g.format == "json" ? curve_table_json(t) + "\n"
                                 : curve_table_csv(t, g.digits));
      if (!svg_path.empty()) {
        std::vector<SvgSeries> series;
        for (const auto& spec : specs) {
          SvgSeries s;
          s.label = spec.method.name() + "/" + to_string(spec.kind);
          for (const auto& row : t.rows)
            if (row.method == spec.method.name() && row.kind == spec.kind)
              s.points.emplace_back(row.rho, row.rp);
          series.push_back(std::move(s));
        }
        std::ofstream f(svg_path);
        f << svg_line_chart(series, "rho", "rejection probability");
      }
      return 0;
    }

    if (ic->parsed()) {
      const MergingMethod m = parse_method(method_name, method_r, method_alpha);
      echo_config(json{{"cmd", "ic-check"}, {"method", m.name()}, {"K", ic_K},
                       {"N", ic_N}, {"level", ic_level}, {"seed", g.seed}});
      const IcBalanceResult r = ic_balance_check(m, ic_K, ic_N, g.seed, ic_level);
      if (g.format == "json") {
        emit(g, json{{"method", m.name()}, {"K", ic_K}, {"N", r.N},
                     {"level", r.level}, {"ks_statistic", r.ks_statistic},
                     {"critical_value", r.critical_value},
                     {"balanced", r.balanced}}.dump(2) + "\n");
      } else {
        std::string out = "method,K,N,level,ks_statistic,critical_value,balanced\n";
        out += m.name() + "," + std::to_string(ic_K) + "," +
               std::to_string(r.N) + "," + format_sig(r.level, g.digits) + "," +
               format_sig(r.ks_statistic, g.digits) + "," +
               format_sig(r.critical_value, g.digits) + "," +
               (r.balanced ? "true" : "false") + "\n";
        emit(g, out);
      }
      return 0;
    }

    if (seq->parsed()) {
      const MergingMethod m = parse_method(method_name, method_r, method_alpha);
      const ThresholdKind kind = parse_kind(kind_name);
      const ThresholdMode mode = default_mode(m, kind, mode_name);
      const auto p = ingest_pvalues(input_path,
                                    parse_input_format(input_format), column);
      double mn = 1.0, mx = 0.0;
      for (int i = 0; i < p.size(); ++i) {
        mn = std::min(mn, p[i]);
        mx = std::max(mx, p[i]);
      }
      echo_config(json{{"cmd", "sequential"}, {"method", m.name()},
                       {"kind", kind_name}, {"epsilon", epsilon},
                       {"K", p.size()}, {"min", mn}, {"max", mx},
                       {"mode", to_string(mode)}});
      const SequentialReport r = run_sequential(p, m, kind, epsilon, mode);
      emit(g, g.format == "json" ? sequential_json(r) + "\n"
                                 : sequential_csv(r, g.digits));
      if (!svg_path.empty()) {
        SvgSeries s;
        s.label = m.name() + "/" + kind_name;
        for (const auto& step : r.steps)
          s.points.emplace_back(step.n_removed, step.adjusted);
        std::ofstream f(svg_path);
        f << svg_line_chart({s}, "p-values removed", "adjusted combined p-value");
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
