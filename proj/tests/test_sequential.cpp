#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pvmerge/rng.hpp"
#include "pvmerge/sequential.hpp"

using namespace pvmerge;
using Catch::Approx;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents)
      : path("/tmp/pvmerge_test_" + name) {
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

// step-down oracle: v_j = min(1, (K-j+1) p_(j)) and the rejection count
struct HolmOracle {
  std::vector<double> values;
  int rejections;
};

HolmOracle holm_step_down(std::vector<double> p, double eps) {
  std::sort(p.begin(), p.end());
  const int K = static_cast<int>(p.size());
  HolmOracle out;
  out.rejections = K;
  for (int j = 0; j < K; ++j) {
    const double v = std::min(1.0, (K - j) * p[static_cast<size_t>(j)]);
    out.values.push_back(v);
    if (v >= eps && out.rejections == K) out.rejections = j;
  }
  return out;
}

}  // namespace

TEST_CASE("ingest plain one-column files", "[sequential]") {
  TempFile f("plain.txt", "0.1\n0.2\n0.3\n");
  const auto p = ingest_pvalues(f.path);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 0.1);
  CHECK(p[2] == 0.3);

  TempFile header("plain_header.txt", "p\n0.5\n0.25\n");
  CHECK(ingest_pvalues(header.path).size() == 2);

  TempFile bad("bad.txt", "0.1\n1.2\n");
  CHECK_THROWS_WITH(ingest_pvalues(bad.path),
                    Catch::Matchers::ContainsSubstring("line 2"));
  TempFile garbled("garbled.txt", "0.1\nabc\n");
  CHECK_THROWS_WITH(ingest_pvalues(garbled.path),
                    Catch::Matchers::ContainsSubstring("line 2"));
  TempFile empty("empty.txt", "\n\n");
  CHECK_THROWS_AS(ingest_pvalues(empty.path), std::runtime_error);
}

TEST_CASE("ingest CSV with a named column", "[sequential]") {
  TempFile f("table.csv", "gene,p,score\nA,0.01,5\nB,0.2,3\nC,0.9,1\n");
  const auto p = ingest_pvalues(f.path, InputFormat::Auto, "p");
  REQUIRE(p.size() == 3);
  CHECK(p[1] == 0.2);
  CHECK_THROWS_WITH(ingest_pvalues(f.path, InputFormat::Csv, "missing"),
                    Catch::Matchers::ContainsSubstring("missing"));

  // a large synthetic file
  std::string big = "p\n";
  rng::RandomStream s(1, rng::kLaneGeneric, 0);
  for (int i = 0; i < 3170; ++i) big += std::to_string(s.uniform()) + "\n";
  TempFile bigf("big.csv", big);
  CHECK(ingest_pvalues(bigf.path).size() == 3170);
}

TEST_CASE("sequential removal with Bonferroni and VAD threshold", "[sequential]") {
  const auto report = run_sequential(PValueVector({0.001, 0.5, 0.6}),
                                     MergingMethod::bonferroni(),
                                     ThresholdKind::VAD, 0.05);
  REQUIRE(report.steps.size() == 2);
  CHECK(report.steps[0].n_removed == 0);
  CHECK(report.steps[0].combined == Approx(0.001));
  CHECK(report.steps[0].adjusted == Approx(0.003).epsilon(1e-12));
  CHECK(report.steps[0].significant);
  CHECK(report.steps[1].adjusted == 1.0);  // 2 * 0.5, capped
  CHECK_FALSE(report.steps[1].significant);
  CHECK(report.stop_index == 1);
}

TEST_CASE("sequential edge cases", "[sequential]") {
  // identical values under Simes with the VI threshold: adjusted = c
  const auto simes = run_sequential(PValueVector({0.01, 0.01, 0.01}),
                                    MergingMethod::simes(), ThresholdKind::VI,
                                    0.05);
  CHECK(simes.steps[0].adjusted == Approx(0.01).epsilon(1e-12));

  // nothing significant
  const auto ones = run_sequential(PValueVector({1.0, 1.0}),
                                   MergingMethod::bonferroni(),
                                   ThresholdKind::VAD, 0.05);
  CHECK(ones.stop_index == 0);
  REQUIRE(ones.steps.size() == 1);
  CHECK_FALSE(ones.steps[0].significant);

  // a zero p-value under the Cauchy combiner is the lower boundary, not an error
  const auto zero = run_sequential(PValueVector({0.0, 0.5}),
                                   MergingMethod::cauchy(), ThresholdKind::VI,
                                   0.05);
  CHECK(zero.steps[0].combined == 0.0);
  CHECK(zero.steps[0].adjusted == 0.0);
  CHECK(zero.steps[0].significant);

  // every step significant: the vector is exhausted
  const auto tiny = run_sequential(PValueVector({1e-10, 1e-9, 1e-8}),
                                   MergingMethod::bonferroni(),
                                   ThresholdKind::VAD, 0.05);
  CHECK(tiny.stop_index == 3);
  CHECK(tiny.steps.size() == 3);

  CHECK_THROWS_AS(run_sequential(PValueVector({0.5}), MergingMethod::simes(),
                                 ThresholdKind::VC, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_sequential(PValueVector({0.5}), MergingMethod::simes(),
                                 ThresholdKind::VI, 0.05,
                                 ThresholdMode::MonteCarlo),
                  std::invalid_argument);
}

TEST_CASE("adjusted values are invariant to input permutation", "[sequential]") {
  rng::RandomStream s(3, rng::kLaneGeneric, 9);
  std::vector<double> v(20);
  for (auto& x : v) x = s.uniform() * 0.2;
  auto shuffled = v;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto a = run_sequential(PValueVector(v), MergingMethod::simes(),
                                ThresholdKind::VI, 0.05);
  const auto b = run_sequential(PValueVector(shuffled), MergingMethod::simes(),
                                ThresholdKind::VI, 0.05);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i)
    CHECK(a.steps[i].adjusted == b.steps[i].adjusted);
}

TEST_CASE("Bonferroni VAD sequence equals the step-down oracle", "[sequential]") {
  rng::RandomStream s(5, rng::kLaneGeneric, 14);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + static_cast<int>(s.uniform() * 12);
    std::vector<double> v(static_cast<size_t>(K));
    for (auto& x : v) x = std::pow(s.uniform(), 2.0);  // some small values
    const double eps = 0.05;
    const auto report = run_sequential(PValueVector(v),
                                       MergingMethod::bonferroni(),
                                       ThresholdKind::VAD, eps);
    const auto oracle = holm_step_down(v, eps);
    for (size_t i = 0; i < report.steps.size(); ++i)
      REQUIRE(report.steps[i].adjusted == Approx(oracle.values[i]).margin(1e-15));
    CHECK(report.stop_index == oracle.rejections);
  }
}

TEST_CASE("VAD stops no later than VI", "[sequential]") {
  rng::RandomStream s(6, rng::kLaneGeneric, 15);
  const std::vector<MergingMethod> methods = {MergingMethod::bonferroni(),
                                              MergingMethod::simes(),
                                              MergingMethod::cauchy()};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(25);
    for (auto& x : v) x = std::pow(s.uniform(), 3.0);
    for (const auto& m : methods) {
      const auto vad =
          run_sequential(PValueVector(v), m, ThresholdKind::VAD, 0.05);
      const auto vi =
          run_sequential(PValueVector(v), m, ThresholdKind::VI, 0.05);
      CHECK(vad.stop_index <= vi.stop_index);
      // dominance of the adjusted values themselves
      for (size_t i = 0; i < std::min(vad.steps.size(), vi.steps.size()); ++i)
        CHECK(vad.steps[i].adjusted >= vi.steps[i].adjusted - 1e-12);
    }
  }
}

TEST_CASE("sequential csv emission", "[sequential]") {
  const auto report = run_sequential(PValueVector({0.001, 0.5}),
                                     MergingMethod::bonferroni(),
                                     ThresholdKind::VAD, 0.05);
  const auto csv = sequential_csv(report);
  CHECK(csv.find("n_removed,K_remaining,combined,adjusted,significant") !=
        std::string::npos);
  CHECK(csv.find("true") != std::string::npos);
  CHECK(sequential_json(report).find("stop_index") != std::string::npos);
}
