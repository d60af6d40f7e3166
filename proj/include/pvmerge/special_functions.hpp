#pragma once

// Self-contained numerical kernel: distribution functions, quantiles,
// bracketed root finding and adaptive quadrature. Everything here is a pure
// function of its inputs and safe to call from any number of threads.

#include <functional>
#include <cstdint>

namespace pvmerge::special {

// ---------------------------------------------------------------- normal ---

double normal_cdf(double x);
double normal_pdf(double x);

/// Inverse standard normal CDF. Rational approximation (AS241-class)
/// followed by one Newton step against the erfc-based CDF.
/// Throws std::domain_error for p outside (0,1).
double normal_quantile(double p);

// ----------------------------------------------------------------- gamma ---

/// log Gamma(x) for x > 0 (Lanczos). Throws std::domain_error for x <= 0.
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
/// Throws std::domain_error for p outside (0,1) or dof < 1.
double chisq_quantile(double p, int dof);

// ---------------------------------------------------------------- cauchy ---

// Standard Cauchy CDF and quantile, formulated so both tails keep full
// relative precision (atan(1/x) form instead of atan(x) for |x| > 1).
double cauchy_cdf(double x);
double cauchy_quantile(double p);

// ---------------------------------------------------------------- stable ---

/// One-sided stable law: stability parameter alpha > 0, skewness fixed at 1,
/// unit scale, zero shift, in the parameterization whose characteristic
/// function is exp(-|t|^a (1 - i sign(t) tan(pi a/2))) for a != 1 and
/// exp(-|t| (1 + i (2/pi) sign(t) log|t|)) for a = 1.
/// For alpha >= 2 the law is the standard normal distribution.
struct StableLaw {
  double alpha;
  explicit StableLaw(double a);
};

enum class StableMethod { Integral, MonteCarlo };

/// CDF via the Zolotarev/Nolan single-integral representation
/// (alpha = 1 handled by its own branch).
double stable_cdf(const StableLaw& law, double x);

/// Quantile by bracketed inversion of stable_cdf. The MonteCarlo method is a
/// fallback: empirical quantile of `mc_n` Chambers-Mertens-Stuck samples
/// drawn with a fixed seed.
double stable_quantile(const StableLaw& law, double p,
                       StableMethod method = StableMethod::Integral,
                       std::uint64_t mc_n = 10'000'000,
                       std::uint64_t mc_seed = 0x5743u);

/// One Chambers-Mertens-Stuck draw from `law`, given a uniform pair
/// (u, w) with u,w in (0,1).
double stable_cms_draw(const StableLaw& law, double u, double w);

// ------------------------------------------------------------ root finding ---

/// A bracket with a guaranteed sign change: lo < hi, sign(f_lo) != sign(f_hi).
struct RootBracket {
  double lo, hi, f_lo, f_hi;
  RootBracket(double lo_, double hi_, double f_lo_, double f_hi_);
};

struct RootResult {
  double x;
  double f_x;
  int iterations;
};

/// Brent's method on a validated bracket. Stops when |f| vanishes or the
/// bracket width drops below tol * max(1, |x|). Deterministic; iteration cap
/// 200, non-convergence throws std::runtime_error.
RootResult find_root(const std::function<double(double)>& f,
                     const RootBracket& bracket, double tol = 1e-12);

/// Scan (lo, hi) on a grid of n points for the first sign change of f,
/// left to right. Throws std::runtime_error (reporting the scanned interval)
/// if none is found. `geometric` scans multiplicatively (lo, hi must be > 0).
RootBracket bracket_sign_change(const std::function<double(double)>& f,
                                double lo, double hi, int n = 64,
                                bool geometric = false);

// --------------------------------------------------------------- quadrature ---

/// Adaptive Gauss-Kronrod (7-15) integration of f over (lo, hi) to relative
/// tolerance tol. hi may be +infinity (mapped by the substitution x = 1/t).
/// Non-convergence throws std::runtime_error.
double integrate(const std::function<double(double)>& f,
                 double lo, double hi, double tol = 1e-10);

}  // namespace pvmerge::special
