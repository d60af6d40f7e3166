#include "pvmerge/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvmerge/rng.hpp"

namespace pvmerge::special {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------- normal ---

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

namespace {

// Wichura's PPND16 rational approximation.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -x : x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1), got " +
                            std::to_string(p));
  double x = ppnd16(p);
  const double pdf = normal_pdf(x);
  if (pdf > 1e-300) x -= (normal_cdf(x) - p) / pdf;
  return x;
}

// ----------------------------------------------------------------- gamma ---

double ln_gamma(double x) {
  if (!(x > 0.0))
    throw std::domain_error("ln_gamma: x must be > 0, got " + std::to_string(x));
  if (x < 0.5) return ln_gamma(x + 1.0) - std::log(x);
  static const double cof[9] = {
      0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
  const double z = x - 1.0;
  double sum = cof[0];
  for (int i = 1; i < 9; ++i) sum += cof[i] / (z + i);
  const double t = z + 7.5;
  return 0.91893853320467274178 + (z + 0.5) * std::log(t) - t + std::log(sum);
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      return sum * std::exp(a * std::log(x) - x - ln_gamma(a));
  }
  throw std::runtime_error("gamma_p: series did not converge");
}

double gamma_q_cf(double a, double x) {
  // modified Lentz for the continued fraction of Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16)
      return h * std::exp(a * std::log(x) - x - ln_gamma(a));
  }
  throw std::runtime_error("gamma_p: continued fraction did not converge");
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw std::domain_error("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chisq_quantile(double p, int dof) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("chisq_quantile: p must be in (0,1), got " +
                            std::to_string(p));
  if (dof < 1)
    throw std::domain_error("chisq_quantile: dof must be >= 1, got " +
                            std::to_string(dof));
  const double a = 0.5 * dof;
  auto f = [&](double y) { return gamma_p(a, 0.5 * y) - p; };
  // Wilson-Hilferty starting point, then a bracket around it.
  const double z = ppnd16(p);
  const double h = 2.0 / (9.0 * dof);
  double guess = dof * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
  if (!(guess > 0.0)) guess = 1e-8;
  double hi = guess;
  int guard = 0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw std::runtime_error("chisq_quantile: no bracket");
  }
  const RootBracket br(0.0, hi, -p, f(hi));
  return find_root(f, br, 1e-14).x;
}

// ---------------------------------------------------------------- cauchy ---

double cauchy_cdf(double x) {
  if (x > 1.0) return 1.0 - std::atan(1.0 / x) / kPi;
  if (x < -1.0) return std::atan(-1.0 / x) / kPi;
  return std::atan(x) / kPi + 0.5;
}

double cauchy_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("cauchy_quantile: p must be in (0,1), got " +
                            std::to_string(p));
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -1.0 / std::tan(kPi * p);
  return 1.0 / std::tan(kPi * (1.0 - p));
}

// ------------------------------------------------------------ root finding ---

RootBracket::RootBracket(double lo_, double hi_, double f_lo_, double f_hi_)
    : lo(lo_), hi(hi_), f_lo(f_lo_), f_hi(f_hi_) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("RootBracket: need finite lo < hi");
  const bool zero_end = (f_lo == 0.0) || (f_hi == 0.0);
  if (!zero_end && !(f_lo * f_hi < 0.0))
    throw std::invalid_argument(
        "RootBracket: no sign change on [" + std::to_string(lo) + ", " +
        std::to_string(hi) + "]");
}

RootResult find_root(const std::function<double(double)>& f,
                     const RootBracket& bracket, double tol) {
  double a = bracket.lo, b = bracket.hi;
  double fa = bracket.f_lo, fb = bracket.f_hi;
  if (fa == 0.0) return {a, 0.0, 0};
  if (fb == 0.0) return {b, 0.0, 0};
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 1; iter <= 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa; d = b - a; e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 =
        2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
        0.5 * tol * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, iter};
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d; d = p / q;
      } else {
        d = xm; e = d;
      }
    } else {
      d = xm; e = d;
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw std::runtime_error("find_root: no convergence within 200 iterations");
}

RootBracket bracket_sign_change(const std::function<double(double)>& f,
                                double lo, double hi, int n, bool geometric) {
  if (geometric && !(lo > 0.0 && hi > 0.0))
    throw std::invalid_argument("bracket_sign_change: geometric scan needs lo, hi > 0");
  double x_prev = lo;
  double f_prev = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double x = geometric ? lo * std::pow(hi / lo, t)
                               : lo + (hi - lo) * t;
    const double fx = f(x);
    if (f_prev == 0.0 || fx == 0.0 || (f_prev < 0.0) != (fx < 0.0))
      return RootBracket(x_prev, x, f_prev, fx);
    x_prev = x;
    f_prev = fx;
  }
  throw std::runtime_error("bracket_sign_change: no sign change found on [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           "] with " + std::to_string(n) + " points");
}

// --------------------------------------------------------------- quadrature ---

namespace {

// 15-point Kronrod nodes on [0,1) with embedded 7-point Gauss rule.
const double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
const double kKronrodW[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kGaussW[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
  double kronrod;
  double gauss;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kGkNodes[i];
    double fv;
    if (i == 7) {
      fv = f(c);
      resk += kKronrodW[7] * fv;
      resg += kGaussW[3] * fv;
    } else {
      const double f1 = f(c - dx);
      const double f2 = f(c + dx);
      resk += kKronrodW[i] * (f1 + f2);
      if (i % 2 == 1) resg += kGaussW[i / 2] * (f1 + f2);
    }
  }
  return {resk * h, resg * h};
}

double integrate_finite(const std::function<double(double)>& f, double lo,
                        double hi, double rel_tol, double abs_tol) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto make_piece = [&](double a, double b) {
    const GkEstimate e = gk15(f, a, b);
    if (!std::isfinite(e.kronrod))
      throw std::runtime_error("integrate: non-finite integrand value");
    return Piece{a, b, e.kronrod, std::abs(e.kronrod - e.gauss)};
  };
  std::priority_queue<Piece> heap;
  heap.push(make_piece(lo, hi));
  double total = heap.top().value;
  double total_err = heap.top().error;
  for (int iter = 0; iter < 200000; ++iter) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval at floating-point resolution; keep its estimate
      total_err -= worst.error;
      total += 0.0;
      continue;
    }
    const Piece left = make_piece(worst.a, mid);
    const Piece right = make_piece(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  throw std::runtime_error("integrate: did not converge to tolerance");
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (!std::isfinite(lo)) throw std::invalid_argument("integrate: lo must be finite");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate: tol must be > 0");
  if (std::isfinite(hi)) {
    if (!(lo < hi)) throw std::invalid_argument("integrate: need lo < hi");
    return integrate_finite(f, lo, hi, tol, 0.0);
  }
  // x = 1/t maps (c, inf) to (0, 1/c)
  const double c = std::max(lo, 1.0);
  auto tail = [&](double t) { return f(1.0 / t) / (t * t); };
  double result = integrate_finite(tail, 0.0, 1.0 / c, tol, 0.0);
  if (c > lo) result += integrate_finite(f, lo, c, tol, 0.0);
  return result;
}

// ---------------------------------------------------------------- stable ---

StableLaw::StableLaw(double a) : alpha(a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::domain_error("StableLaw: alpha must be > 0, got " +
                            std::to_string(a));
}

namespace {

constexpr double kAlphaOneBand = 1e-8;

// Integral of exp(-exp(log_v(th) + log_s)) over (lo, hi). The integrand is a
// unit plateau with an exponentially sharp drop where log_v + log_s crosses
// zero; the crossing band is bracketed explicitly (levels +-40) so the
// quadrature cannot mistake the plateau-with-edge-drop for a flat function.
double integrate_plateau_drop(const std::function<double(double)>& log_v,
                              double log_s, double lo, double hi) {
  auto lv = [&](double th) { return log_v(th) + log_s; };
  auto integrand = [&](double th) {
    const double l = lv(th);
    if (l > 690.0) return 0.0;
    return std::exp(-std::exp(l));
  };
  const double pad = 1e-9 * (hi - lo);
  std::vector<double> pts = {lo, hi};
  const double l_lo = lv(lo + pad), l_hi = lv(hi - pad);
  for (double level : {-40.0, 0.0, 40.0}) {
    if ((l_lo < level) != (l_hi < level)) {
      auto f = [&](double th) { return lv(th) - level; };
      const RootBracket br(lo + pad, hi - pad, l_lo - level, l_hi - level);
      pts.push_back(find_root(f, br, 1e-12).x);
    }
  }
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (!(b > a)) continue;
    const double mid = lv(0.5 * (a + b));
    if (mid <= -40.0) {
      total += b - a;  // integrand is 1 to within exp(-4e-18)
    } else if (mid >= 40.0) {
      // integrand vanishes
    } else {
      total += integrate_finite(integrand, a, b, 1e-12, 1e-14);
    }
  }
  return total;
}

// CDF of the standard S0-parameterized stable law, beta in {-1, +1}.
// Zolotarev-Nolan integral representation.
double stable_cdf_s0(double x, double alpha, double beta);

double stable_cdf_alpha1(double x, double beta) {
  // beta > 0 branch; beta < 0 by reflection.
  if (beta < 0.0) return 1.0 - stable_cdf_alpha1(-x, -beta);
  const double log_s = -kPi * x / 2.0;
  if (log_s > 690.0) return 0.0;     // x so far left that F underflows
  auto log_v1 = [beta](double th) {
    const double arg = kPi / 2.0 + beta * th;
    const double cth = std::cos(th);
    if (!(arg > 0.0) || !(cth > 0.0)) return kInf;
    return std::log(2.0 / kPi) + std::log(arg) - std::log(cth) +
           (arg / beta) * std::tan(th);
  };
  const double result =
      integrate_plateau_drop(log_v1, log_s, -kPi / 2.0, kPi / 2.0);
  return std::clamp(result / kPi, 0.0, 1.0);
}

double stable_cdf_s0(double x, double alpha, double beta) {
  if (std::abs(alpha - 1.0) < kAlphaOneBand) return stable_cdf_alpha1(x, beta);
  const double tan_half = std::tan(kPi * alpha / 2.0);
  const double zeta = -beta * tan_half;
  const double theta0 = std::atan(beta * tan_half) / alpha;  // signed
  const double at_zeta = 0.5 - theta0 / kPi;
  if (x == zeta) return at_zeta;
  if (x < zeta) return 1.0 - stable_cdf_s0(-x, alpha, -beta);

  const double c1 = (alpha < 1.0) ? at_zeta : 1.0;
  const double expo = alpha / (alpha - 1.0);
  const double log_s = expo * std::log(x - zeta);
  const double lo = -theta0, hi = kPi / 2.0;
  if (hi - lo < 1e-12) return c1;  // degenerate interval (beta=-1, alpha<1)

  const double log_cos_alpha_theta0 = std::log(std::cos(alpha * theta0));
  auto log_v = [=](double th) -> double {
    const double cth = std::cos(th);
    const double s1 = std::sin(alpha * (theta0 + th));
    const double c2 = std::cos(alpha * theta0 + (alpha - 1.0) * th);
    if (!(cth > 0.0) || !(s1 > 0.0) || !(c2 > 0.0))
      return (alpha < 1.0) ? kInf : -kInf;  // limit at the right endpoint
    return log_cos_alpha_theta0 / (alpha - 1.0) +
           expo * (std::log(cth) - std::log(s1)) + std::log(c2) -
           std::log(cth);
  };
  const double result = integrate_plateau_drop(log_v, log_s, lo, hi);
  const double sgn = (alpha < 1.0) ? 1.0 : -1.0;
  return std::clamp(c1 + sgn * result / kPi, 0.0, 1.0);
}

// shift between the S0 and the characteristic-function (S1) parameterization
double s0_shift(double alpha) {
  return -std::tan(kPi * alpha / 2.0);  // = zeta for beta = 1
}

}  // namespace

double stable_cdf(const StableLaw& law, double x) {
  if (law.alpha >= 2.0) return normal_cdf(x);
  if (std::abs(law.alpha - 1.0) < kAlphaOneBand)
    return stable_cdf_alpha1(x, 1.0);
  // X_s1 = X_s0 - zeta, so F_s1(x) = F_s0(x + zeta)
  return stable_cdf_s0(x + s0_shift(law.alpha), law.alpha, 1.0);
}

double stable_cms_draw(const StableLaw& law, double u, double w) {
  const double theta = kPi * (u - 0.5);
  const double expw = -std::log(w);  // Exp(1)
  const double alpha = law.alpha;
  if (alpha >= 2.0) {
    // normal convention: inverse-CDF of the first uniform
    return normal_quantile(u);
  }
  if (std::abs(alpha - 1.0) < kAlphaOneBand) {
    const double a = kPi / 2.0 + theta;
    return (2.0 / kPi) *
           (a * std::tan(theta) -
            std::log((kPi / 2.0) * expw * std::cos(theta) / a));
  }
  const double tan_half = std::tan(kPi * alpha / 2.0);
  const double b0 = std::atan(tan_half) / alpha;
  const double scale = std::pow(1.0 + tan_half * tan_half, 0.5 / alpha);
  return scale * std::sin(alpha * (theta + b0)) /
         std::pow(std::cos(theta), 1.0 / alpha) *
         std::pow(std::cos(theta - alpha * (theta + b0)) / expw,
                  (1.0 - alpha) / alpha);
}

double stable_quantile(const StableLaw& law, double p, StableMethod method,
                       std::uint64_t mc_n, std::uint64_t mc_seed) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("stable_quantile: p must be in (0,1), got " +
                            std::to_string(p));
  if (law.alpha >= 2.0) return normal_quantile(p);

  if (method == StableMethod::MonteCarlo) {
    std::vector<double> draws(mc_n);
    rng::RandomStream stream(mc_seed, rng::kLaneStableCms, 0);
    for (std::uint64_t i = 0; i < mc_n; ++i) {
      const double u = stream.uniform();
      const double w = stream.uniform();
      draws[i] = stable_cms_draw(law, u, w);
    }
    const std::size_t k =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::ceil(p * static_cast<double>(mc_n))));
    std::nth_element(draws.begin(), draws.begin() + (k - 1), draws.end());
    return draws[k - 1];
  }

  auto cdf = [&](double x) { return stable_cdf(law, x); };
  // bracket the quantile in the characteristic-function parameterization
  double lo, hi;
  if (law.alpha < 1.0) {
    lo = 0.0;  // support is [0, inf)
    hi = 1.0;
    int guard = 0;
    while (cdf(hi) < p) {
      hi *= 4.0;
      if (++guard > 600) throw std::runtime_error("stable_quantile: no upper bracket");
    }
  } else {
    lo = -1.0;
    hi = 1.0;
    int guard = 0;
    while (cdf(lo) > p) {
      lo *= 4.0;
      if (++guard > 600) throw std::runtime_error("stable_quantile: no lower bracket");
    }
    guard = 0;
    while (cdf(hi) < p) {
      hi *= 4.0;
      if (++guard > 600) throw std::runtime_error("stable_quantile: no upper bracket");
    }
  }
  auto f = [&](double x) { return cdf(x) - p; };
  const RootBracket br(lo, hi, cdf(lo) - p, cdf(hi) - p);
  return find_root(f, br, 1e-11).x;
}

}  // namespace pvmerge::special
