#include "caputo_ms/tfbm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "caputo_ms/errors.hpp"
#include "caputo_ms/parallel.hpp"
#include "caputo_ms/quadrature.hpp"
#include "caputo_ms/rng.hpp"
#include "caputo_ms/special.hpp"

namespace caputo_ms {

namespace {

constexpr double kRequiredRel = 1e-8;

const QuadratureOptions kTight{1e-12, 0.0, 400};

// int_0^b u^beta G(u) du with G regular at 0, via u = b v^(1/(beta+1)).
template <class G>
QuadratureResult power_weighted(G&& g, double b, double beta, const QuadratureOptions& opt) {
  const double p = 1.0 / (beta + 1.0);
  const double scale = std::pow(b, beta + 1.0) * p;
  QuadratureResult r = integrate([&](double v) { return g(b * std::pow(v, p)); }, 0.0, 1.0, opt);
  r.value *= scale;
  r.error *= scale;
  return r;
}

// int_0^b F(u) du where F(u) ~ u^beta at 0, without separating the power.
template <class F>
QuadratureResult power_graded(F&& f, double b, double beta, const QuadratureOptions& opt) {
  const double p = 1.0 / (beta + 1.0);
  return integrate([&](double v) { return f(b * std::pow(v, p)) * b * p * std::pow(v, p - 1.0); }, 0.0, 1.0,
                   opt);
}

double require(const QuadratureResult& r, double reference, const char* what) {
  if (!std::isfinite(r.value) || r.error > kRequiredRel * std::abs(reference) + 1e-300)
    throw NumericError(std::string(what) + ": relative tolerance 1e-8 not reached (value " +
                       std::to_string(r.value) + ", error estimate " + std::to_string(r.error) + ")");
  return r.value;
}

// J1(k) = int_0^inf u^(H-3/2) (1+u)^(H-3/2) e^(-k u) du, k >= 0.
double j1(double hurst, double kappa) {
  const double b = hurst - 1.5;
  const QuadratureResult head =
      integrate([&](double v) { return std::pow(1.0 + std::pow(v, 1.0 / (hurst - 0.5)), b) *
                                       std::exp(-kappa * std::pow(v, 1.0 / (hurst - 0.5))); },
                0.0, 1.0, kTight);
  const double head_value = head.value / (hurst - 0.5);
  // u = 1/w on [1, inf): int_0^1 w^(1-2H) (1+w)^b e^(-k/w) dw.
  QuadratureOptions tail_opt = kTight;
  tail_opt.abs_tol = 1e-14 * head_value;
  const QuadratureResult tail = power_weighted(
      [&](double w) { return std::pow(1.0 + w, b) * (kappa > 0.0 ? std::exp(-kappa / w) : 1.0); }, 1.0,
      1.0 - 2.0 * hurst, tail_opt);
  QuadratureResult total{head_value + tail.value, head.error / (hurst - 0.5) + tail.error, 0, true};
  return require(total, total.value, "phi (first integral)");
}

// J2(k) = int_0^inf u^(H-1/2) (1+u)^(H-1/2) e^(-k u) du, k > 0.
double j2(double hurst, double kappa) {
  const double c = hurst - 0.5;
  const double p = 1.0 / (c + 1.0);
  const QuadratureResult head = integrate(
      [&](double v) { const double u = std::pow(v, p); return std::pow(1.0 + u, c) * std::exp(-kappa * u); }, 0.0,
      1.0, kTight);
  const double head_value = head.value * p;
  // u = 1 + s/k on [1, inf): e^(-k)/k int_0^inf (1+s/k)^c (2+s/k)^c e^(-s) ds.
  auto f = [&](double s) { return std::pow((1.0 + s / kappa) * (2.0 + s / kappa), c) * std::exp(-s); };
  const double pre = std::exp(-kappa) / kappa;
  QuadratureOptions tail_opt = kTight;
  tail_opt.abs_tol = 1e-14 * head_value / pre;
  const QuadratureResult near = integrate(f, 0.0, 4.0, tail_opt);
  const QuadratureResult far = integrate(f, 4.0, 64.0, tail_opt);
  QuadratureResult total{head_value + pre * (near.value + far.value),
                         head.error * p + pre * (near.error + far.error), 0, true};
  return require(total, total.value, "phi (second integral)");
}

// gap^(2-2H) phi(gap); finite and continuous at gap = 0.
double phi_regular(const NoiseParams& n, double gap) {
  const double h = n.hurst;
  const double lam = n.lambda;
  const double kappa = 2.0 * lam * gap;
  const double damp = std::exp(-lam * gap);
  double value = (h - 0.5) * (h - 0.5) * damp * j1(h, kappa);
  if (lam > 0.0 && gap > 0.0) value -= lam * lam * gap * gap * damp * j2(h, kappa);
  return value;
}

double kernel_fast(double alpha, double varrho, double inv_gamma, double lag) {
  return std::pow(lag, alpha - 1.0) * std::exp(-varrho * lag) * inv_gamma;
}

}  // namespace

void NoiseParams::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw ParameterError("Hurst index must lie in (1/2, 1), got " + std::to_string(hurst));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ParameterError("lambda must be non-negative, got " + std::to_string(lambda));
}

double phi_eval(const NoiseParams& n, double gap) {
  n.validate();
  if (!(gap > 0.0)) throw DomainError("phi is singular at gap 0; got gap " + std::to_string(gap));
  if (std::isinf(gap)) return 0.0;
  return std::pow(gap, 2.0 * n.hurst - 2.0) * phi_regular(n, gap);
}

double fbm_density_constant(const NoiseParams& n) {
  n.validate();
  return (n.hurst - 0.5) * (n.hurst - 0.5) * beta_fn(n.hurst - 0.5, 2.0 - 2.0 * n.hurst);
}

double phi_upper_bound(const NoiseParams& n, double gap) {
  if (!(gap > 0.0)) throw DomainError("phi_upper_bound needs gap > 0");
  return fbm_density_constant(n) * std::pow(gap, 2.0 * n.hurst - 2.0);
}

double tfbm_variance(const NoiseParams& n, double t) {
  n.validate();
  if (!(t >= 0.0)) throw DomainError("tfbm_variance needs t >= 0");
  if (t == 0.0) return 0.0;
  const double beta = 2.0 * n.hurst - 2.0;
  const double split = std::min(t, 1.0);
  const QuadratureOptions opt{1e-11, 0.0, 400};
  const QuadratureResult head = power_weighted([&](double u) { return phi_regular(n, u) * (t - u); }, split, beta, opt);
  double value = require(head, head.value, "tfbm_variance");
  if (t > split) {
    QuadratureOptions o = opt;
    o.abs_tol = 1e-13 * std::abs(value);
    value += require(integrate([&](double u) { return phi_eval(n, u) * (t - u); }, split, t, o), value,
                     "tfbm_variance");
  }
  return 2.0 * value;
}

IncrementCovariance::IncrementCovariance(const NoiseParams& n, const TimeGrid& grid) : params_(n), grid_(grid) {
  n.validate();
  const std::size_t steps = grid.steps();
  if (steps == 0) throw GridError("increment covariance needs at least one step");
  const double h = grid.dt();
  const double beta = 2.0 * n.hurst - 2.0;
  autocov_.assign(steps, 0.0);

  const QuadratureOptions opt{1e-11, 0.0, 400};
  // C_m = int phi(u) (h - |u - m h|)_+ du.
  const QuadratureResult c0 = power_weighted([&](double u) { return phi_regular(n, u) * (h - u); }, h, beta, opt);
  autocov_[0] = 2.0 * require(c0, c0.value, "increment covariance");
  QuadratureOptions off = opt;
  off.abs_tol = 1e-13 * autocov_[0];
  for (std::size_t m = 1; m < steps; ++m) {
    const double centre = static_cast<double>(m) * h;
    QuadratureResult lo;
    if (m == 1)
      lo = power_weighted([&](double u) { return phi_regular(n, u) * u; }, h, beta, off);
    else
      lo = integrate([&](double u) { return phi_eval(n, u) * (u - (centre - h)); }, centre - h, centre, off);
    const QuadratureResult hi =
        integrate([&](double u) { return phi_eval(n, u) * (centre + h - u); }, centre, centre + h, off);
    if (!lo.converged || !hi.converged || !std::isfinite(lo.value + hi.value))
      throw NumericError("increment covariance: quadrature failed at lag " + std::to_string(m));
    autocov_[m] = lo.value + hi.value;
  }

  const double max_diag = autocov_[0];
  Eigen::MatrixXd a(steps, steps);
  for (double jitter = 0.0;;) {
    for (std::size_t j = 0; j < steps; ++j)
      for (std::size_t i = j; i < steps; ++i) a(i, j) = autocov_[i - j];
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
    if (llt.info() == Eigen::Success) {
      jitter_ = jitter;
      break;
    }
    jitter = jitter == 0.0 ? 1e-12 * max_diag : jitter * 10.0;
    if (jitter > 1e-8 * max_diag * (1.0 + 1e-9))
      throw NumericError("increment covariance not positive definite after jitter 1e-8 * max diag (" +
                         std::to_string(steps) + " steps)");
  }
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  factor_ = std::move(a);
}

Eigen::MatrixXd IncrementCovariance::dense() const {
  const std::size_t n = size();
  Eigen::MatrixXd c(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) c(i, j) = (*this)(i, j);
  return c;
}

IncrementCovariance IncrementCovariance::leading(std::size_t steps) const {
  if (steps == 0 || steps > size()) throw GridError("leading block size out of range");
  IncrementCovariance out;
  out.params_ = params_;
  out.grid_ = grid_.prefix(steps);
  out.autocov_.assign(autocov_.begin(), autocov_.begin() + static_cast<std::ptrdiff_t>(steps));
  out.factor_ = factor_.topLeftCorner(steps, steps);
  out.jitter_ = jitter_;
  return out;
}

IncrementCovariance increment_cov(const NoiseParams& n, const TimeGrid& grid) { return IncrementCovariance(n, grid); }

void standard_normal_batch(std::size_t steps, std::size_t dim, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t first, std::size_t count, std::vector<Eigen::MatrixXd>& z) {
  if (count > kBatchWidth) throw DomainError("batch larger than the fixed batch width");
  z.resize(dim);
  for (auto& m : z) {
    m.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(kBatchWidth));
    m.setZero();
  }
  for (std::size_t r = 0; r < count; ++r) {
    ReplicateRng rng(seed, stream, first + r);
    for (std::size_t c = 0; c < dim; ++c) rng.fill_normal({z[c].col(static_cast<Eigen::Index>(r)).data(), steps});
  }
}

std::vector<IncrementPath> sample_increments(const IncrementCovariance& cov, std::size_t dim, std::uint64_t seed,
                                             std::uint64_t stream, std::uint64_t first, std::size_t count) {
  const std::size_t steps = cov.size();
  std::vector<Eigen::MatrixXd> z;
  standard_normal_batch(steps, dim, seed, stream, first, count, z);
  std::vector<IncrementPath> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    out[r].grid = cov.grid();
    out[r].dim = dim;
    out[r].replicate = first + r;
    out[r].increments.resize(steps * dim);
  }
  for (std::size_t c = 0; c < dim; ++c) {
    const Eigen::MatrixXd db = cov.factor().triangularView<Eigen::Lower>() * z[c];
    for (std::size_t r = 0; r < count; ++r)
      for (std::size_t j = 0; j < steps; ++j)
        out[r].increments[j * dim + c] = db(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r));
  }
  return out;
}

std::vector<SamplePath> sample_paths(const IncrementCovariance& cov, std::size_t reps, std::uint64_t seed,
                                     std::size_t dim, std::size_t workers) {
  if (reps == 0) throw DomainError("sample_paths needs reps >= 1");
  if (dim == 0) throw DomainError("dimension must be positive");
  std::vector<SamplePath> paths(reps);
  const std::size_t batches = (reps + kBatchWidth - 1) / kBatchWidth;
  const std::size_t steps = cov.size();
  parallel_for(batches, resolve_workers(workers), [&](std::size_t b, std::size_t) {
    const std::size_t first = b * kBatchWidth;
    const std::size_t count = std::min(kBatchWidth, reps - first);
    const auto inc = sample_increments(cov, dim, seed, 0, first, count);
    for (std::size_t r = 0; r < count; ++r) {
      SamplePath& p = paths[first + r];
      p.grid = cov.grid();
      p.dim = dim;
      p.replicate = first + r;
      p.values.assign((steps + 1) * dim, 0.0);
      for (std::size_t k = 1; k <= steps; ++k)
        for (std::size_t c = 0; c < dim; ++c)
          p.values[k * dim + c] = p.values[(k - 1) * dim + c] + inc[r].increments[(k - 1) * dim + c];
    }
  });
  return paths;
}

double convolution_variance(const FracParams& p, const NoiseParams& n, double t) {
  p.validate();
  n.validate();
  if (!(t > 0.0)) throw DomainError("convolution_variance needs t > 0");
  const double alpha = p.alpha;
  const double varrho = p.varrho;
  const double inv_gamma = 1.0 / std::tgamma(alpha);
  const double hb = 2.0 * n.hurst - 2.0;
  const QuadratureOptions inner_opt{1e-10, 0.0, 300};

  // int_0^y k(x) phi(y - x) dx, split at y/2 so each half has one endpoint singularity.
  auto inner = [&](double y) {
    const double half = 0.5 * y;
    const QuadratureResult a = power_weighted(
        [&](double x) { return std::exp(-varrho * x) * inv_gamma * phi_eval(n, y - x); }, half, alpha - 1.0,
        inner_opt);
    const QuadratureResult b = power_weighted(
        [&](double u) { return kernel_fast(alpha, varrho, inv_gamma, y - u) * phi_regular(n, u); }, half, hb,
        inner_opt);
    const double v = a.value + b.value;
    return require({v, a.error + b.error, 0, true}, std::abs(a.value) + std::abs(b.value), "convolution_variance");
  };
  auto outer = [&](double y) { return kernel_fast(alpha, varrho, inv_gamma, y) * inner(y); };

  const double c = 2.0 * alpha + 2.0 * n.hurst - 3.0;
  const double split = std::min(t, 0.5);
  const QuadratureOptions outer_opt{1e-9, 0.0, 300};
  const QuadratureResult head = power_graded(outer, split, c, outer_opt);
  double value = require(head, head.value, "convolution_variance");
  if (t > split) {
    QuadratureOptions o = outer_opt;
    o.abs_tol = 1e-12 * std::abs(value);
    value += require(integrate(outer, split, t, o), value, "convolution_variance");
  }
  return 2.0 * value;
}

double parseval_constant(const NoiseParams& n) {
  n.validate();
  return std::tgamma(2.0 * n.hurst - 1.0) * std::sin(std::numbers::pi * n.hurst) / std::numbers::pi;
}

MRhoAlphaH m_rho_alpha_h(const FracParams& p, const NoiseParams& n) {
  p.validate();
  n.validate();
  const double alpha = p.alpha;
  const double varrho = p.varrho;
  const double hurst = n.hurst;
  const double c = 2.0 * alpha + 2.0 * hurst - 3.0;
  const QuadratureOptions opt{1e-11, 0.0, 400};

  // int_0^1 v^(alpha-1) (1-v)^(2H-2) e^(-varrho r v) dv
  auto inner = [&](double r) {
    const QuadratureResult a = power_weighted(
        [&](double v) { return std::pow(1.0 - v, 2.0 * hurst - 2.0) * std::exp(-varrho * r * v); }, 0.5,
        alpha - 1.0, opt);
    const QuadratureResult b = power_weighted(
        [&](double w) { return std::pow(1.0 - w, alpha - 1.0) * std::exp(-varrho * r * (1.0 - w)); }, 0.5,
        2.0 * hurst - 2.0, opt);
    return require({a.value + b.value, a.error + b.error, 0, true}, a.value + b.value, "M time-domain inner");
  };
  const QuadratureOptions outer_opt{1e-10, 0.0, 400};
  const double r1 = 1.0 / varrho;
  const QuadratureResult head =
      power_weighted([&](double r) { return std::exp(-varrho * r) * inner(r); }, r1, c, outer_opt);
  double time = require(head, head.value, "M time-domain");
  auto smooth = [&](double r) { return std::exp(-varrho * r) * std::pow(r, c) * inner(r); };
  QuadratureOptions o = outer_opt;
  o.abs_tol = 1e-13 * std::abs(time);
  time += require(integrate(smooth, r1, 10.0 * r1, o), time, "M time-domain");
  time += require(integrate(smooth, 10.0 * r1, 40.0 * r1, o), time, "M time-domain");
  time *= 2.0;

  MRhoAlphaH out;
  out.time_domain = time;
  out.tail_bound = 2.0 * beta_fn(alpha, 2.0 * hurst - 1.0) * std::pow(varrho, -c - 1.0) * std::tgamma(c + 1.0) *
                   gamma_q(c + 1.0, 40.0);

  // int_0^inf x^(1-2H) (1+x^2)^(-alpha) dx; [1, inf) mapped by x = 1/y.
  const QuadratureResult s0 =
      power_weighted([&](double x) { return std::pow(1.0 + x * x, -alpha); }, 1.0, 1.0 - 2.0 * hurst, opt);
  const QuadratureResult s1 =
      power_weighted([&](double y) { return std::pow(1.0 + y * y, -alpha); }, 1.0, c, opt);
  const double spectral_integral = require({s0.value + s1.value, s0.error + s1.error, 0, true},
                                           s0.value + s1.value, "M spectral");
  const double ga = std::tgamma(alpha);
  out.spectral = parseval_constant(n) * ga * ga * 2.0 * std::pow(varrho, 2.0 - 2.0 * hurst - 2.0 * alpha) *
                 spectral_integral;

  const double rel = std::abs(out.time_domain - out.spectral) / std::abs(out.spectral);
  if (!(rel <= 1e-4))
    throw ConsistencyError("M_{varrho,alpha,H}: time-domain " + std::to_string(out.time_domain) + " vs spectral " +
                           std::to_string(out.spectral) + " (relative gap " + std::to_string(rel) + ")");
  return out;
}

}  // namespace caputo_ms
