#include "caputo_ms/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caputo_ms/errors.hpp"
#include "caputo_ms/parallel.hpp"

namespace caputo_ms {

NoiseContext::NoiseContext(const FracParams& frac, const NoiseParams& noise, const TimeGrid& grid)
    : frac_(frac), noise_(noise), grid_(grid), cov_(noise, grid) {
  const KernelWeights w(frac, grid);
  const auto n = static_cast<Eigen::Index>(grid.steps());
  Eigen::MatrixXd wbar = Eigen::MatrixXd::Zero(n, n);
  const double h = grid.dt();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index j = 0; j <= r; ++j) wbar(r, j) = w.lag(static_cast<std::size_t>(r - j)) / h;
  conv_ = wbar.triangularView<Eigen::Lower>() * cov_.factor();
}

bool NoiseContext::compatible(const FracParams& frac, const NoiseParams& noise, const TimeGrid& grid) const {
  return frac.alpha == frac_.alpha && frac.varrho == frac_.varrho && noise.hurst == noise_.hurst &&
         noise.lambda == noise_.lambda && grid.dt() == grid_.dt() && grid.steps() <= grid_.steps();
}

Ensemble::Ensemble(const Model& model, const TimeGrid& grid, std::shared_ptr<const NoiseContext> context)
    : model_(model), grid_(grid), weights_(model.frac, grid), context_(std::move(context)) {
  model_.validate();
  const std::size_t n = grid.steps();
  reversed_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) reversed_[static_cast<Eigen::Index>(i)] = weights_.lag(n - 1 - i);
  if (context_ && !context_->compatible(model.frac, model.noise, grid))
    throw DomainError("noise context does not match the model or grid");
}

std::size_t Ensemble::batch_count(std::size_t reps) { return (reps + kBatchWidth - 1) / kBatchWidth; }

Eigen::RowVectorXd Ensemble::cocycle_weights(std::size_t k_tau, std::size_t k_theta) const {
  const std::size_t target = k_tau + k_theta;
  if (target > grid_.steps()) throw DomainError("cocycle weights beyond the grid");
  Eigen::RowVectorXd w(static_cast<Eigen::Index>(k_tau));
  for (std::size_t j = 0; j < k_tau; ++j) w[static_cast<Eigen::Index>(j)] = weights_.lag(target - j - 1);
  return w;
}

namespace {

struct Workspace {
  std::vector<Eigen::MatrixXd> z, conv, db, x, g, drive;
  std::vector<double> xs, gs;
};

}  // namespace

void Ensemble::run(std::span<const CocycleState> scenarios, std::size_t steps, const MonteCarlo& mc, bool keep_drive,
                   const std::function<void(const BatchView&)>& visit) const {
  if (mc.reps == 0) throw DomainError("ensemble needs at least one replicate");
  if (steps > grid_.steps()) throw DomainError("ensemble horizon beyond the grid");
  const std::size_t d = model_.dim();
  for (const auto& s : scenarios) {
    if (s.dim != d) throw DomainError("scenario dimension does not match the field");
    if (s.grid.steps() < steps || s.grid.dt() != grid_.dt()) throw GridError("scenario forcing does not cover the run");
  }
  std::shared_ptr<const NoiseContext> ctx = context_;
  if (mc.noise && !ctx) ctx = std::make_shared<NoiseContext>(model_.frac, model_.noise, grid_);

  const auto W = static_cast<Eigen::Index>(kBatchWidth);
  const auto n = static_cast<Eigen::Index>(steps);
  const auto total = static_cast<Eigen::Index>(grid_.steps());
  const double h = grid_.dt();
  const std::size_t batches = batch_count(mc.reps);
  const std::size_t workers = std::min(resolve_workers(mc.workers), batches);
  std::vector<Workspace> spaces(workers);
  std::vector<std::vector<std::uint64_t>> diverged(batches);

  // Base points along each scenario's orbit.
  std::vector<std::vector<BasePoint>> orbit(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    orbit[s].resize(steps);
    for (std::size_t j = 0; j < steps; ++j) orbit[s][j] = model_.driving.flow(grid_.time(j), scenarios[s].base);
  }

  parallel_for(batches, workers, [&](std::size_t b, std::size_t worker) {
    Workspace& ws = spaces[worker];
    const std::uint64_t first = b * kBatchWidth;
    const std::size_t count = std::min<std::size_t>(kBatchWidth, mc.reps - first);
    ws.conv.resize(d);
    ws.db.resize(d);
    if (mc.noise) {
      const auto& L = ctx->covariance().factor();
      const auto& M = ctx->convolution();
      standard_normal_batch(steps, d, mc.seed, 0, first, count, ws.z);
      for (std::size_t c = 0; c < d; ++c) {
        ws.conv[c].noalias() = M.topLeftCorner(n, n).triangularView<Eigen::Lower>() * ws.z[c];
        if (keep_drive) ws.db[c].noalias() = L.topLeftCorner(n, n).triangularView<Eigen::Lower>() * ws.z[c];
      }
    }
    ws.x.resize(d);
    ws.g.resize(d);
    ws.drive.resize(keep_drive ? d : 0);
    ws.xs.resize(d);
    ws.gs.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      ws.x[c].resize(n + 1, W);
      ws.g[c].resize(n, W);
      if (keep_drive) ws.drive[c].resize(n, W);
    }

    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      const CocycleState& sc = scenarios[s];
      for (std::size_t c = 0; c < d; ++c) ws.x[c].row(0).setConstant(sc.f[c]);
      for (Eigen::Index k = 1; k <= n; ++k) {
        const Eigen::Index j = k - 1;
        const BasePoint pj = orbit[s][static_cast<std::size_t>(j)];
        for (Eigen::Index r = 0; r < W; ++r) {
          for (std::size_t c = 0; c < d; ++c) ws.xs[c] = ws.x[c](j, r);
          model_.field(ws.xs, pj, ws.gs);
          for (std::size_t c = 0; c < d; ++c) ws.g[c](j, r) = ws.gs[c];
        }
        for (std::size_t c = 0; c < d; ++c) {
          auto row = ws.x[c].row(k);
          row.noalias() = reversed_.segment(total - k, k).transpose() * ws.g[c].topRows(k);
          row.array() += sc.f[static_cast<std::size_t>(k) * d + c];
          if (mc.noise) row += ws.conv[c].row(j);
        }
      }
      // Divergence: any non-finite value or norm above the threshold.
      for (std::size_t r = 0; r < count; ++r) {
        bool bad = false;
        for (Eigen::Index k = 0; k <= n && !bad; ++k) {
          double sq = 0.0;
          for (std::size_t c = 0; c < d; ++c) sq += ws.x[c](k, static_cast<Eigen::Index>(r)) * ws.x[c](k, static_cast<Eigen::Index>(r));
          bad = !std::isfinite(sq) || sq > kDivergenceThreshold * kDivergenceThreshold;
        }
        if (bad) diverged[b].push_back(first + r);
      }
      if (keep_drive)
        for (std::size_t c = 0; c < d; ++c) {
          ws.drive[c] = ws.g[c];
          if (mc.noise) ws.drive[c] += ws.db[c] / h;
        }
      BatchView view;
      view.batch = b;
      view.scenario = s;
      view.first = first;
      view.count = count;
      view.steps = steps;
      view.x = &ws.x;
      view.drive = keep_drive ? &ws.drive : nullptr;
      visit(view);
    }
  });

  std::vector<std::uint64_t> ids;
  for (const auto& v : diverged) ids.insert(ids.end(), v.begin(), v.end());
  if (!ids.empty()) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::string list;
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) list += (i ? ", " : "") + std::to_string(ids[i]);
    if (ids.size() > 20) list += ", ...";
    throw DivergenceError(std::to_string(ids.size()) + " replicate(s) diverged: " + list);
  }
}

}  // namespace caputo_ms
