#include "idlab/deconv.hpp"

#include "idlab/parallel.hpp"

#include <algorithm>

namespace idlab {

Eigen::MatrixXd build_kernel_matrix(const IndexModel& index, std::size_t w, double z2, const Grid1D& z1_grid,
                                    const Grid1D& v_grid) {
  if (z2 == 0.0 || !std::isfinite(z2)) throw std::invalid_argument("build_kernel_matrix: z2 must be finite and nonzero");
  if (w >= index.w_count()) throw std::invalid_argument("build_kernel_matrix: w out of range");
  const double dv = v_grid.spacing();
  Eigen::MatrixXd a(z1_grid.n, v_grid.n);
  for (int i = 0; i < z1_grid.n; ++i) {
    const double m = index.mean_shift(w, z1_grid.node(i));
    for (int j = 0; j < v_grid.n; ++j) a(i, j) = gaussian_pdf(v_grid.node(j) / z2 - m) * dv / std::abs(z2);
  }
  const double worst = a.rowwise().sum().minCoeff();
  if (worst < 0.999)
    throw std::invalid_argument("build_kernel_matrix: v grid too narrow (row mass " + std::to_string(worst) +
                                " < 0.999)");
  return a;
}

namespace {

// Pseudoinverse of the (n-1) x n first-difference matrix: centered cumulative steps.
Eigen::MatrixXd difference_pinv(long n) {
  Eigen::MatrixXd c(n, n - 1);
  for (long j = 0; j < n; ++j)
    for (long k = 0; k < n - 1; ++k) c(j, k) = j > k ? 1.0 : 0.0;
  c.rowwise() -= c.colwise().mean();
  return c;
}

Eigen::MatrixXd row_normalized(const Eigen::MatrixXd& a) {
  return a.array().colwise() / a.rowwise().sum().array();
}

Eigen::MatrixXd differences(const Eigen::MatrixXd& x) {
  return x.bottomRows(x.rows() - 1) - x.topRows(x.rows() - 1);
}

double floor_scale(const RegularizedInverse& core) {
  if (const auto* t = std::get_if<Tikhonov>(&core.regularization())) return std::sqrt(t->lambda);
  return core.first_discarded();
}

Grid1D default_axis(double mean_lo, double mean_hi, double sd, const DeconvOptions& opt) {
  return Grid1D(mean_lo - opt.sd_pad * sd, mean_hi + opt.sd_pad * sd, opt.v_nodes);
}

// Clip to [0, 1], or project each node onto the simplex when every outcome is present.
void correct(std::vector<Eigen::MatrixXd>& values, bool simplex) {
  if (!simplex) {
    for (auto& v : values) v = v.cwiseMax(0.0).cwiseMin(1.0);
    return;
  }
  const std::size_t K = values.size();
  Eigen::VectorXd p(static_cast<long>(K));
  for (long i = 0; i < values[0].rows(); ++i)
    for (long j = 0; j < values[0].cols(); ++j) {
      for (std::size_t k = 0; k < K; ++k) p(static_cast<long>(k)) = values[k](i, j);
      p = project_to_simplex(p);
      for (std::size_t k = 0; k < K; ++k) values[k](i, j) = p(static_cast<long>(k));
    }
}

double excursion(const Eigen::MatrixXd& x, const std::vector<Grid1D>& axes,
                 const std::vector<std::pair<double, double>>& window) {
  double worst = 0.0;
  for (long i = 0; i < x.rows(); ++i) {
    const double v1 = axes[0].node(static_cast<int>(i));
    if (v1 < window[0].first || v1 > window[0].second) continue;
    for (long j = 0; j < x.cols(); ++j) {
      if (axes.size() == 2) {
        const double v2 = axes[1].node(static_cast<int>(j));
        if (v2 < window[1].first || v2 > window[1].second) continue;
      }
      worst = std::max({worst, x(i, j) - 1.0, -x(i, j)});
    }
  }
  return worst;
}

std::vector<int> resolve_outcomes(const CCPTable& mu, const std::vector<std::string>& requested,
                                  const std::vector<std::string>& fallback) {
  const auto& labels = requested.empty() ? fallback : requested;
  std::vector<int> out;
  for (const auto& l : labels) {
    const int k = mu.outcome_index(l);
    if (std::find(out.begin(), out.end(), k) != out.end()) throw std::invalid_argument("duplicate outcome '" + l + "'");
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

KernelInverse::KernelInverse(const Eigen::MatrixXd& kernel, const Regularization& reg)
    : kernel_(row_normalized(kernel)),
      core_([&] {
        const Eigen::MatrixXd ad = row_normalized(kernel) * difference_pinv(kernel.cols());
        return RegularizedInverse(ad.rowwise() - ad.colwise().mean(), reg);
      }()) {
  const long m = kernel_.rows(), n = kernel_.cols();
  Eigen::MatrixXd pinv_core = core_.as_matrix();              // (n-1) x m
  pinv_core.colwise() -= pinv_core.rowwise().mean();          // right-multiply by P
  const Eigen::MatrixXd g = difference_pinv(n) * pinv_core;   // n x m
  const Eigen::RowVectorXd level =
      (Eigen::RowVectorXd::Ones(m) - Eigen::RowVectorXd::Ones(m) * kernel_ * g) / static_cast<double>(m);
  map_ = g + Eigen::VectorXd::Ones(n) * level;
}

double KernelInverse::difference_floor(double difference_norm) const {
  const double m = static_cast<double>(kernel_.rows());
  return std::max(floor_scale(core_) * difference_norm, 1e-9 * std::sqrt(m));
}

double KernelInverse::noise_floor(const Eigen::VectorXd& solution) const {
  return difference_floor(differences(solution).norm());
}

int ChoiceKernel::outcome_position(const std::string& label) const {
  const auto it = std::find(outcomes.begin(), outcomes.end(), label);
  if (it == outcomes.end()) throw std::invalid_argument("kernel has no outcome '" + label + "'");
  return static_cast<int>(it - outcomes.begin());
}

KernelLayout default_layout(Family family) {
  return family == Family::Binary ? KernelLayout::PooledScaled : KernelLayout::PerPoint;
}

std::vector<KernelRecovery> recover_h(const CCPTable& mu, const IndexModel& index, KernelLayout layout,
                                      const DeconvOptions& opt) {
  index.validate();
  if (mu.z1_grids.size() != 1) throw std::invalid_argument("recover_h: expected a single-agent CCP table");
  if (mu.w_levels != index.w_levels) throw std::invalid_argument("recover_h: CCP and index w levels differ");
  const Grid1D& zg = mu.z1_grids[0];
  const std::vector<int> ystar = resolve_outcomes(mu, opt.outcomes, mu.outcomes);
  const bool simplex = ystar.size() == mu.outcomes.size();

  struct Task {
    std::size_t w;
    std::vector<std::size_t> z2;
    int label;
  };
  std::vector<Task> tasks;
  for (std::size_t w = 0; w < index.w_count(); ++w) {
    if (layout == KernelLayout::PooledScaled) {
      Task t{w, {}, -1};
      for (std::size_t k = 0; k < mu.z2_points.size(); ++k) t.z2.push_back(k);
      tasks.push_back(t);
    } else {
      for (std::size_t k = 0; k < mu.z2_points.size(); ++k) tasks.push_back({w, {k}, static_cast<int>(k)});
    }
  }

  std::vector<KernelRecovery> out(tasks.size());
  parallel_for(static_cast<long>(tasks.size()), [&](long ti) {
    const Task& task = tasks[ti];
    auto scale_of = [&](std::size_t k) {
      if (layout == KernelLayout::PerPoint) return 1.0;
      const double s = mu.z2_points[k](0);
      if (s == 0.0) throw std::invalid_argument("recover_h: z2 = 0 violates the kernel precondition");
      return s;
    };

    double mlo = INFINITY, mhi = -INFINITY, sd = 0.0;
    for (std::size_t k : task.z2) {
      const double s = scale_of(k);
      for (double z : {zg.lo, zg.hi}) {
        const double m = s * index.mean_shift(task.w, z);
        mlo = std::min(mlo, m);
        mhi = std::max(mhi, m);
      }
      sd = std::max(sd, std::abs(s));
    }
    const Grid1D vg = opt.v_grids.empty() ? default_axis(mlo, mhi, sd, opt) : opt.v_grids.at(0);

    std::vector<Eigen::MatrixXd> blocks;
    std::vector<long> rows;
    double min_mass = INFINITY;
    for (std::size_t k : task.z2) {
      const Eigen::MatrixXd a = build_kernel_matrix(index, task.w, scale_of(k), zg, vg);
      min_mass = std::min(min_mass, a.rowwise().sum().minCoeff());
      for (int i = 0; i < zg.n; ++i) {
        const long r = static_cast<long>(mu.row(task.w, k, i));
        if (mu.values.row(r).hasNaN()) continue;
        blocks.push_back(a.row(i));
        rows.push_back(r);
      }
    }
    if (rows.size() < 3) throw NumericalError("recover_h: fewer than 3 non-empty CCP cells");
    Eigen::MatrixXd a(static_cast<long>(rows.size()), vg.n);
    for (std::size_t r = 0; r < rows.size(); ++r) a.row(static_cast<long>(r)) = blocks[r];
    const KernelInverse inv(a, opt.reg);

    KernelRecovery& res = out[ti];
    ChoiceKernel& h = res.kernel;
    DeconvDiagnostics& d = res.diagnostics;
    h.w = index.w_levels[task.w];
    h.z2_index = task.label;
    h.v_axes = {vg};
    h.support = {{mlo - opt.support_pad * sd, mhi + opt.support_pad * sd}};
    d.singular_values = {inv.core().singular_values()};
    d.regularization = to_string(opt.reg);
    d.rank = {inv.core().rank_used()};
    d.first_discarded = {inv.core().first_discarded()};
    d.min_row_mass = min_mass;
    d.sum_projected = simplex;

    for (int y : ystar) {
      Eigen::VectorXd b(static_cast<long>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) b(static_cast<long>(r)) = mu.values(rows[r], y);
      const Eigen::VectorXd x = inv.solve(b);
      const double resid = (inv.kernel() * x - b).norm();
      const double floor = inv.noise_floor(x);
      d.residual_norm.push_back(resid);
      d.noise_floor.push_back(floor);
      if (resid > opt.misspec_factor * floor) d.misspecified = true;
      h.outcomes.push_back(mu.outcomes[y]);
      h.values.push_back(x);
      d.overshoot = std::max(d.overshoot, excursion(x, h.v_axes, h.support));
    }
    correct(h.values, simplex);
    d.overshoot_exceeded = d.overshoot > opt.overshoot_tolerance;
  });
  return out;
}

std::vector<KernelRecovery> recover_h_game(const CCPTable& mu, const std::array<IndexModel, 2>& index,
                                           const DeconvOptions& opt) {
  if (mu.z1_grids.size() != 2) throw std::invalid_argument("recover_h_game: expected a two-player CCP table");
  if (mu.values.hasNaN()) throw std::invalid_argument("recover_h_game: CCP table has empty cells");
  for (const auto& ix : index) {
    ix.validate();
    if (ix.w_levels != mu.w_levels) throw std::invalid_argument("recover_h_game: CCP and index w levels differ");
  }
  const std::vector<int> ystar = resolve_outcomes(mu, opt.outcomes, {"00", "11"});
  const bool simplex = ystar.size() == mu.outcomes.size();

  std::vector<KernelRecovery> out(mu.w_levels.size());
  for (std::size_t w = 0; w < mu.w_levels.size(); ++w) {
    std::vector<Grid1D> axes;
    std::vector<std::pair<double, double>> window;
    std::vector<KernelInverse> inv;
    std::vector<double> norm2;
    double min_mass = INFINITY;
    for (int a = 0; a < 2; ++a) {
      const Grid1D& zg = mu.z1_grids[a];
      const double m0 = index[a].mean_shift(w, zg.lo), m1 = index[a].mean_shift(w, zg.hi);
      const double lo = std::min(m0, m1), hi = std::max(m0, m1);
      axes.push_back(opt.v_grids.size() == 2 ? opt.v_grids[a] : default_axis(lo, hi, 1.0, opt));
      window.emplace_back(lo - opt.support_pad, hi + opt.support_pad);
      const Eigen::MatrixXd k = build_kernel_matrix(index[a], w, 1.0, zg, axes[a]);
      min_mass = std::min(min_mass, k.rowwise().sum().minCoeff());
      inv.emplace_back(k, opt.reg);
      norm2.push_back(Eigen::JacobiSVD<Eigen::MatrixXd>(inv.back().kernel()).singularValues()(0));
    }

    KernelRecovery& res = out[w];
    ChoiceKernel& h = res.kernel;
    DeconvDiagnostics& d = res.diagnostics;
    h.w = mu.w_levels[w];
    h.z2_index = 0;
    h.v_axes = axes;
    h.support = window;
    d.regularization = to_string(opt.reg);
    for (const auto& i : inv) {
      d.singular_values.push_back(i.core().singular_values());
      d.rank.push_back(i.core().rank_used());
      d.first_discarded.push_back(i.core().first_discarded());
    }
    d.min_row_mass = min_mass;
    d.sum_projected = simplex;

    h.values.resize(ystar.size());
    d.residual_norm.resize(ystar.size());
    d.noise_floor.resize(ystar.size());
    parallel_for(static_cast<long>(ystar.size()), [&](long k) {
      const Eigen::MatrixXd m = mu.slice(static_cast<std::size_t>(ystar[k]), w, 0);
      const Eigen::MatrixXd x = inv[0].map() * m * inv[1].map().transpose();
      d.residual_norm[k] = (inv[0].kernel() * x * inv[1].kernel().transpose() - m).norm();
      d.noise_floor[k] = inv[0].difference_floor(differences(x).norm()) * norm2[1] +
                         inv[1].difference_floor(differences(x.transpose()).norm()) * norm2[0];
      h.values[k] = x;
    });
    for (std::size_t k = 0; k < ystar.size(); ++k) {
      h.outcomes.push_back(mu.outcomes[ystar[k]]);
      if (d.residual_norm[k] > opt.misspec_factor * d.noise_floor[k]) d.misspecified = true;
      d.overshoot = std::max(d.overshoot, excursion(h.values[k], axes, window));
    }
    correct(h.values, simplex);
    d.overshoot_exceeded = d.overshoot > opt.overshoot_tolerance;
  }
  return out;
}

std::vector<double> level_crossings(const Eigen::VectorXd& values, const Grid1D& grid, double level, double lo,
                                    double hi) {
  std::vector<double> out;
  for (int i = 0; i + 1 < grid.n; ++i) {
    if (grid.node(i + 1) < lo || grid.node(i) > hi) continue;
    const double s0 = values(i) - level, s1 = values(i + 1) - level;
    if ((s0 >= 0.0) == (s1 >= 0.0)) continue;
    const double t = s0 / (s0 - s1);
    const double x = grid.node(i) + t * grid.spacing();
    if (x >= lo && x <= hi) out.push_back(x);
  }
  return out;
}

GammaEstimate recover_gamma(const ChoiceKernel& h, double band, double transition_halfwidth) {
  if (h.v_axes.size() != 1) throw std::invalid_argument("recover_gamma: expected a one-dimensional kernel");
  const int k = h.outcome_position("1");
  const Eigen::VectorXd x = h.values[k].col(0);
  const Grid1D& g = h.v_axes[0];
  const auto [lo, hi] = h.support.at(0);
  GammaEstimate est;
  const std::vector<double> cross = level_crossings(x, g, 0.5, lo, hi);
  if (cross.size() != 1) {
    est.band_violation = 1.0;
    return est;
  }
  est.crossing = cross.front();
  double worst = 0.0;
  bool rising = false;
  for (int i = 0; i < g.n; ++i) {
    const double v = g.node(i);
    if (v < lo || v > hi) continue;
    if (v < est.crossing - transition_halfwidth) worst = std::max(worst, std::abs(x(i)));
    else if (v > est.crossing + transition_halfwidth) {
      worst = std::max(worst, std::abs(x(i) - 1.0));
      rising = true;
    }
  }
  est.band_violation = worst;
  est.step = rising && worst <= band;
  if (est.step) est.gamma = -est.crossing;
  return est;
}

}  // namespace idlab
