#include "idlab/betaid.hpp"

#include <algorithm>

namespace idlab {

namespace {

constexpr int kAccuracy = 4;
constexpr int kEdge = 2;  // cells closer to an edge use lower-order stencils

bool interior(const EtaSurface& s, int i, int j) {
  return i >= kEdge && i < s.eta.axes[0].n - kEdge && j >= kEdge && j < s.eta.axes[1].n - kEdge;
}

double grad_cutoff(const EtaSurface& s, double rel) {
  double mx = 0.0;
  for (int i = 0; i < s.eta.axes[0].n; ++i)
    for (int j = 0; j < s.eta.axes[1].n; ++j)
      if (interior(s, i, j)) mx = std::max(mx, std::abs(s.d1.values(i, j)));
  return rel * mx;
}

struct Design {
  Eigen::VectorXd a_minus_z1;
  Eigen::VectorXd b;
  std::vector<std::pair<int, int>> cells;
};

Design design(const EtaSurface& s, double tau_grad_rel) {
  const double cut = grad_cutoff(s, tau_grad_rel);
  Design d;
  std::vector<double> lhs, rhs;
  const Grid1D& g1 = s.eta.axes[0];
  const Grid1D& g2 = s.eta.axes[1];
  for (int i = 0; i < g1.n; ++i)
    for (int j = 0; j < g2.n; ++j) {
      const double d1 = s.d1.values(i, j);
      if (!interior(s, i, j) || !(std::abs(d1) > cut)) continue;
      const double z1 = g1.node(i), z2 = g2.node(j);
      lhs.push_back((z2 * s.d2.values(i, j) - s.eta_tilde.values(i, j)) / d1 - z1);
      rhs.push_back(s.d11.values(i, j) / d1);
      d.cells.emplace_back(i, j);
    }
  d.a_minus_z1 = Eigen::Map<Eigen::VectorXd>(lhs.data(), static_cast<long>(lhs.size()));
  d.b = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<long>(rhs.size()));
  return d;
}

}  // namespace

EtaSurface build_eta(const GriddedFn& eta) {
  if (eta.axes.size() != 2) throw std::invalid_argument("build_eta: surface needs (z1, z2) axes");
  if (eta.axes[0].n < 5 || eta.axes[1].n < 5)
    throw std::invalid_argument("build_eta: need at least 5 nodes per axis for second differences");
  const Grid1D& g2 = eta.axes[1];
  if (g2.lo <= 0.0 && g2.hi >= 0.0) throw std::invalid_argument("build_eta: z2 grid must be bounded away from 0");
  EtaSurface s;
  s.eta = eta;
  Eigen::MatrixXd tilde = eta.values;
  for (int j = 0; j < g2.n; ++j) tilde.col(j) *= g2.node(j);
  s.eta_tilde = GriddedFn(eta.axes, tilde);
  s.d1 = partial_derivative(s.eta_tilde, 0, 1, kAccuracy);
  s.d11 = partial_derivative(s.eta_tilde, 0, 2, kAccuracy);
  s.d2 = partial_derivative(s.eta_tilde, 1, 1, kAccuracy);
  return s;
}

EtaSurface build_eta(const CCPTable& mu, const std::string& y_star, const std::string& w) {
  if (mu.z1_grids.size() != 1) throw std::invalid_argument("build_eta: expected a single-agent CCP table");
  const auto wit = std::find(mu.w_levels.begin(), mu.w_levels.end(), w);
  if (wit == mu.w_levels.end()) throw std::invalid_argument("build_eta: unknown w level '" + w + "'");
  const std::size_t wi = static_cast<std::size_t>(wit - mu.w_levels.begin());
  const int y = mu.outcome_index(y_star);
  const std::size_t n2 = mu.z2_points.size();
  if (n2 < 5) throw std::invalid_argument("build_eta: need at least 5 z2 points");
  for (const auto& z : mu.z2_points)
    if (z.size() != 1) throw std::invalid_argument("build_eta: z2 points must be scalars");
  const double lo = mu.z2_points.front()(0), hi = mu.z2_points.back()(0);
  const Grid1D g2(lo, hi, static_cast<int>(n2));
  for (std::size_t k = 0; k < n2; ++k)
    if (std::abs(mu.z2_points[k](0) - g2.node(static_cast<int>(k))) > 1e-9 * std::max(1.0, std::abs(hi - lo)))
      throw std::invalid_argument("build_eta: z2 points must form an increasing uniform grid");
  Eigen::MatrixXd eta(mu.z1_grids[0].n, static_cast<long>(n2));
  for (std::size_t k = 0; k < n2; ++k) eta.col(static_cast<long>(k)) = mu.slice(static_cast<std::size_t>(y), wi, k).col(0);
  if (eta.hasNaN()) throw std::invalid_argument("build_eta: CCP table has empty cells");
  EtaSurface s = build_eta(GriddedFn({mu.z1_grids[0], g2}, eta));
  s.y_star = y_star;
  s.w = w;
  return s;
}

DegeneracyReport check_degeneracy(const EtaSurface& s, double tau_deg, double tau_grad_rel) {
  DegeneracyReport rep;
  if (s.d1.values.cwiseAbs().maxCoeff() <= 1e-12) {
    rep.reason = "flat surface: d eta_tilde / d z1 vanishes on the whole grid";
    return rep;
  }
  const double cut = grad_cutoff(s, tau_grad_rel);
  const Grid1D& g1 = s.eta.axes[0];
  const double L = g1.hi - g1.lo, h = g1.spacing();
  auto valid = [&](int i, int j) { return interior(s, i, j) && std::abs(s.d1.values(i, j)) > cut; };
  auto ratio = [&](int i, int j) { return s.d11.values(i, j) / s.d1.values(i, j); };
  bool any = false;
  for (int i = 0; i < g1.n; ++i)
    for (int j = 0; j < s.eta.axes[1].n; ++j) {
      if (!valid(i, j) || i == 0 || i + 1 >= g1.n || !valid(i - 1, j) || !valid(i + 1, j)) continue;
      any = true;
      const double stat = std::abs(ratio(i + 1, j) - ratio(i - 1, j)) / (2 * h) * L * L;
      if (stat > rep.statistic) {
        rep.statistic = stat;
        rep.witness_z1 = i;
        rep.witness_z2 = j;
      }
    }
  if (!any) {
    rep.reason = "no interior cell with a usable z1 gradient";
    return rep;
  }
  rep.degenerate = !(rep.statistic > tau_deg);
  if (rep.degenerate) rep.reason = "eta is exponential or affine in z1 (log-derivative ratio is constant)";
  return rep;
}

double identity_residual(const EtaSurface& s, double ratio, double beta1_sq, double tau_grad_rel) {
  const Design d = design(s, tau_grad_rel);
  if (d.cells.empty()) throw NumericalError("identity_residual: no usable cells");
  const Eigen::VectorXd r = (ratio + d.b.array() / beta1_sq).matrix() - d.a_minus_z1;
  return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

BetaEstimate identify_beta(const EtaSurface& s, const SignInfo& sign, const BetaOptions& opt) {
  if (sign.sign != 1 && sign.sign != -1) throw std::invalid_argument("identify_beta: sign must be +1 or -1");
  BetaEstimate est;
  est.degeneracy = check_degeneracy(s, opt.tau_deg, opt.tau_grad_rel);
  if (est.degeneracy.degenerate) throw NumericalError("identify_beta: degenerate surface (" + est.degeneracy.reason + ")");

  const Design d = design(s, opt.tau_grad_rel);
  if (d.cells.size() < 3) throw NumericalError("identify_beta: fewer than 3 usable cells");
  Eigen::MatrixXd x(static_cast<long>(d.cells.size()), 2);
  x.col(0).setOnes();
  x.col(1) = d.b;
  const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(d.a_minus_z1);
  const double r = coef(0), sinv = coef(1);
  if (!(sinv > 0.0)) throw NumericalError("identify_beta: fitted 1/beta1^2 is not positive (inconsistent surface)");

  est.ratio = r;
  est.beta1_sq = 1.0 / sinv;
  const Eigen::VectorXd resid = x * coef - d.a_minus_z1;
  est.cells_used = static_cast<int>(d.cells.size());
  est.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
  est.residuals = Eigen::MatrixXd::Constant(s.eta.values.rows(), s.eta.values.cols(),
                                            std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < d.cells.size(); ++k) est.residuals(d.cells[k].first, d.cells[k].second) = resid(static_cast<long>(k));
  est.misspecified = est.rms_residual > opt.residual_tolerance;

  const double mag = std::sqrt(est.beta1_sq);
  if (sign.of == SignInfo::Of::Beta1) {
    est.beta1 = sign.sign * mag;
  } else {
    if (std::abs(r) < opt.zero_ratio)
      throw std::invalid_argument("identify_beta: beta0/beta1 is zero, so the sign of beta1 must be supplied");
    est.beta1 = sign.sign * (r > 0.0 ? 1.0 : -1.0) * mag;
  }
  est.beta0 = r * est.beta1;
  return est;
}

SignVerdict identify_beta1_sign_multinomial(const CCPTable& mu, const std::string& w, double tau) {
  if (mu.z1_grids.size() != 1) throw std::invalid_argument("sign identification: expected a single-agent CCP table");
  const auto wit = std::find(mu.w_levels.begin(), mu.w_levels.end(), w);
  if (wit == mu.w_levels.end()) throw std::invalid_argument("sign identification: unknown w level '" + w + "'");
  const std::size_t wi = static_cast<std::size_t>(wit - mu.w_levels.begin());
  SignVerdict v;
  for (std::size_t k = 0; k < mu.z2_points.size(); ++k) {
    const Eigen::VectorXd& z = mu.z2_points[k];
    if (z(0) != 0.0 && (z.array() == z(0)).all() && (v.z2_index < 0 || z(0) > 0.0)) {
      v.z2_index = static_cast<int>(k);
      if (z(0) > 0.0) break;
    }
  }
  if (v.z2_index < 0) throw std::invalid_argument("sign identification: no z2 point with equal nonzero coordinates");
  const Grid1D& g = mu.z1_grids[0];
  const Eigen::VectorXd y = mu.slice(0, wi, static_cast<std::size_t>(v.z2_index)).col(0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < g.n; ++i) {
    if (std::isnan(y(i))) continue;
    const double x = g.node(i);
    sx += x;
    sy += y(i);
    sxx += x * x;
    sxy += x * y(i);
    ++n;
  }
  if (n < 2) throw NumericalError("sign identification: fewer than two non-empty cells");
  v.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (std::abs(v.slope) >= tau) {
    const double zsign = mu.z2_points[v.z2_index](0) > 0.0 ? 1.0 : -1.0;
    v.sign = v.slope * zsign < 0.0 ? 1 : -1;
  }
  return v;
}

}  // namespace idlab
