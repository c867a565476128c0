#include "idlab/model.hpp"

#include "idlab/parallel.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace idlab {

void IndexModel::validate() const {
  if (w_levels.empty()) throw std::invalid_argument("index model: at least one w level is required");
  const std::set<std::string> unique(w_levels.begin(), w_levels.end());
  if (unique.size() != w_levels.size()) throw std::invalid_argument("index model: w labels must be distinct");
  if (beta0.size() != w_levels.size() || beta1.size() != w_levels.size() || sign_info.size() != w_levels.size())
    throw std::invalid_argument("index model: beta0, beta1 and sign_info need one entry per w level");
  for (std::size_t w = 0; w < w_levels.size(); ++w) {
    if (!std::isfinite(beta0[w]) || !std::isfinite(beta1[w]))
      throw std::invalid_argument("index model: coefficients must be finite");
    if (beta1[w] == 0.0) throw std::invalid_argument("index model: beta1 must be nonzero (w = " + w_levels[w] + ")");
    if (sign_info[w].sign != 1 && sign_info[w].sign != -1)
      throw std::invalid_argument("index model: sign tags must be +1 or -1");
  }
}

std::size_t IndexModel::w_index(const std::string& label) const {
  const auto it = std::find(w_levels.begin(), w_levels.end(), label);
  if (it == w_levels.end()) throw std::invalid_argument("unknown w level '" + label + "'");
  return static_cast<std::size_t>(it - w_levels.begin());
}

int GMixture::dimension() const {
  if (kind == Kind::PointMass) return atoms.empty() ? 0 : static_cast<int>(atoms.front().size());
  return means.empty() ? 0 : static_cast<int>(means.front().size());
}

void GMixture::validate() const {
  if (probs.empty()) throw std::invalid_argument("g mixture: no components");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("g mixture: probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("g mixture: probabilities must sum to 1");
  const int d = dimension();
  if (d < 1) throw std::invalid_argument("g mixture: empty component vectors");
  if (kind == Kind::PointMass) {
    if (atoms.size() != probs.size()) throw std::invalid_argument("g mixture: one atom per probability");
    for (const auto& a : atoms) {
      if (a.size() != d) throw std::invalid_argument("g mixture: atoms must share one dimension");
      if (a.hasNaN()) throw std::invalid_argument("g mixture: atoms must not be NaN");
    }
  } else {
    if (means.size() != probs.size() || scales.size() != probs.size())
      throw std::invalid_argument("g mixture: one mean and one scale vector per probability");
    for (std::size_t c = 0; c < probs.size(); ++c) {
      if (means[c].size() != d || scales[c].size() != d)
        throw std::invalid_argument("g mixture: means and scales must share one dimension");
      if (!means[c].allFinite() || !scales[c].allFinite() || (scales[c].array() <= 0.0).any())
        throw std::invalid_argument("g mixture: means finite and scales > 0 required");
    }
  }
}

double GMixture::cdf(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) throw std::invalid_argument("g mixture cdf: argument dimension mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (kind == Kind::PointMass) {
      if ((atoms[c].array() <= x.array()).all()) total += probs[c];
    } else {
      double prod = 1.0;
      for (int k = 0; k < x.size(); ++k) prod *= gaussian_cdf_ext((x(k) - means[c](k)) / scales[c](k));
      total += probs[c] * prod;
    }
  }
  return total;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Binary: return "binary";
    case Family::Multinomial: return "multinomial";
    case Family::Bundles: return "bundles";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "binary") return Family::Binary;
  if (s == "multinomial") return Family::Multinomial;
  if (s == "bundles") return Family::Bundles;
  throw std::invalid_argument("unknown model family '" + s + "'");
}

int ModelSpec::inside_count() const {
  switch (family) {
    case Family::Binary: return 1;
    case Family::Multinomial: return J;
    case Family::Bundles: return (1 << J) - 1;
  }
  return 0;
}

Eigen::VectorXd ModelSpec::loadings(const Eigen::VectorXd& z2) const {
  if (family != Family::Bundles) return z2;
  Eigen::VectorXd a(inside_count());
  for (int k = 1; k <= inside_count(); ++k) {
    double s = 0.0;
    for (int j = 0; j < J; ++j)
      if (k & (1 << j)) s += z2(j);
    a(k - 1) = s;
  }
  return a;
}

void ModelSpec::validate() const {
  index.validate();
  if (family == Family::Binary && J != 1) throw std::invalid_argument("binary family requires J = 1");
  if (J < 1 || (family == Family::Bundles && J > 10)) throw std::invalid_argument("J must lie in [1, 10]");
  if (index_sign != 1 && index_sign != -1) throw std::invalid_argument("index_sign must be +1 or -1");
  if (z2_points.empty()) throw std::invalid_argument("at least one z2 point is required");
  bool has_equal = false;
  for (const auto& z2 : z2_points) {
    if (z2.size() != J) throw std::invalid_argument("z2 points must have J coordinates");
    if (!z2.allFinite()) throw std::invalid_argument("z2 points must be finite");
    if (family == Family::Binary && z2(0) == 0.0) throw std::invalid_argument("z2 must be nonzero (z2 = 0 violates the kernel precondition)");
    if (z2.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("z2 point must not be identically zero");
    if (z2(0) != 0.0 && (z2.array() == z2(0)).all()) has_equal = true;
  }
  if (family != Family::Binary && !has_equal)
    throw std::invalid_argument("multinomial/bundles need a z2 point with all coordinates equal and nonzero");
  if (g.per_w.empty() || (g.per_w.size() != 1 && g.per_w.size() != index.w_count()))
    throw std::invalid_argument("g needs one mixture, or one per w level");
  for (const auto& m : g.per_w) {
    m.validate();
    if (m.dimension() != inside_count())
      throw std::invalid_argument("g dimension must equal the number of inside alternatives (" +
                                  std::to_string(inside_count()) + ")");
  }
}

std::vector<std::string> bundle_labels(int J) {
  std::vector<std::string> out;
  for (int k = 0; k < (1 << J); ++k) {
    std::string s;
    for (int j = 0; j < J; ++j) s += (k & (1 << j)) ? '1' : '0';
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> outcome_set(const ModelSpec& spec) {
  if (spec.family == Family::Bundles) return bundle_labels(spec.J);
  std::vector<std::string> out;
  for (int k = 0; k <= spec.inside_count(); ++k) out.push_back(std::to_string(k));
  return out;
}

namespace {

int argmax_utilities(const Eigen::VectorXd& inside) {
  int best = 0;
  double best_u = 0.0;
  for (int k = 0; k < inside.size(); ++k) {
    if (inside(k) > best_u) {
      best_u = inside(k);
      best = k + 1;
    }
  }
  return best;
}

// Probability that alternative j (1-based) wins when u_k ~ N(c_k, s_k^2)
// independently and u_0 = 0.
double gaussian_win_probability(const Eigen::VectorXd& c, const Eigen::VectorXd& s, int j) {
  const int K = static_cast<int>(c.size());
  if (j == 0) {
    double p = 1.0;
    for (int k = 0; k < K; ++k) p *= gaussian_cdf(-c(k) / s(k));
    return p;
  }
  const double cj = c(j - 1), sj = s(j - 1);
  const double hi = cj + 12.0 * sj;
  if (hi <= 0.0) return 0.0;
  const double lo = std::max(0.0, cj - 12.0 * sj);
  const double width = std::min(s.minCoeff(), sj);
  const int panels = std::clamp(static_cast<int>(std::ceil((hi - lo) / width)), 1, 400);
  const double step = (hi - lo) / panels;
  const auto& rule = legendre_rule(16);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * step;
    for (int q = 0; q < rule.nodes.size(); ++q) {
      const double u = mid + 0.5 * step * rule.nodes(q);
      double f = gaussian_pdf((u - cj) / sj) / sj;
      for (int k = 0; k < K && f > 0.0; ++k)
        if (k != j - 1) f *= gaussian_cdf((u - c(k)) / s(k));
      total += 0.5 * step * rule.weights(q) * f;
    }
  }
  return total;
}

// Exact outcome probabilities for one atom: utilities are lines in e.
void atom_probabilities_exact(const Eigen::VectorXd& intercept, const Eigen::VectorXd& slope, double weight,
                              Eigen::Ref<Eigen::VectorXd> out) {
  const int K = static_cast<int>(intercept.size());
  std::vector<double> breaks;
  auto line_c = [&](int k) { return k == 0 ? 0.0 : intercept(k - 1); };
  auto line_d = [&](int k) { return k == 0 ? 0.0 : slope(k - 1); };
  for (int a = 0; a <= K; ++a)
    for (int b = a + 1; b <= K; ++b) {
      const double dd = line_d(a) - line_d(b);
      if (dd != 0.0) breaks.push_back((line_c(b) - line_c(a)) / dd);
    }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  Eigen::VectorXd u(K);
  auto winner_at = [&](double e) {
    u = intercept + slope * e;
    return argmax_utilities(u);
  };
  if (breaks.empty()) {
    out(winner_at(0.0)) += weight;
    return;
  }
  double left = -INFINITY;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double right = i < breaks.size() ? breaks[i] : INFINITY;
    double mid;
    if (std::isinf(left)) mid = right - 1.0;
    else if (std::isinf(right)) mid = left + 1.0;
    else mid = 0.5 * (left + right);
    const double mass = gaussian_cdf_ext(right) - gaussian_cdf_ext(left);
    out(winner_at(mid)) += weight * mass;
    left = right;
  }
}

}  // namespace

int choice_given_draw(const ModelSpec& spec, std::size_t w, double z1, const Eigen::VectorXd& z2, double e1,
                      const Eigen::VectorXd& g) {
  if (g.size() != spec.inside_count()) throw std::invalid_argument("choice_given_draw: g has the wrong dimension");
  const double t = spec.index.mean_shift(w, z1) + e1;
  const Eigen::VectorXd u = spec.index_sign * t * spec.loadings(z2) + g;
  return argmax_utilities(u);
}

Eigen::VectorXd choice_probabilities_given_index(const ModelSpec& spec, std::size_t w, const Eigen::VectorXd& z2,
                                                 double t) {
  const GMixture& mix = spec.g.at(w);
  const int K = spec.inside_count();
  const Eigen::VectorXd a = spec.index_sign * spec.loadings(z2);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K + 1);
  for (std::size_t c = 0; c < mix.components(); ++c) {
    if (mix.kind == GMixture::Kind::PointMass) {
      const Eigen::VectorXd u = a * t + mix.atoms[c];
      p(argmax_utilities(u)) += mix.probs[c];
    } else {
      const Eigen::VectorXd centre = a * t + mix.means[c];
      if (K == 1) {
        const double p1 = gaussian_cdf(centre(0) / mix.scales[c](0));
        p(1) += mix.probs[c] * p1;
        p(0) += mix.probs[c] * (1.0 - p1);
      } else {
        for (int j = 0; j <= K; ++j) p(j) += mix.probs[c] * gaussian_win_probability(centre, mix.scales[c], j);
      }
    }
  }
  return p;
}

// -- CCPTable ---------------------------------------------------------------

std::size_t CCPTable::z1_cells() const {
  std::size_t n = 1;
  for (const auto& g : z1_grids) n *= static_cast<std::size_t>(g.n);
  return n;
}

std::size_t CCPTable::cells_per_w() const { return z2_points.size() * z1_cells(); }

std::size_t CCPTable::row(std::size_t w, std::size_t z2, std::size_t z1a, std::size_t z1b) const {
  std::size_t inner = z1a;
  if (z1_grids.size() == 2) inner = z1a * static_cast<std::size_t>(z1_grids[1].n) + z1b;
  return w * cells_per_w() + z2 * z1_cells() + inner;
}

Eigen::MatrixXd CCPTable::slice(std::size_t y, std::size_t w, std::size_t z2) const {
  const long n1 = z1_grids.at(0).n;
  const long n2 = z1_grids.size() == 2 ? z1_grids[1].n : 1;
  Eigen::MatrixXd out(n1, n2);
  for (long i = 0; i < n1; ++i)
    for (long j = 0; j < n2; ++j) out(i, j) = values(static_cast<long>(row(w, z2, i, j)), static_cast<long>(y));
  return out;
}

double CCPTable::max_row_sum_error() const {
  double worst = 0.0;
  for (long r = 0; r < values.rows(); ++r) {
    if (values.row(r).hasNaN()) continue;
    worst = std::max(worst, std::abs(values.row(r).sum() - 1.0));
  }
  return worst;
}

int CCPTable::outcome_index(const std::string& label) const {
  const auto it = std::find(outcomes.begin(), outcomes.end(), label);
  if (it == outcomes.end()) throw std::invalid_argument("unknown outcome label '" + label + "'");
  return static_cast<int>(it - outcomes.begin());
}

// -- exact forward map ------------------------------------------------------

CCPTable ccp_exact(const ModelSpec& spec, const QuadratureOptions& quad) {
  spec.validate();
  CCPTable table;
  table.outcomes = outcome_set(spec);
  table.w_levels = spec.index.w_levels;
  table.z2_points = spec.z2_points;
  table.z1_grids = {spec.z1_grid};
  const long rows = static_cast<long>(spec.index.w_count() * table.cells_per_w());
  const int K = spec.inside_count();
  table.values = Eigen::MatrixXd::Zero(rows, K + 1);

  parallel_for(rows, [&](long r) {
    const std::size_t w = static_cast<std::size_t>(r) / table.cells_per_w();
    const std::size_t rest = static_cast<std::size_t>(r) % table.cells_per_w();
    const std::size_t z2i = rest / table.z1_cells();
    const int z1i = static_cast<int>(rest % table.z1_cells());
    const Eigen::VectorXd& z2 = spec.z2_points[z2i];
    const double m = spec.index.mean_shift(w, spec.z1_grid.node(z1i));
    const GMixture& mix = spec.g.at(w);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(K + 1);

    if (mix.kind == GMixture::Kind::PointMass) {
      const Eigen::VectorXd a = spec.index_sign * spec.loadings(z2);
      for (std::size_t c = 0; c < mix.components(); ++c)
        atom_probabilities_exact(a * m + mix.atoms[c], a, mix.probs[c], out);
    } else {
      auto integrate = [&](int order) {
        const auto& rule = hermite_rule(order);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(K + 1);
        for (int q = 0; q < rule.nodes.size(); ++q)
          acc += rule.weights(q) * choice_probabilities_given_index(spec, w, z2, m + rule.nodes(q));
        return acc;
      };
      int order = quad.start_order;
      Eigen::VectorXd prev = integrate(order);
      for (;;) {
        if (2 * order > quad.max_order)
          throw NumericalError("ccp_exact: Gauss-Hermite did not converge by order " + std::to_string(quad.max_order));
        order *= 2;
        Eigen::VectorXd next = integrate(order);
        const double diff = (next - prev).cwiseAbs().maxCoeff();
        prev = std::move(next);
        if (diff < quad.tolerance) break;
      }
      out = prev;
    }
    table.values.row(r) = out.transpose();
  });
  return table;
}

// -- simulation -------------------------------------------------------------

Dataset simulate(const ModelSpec& spec, long n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_w(0, static_cast<int>(spec.index.w_count()) - 1);
  std::uniform_int_distribution<int> pick_z2(0, static_cast<int>(spec.z2_points.size()) - 1);
  std::uniform_int_distribution<int> pick_z1(0, spec.z1_grid.n - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::discrete_distribution<int>> pick_component;
  for (std::size_t w = 0; w < spec.index.w_count(); ++w) {
    const auto& probs = spec.g.at(w).probs;
    pick_component.emplace_back(probs.begin(), probs.end());
  }

  Dataset d;
  d.y.reserve(n);
  d.w.reserve(n);
  d.z2.reserve(n);
  d.z1.reserve(n);
  const int K = spec.inside_count();
  Eigen::VectorXd g(K);
  for (long i = 0; i < n; ++i) {
    const int w = pick_w(rng);
    const int z2 = pick_z2(rng);
    const int z1 = pick_z1(rng);
    const double e = normal(rng);
    const GMixture& mix = spec.g.at(w);
    const int c = pick_component[w](rng);
    if (mix.kind == GMixture::Kind::PointMass) {
      g = mix.atoms[c];
    } else {
      for (int k = 0; k < K; ++k) g(k) = mix.means[c](k) + mix.scales[c](k) * normal(rng);
    }
    d.y.push_back(choice_given_draw(spec, w, spec.z1_grid.node(z1), spec.z2_points[z2], e, g));
    d.w.push_back(w);
    d.z2.push_back(z2);
    d.z1.push_back(z1);
  }
  return d;
}

EmpiricalCCP ccp_empirical(const Dataset& data, const ModelSpec& spec) {
  spec.validate();
  EmpiricalCCP out;
  CCPTable& t = out.table;
  t.outcomes = outcome_set(spec);
  t.w_levels = spec.index.w_levels;
  t.z2_points = spec.z2_points;
  t.z1_grids = {spec.z1_grid};
  const long rows = static_cast<long>(spec.index.w_count() * t.cells_per_w());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(rows, static_cast<long>(t.outcomes.size()));
  for (std::size_t i = 0; i < data.y.size(); ++i)
    counts(static_cast<long>(t.row(data.w[i], data.z2[i], data.z1[i])), data.y[i]) += 1.0;
  t.values = counts;
  for (long r = 0; r < rows; ++r) {
    const double total = counts.row(r).sum();
    if (total == 0.0) {
      t.values.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
      out.empty_cells.push_back(static_cast<std::size_t>(r));
    } else {
      t.values.row(r) /= total;
    }
  }
  return out;
}

}  // namespace idlab
