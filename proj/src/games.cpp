#include "idlab/games.hpp"

#include "idlab/parallel.hpp"

#include <algorithm>

namespace idlab {

std::string to_string(Concept c) {
  switch (c) {
    case Concept::Minimax: return "minimax";
    case Concept::Collusion: return "collusion";
    case Concept::Rationalizability: return "rationalizability";
  }
  return "?";
}

Concept concept_from_string(const std::string& s) {
  if (s == "minimax") return Concept::Minimax;
  if (s == "collusion") return Concept::Collusion;
  if (s == "rationalizability") return Concept::Rationalizability;
  throw std::invalid_argument("unknown solution concept '" + s + "'");
}

std::vector<std::string> game_outcome_labels() { return bundle_labels(2); }

void GameStructure::validate() const {
  if (w_levels.empty()) throw std::invalid_argument("game: at least one w level is required");
  if (alpha.size() != w_levels.size() || delta.size() != w_levels.size())
    throw std::invalid_argument("game: alpha and delta need one entry per w level");
  for (std::size_t w = 0; w < w_levels.size(); ++w)
    if (!alpha[w].allFinite() || !delta[w].allFinite()) throw std::invalid_argument("game: payoffs must be finite");
  for (const auto& ix : index) {
    ix.validate();
    if (ix.w_levels != w_levels) throw std::invalid_argument("game: player index models must use the game's w levels");
  }
  if (!(lambda_sel >= 0.0 && lambda_sel <= 1.0)) throw std::invalid_argument("game: lambda_sel must lie in [0, 1]");
}

ConceptThresholds concept_thresholds(const GameStructure& game, std::size_t w) {
  ConceptThresholds t;
  const Eigen::Vector2d& a = game.alpha[w];
  const Eigen::Matrix2d& d = game.delta[w];
  for (int i = 0; i < 2; ++i) {
    const double dij = d(i, 1 - i);
    switch (game.solution) {
      case Concept::Minimax:
        t.outer(i) = t.inner(i) = -a(i) - std::min(dij, 0.0);
        break;
      case Concept::Collusion:
        t.outer(i) = -a(i);
        t.inner(i) = -a(i) - game.delta_sum(w);
        break;
      case Concept::Rationalizability:
        t.outer(i) = -a(i);
        t.inner(i) = -a(i) - dij;
        break;
    }
  }
  return t;
}

namespace {

struct Surviving {
  std::array<std::array<bool, 2>, 2> keep{{{true, true}, {true, true}}};
  bool determined(int i) const { return keep[i][0] != keep[i][1]; }
  int action(int i) const { return keep[i][1] ? 1 : 0; }
};

Surviving iterated_dominance(const Eigen::Vector2d& alpha, const Eigen::Matrix2d& delta, double v1, double v2) {
  const double v[2] = {v1, v2};
  Surviving s;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < 2; ++i) {
      if (s.determined(i)) continue;
      const int j = 1 - i;
      double lo = INFINITY, hi = -INFINITY;
      for (int yj = 0; yj < 2; ++yj) {
        if (!s.keep[j][yj]) continue;
        const double payoff = alpha(i) + v[i] + delta(i, j) * yj;
        lo = std::min(lo, payoff);
        hi = std::max(hi, payoff);
      }
      if (lo > 0.0) {
        s.keep[i][0] = false;
        changed = true;
      } else if (hi <= 0.0) {
        s.keep[i][1] = false;
        changed = true;
      }
    }
  }
  return s;
}

OutcomeDist point(int code) {
  OutcomeDist d = OutcomeDist::Zero();
  d(code) = 1.0;
  return d;
}

}  // namespace

OutcomeDist outcome_at(const GameStructure& game, std::size_t w, double v1, double v2) {
  const Eigen::Vector2d& alpha = game.alpha.at(w);
  const Eigen::Matrix2d& delta = game.delta.at(w);
  switch (game.solution) {
    case Concept::Minimax: {
      const ConceptThresholds t = concept_thresholds(game, w);
      return point(outcome_code(v1 > t.outer(0), v2 > t.outer(1)));
    }
    case Concept::Collusion: {
      const double x1 = v1 + alpha(0), x2 = v2 + alpha(1);
      const double total[4] = {0.0, x1, x2, x1 + x2 + game.delta_sum(w)};
      int best = 0;
      for (int k = 1; k < 4; ++k)
        if (total[k] > total[best]) best = k;
      return point(best);
    }
    case Concept::Rationalizability: {
      const Surviving s = iterated_dominance(alpha, delta, v1, v2);
      if (s.determined(0) && s.determined(1)) return point(outcome_code(s.action(0), s.action(1)));
      const double v[2] = {v1, v2};
      std::vector<int> equilibria;
      for (int code = 0; code < 4; ++code) {
        const int y[2] = {code & 1, (code >> 1) & 1};
        bool stable = true;
        for (int i = 0; i < 2; ++i) {
          const bool enter = alpha(i) + v[i] + delta(i, 1 - i) * y[1 - i] > 0.0;
          if (enter != (y[i] == 1)) stable = false;
        }
        if (stable) equilibria.push_back(code);
      }
      OutcomeDist d = OutcomeDist::Zero();
      if (equilibria.size() >= 2) {
        d(equilibria.front()) += game.lambda_sel;
        d(equilibria.back()) += 1.0 - game.lambda_sel;
      } else {
        // No pure equilibrium: every profile is rationalizable.
        d(outcome_code(0, 0)) += game.lambda_sel;
        d(outcome_code(1, 1)) += 1.0 - game.lambda_sel;
      }
      return d;
    }
  }
  return OutcomeDist::Zero();
}

RegionMap region_map(const GameStructure& game, std::size_t w) {
  game.validate();
  const ConceptThresholds t = concept_thresholds(game, w);
  RegionMap map;
  map.low = t.outer.cwiseMin(t.inner);
  map.high = t.outer.cwiseMax(t.inner);
  auto rep = [&](int axis, int band) {
    if (band == 0) return map.low(axis) - 1.0;
    if (band == 2) return map.high(axis) + 1.0;
    return 0.5 * (map.low(axis) + map.high(axis));
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      RegionCell& cell = map.cells[i][j];
      const double v1 = rep(0, i), v2 = rep(1, j);
      if (game.solution == Concept::Collusion && i == 1 && j == 1 && game.delta_sum(w) != 0.0) {
        const Eigen::Vector2d a = t.outer;
        cell.kind = RegionCell::Kind::Diagonal;
        if (game.delta_sum(w) < 0.0) {
          cell.below = outcome_code(1, 0);
          cell.above = outcome_code(0, 1);
          cell.n1 = -1.0;
          cell.n2 = 1.0;
          cell.offset = a(1) - a(0);
        } else {
          cell.below = outcome_code(0, 0);
          cell.above = outcome_code(1, 1);
          cell.n1 = 1.0;
          cell.n2 = 1.0;
          cell.offset = a(0) + a(1) - game.delta_sum(w);
        }
        continue;
      }
      cell.dist = outcome_at(game, w, v1, v2);
      bool mixed = false;
      if (game.solution == Concept::Rationalizability) {
        const Surviving s = iterated_dominance(game.alpha[w], game.delta[w], v1, v2);
        mixed = !s.determined(0) && !s.determined(1);
      }
      if (mixed) {
        cell.kind = RegionCell::Kind::Mixture;
        map.multiplicity = std::array<int, 2>{i, j};
      }
    }
  return map;
}

std::array<bool, 3> separation_conditions(const GameStructure& game, std::size_t w) {
  const Eigen::Vector2d& al = game.alpha.at(w);
  const Eigen::Matrix2d& d = game.delta.at(w);
  const double D = game.delta_sum(w);
  const Eigen::Vector2d a = -al, b = -al.array() - D;
  const Eigen::Vector2d at = -al, bt(-al(0) - d(0, 1), -al(1) - d(1, 0));
  const bool mm_col = a != b;
  const bool mm_rat = at != bt;
  const bool rat_col = (bt(1) - at(1)) * (b(0) - a(0)) != (b(1) - a(1)) * (bt(0) - at(0));
  return {mm_col, mm_rat, rat_col};
}

CCPTable game_ccp_exact(const GameStructure& game, const Grid1D& zg1, const Grid1D& zg2) {
  game.validate();
  CCPTable table;
  table.outcomes = game_outcome_labels();
  table.w_levels = game.w_levels;
  table.z2_points = {Eigen::VectorXd::Ones(1)};
  table.z1_grids = {zg1, zg2};
  table.values.resize(static_cast<long>(game.w_levels.size() * table.cells_per_w()), 4);

  const auto& gl = legendre_rule(16);
  for (std::size_t w = 0; w < game.w_levels.size(); ++w) {
    const RegionMap map = region_map(game, w);
    const Eigen::VectorXd m1 = zg1.nodes().unaryExpr([&](double z) { return game.index[0].mean_shift(w, z); });
    const Eigen::VectorXd m2 = zg2.nodes().unaryExpr([&](double z) { return game.index[1].mean_shift(w, z); });

    // Outer nodes over v1: unit panels split at player 1's thresholds.
    const double lo = m1.minCoeff() - 10.0, hi = m1.maxCoeff() + 10.0;
    std::vector<double> edges;
    for (double x = lo; x < hi; x += 1.0) edges.push_back(x);
    edges.push_back(hi);
    for (double t : {map.low(0), map.high(0)})
      if (t > lo && t < hi) edges.push_back(t);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(), [](double x, double y) { return y - x < 1e-12; }),
                edges.end());
    std::vector<double> nodes, weights;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double mid = 0.5 * (edges[p] + edges[p + 1]), half = 0.5 * (edges[p + 1] - edges[p]);
      for (int q = 0; q < gl.nodes.size(); ++q) {
        nodes.push_back(mid + half * gl.nodes(q));
        weights.push_back(half * gl.weights(q));
      }
    }
    const long K = static_cast<long>(nodes.size());

    // Inner integral over v2 is exact: outcome_at is piecewise constant in v2.
    std::array<Eigen::MatrixXd, 4> inner;
    for (auto& m : inner) m = Eigen::MatrixXd::Zero(K, zg2.n);
    parallel_for(K, [&](long k) {
      const double v1 = nodes[k];
      std::vector<double> breaks = {map.low(1), map.high(1)};
      if (game.solution == Concept::Collusion && game.delta_sum(w) != 0.0) {
        const RegionCell& c = map.cells[1][1];
        breaks.push_back((c.offset - c.n1 * v1) / c.n2);
      }
      std::sort(breaks.begin(), breaks.end());
      breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
      std::vector<double> bounds = {-INFINITY};
      bounds.insert(bounds.end(), breaks.begin(), breaks.end());
      bounds.push_back(INFINITY);
      for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const double a = bounds[s], b = bounds[s + 1];
        const double mid = std::isinf(a) ? b - 1.0 : (std::isinf(b) ? a + 1.0 : 0.5 * (a + b));
        const OutcomeDist d = outcome_at(game, w, v1, mid);
        for (int j = 0; j < zg2.n; ++j) {
          const double mass = gaussian_cdf_ext(b - m2(j)) - gaussian_cdf_ext(a - m2(j));
          for (int y = 0; y < 4; ++y)
            if (d(y) != 0.0) inner[y](k, j) += d(y) * mass;
        }
      }
    });

    Eigen::MatrixXd outer(zg1.n, K);
    for (int i = 0; i < zg1.n; ++i)
      for (long k = 0; k < K; ++k) outer(i, k) = weights[k] * gaussian_pdf(nodes[k] - m1(i));
    for (int y = 0; y < 4; ++y) {
      const Eigen::MatrixXd mu = outer * inner[y];
      for (int i = 0; i < zg1.n; ++i)
        for (int j = 0; j < zg2.n; ++j) table.values(static_cast<long>(table.row(w, 0, i, j)), y) = mu(i, j);
    }
  }
  return table;
}

std::size_t GridKernelND::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.n);
  return n;
}

std::size_t GridKernelND::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < axes.size(); ++a) f = f * static_cast<std::size_t>(axes[a].n) + idx[a];
  return f;
}

GridKernelND project_to_pair(const GridKernelND& h, int i, int j) {
  const int N = static_cast<int>(h.players());
  if (N < 2) throw std::invalid_argument("project_to_pair: need at least two players");
  if (i < 0 || j < 0 || i >= N || j >= N || i == j) throw std::invalid_argument("project_to_pair: invalid player pair");
  if (h.values.size() != (std::size_t{1} << N)) throw std::invalid_argument("project_to_pair: need 2^N outcome slices");
  for (const auto& v : h.values)
    if (static_cast<std::size_t>(v.size()) != h.size()) throw std::invalid_argument("project_to_pair: slice size mismatch");
  for (int k = 0; k < N; ++k)
    if (k != i && k != j && h.axes[k].lo > -8.0)
      throw std::invalid_argument("project_to_pair: axis of player " + std::to_string(k + 1) +
                                  " must reach v <= -8 for the limit");

  GridKernelND out;
  out.axes = {h.axes[i], h.axes[j]};
  out.values.assign(4, Eigen::VectorXd(out.size()));
  std::vector<int> idx(N, 0);
  for (int a = 0; a < h.axes[i].n; ++a)
    for (int b = 0; b < h.axes[j].n; ++b) {
      idx[i] = a;
      idx[j] = b;
      const std::size_t src = h.flat(idx);
      const std::size_t dst = static_cast<std::size_t>(a) * out.axes[1].n + b;
      for (int yi = 0; yi < 2; ++yi)
        for (int yj = 0; yj < 2; ++yj) {
          const std::size_t code_n = (static_cast<std::size_t>(yi) << i) | (static_cast<std::size_t>(yj) << j);
          out.values[outcome_code(yi, yj)](static_cast<long>(dst)) = h.values[code_n](static_cast<long>(src));
        }
    }
  return out;
}

GridKernelND game_kernel_grid(const GameStructure& game, std::size_t w, const Grid1D& v1, const Grid1D& v2) {
  GridKernelND h;
  h.axes = {v1, v2};
  h.values.assign(4, Eigen::VectorXd(h.size()));
  for (int a = 0; a < v1.n; ++a)
    for (int b = 0; b < v2.n; ++b) {
      const OutcomeDist d = outcome_at(game, w, v1.node(a), v2.node(b));
      for (int y = 0; y < 4; ++y) h.values[y](static_cast<long>(a) * v2.n + b) = d(y);
    }
  return h;
}

}  // namespace idlab
