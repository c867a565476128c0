#include "idlab/recover.hpp"

#include <algorithm>
#include <numeric>

namespace idlab {

RaySetCDF recover_fg(const std::vector<ChoiceKernel>& kernels, const std::vector<Eigen::VectorXd>& loadings,
                     const std::string& outside_label, double tolerance) {
  if (kernels.size() != loadings.size()) throw std::invalid_argument("recover_fg: one loading vector per kernel");
  RaySetCDF out;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const ChoiceKernel& h = kernels[k];
    if (h.v_axes.size() != 1) throw std::invalid_argument("recover_fg: expected one-dimensional kernels");
    if (k == 0) out.w = h.w;
    else if (h.w != out.w) throw std::invalid_argument("recover_fg: kernels must share one w level");
    const Eigen::VectorXd& a = loadings[k];
    const double norm = a.norm();
    if (norm == 0.0) throw std::invalid_argument("recover_fg: zero loading vector");
    const Eigen::VectorXd x = h.values.at(h.outcome_position(outside_label)).col(0);
    const Grid1D& g = h.v_axes[0];
    const auto [lo, hi] = h.support.at(0);

    Ray ray;
    ray.z2_index = h.z2_index;
    ray.direction = a / norm;
    if ((a.array() > 0.0).all()) ray.orientation = 1;
    else if ((a.array() < 0.0).all()) ray.orientation = -1;

    // r = -a v = lambda * direction with lambda = -v |a|; walk v downwards.
    std::vector<double> lam, val;
    for (int i = g.n - 1; i >= 0; --i) {
      const double v = g.node(i);
      if (v < lo || v > hi) continue;
      lam.push_back(-v * norm);
      val.push_back(x(i));
    }
    const long n = static_cast<long>(lam.size());
    ray.lambda = Eigen::Map<Eigen::VectorXd>(lam.data(), n);
    ray.raw = Eigen::Map<Eigen::VectorXd>(val.data(), n);
    ray.cdf = ray.raw;
    if (ray.orientation != 0) {
      const double o = ray.orientation;
      double running = -INFINITY;
      for (long i = 0; i < n; ++i) {
        running = std::max(running, o * ray.raw(i));
        ray.max_drop = std::max(ray.max_drop, running - o * ray.raw(i));
      }
      if (o > 0) std::sort(ray.cdf.data(), ray.cdf.data() + n);
      else std::sort(ray.cdf.data(), ray.cdf.data() + n, std::greater<>());
      ray.perturbation = n ? (ray.cdf - ray.raw).cwiseAbs().maxCoeff() : 0.0;
    }
    out.max_drop = std::max(out.max_drop, ray.max_drop);
    out.max_perturbation = std::max(out.max_perturbation, ray.perturbation);
    out.rays.push_back(std::move(ray));
  }
  out.violation = out.max_drop > tolerance;
  return out;
}

namespace {

double steepest_crossing(const Eigen::VectorXd& line, const Grid1D& g, double lo, double hi, const std::string& what) {
  const std::vector<double> cross = level_crossings(line, g, 0.5, lo, hi);
  if (cross.empty()) throw NumericalError("detect_thresholds: no 0.5 crossing for " + what);
  double best = cross.front(), best_slope = -1.0;
  for (double c : cross) {
    const int i = std::clamp(static_cast<int>(std::floor((c - g.lo) / g.spacing())), 0, g.n - 2);
    const double slope = std::abs(line(i + 1) - line(i));
    if (slope > best_slope) {
      best_slope = slope;
      best = c;
    }
  }
  return best;
}

// Values along `axis` with the other axis fixed at node `other`.
Eigen::VectorXd line_of(const Eigen::MatrixXd& x, int axis, int other) {
  return axis == 0 ? Eigen::VectorXd(x.col(other)) : Eigen::VectorXd(x.row(other).transpose());
}

}  // namespace

ThresholdEstimate detect_thresholds(const ChoiceKernel& h) {
  if (h.v_axes.size() != 2) throw std::invalid_argument("detect_thresholds: expected a (v1, v2) kernel");
  const auto has = [&](const std::string& l) {
    return std::find(h.outcomes.begin(), h.outcomes.end(), l) != h.outcomes.end();
  };
  ThresholdEstimate t;
  if (has("00") && has("11")) t.pair = OutcomePair::ZeroZeroOneOne;
  else if (has("00") && has("10")) t.pair = OutcomePair::ZeroZeroOneZero;
  else throw std::invalid_argument("detect_thresholds: outcome pairs other than (00, 11) and (00, 10) are not implemented");
  t.spacing = std::max(h.v_axes[0].spacing(), h.v_axes[1].spacing());

  const Eigen::MatrixXd& h00 = h.values[h.outcome_position("00")];
  for (int axis = 0; axis < 2; ++axis) {
    const int other = 1 - axis;
    const Grid1D& g = h.v_axes[axis];
    const int deep_out = h.v_axes[other].nearest(h.support[other].first);
    t.outer(axis) = steepest_crossing(line_of(h00, axis, deep_out), g, h.support[axis].first, h.support[axis].second,
                                      "h(00) along v" + std::to_string(axis + 1));
  }
  if (t.pair == OutcomePair::ZeroZeroOneOne) {
    const Eigen::MatrixXd& h11 = h.values[h.outcome_position("11")];
    for (int axis = 0; axis < 2; ++axis) {
      const int other = 1 - axis;
      const int deep_in = h.v_axes[other].nearest(h.support[other].second);
      t.inner(axis) = steepest_crossing(line_of(h11, axis, deep_in), h.v_axes[axis], h.support[axis].first,
                                        h.support[axis].second, "h(11) along v" + std::to_string(axis + 1));
    }
  } else {
    const Eigen::MatrixXd& h10 = h.values[h.outcome_position("10")];
    const int deep_in = h.v_axes[0].nearest(h.support[0].second);
    t.inner(1) = steepest_crossing(line_of(h10, 1, deep_in), h.v_axes[1], h.support[1].first, h.support[1].second,
                                   "h(10) along v2");
  }
  return t;
}

PayoffEstimate recover_payoffs(Concept solution, const ThresholdEstimate& t, double tolerance) {
  PayoffEstimate p;
  switch (solution) {
    case Concept::Rationalizability:
      p.alpha = -t.outer;
      p.delta = t.outer - t.inner;
      break;
    case Concept::Collusion: {
      p.alpha = -t.outer;
      const Eigen::Vector2d sums = t.outer - t.inner;
      if (std::abs(sums(0) - sums(1)) > tolerance)
        throw NumericalError("recover_payoffs: collusion thresholds disagree across axes");
      p.delta_sum = sums.mean();
      break;
    }
    case Concept::Minimax:
      p.composite = -0.5 * (t.outer + t.inner);
      break;
  }
  return p;
}

ConceptReport classify_concept(const ThresholdEstimate& t, double tolerance) {
  ConceptReport rep;
  rep.thresholds = t;
  rep.tolerance = tolerance > 0.0 ? tolerance : 2.0 * t.spacing;
  rep.widths = t.inner - t.outer;
  rep.note = "payoffs are identified up to beta0; recovery conditions on the supplied index coefficients";
  const double tol = rep.tolerance;

  if (t.pair == OutcomePair::ZeroZeroOneZero) {
    if (!std::isfinite(t.outer(0)) || !std::isfinite(t.outer(1)) || !std::isfinite(t.inner(1))) {
      rep.note = "unclassifiable: missing thresholds";
      return rep;
    }
    if (std::abs(rep.widths(1)) <= tol)
      rep.candidates = {Concept::Minimax, Concept::Collusion, Concept::Rationalizability};
    else
      rep.candidates = {Concept::Collusion, Concept::Rationalizability};
    rep.note = "the (00, 10) pair identifies only player 2's width; concepts listed in candidates are observationally equivalent here";
    return rep;
  }

  if (!rep.widths.allFinite() || !t.outer.allFinite()) {
    rep.note = "unclassifiable: missing thresholds";
    return rep;
  }
  rep.squareness = std::abs(rep.widths(0) - rep.widths(1));
  Concept c;
  if (std::abs(rep.widths(0)) <= tol && std::abs(rep.widths(1)) <= tol) c = Concept::Minimax;
  else if (rep.squareness <= tol) c = Concept::Collusion;
  else c = Concept::Rationalizability;
  rep.solution = c;
  rep.candidates = {c};
  rep.payoffs = recover_payoffs(c, t, tol);
  return rep;
}

}  // namespace idlab
