#include "idlab/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace idlab {

Grid1D::Grid1D(double lo_, double hi_, int n_) : lo(lo_), hi(hi_), n(n_) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("Grid1D: non-finite bounds");
  if (!(lo < hi)) throw std::invalid_argument("Grid1D: requires lo < hi");
  if (n < 3) throw std::invalid_argument("Grid1D: requires at least 3 nodes");
}

Eigen::VectorXd Grid1D::nodes() const {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = node(i);
  return x;
}

int Grid1D::nearest(double x) const {
  const long i = std::lround((x - lo) / spacing());
  return static_cast<int>(std::clamp<long>(i, 0, n - 1));
}

GriddedFn::GriddedFn(std::vector<Grid1D> axes_, Eigen::MatrixXd values_)
    : axes(std::move(axes_)), values(std::move(values_)) {
  if (axes.empty() || axes.size() > 2) throw std::invalid_argument("GriddedFn: one or two axes");
  const long cols = axes.size() == 2 ? axes[1].n : 1;
  if (values.rows() != axes[0].n || values.cols() != cols)
    throw std::invalid_argument("GriddedFn: value array does not match grid shape");
  if (!values.allFinite()) throw std::invalid_argument("GriddedFn: values must be finite");
}

namespace {

template <typename Rule, typename Build>
const Rule& cached(std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mu, int order, Build build) {
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<Rule>(build(order));
  return *slot;
}

Eigen::VectorXd derivative_1d(const Eigen::VectorXd& f, double h, int order, int accuracy) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXd d(n);
  if (order == 1) {
    for (int i = 1; i < n - 1; ++i) d(i) = (f(i + 1) - f(i - 1)) / (2 * h);
    d(0) = (-3 * f(0) + 4 * f(1) - f(2)) / (2 * h);
    d(n - 1) = (3 * f(n - 1) - 4 * f(n - 2) + f(n - 3)) / (2 * h);
  } else {
    const double h2 = h * h;
    for (int i = 1; i < n - 1; ++i) d(i) = (f(i + 1) - 2 * f(i) + f(i - 1)) / h2;
    d(0) = (2 * f(0) - 5 * f(1) + 4 * f(2) - f(3)) / h2;
    d(n - 1) = (2 * f(n - 1) - 5 * f(n - 2) + 4 * f(n - 3) - f(n - 4)) / h2;
  }
  if (accuracy == 4) {
    for (int i = 2; i < n - 2; ++i) {
      if (order == 1)
        d(i) = (-f(i + 2) + 8 * f(i + 1) - 8 * f(i - 1) + f(i - 2)) / (12 * h);
      else
        d(i) = (-f(i + 2) + 16 * f(i + 1) - 30 * f(i) + 16 * f(i - 1) - f(i - 2)) / (12 * h * h);
    }
  }
  return d;
}

}  // namespace

const QuadratureRule<double>& hermite_rule(int order) {
  static std::map<int, std::unique_ptr<QuadratureRule<double>>> cache;
  static std::mutex mu;
  return cached(cache, mu, order, [](int k) { return hermite_quadrature<double>(k); });
}

const QuadratureRule<double>& legendre_rule(int order) {
  static std::map<int, std::unique_ptr<QuadratureRule<double>>> cache;
  static std::mutex mu;
  return cached(cache, mu, order, [](int k) { return legendre_quadrature<double>(k); });
}

GriddedFn partial_derivative(const GriddedFn& f, int axis, int order, int accuracy) {
  if (axis < 0 || axis >= static_cast<int>(f.axes.size()))
    throw std::invalid_argument("partial_derivative: axis out of range");
  if (order != 1 && order != 2) throw std::invalid_argument("partial_derivative: order must be 1 or 2");
  if (accuracy != 2 && accuracy != 4) throw std::invalid_argument("partial_derivative: accuracy must be 2 or 4");
  const Grid1D& g = f.axes[axis];
  if (g.n < 5) throw std::invalid_argument("partial_derivative: need at least 5 nodes on the axis");

  Eigen::MatrixXd out(f.values.rows(), f.values.cols());
  if (axis == 0) {
    for (long j = 0; j < f.values.cols(); ++j)
      out.col(j) = derivative_1d(f.values.col(j), g.spacing(), order, accuracy);
  } else {
    for (long i = 0; i < f.values.rows(); ++i)
      out.row(i) = derivative_1d(f.values.row(i).transpose(), g.spacing(), order, accuracy).transpose();
  }
  return GriddedFn(f.axes, std::move(out));
}

// -- regularization ---------------------------------------------------------

Regularization parse_regularization(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("regularization must look like tsvd:THRESH or tikhonov:LAMBDA, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("regularization parameter is not a number: '" + arg + "'");
  }
  if (kind == "tsvd") {
    if (!(value > 0.0 && value < 1.0)) throw std::invalid_argument("tsvd threshold must lie in (0, 1)");
    return TruncatedSvd{value, std::nullopt};
  }
  if (kind == "tsvd-rank") {
    if (value < 1.0 || value != std::floor(value)) throw std::invalid_argument("tsvd-rank needs a positive integer");
    return TruncatedSvd{0.0, static_cast<int>(value)};
  }
  if (kind == "tikhonov") {
    if (!(value >= 0.0)) throw std::invalid_argument("tikhonov lambda must be >= 0");
    return Tikhonov{value};
  }
  throw std::invalid_argument("unknown regularization kind '" + kind + "'");
}

std::string to_string(const Regularization& reg) {
  std::ostringstream os;
  os.precision(12);
  if (const auto* t = std::get_if<Tikhonov>(&reg)) {
    os << "tikhonov:" << t->lambda;
  } else {
    const auto& s = std::get<TruncatedSvd>(reg);
    if (s.rank) os << "tsvd-rank:" << *s.rank;
    else os << "tsvd:" << s.threshold;
  }
  return os.str();
}

RegularizedInverse::RegularizedInverse(const Eigen::MatrixXd& kernel, const Regularization& reg) : reg_(reg) {
  if (kernel.size() == 0) throw std::invalid_argument("regularized inverse: empty kernel");
  if (!kernel.allFinite()) throw std::invalid_argument("regularized inverse: kernel has non-finite entries");
  if (kernel.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("regularized inverse: all-zero kernel");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(kernel, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  sigma_ = svd.singularValues();

  const long p = sigma_.size();
  const double s1 = sigma_(0);
  const double numerical_zero = s1 * std::numeric_limits<double>::epsilon() * std::max(kernel.rows(), kernel.cols());
  long numerical_rank = 0;
  while (numerical_rank < p && sigma_(numerical_rank) > numerical_zero) ++numerical_rank;

  filter_ = Eigen::VectorXd::Zero(p);
  if (const auto* t = std::get_if<Tikhonov>(&reg)) {
    if (!(t->lambda >= 0.0)) throw std::invalid_argument("tikhonov lambda must be >= 0");
    for (long i = 0; i < numerical_rank; ++i) filter_(i) = sigma_(i) / (sigma_(i) * sigma_(i) + t->lambda);
    rank_used_ = static_cast<int>(numerical_rank);
  } else {
    const auto& ts = std::get<TruncatedSvd>(reg);
    long k = 0;
    if (ts.rank) {
      if (*ts.rank < 1 || *ts.rank > numerical_rank)
        throw std::invalid_argument("truncated svd rank must lie in [1, rank(kernel)]");
      k = *ts.rank;
    } else {
      if (!(ts.threshold > 0.0)) throw std::invalid_argument("truncated svd threshold must be > 0");
      while (k < numerical_rank && sigma_(k) >= ts.threshold * s1) ++k;
    }
    for (long i = 0; i < k; ++i) filter_(i) = 1.0 / sigma_(i);
    rank_used_ = static_cast<int>(k);
  }
}

Eigen::VectorXd RegularizedInverse::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != u_.rows()) throw std::invalid_argument("regularized inverse: rhs length does not match kernel rows");
  return v_ * (filter_.asDiagonal() * (u_.transpose() * rhs));
}

Eigen::MatrixXd RegularizedInverse::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != u_.rows()) throw std::invalid_argument("regularized inverse: rhs rows do not match kernel rows");
  return v_ * (filter_.asDiagonal() * (u_.transpose() * rhs));
}

Eigen::MatrixXd RegularizedInverse::as_matrix() const { return v_ * filter_.asDiagonal() * u_.transpose(); }

double RegularizedInverse::first_discarded() const {
  if (std::holds_alternative<Tikhonov>(reg_)) return 0.0;
  return rank_used_ < sigma_.size() ? sigma_(rank_used_) : 0.0;
}

Eigen::VectorXd regularized_solve(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& rhs,
                                  const Regularization& reg) {
  if (kernel.rows() != rhs.size()) throw std::invalid_argument("regularized_solve: matrix rows must equal rhs length");
  return RegularizedInverse(kernel, reg).solve(rhs);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& x) {
  const long n = x.size();
  Eigen::VectorXd sorted = x;
  std::sort(sorted.data(), sorted.data() + n, std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (long k = 0; k < n; ++k) {
    cumulative += sorted(k);
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted(k) - t > 0.0) tau = t;
  }
  return (x.array() - tau).max(0.0).matrix();
}

}  // namespace idlab
