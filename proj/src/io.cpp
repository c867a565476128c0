#include "idlab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace idlab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<std::string> ccp_columns(const CCPTable& t) {
  if (t.z1_grids.size() == 2) return {"y", "w", "z2_index", "z1", "z1_2", "mu"};
  return {"y", "w", "z2_index", "z1", "mu"};
}

std::vector<std::string> kernel_columns(std::size_t axes) {
  if (axes == 2) return {"y", "w", "z2_index", "v", "v2", "h"};
  return {"y", "w", "z2_index", "v", "h"};
}

std::vector<std::string> ray_columns() { return {"w", "ray", "direction", "lambda", "F"}; }
std::vector<std::string> raster_columns() { return {"w", "v1", "v2", "y", "prob"}; }

namespace {

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("csv: malformed number '" + s + "'");
  return x;
}

std::vector<std::vector<std::string>> read_rows(std::istream& is, const std::vector<std::vector<std::string>>& headers,
                                                std::size_t& which) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  const auto head = split(line);
  which = headers.size();
  for (std::size_t k = 0; k < headers.size(); ++k)
    if (head == headers[k]) which = k;
  if (which == headers.size()) throw std::invalid_argument("csv: unexpected header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto r = split(line);
    if (r.size() != head.size()) throw std::invalid_argument("csv: wrong number of fields in '" + line + "'");
    rows.push_back(std::move(r));
  }
  return rows;
}

template <typename T>
std::size_t index_of(std::vector<T>& seen, const T& x) {
  const auto it = std::find(seen.begin(), seen.end(), x);
  if (it != seen.end()) return static_cast<std::size_t>(it - seen.begin());
  seen.push_back(x);
  return seen.size() - 1;
}

Grid1D grid_from_values(std::set<double> values) {
  if (values.size() < 3) throw std::invalid_argument("csv: a grid axis needs at least 3 distinct values");
  return Grid1D(*values.begin(), *values.rbegin(), static_cast<int>(values.size()));
}

}  // namespace

void write_ccp_csv(std::ostream& os, const CCPTable& t) {
  write_header(os, ccp_columns(t));
  const bool game = t.z1_grids.size() == 2;
  const int n1 = t.z1_grids[0].n, n2 = game ? t.z1_grids[1].n : 1;
  for (std::size_t w = 0; w < t.w_levels.size(); ++w)
    for (std::size_t k = 0; k < t.z2_points.size(); ++k)
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
          const long r = static_cast<long>(t.row(w, k, i, j));
          for (std::size_t y = 0; y < t.outcomes.size(); ++y) {
            os << t.outcomes[y] << ',' << t.w_levels[w] << ',' << k << ',' << format_number(t.z1_grids[0].node(i));
            if (game) os << ',' << format_number(t.z1_grids[1].node(j));
            os << ',' << format_number(t.values(r, static_cast<long>(y))) << '\n';
          }
        }
}

CCPTable read_ccp_csv(std::istream& is, const std::vector<Eigen::VectorXd>& z2_points) {
  std::size_t which = 0;
  const auto rows = read_rows(is, {{"y", "w", "z2_index", "z1", "mu"}, {"y", "w", "z2_index", "z1", "z1_2", "mu"}}, which);
  const bool game = which == 1;
  CCPTable t;
  std::set<double> z1a, z1b;
  std::size_t z2_count = 0;
  for (const auto& r : rows) {
    index_of(t.outcomes, r[0]);
    index_of(t.w_levels, r[1]);
    z2_count = std::max<std::size_t>(z2_count, std::stoul(r[2]) + 1);
    z1a.insert(parse_number(r[3]));
    if (game) z1b.insert(parse_number(r[4]));
  }
  t.z1_grids = {grid_from_values(z1a)};
  if (game) t.z1_grids.push_back(grid_from_values(z1b));
  if (!z2_points.empty()) {
    if (z2_points.size() != z2_count) throw std::invalid_argument("csv: z2 point count does not match the table");
    t.z2_points = z2_points;
  } else {
    for (std::size_t k = 0; k < z2_count; ++k) t.z2_points.push_back(Eigen::VectorXd::Constant(1, static_cast<double>(k)));
  }
  t.values = Eigen::MatrixXd::Constant(static_cast<long>(t.w_levels.size() * t.cells_per_w()),
                                       static_cast<long>(t.outcomes.size()), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    const std::size_t y = index_of(t.outcomes, r[0]);
    const std::size_t w = index_of(t.w_levels, r[1]);
    const std::size_t k = std::stoul(r[2]);
    const int i = t.z1_grids[0].nearest(parse_number(r[3]));
    const int j = game ? t.z1_grids[1].nearest(parse_number(r[4])) : 0;
    t.values(static_cast<long>(t.row(w, k, i, j)), static_cast<long>(y)) = parse_number(r.back());
  }
  return t;
}

void write_kernels_csv(std::ostream& os, const std::vector<ChoiceKernel>& kernels) {
  if (kernels.empty()) throw std::invalid_argument("write_kernels_csv: nothing to write");
  const std::size_t axes = kernels.front().v_axes.size();
  write_header(os, kernel_columns(axes));
  for (const auto& h : kernels) {
    if (h.v_axes.size() != axes) throw std::invalid_argument("write_kernels_csv: mixed kernel dimensions");
    for (std::size_t y = 0; y < h.outcomes.size(); ++y) {
      const Eigen::MatrixXd& x = h.values[y];
      for (long i = 0; i < x.rows(); ++i)
        for (long j = 0; j < x.cols(); ++j) {
          os << h.outcomes[y] << ',' << h.w << ',' << h.z2_index << ','
             << format_number(h.v_axes[0].node(static_cast<int>(i)));
          if (axes == 2) os << ',' << format_number(h.v_axes[1].node(static_cast<int>(j)));
          os << ',' << format_number(x(i, j)) << '\n';
        }
    }
  }
}

std::vector<ChoiceKernel> read_kernels_csv(std::istream& is) {
  std::size_t which = 0;
  const auto rows = read_rows(is, {kernel_columns(1), kernel_columns(2)}, which);
  const bool two = which == 1;
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<const std::vector<std::string>*>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r[1], std::stoi(r[2]));
    index_of(keys, key);
    groups[key].push_back(&r);
  }
  std::vector<ChoiceKernel> out;
  for (const auto& key : keys) {
    const auto& g = groups[key];
    ChoiceKernel h;
    h.w = key.first;
    h.z2_index = key.second;
    std::set<double> va, vb;
    for (const auto* r : g) {
      index_of(h.outcomes, (*r)[0]);
      va.insert(parse_number((*r)[3]));
      if (two) vb.insert(parse_number((*r)[4]));
    }
    h.v_axes = {grid_from_values(va)};
    if (two) h.v_axes.push_back(grid_from_values(vb));
    for (const auto& a : h.v_axes) h.support.emplace_back(a.lo, a.hi);
    const long n2 = two ? h.v_axes[1].n : 1;
    h.values.assign(h.outcomes.size(), Eigen::MatrixXd::Zero(h.v_axes[0].n, n2));
    for (const auto* r : g) {
      const std::size_t y = index_of(h.outcomes, (*r)[0]);
      const int i = h.v_axes[0].nearest(parse_number((*r)[3]));
      const int j = two ? h.v_axes[1].nearest(parse_number((*r)[4])) : 0;
      h.values[y](i, j) = parse_number(r->back());
    }
    out.push_back(std::move(h));
  }
  return out;
}

void write_rays_csv(std::ostream& os, const std::vector<RaySetCDF>& sets) {
  write_header(os, ray_columns());
  for (const auto& s : sets)
    for (std::size_t r = 0; r < s.rays.size(); ++r) {
      const Ray& ray = s.rays[r];
      std::string dir;
      for (long k = 0; k < ray.direction.size(); ++k) dir += (k ? ";" : "") + format_number(ray.direction(k));
      for (long i = 0; i < ray.lambda.size(); ++i)
        os << s.w << ',' << r << ',' << dir << ',' << format_number(ray.lambda(i)) << ',' << format_number(ray.cdf(i))
           << '\n';
    }
}

void write_raster_csv(std::ostream& os, const GameStructure& game, const Grid1D& v1, const Grid1D& v2) {
  write_header(os, raster_columns());
  const auto labels = game_outcome_labels();
  for (std::size_t w = 0; w < game.w_levels.size(); ++w)
    for (int i = 0; i < v1.n; ++i)
      for (int j = 0; j < v2.n; ++j) {
        const OutcomeDist d = outcome_at(game, w, v1.node(i), v2.node(j));
        for (int y = 0; y < 4; ++y)
          os << game.w_levels[w] << ',' << format_number(v1.node(i)) << ',' << format_number(v2.node(j)) << ','
             << labels[y] << ',' << format_number(d(y)) << '\n';
      }
}

std::uint64_t grid_hash(const Grid1D& g) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < g.n; ++i)
    for (char c : format_number(g.node(i)) + ";") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  return h;
}

// ---- JSON -------------------------------------------------------------------

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Eigen::VectorXd to_vec(const Json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(what + " must be an array of numbers");
    v(static_cast<long>(i)) = j[i].get<double>();
  }
  return v;
}

void allow_keys(const Json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (!keys.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

const Json& need(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw std::invalid_argument("missing key '" + key + "' in " + where);
  return j.at(key);
}

double need_number(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_number()) throw std::invalid_argument("'" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

std::vector<Eigen::VectorXd> to_vecs(const Json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array of arrays");
  std::vector<Eigen::VectorXd> out;
  for (const auto& e : j) out.push_back(to_vec(e, what));
  return out;
}

SignInfo sign_from_json(const Json& j, const std::string& where) {
  allow_keys(j, {"of", "value"}, where);
  SignInfo s;
  const std::string of = need(j, "of", where).get<std::string>();
  if (of == "beta0") s.of = SignInfo::Of::Beta0;
  else if (of == "beta1") s.of = SignInfo::Of::Beta1;
  else throw std::invalid_argument(where + ".of must be 'beta0' or 'beta1'");
  const double v = need_number(j, "value", where);
  if (v != 1.0 && v != -1.0) throw std::invalid_argument(where + ".value must be +1 or -1");
  s.sign = static_cast<int>(v);
  return s;
}

GMixture mixture_from_json(const Json& j, const std::string& where) {
  allow_keys(j, {"kind", "atoms", "means", "scales", "probs"}, where);
  GMixture m;
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "point_mass") {
    m.kind = GMixture::Kind::PointMass;
    m.atoms = to_vecs(need(j, "atoms", where), where + ".atoms");
  } else if (kind == "gaussian") {
    m.kind = GMixture::Kind::Gaussian;
    m.means = to_vecs(need(j, "means", where), where + ".means");
    m.scales = to_vecs(need(j, "scales", where), where + ".scales");
  } else {
    throw std::invalid_argument(where + ".kind must be 'point_mass' or 'gaussian'");
  }
  const Eigen::VectorXd p = to_vec(need(j, "probs", where), where + ".probs");
  m.probs.assign(p.data(), p.data() + p.size());
  return m;
}

Json mixture_to_json(const GMixture& m) {
  Json j;
  j["kind"] = m.kind == GMixture::Kind::PointMass ? "point_mass" : "gaussian";
  auto list = [](const std::vector<Eigen::VectorXd>& vs) {
    Json a = Json::array();
    for (const auto& v : vs) a.push_back(vec(v));
    return a;
  };
  if (m.kind == GMixture::Kind::PointMass) j["atoms"] = list(m.atoms);
  else {
    j["means"] = list(m.means);
    j["scales"] = list(m.scales);
  }
  j["probs"] = m.probs;
  return j;
}

}  // namespace

Json to_json(const Grid1D& g) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(grid_hash(g)));
  return Json{{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}, {"hash", hash}};
}

Json to_json(const DeconvDiagnostics& d) {
  Json j;
  j["regularization"] = d.regularization;
  j["rank"] = d.rank;
  j["first_discarded"] = d.first_discarded;
  Json sv = Json::array();
  for (const auto& s : d.singular_values) sv.push_back(vec(s));
  j["singular_values"] = sv;
  j["residual_norm"] = d.residual_norm;
  j["noise_floor"] = d.noise_floor;
  j["overshoot"] = d.overshoot;
  j["min_row_mass"] = d.min_row_mass;
  j["sum_projected"] = d.sum_projected;
  j["misspecified"] = d.misspecified;
  j["overshoot_exceeded"] = d.overshoot_exceeded;
  return j;
}

Json to_json(const BetaEstimate& b) {
  Json j;
  j["beta1_sq"] = b.beta1_sq;
  j["ratio"] = b.ratio;
  j["beta0"] = b.beta0;
  j["beta1"] = b.beta1;
  j["degeneracy"] = {{"degenerate", b.degeneracy.degenerate},
                     {"statistic", b.degeneracy.statistic},
                     {"witness", {b.degeneracy.witness_z1, b.degeneracy.witness_z2}},
                     {"reason", b.degeneracy.reason}};
  j["rms_residual"] = b.rms_residual;
  j["cells_used"] = b.cells_used;
  j["misspecified"] = b.misspecified;
  return j;
}

Json to_json(const GammaEstimate& g) {
  Json j;
  j["step"] = g.step;
  j["gamma"] = g.gamma ? Json(*g.gamma) : Json(nullptr);
  j["crossing"] = g.crossing;
  j["band_violation"] = g.band_violation;
  return j;
}

Json to_json(const RegionMap& m) {
  const auto labels = game_outcome_labels();
  Json j;
  j["low"] = vec(m.low);
  j["high"] = vec(m.high);
  Json cells = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const RegionCell& c = m.cells[i][k];
      Json cj{{"band_v1", i}, {"band_v2", k}};
      if (c.kind == RegionCell::Kind::Diagonal) {
        cj["kind"] = "diagonal";
        cj["below"] = labels[c.below];
        cj["above"] = labels[c.above];
        cj["line"] = {{"n1", c.n1}, {"n2", c.n2}, {"offset", c.offset}};
      } else {
        cj["kind"] = c.kind == RegionCell::Kind::Mixture ? "mixture" : "single";
        Json dist = Json::object();
        for (int y = 0; y < 4; ++y)
          if (c.dist(y) != 0.0) dist[labels[y]] = c.dist(y);
        cj["dist"] = dist;
      }
      cells.push_back(cj);
    }
  j["cells"] = cells;
  j["multiplicity"] = m.multiplicity ? Json(*m.multiplicity) : Json(nullptr);
  return j;
}

Json to_json(const ConceptReport& r) {
  Json j;
  j["concept"] = r.solution ? Json(to_string(*r.solution)) : Json(nullptr);
  Json cands = Json::array();
  for (Concept c : r.candidates) cands.push_back(to_string(c));
  j["candidates"] = cands;
  j["pair"] = r.thresholds.pair == OutcomePair::ZeroZeroOneOne ? "00,11" : "00,10";
  j["outer"] = {num(r.thresholds.outer(0)), num(r.thresholds.outer(1))};
  j["inner"] = {num(r.thresholds.inner(0)), num(r.thresholds.inner(1))};
  j["spacing"] = r.thresholds.spacing;
  j["widths"] = {num(r.widths(0)), num(r.widths(1))};
  j["squareness"] = num(r.squareness);
  j["tolerance"] = r.tolerance;
  Json p = Json::object();
  if (r.payoffs.alpha) p["alpha"] = vec(*r.payoffs.alpha);
  if (r.payoffs.delta) p["delta"] = vec(*r.payoffs.delta);
  if (r.payoffs.delta_sum) p["delta_sum"] = *r.payoffs.delta_sum;
  if (r.payoffs.composite) p["alpha_plus_min_delta"] = vec(*r.payoffs.composite);
  j["payoffs"] = p;
  j["note"] = r.note;
  return j;
}

Json to_json(const RaySetCDF& r) {
  Json j;
  j["w"] = r.w;
  j["max_drop"] = r.max_drop;
  j["max_perturbation"] = r.max_perturbation;
  j["violation"] = r.violation;
  Json rays = Json::array();
  for (const auto& ray : r.rays)
    rays.push_back({{"z2_index", ray.z2_index},
                    {"direction", vec(ray.direction)},
                    {"orientation", ray.orientation},
                    {"points", ray.lambda.size()},
                    {"max_drop", ray.max_drop},
                    {"perturbation", ray.perturbation}});
  j["rays"] = rays;
  return j;
}

Json to_json(const SignVerdict& s) {
  return Json{{"sign", s.sign ? Json(*s.sign) : Json(nullptr)},
              {"slope", s.slope},
              {"z2_index", s.z2_index},
              {"abstained", !s.sign.has_value()}};
}

Grid1D grid_from_json(const Json& j) {
  allow_keys(j, {"lo", "hi", "n"}, "grid");
  const double n = need_number(j, "n", "grid");
  if (n != std::floor(n)) throw std::invalid_argument("grid.n must be an integer");
  return Grid1D(need_number(j, "lo", "grid"), need_number(j, "hi", "grid"), static_cast<int>(n));
}

ModelSpec model_from_json(const Json& j) {
  allow_keys(j, {"family", "J", "index_sign", "w", "z1_grid", "z2_points", "z2_grid"}, "model");
  ModelSpec m;
  m.family = family_from_string(need(j, "family", "model").get<std::string>());
  m.J = j.contains("J") ? j.at("J").get<int>() : 1;
  m.index_sign = j.contains("index_sign") ? j.at("index_sign").get<int>() : 1;
  const Json& ws = need(j, "w", "model");
  if (!ws.is_array() || ws.empty()) throw std::invalid_argument("model.w must be a non-empty array");
  for (std::size_t k = 0; k < ws.size(); ++k) {
    const std::string where = "model.w[" + std::to_string(k) + "]";
    allow_keys(ws[k], {"label", "beta0", "beta1", "sign", "g"}, where);
    m.index.w_levels.push_back(need(ws[k], "label", where).get<std::string>());
    m.index.beta0.push_back(need_number(ws[k], "beta0", where));
    m.index.beta1.push_back(need_number(ws[k], "beta1", where));
    m.index.sign_info.push_back(ws[k].contains("sign") ? sign_from_json(ws[k].at("sign"), where + ".sign")
                                                       : SignInfo{SignInfo::Of::Beta1, 1});
    m.g.per_w.push_back(mixture_from_json(need(ws[k], "g", where), where + ".g"));
  }
  m.z1_grid = grid_from_json(need(j, "z1_grid", "model"));
  if (j.contains("z2_points") == j.contains("z2_grid"))
    throw std::invalid_argument("model needs exactly one of z2_points and z2_grid");
  if (j.contains("z2_points")) {
    m.z2_points = to_vecs(j.at("z2_points"), "model.z2_points");
  } else {
    const Grid1D g = grid_from_json(j.at("z2_grid"));
    for (int i = 0; i < g.n; ++i) m.z2_points.push_back(Eigen::VectorXd::Constant(1, g.node(i)));
  }
  m.validate();
  return m;
}

Json model_to_json(const ModelSpec& m) {
  Json j;
  j["family"] = to_string(m.family);
  j["J"] = m.J;
  j["index_sign"] = m.index_sign;
  Json ws = Json::array();
  for (std::size_t w = 0; w < m.index.w_count(); ++w) {
    const SignInfo& s = m.index.sign_info[w];
    ws.push_back({{"label", m.index.w_levels[w]},
                  {"beta0", m.index.beta0[w]},
                  {"beta1", m.index.beta1[w]},
                  {"sign", {{"of", s.of == SignInfo::Of::Beta0 ? "beta0" : "beta1"}, {"value", s.sign}}},
                  {"g", mixture_to_json(m.g.at(w))}});
  }
  j["w"] = ws;
  const Json g = to_json(m.z1_grid);
  j["z1_grid"] = {{"lo", g["lo"]}, {"hi", g["hi"]}, {"n", g["n"]}};
  Json pts = Json::array();
  for (const auto& z : m.z2_points) pts.push_back(vec(z));
  j["z2_points"] = pts;
  return j;
}

GameSetup game_from_json(const Json& j) {
  allow_keys(j, {"solution", "lambda_sel", "w", "z_grids"}, "game");
  GameSetup s;
  GameStructure& g = s.game;
  g.solution = concept_from_string(need(j, "solution", "game").get<std::string>());
  g.lambda_sel = j.contains("lambda_sel") ? j.at("lambda_sel").get<double>() : 0.5;
  const Json& ws = need(j, "w", "game");
  if (!ws.is_array() || ws.empty()) throw std::invalid_argument("game.w must be a non-empty array");
  for (std::size_t k = 0; k < ws.size(); ++k) {
    const std::string where = "game.w[" + std::to_string(k) + "]";
    allow_keys(ws[k], {"label", "alpha", "delta", "beta0", "beta1"}, where);
    const std::string label = need(ws[k], "label", where).get<std::string>();
    g.w_levels.push_back(label);
    const Eigen::VectorXd a = to_vec(need(ws[k], "alpha", where), where + ".alpha");
    const Eigen::VectorXd d = to_vec(need(ws[k], "delta", where), where + ".delta");
    const Eigen::VectorXd b0 = ws[k].contains("beta0") ? to_vec(ws[k].at("beta0"), where + ".beta0") : Eigen::VectorXd::Zero(2);
    const Eigen::VectorXd b1 = ws[k].contains("beta1") ? to_vec(ws[k].at("beta1"), where + ".beta1") : Eigen::VectorXd::Ones(2);
    if (a.size() != 2 || d.size() != 2 || b0.size() != 2 || b1.size() != 2)
      throw std::invalid_argument(where + ": alpha, delta, beta0, beta1 need two entries (one per player)");
    g.alpha.emplace_back(a(0), a(1));
    Eigen::Matrix2d dm = Eigen::Matrix2d::Zero();
    dm(0, 1) = d(0);
    dm(1, 0) = d(1);
    g.delta.push_back(dm);
    for (int i = 0; i < 2; ++i) {
      g.index[i].w_levels.push_back(label);
      g.index[i].beta0.push_back(b0(i));
      g.index[i].beta1.push_back(b1(i));
      g.index[i].sign_info.push_back({SignInfo::Of::Beta1, b1(i) >= 0.0 ? 1 : -1});
    }
  }
  const Json& zg = need(j, "z_grids", "game");
  if (!zg.is_array() || zg.size() != 2) throw std::invalid_argument("game.z_grids needs one grid per player");
  s.z_grids = {grid_from_json(zg[0]), grid_from_json(zg[1])};
  g.validate();
  return s;
}

Json game_to_json(const GameSetup& s) {
  const GameStructure& g = s.game;
  Json j;
  j["solution"] = to_string(g.solution);
  j["lambda_sel"] = g.lambda_sel;
  Json ws = Json::array();
  for (std::size_t w = 0; w < g.w_levels.size(); ++w)
    ws.push_back({{"label", g.w_levels[w]},
                  {"alpha", vec(g.alpha[w])},
                  {"delta", {g.delta[w](0, 1), g.delta[w](1, 0)}},
                  {"beta0", {g.index[0].beta0[w], g.index[1].beta0[w]}},
                  {"beta1", {g.index[0].beta1[w], g.index[1].beta1[w]}}});
  j["w"] = ws;
  Json zg = Json::array();
  for (const auto& z : s.z_grids) zg.push_back({{"lo", z.lo}, {"hi", z.hi}, {"n", z.n}});
  j["z_grids"] = zg;
  return j;
}

}  // namespace idlab
