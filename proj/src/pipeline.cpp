#include "idlab/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace idlab {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Forward: return "forward";
    case Experiment::RecoverH: return "recover-h";
    case Experiment::IdentBeta: return "ident-beta";
    case Experiment::RecoverFg: return "recover-fg";
    case Experiment::GameClassify: return "game-classify";
    case Experiment::FullPipeline: return "full-pipeline";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (Experiment e : {Experiment::Forward, Experiment::RecoverH, Experiment::IdentBeta, Experiment::RecoverFg,
                       Experiment::GameClassify, Experiment::FullPipeline})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

namespace {

void allow(const Json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (!keys.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("'" + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  allow(doc, {"experiment", "seed", "regularization", "model", "game", "deconv", "beta", "fg", "classify", "simulate"},
        "config");
  RunConfig c;
  if (doc.contains("experiment")) c.experiment = experiment_from_string(doc.at("experiment").get<std::string>());
  c.seed = get_or<std::uint64_t>(doc, "seed", 0);
  if (doc.contains("model") == doc.contains("game"))
    throw std::invalid_argument("config needs exactly one of 'model' and 'game'");
  if (doc.contains("model")) c.model = model_from_json(doc.at("model"));
  if (doc.contains("game")) c.game = game_from_json(doc.at("game"));
  if (doc.contains("regularization")) c.deconv.reg = parse_regularization(doc.at("regularization").get<std::string>());

  if (doc.contains("deconv")) {
    const Json& d = doc.at("deconv");
    allow(d, {"outcomes", "v_nodes", "sd_pad", "support_pad", "overshoot_tolerance", "misspec_factor", "v_grids"},
          "deconv");
    c.deconv.outcomes = get_or<std::vector<std::string>>(d, "outcomes", {});
    c.deconv.v_nodes = get_or<int>(d, "v_nodes", c.deconv.v_nodes);
    c.deconv.sd_pad = get_or<double>(d, "sd_pad", c.deconv.sd_pad);
    c.deconv.support_pad = get_or<double>(d, "support_pad", c.deconv.support_pad);
    c.deconv.overshoot_tolerance = get_or<double>(d, "overshoot_tolerance", c.deconv.overshoot_tolerance);
    c.deconv.misspec_factor = get_or<double>(d, "misspec_factor", c.deconv.misspec_factor);
    if (d.contains("v_grids"))
      for (const auto& g : d.at("v_grids")) c.deconv.v_grids.push_back(grid_from_json(g));
    if (c.deconv.v_nodes < 3) throw std::invalid_argument("deconv.v_nodes must be at least 3");
  }
  if (doc.contains("beta")) {
    const Json& b = doc.at("beta");
    allow(b, {"y_star", "tau_deg", "tau_grad_rel", "residual_tolerance", "zero_ratio"}, "beta");
    c.y_star = get_or<std::string>(b, "y_star", c.y_star);
    c.beta.tau_deg = get_or<double>(b, "tau_deg", c.beta.tau_deg);
    c.beta.tau_grad_rel = get_or<double>(b, "tau_grad_rel", c.beta.tau_grad_rel);
    c.beta.residual_tolerance = get_or<double>(b, "residual_tolerance", c.beta.residual_tolerance);
    c.beta.zero_ratio = get_or<double>(b, "zero_ratio", c.beta.zero_ratio);
  }
  if (doc.contains("fg")) {
    allow(doc.at("fg"), {"tolerance"}, "fg");
    c.fg_tolerance = get_or<double>(doc.at("fg"), "tolerance", c.fg_tolerance);
  }
  if (doc.contains("classify")) {
    allow(doc.at("classify"), {"tolerance"}, "classify");
    c.classify_tolerance = get_or<double>(doc.at("classify"), "tolerance", 0.0);
  }
  if (doc.contains("simulate")) {
    allow(doc.at("simulate"), {"n"}, "simulate");
    c.simulate_n = get_or<long>(doc.at("simulate"), "n", 0);
    if (c.simulate_n < 0) throw std::invalid_argument("simulate.n must be non-negative");
    if (c.simulate_n > 0 && c.game) throw std::invalid_argument("simulate is only available for single-agent models");
  }

  const bool game = c.game.has_value();
  switch (c.experiment) {
    case Experiment::IdentBeta:
    case Experiment::RecoverFg:
      if (game) throw std::invalid_argument(to_string(c.experiment) + " needs a single-agent 'model'");
      break;
    case Experiment::GameClassify:
      if (!game) throw std::invalid_argument("game-classify needs a 'game'");
      break;
    default: break;
  }
  if (c.experiment == Experiment::RecoverFg && c.model->family == Family::Binary)
    throw std::invalid_argument("recover-fg needs a multinomial or bundles model");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["regularization"] = to_string(c.deconv.reg);
  if (c.model) j["model"] = model_to_json(*c.model);
  if (c.game) j["game"] = game_to_json(*c.game);
  Json d;
  d["outcomes"] = c.deconv.outcomes;
  d["v_nodes"] = c.deconv.v_nodes;
  d["sd_pad"] = c.deconv.sd_pad;
  d["support_pad"] = c.deconv.support_pad;
  d["overshoot_tolerance"] = c.deconv.overshoot_tolerance;
  d["misspec_factor"] = c.deconv.misspec_factor;
  Json vg = Json::array();
  for (const auto& g : c.deconv.v_grids) vg.push_back({{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}});
  d["v_grids"] = vg;
  j["deconv"] = d;
  j["beta"] = {{"y_star", c.y_star},
               {"tau_deg", c.beta.tau_deg},
               {"tau_grad_rel", c.beta.tau_grad_rel},
               {"residual_tolerance", c.beta.residual_tolerance},
               {"zero_ratio", c.beta.zero_ratio}};
  j["fg"] = {{"tolerance", c.fg_tolerance}};
  j["classify"] = {{"tolerance", c.classify_tolerance}};
  j["simulate"] = {{"n", c.simulate_n}};
  return j;
}

namespace {

class Run {
 public:
  explicit Run(const RunConfig& c) : c_(c) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    const fs::path probe = c.out_dir / ".write_probe";
    std::ofstream(probe) << "";
    if (ec || !fs::exists(probe)) throw std::invalid_argument("output directory '" + c.out_dir.string() + "' is not writable");
    fs::remove(probe, ec);
    manifest_["version"] = kVersion;
    manifest_["experiment"] = to_string(c.experiment);
    manifest_["config"] = config_to_json(c);
    manifest_["grids"] = Json::object();
    manifest_["columns"] = Json::object();
    manifest_["diagnostics"] = Json::object();
    manifest_["notes"] = Json::array();
  }

  RunResult execute() {
    try {
      if (c_.game) run_game();
      else run_model();
    } catch (const NumericalError& e) {
      fail(std::string("numerical failure: ") + e.what());
    }
    result_.exit_code = result_.failures.empty() ? 0 : 3;
    manifest_["failures"] = result_.failures;
    manifest_["files"] = result_.files;
    manifest_["exit_code"] = result_.exit_code;
    result_.manifest = manifest_;
    write_text("manifest.json", manifest_.dump(2) + "\n", false);
    result_.files.push_back("manifest.json");
    return result_;
  }

 private:
  const RunConfig& c_;
  RunResult result_;
  Json manifest_;

  void fail(const std::string& what) { result_.failures.push_back(what); }
  void note(const std::string& what) { manifest_["notes"].push_back(what); }

  void write_text(const std::string& name, const std::string& text, bool record = true) {
    std::ofstream f(c_.out_dir / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("failed to write " + name);
    if (record) result_.files.push_back(name);
  }

  template <typename Writer>
  void write_csv(const std::string& name, const std::vector<std::string>& columns, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    write_text(name, os.str());
    manifest_["columns"][name] = columns;
  }

  void grid(const std::string& name, const Grid1D& g) { manifest_["grids"][name] = to_json(g); }

  // ---- single-agent -------------------------------------------------------

  CCPTable forward_model() {
    const ModelSpec& m = *c_.model;
    grid("z1", m.z1_grid);
    CCPTable mu;
    if (c_.simulate_n > 0) {
      const EmpiricalCCP e = ccp_empirical(simulate(m, c_.simulate_n, c_.seed), m);
      mu = e.table;
      manifest_["diagnostics"]["empty_cells"] = e.empty_cells.size();
    } else {
      mu = ccp_exact(m);
    }
    manifest_["diagnostics"]["ccp_max_row_sum_error"] = mu.max_row_sum_error();
    write_csv("ccp.csv", ccp_columns(mu), [&](std::ostream& os) { write_ccp_csv(os, mu); });
    return mu;
  }

  std::vector<KernelRecovery> deconvolve(const CCPTable& mu, const IndexModel& index) {
    const ModelSpec& m = *c_.model;
    auto rec = recover_h(mu, index, default_layout(m.family), c_.deconv);
    Json diag = Json::array();
    std::vector<ChoiceKernel> ks;
    for (const auto& r : rec) {
      Json d = to_json(r.diagnostics);
      d["w"] = r.kernel.w;
      d["z2_index"] = r.kernel.z2_index;
      diag.push_back(d);
      ks.push_back(r.kernel);
      const std::string where = "w=" + r.kernel.w + (r.kernel.z2_index >= 0 ? ", z2_index=" + std::to_string(r.kernel.z2_index) : "");
      if (r.diagnostics.misspecified) fail("deconvolution residual above noise floor (" + where + ")");
      if (r.diagnostics.overshoot_exceeded) fail("deconvolution overshoot above tolerance (" + where + ")");
    }
    if (!ks.empty()) grid("v", ks.front().v_axes[0]);
    manifest_["diagnostics"]["deconv"] = diag;
    write_csv("h.csv", kernel_columns(1), [&](std::ostream& os) { write_kernels_csv(os, ks); });
    return rec;
  }

  void gamma(const std::vector<KernelRecovery>& rec) {
    Json out = Json::array();
    for (const auto& r : rec) {
      if (std::find(r.kernel.outcomes.begin(), r.kernel.outcomes.end(), "1") == r.kernel.outcomes.end()) continue;
      Json j = to_json(recover_gamma(r.kernel));
      j["w"] = r.kernel.w;
      out.push_back(j);
    }
    manifest_["diagnostics"]["gamma"] = out;
  }

  bool beta_design_ok(const CCPTable& mu, std::string& why) const {
    if (mu.z2_points.size() < 5) {
      why = "fewer than 5 z2 points";
      return false;
    }
    for (const auto& z : mu.z2_points)
      if (z.size() != 1) {
        why = "z2 is not scalar";
        return false;
      }
    const double step = mu.z2_points[1](0) - mu.z2_points[0](0);
    for (std::size_t k = 1; k < mu.z2_points.size(); ++k)
      if (std::abs(mu.z2_points[k](0) - mu.z2_points[k - 1](0) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
        why = "z2 points are not a uniform grid";
        return false;
      }
    return true;
  }

  // Returns the estimated index, or nullopt when estimation failed.
  std::optional<IndexModel> ident_beta(const CCPTable& mu) {
    const ModelSpec& m = *c_.model;
    if (m.family != Family::Binary) {
      Json out = Json::array();
      for (std::size_t w = 0; w < m.index.w_count(); ++w) {
        Json j = to_json(identify_beta1_sign_multinomial(mu, m.index.w_levels[w]));
        j["w"] = m.index.w_levels[w];
        out.push_back(j);
      }
      write_text("beta.json", Json{{"family", to_string(m.family)}, {"sign_beta1", out}}.dump(2) + "\n");
      note("only the sign of beta1 is estimated for multinomial and bundle families");
      return std::nullopt;
    }
    std::string why;
    if (!beta_design_ok(mu, why)) throw std::invalid_argument("ident-beta: " + why);
    IndexModel est = m.index;
    Json out = Json::array();
    bool ok = true;
    for (std::size_t w = 0; w < m.index.w_count(); ++w) {
      const std::string& label = m.index.w_levels[w];
      Json j;
      j["w"] = label;
      try {
        const EtaSurface s = build_eta(mu, c_.y_star, label);
        const BetaEstimate b = identify_beta(s, m.index.sign_info[w], c_.beta);
        j.update(to_json(b));
        est.beta0[w] = b.beta0;
        est.beta1[w] = b.beta1;
        if (b.misspecified) {
          fail("beta identity residual above tolerance (w=" + label + ")");
          ok = false;
        }
      } catch (const NumericalError& e) {
        j["error"] = e.what();
        fail(std::string("beta identification failed (w=") + label + "): " + e.what());
        ok = false;
      }
      out.push_back(j);
    }
    write_text("beta.json", Json{{"family", "binary"}, {"y_star", c_.y_star}, {"estimates", out}}.dump(2) + "\n");
    if (!ok) return std::nullopt;
    return est;
  }

  void recover_rays(const std::vector<KernelRecovery>& rec) {
    const ModelSpec& m = *c_.model;
    std::vector<RaySetCDF> sets;
    Json diag = Json::array();
    for (const std::string& w : m.index.w_levels) {
      std::vector<ChoiceKernel> ks;
      std::vector<Eigen::VectorXd> loads;
      for (const auto& r : rec)
        if (r.kernel.w == w && r.kernel.z2_index >= 0) {
          ks.push_back(r.kernel);
          loads.push_back(m.index_sign * m.loadings(m.z2_points[static_cast<std::size_t>(r.kernel.z2_index)]));
        }
      if (ks.empty()) continue;
      const RaySetCDF s = recover_fg(ks, loads, outcome_set(m).front(), c_.fg_tolerance);
      if (s.violation) fail("F_g monotonicity violation along rays (w=" + w + ")");
      diag.push_back(to_json(s));
      sets.push_back(s);
    }
    manifest_["diagnostics"]["fg"] = diag;
    write_csv("rays.csv", ray_columns(), [&](std::ostream& os) { write_rays_csv(os, sets); });
  }

  void run_model() {
    const ModelSpec& m = *c_.model;
    const CCPTable mu = forward_model();
    switch (c_.experiment) {
      case Experiment::Forward: return;
      case Experiment::RecoverH: {
        const auto rec = deconvolve(mu, m.index);
        if (m.family == Family::Binary) gamma(rec);
        return;
      }
      case Experiment::IdentBeta: ident_beta(mu); return;
      case Experiment::RecoverFg: recover_rays(deconvolve(mu, m.index)); return;
      case Experiment::FullPipeline: {
        IndexModel index = m.index;
        if (m.family == Family::Binary) {
          std::string why;
          if (beta_design_ok(mu, why)) {
            const auto est = ident_beta(mu);
            if (!est) return;
            index = *est;
            note("h is recovered with the estimated index coefficients");
          } else {
            note("beta is not estimable from this design (" + why + "); the configured index is used");
          }
        } else {
          ident_beta(mu);
          note("h is recovered with the configured index coefficients");
        }
        const auto rec = deconvolve(mu, index);
        if (m.family == Family::Binary) gamma(rec);
        else recover_rays(rec);
        return;
      }
      case Experiment::GameClassify: break;
    }
  }

  // ---- games ----------------------------------------------------------------

  void run_game() {
    const GameStructure& g = c_.game->game;
    const auto& zg = c_.game->z_grids;
    grid("z_player1", zg[0]);
    grid("z_player2", zg[1]);
    note("game payoffs are identified up to beta0; the configured index coefficients are used");

    Json regions = Json::array();
    for (std::size_t w = 0; w < g.w_levels.size(); ++w) {
      Json r = to_json(region_map(g, w));
      r["w"] = g.w_levels[w];
      const auto sep = separation_conditions(g, w);
      r["separation"] = {sep[0], sep[1], sep[2]};
      regions.push_back(r);
    }
    write_text("regions.json", regions.dump(2) + "\n");

    const CCPTable mu = game_ccp_exact(g, zg[0], zg[1]);
    manifest_["diagnostics"]["ccp_max_row_sum_error"] = mu.max_row_sum_error();
    write_csv("ccp.csv", ccp_columns(mu), [&](std::ostream& os) { write_ccp_csv(os, mu); });
    if (c_.experiment == Experiment::Forward) {
      const Grid1D v1(zg[0].lo - 3.0, zg[0].hi + 3.0, 121), v2(zg[1].lo - 3.0, zg[1].hi + 3.0, 121);
      grid("raster_v1", v1);
      grid("raster_v2", v2);
      write_csv("raster.csv", raster_columns(), [&](std::ostream& os) { write_raster_csv(os, g, v1, v2); });
      return;
    }

    const auto rec = recover_h_game(mu, g.index, c_.deconv);
    Json diag = Json::array();
    std::vector<ChoiceKernel> ks;
    for (const auto& r : rec) {
      Json d = to_json(r.diagnostics);
      d["w"] = r.kernel.w;
      diag.push_back(d);
      ks.push_back(r.kernel);
      if (r.diagnostics.misspecified) fail("deconvolution residual above noise floor (w=" + r.kernel.w + ")");
      if (r.diagnostics.overshoot_exceeded) fail("deconvolution overshoot above tolerance (w=" + r.kernel.w + ")");
    }
    if (!ks.empty()) {
      grid("v1", ks.front().v_axes[0]);
      grid("v2", ks.front().v_axes[1]);
    }
    manifest_["diagnostics"]["deconv"] = diag;
    write_csv("h.csv", kernel_columns(2), [&](std::ostream& os) { write_kernels_csv(os, ks); });
    if (c_.experiment == Experiment::RecoverH) return;

    Json reports = Json::array();
    for (const auto& k : ks) {
      Json j;
      j["w"] = k.w;
      try {
        const ConceptReport rep = classify_concept(detect_thresholds(k), c_.classify_tolerance);
        j.update(to_json(rep));
        if (!rep.solution && rep.candidates.empty()) fail("concept unclassifiable (w=" + k.w + ")");
      } catch (const NumericalError& e) {
        j["error"] = e.what();
        fail(std::string("threshold detection failed (w=") + k.w + "): " + e.what());
      }
      reports.push_back(j);
    }
    write_text("concept.json", reports.dump(2) + "\n");
  }
};

}  // namespace

RunResult run(const RunConfig& config) {
  if (config.out_dir.empty()) throw std::invalid_argument("no output directory given");
  if (config.model) config.model->validate();
  if (config.game) config.game->game.validate();
  Run r(config);
  return r.execute();
}

}  // namespace idlab
