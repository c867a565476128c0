#include "idlab/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"idlab: identification experiments for index-augmented choice models and entry games"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, reg;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--reg", reg, "regularization: tsvd:THRESH | tsvd-rank:K | tikhonov:LAMBDA");

  for (const char* name : {"forward", "recover-h", "ident-beta", "recover-fg", "game-classify", "full-pipeline"})
    app.add_subcommand(name, std::string("run the ") + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::ifstream in(config_path);
    idlab::Json doc;
    try {
      doc = idlab::Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    doc["experiment"] = app.get_subcommands().front()->get_name();
    if (seed) doc["seed"] = *seed;
    if (!reg.empty()) doc["regularization"] = reg;

    idlab::RunConfig cfg = idlab::parse_config(doc);
    cfg.out_dir = out_dir;
    const idlab::RunResult r = idlab::run(cfg);
    for (const auto& f : r.files) std::cout << "wrote " << (cfg.out_dir / f).string() << '\n';
    for (const auto& f : r.failures) std::cerr << "failure: " << f << '\n';
    return r.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const idlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
