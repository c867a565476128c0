#pragma once

#include "idlab/betaid.hpp"
#include "idlab/deconv.hpp"
#include "idlab/games.hpp"
#include "idlab/model.hpp"
#include "idlab/recover.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace idlab {

using Json = nlohmann::ordered_json;

/// Fixed 12-significant-digit rendering used by every CSV writer.
std::string format_number(double x);

// CSV column orders.
std::vector<std::string> ccp_columns(const CCPTable& t);
std::vector<std::string> kernel_columns(std::size_t axes);
std::vector<std::string> ray_columns();
std::vector<std::string> raster_columns();

void write_ccp_csv(std::ostream& os, const CCPTable& t);
/// Rebuilds a table from its CSV form. z2 coordinates are not part of the
/// CSV; pass them to restore them, otherwise the index is stored as a 1-vector.
CCPTable read_ccp_csv(std::istream& is, const std::vector<Eigen::VectorXd>& z2_points = {});

void write_kernels_csv(std::ostream& os, const std::vector<ChoiceKernel>& kernels);
std::vector<ChoiceKernel> read_kernels_csv(std::istream& is);

void write_rays_csv(std::ostream& os, const std::vector<RaySetCDF>& sets);
void write_raster_csv(std::ostream& os, const GameStructure& game, const Grid1D& v1, const Grid1D& v2);

std::uint64_t grid_hash(const Grid1D& g);

Json to_json(const Grid1D& g);
Json to_json(const DeconvDiagnostics& d);
Json to_json(const BetaEstimate& b);
Json to_json(const GammaEstimate& g);
Json to_json(const RegionMap& m);
Json to_json(const ConceptReport& r);
Json to_json(const RaySetCDF& r);
Json to_json(const SignVerdict& s);

Grid1D grid_from_json(const Json& j);
ModelSpec model_from_json(const Json& j);
Json model_to_json(const ModelSpec& m);

struct GameSetup {
  GameStructure game;
  std::array<Grid1D, 2> z_grids;
};
GameSetup game_from_json(const Json& j);
Json game_to_json(const GameSetup& g);

}  // namespace idlab
