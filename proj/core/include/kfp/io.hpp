#pragma once

#include <string>

#include <json.hpp>

#include "kfp/grid.hpp"
#include "kfp/stochastic.hpp"

namespace kfp {

/// 17 significant digits, the shortest exact decimal round trip for doubles.
std::string format_g17(double x);

/// Field dump: header v1..vd,x1..xd,t,value; rows run v fastest, then x,
/// then t.
void write_field_csv(const std::string& path, const ScalarField& u);

/// (v, x, value) dump of a DP oracle surface.
void write_vx_csv(const std::string& path, const VxGrid& g, const std::vector<double>& values);

void write_json(const std::string& path, const nlohmann::ordered_json& j);

} // namespace kfp
