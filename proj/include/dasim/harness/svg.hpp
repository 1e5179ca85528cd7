#pragma once

#include <optional>
#include <string>

#include "dasim/egt.hpp"
#include "dasim/game.hpp"

namespace dasim::harness {

/// Transaction price against transaction index, with a dashed line at p0
/// and a vertical rule wherever a new trading day starts.
std::string emit_svg_price_series(const GameLog& log, std::optional<Money> p0);

/// Replicator field on the 3-strategy simplex: velocity arrows on a grid,
/// sampled flows and attractors sized by basin.
/// Throws Error(InvalidArgument) unless the game has three strategies.
std::string emit_svg_simplex(const egt::HeuristicGame& g, const egt::EquilibriumSearch& search);

}  // namespace dasim::harness
