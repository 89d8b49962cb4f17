#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmpc/sim.hpp"

namespace rmpc {

/// Flat key = value configuration with one [scenario NAME] section per
/// run; keys outside any section (or under [common]) apply to every
/// scenario. Unknown keys fail loudly with their name.
///
/// Recognized keys: plant, controller, c, duration, sample_time, seed,
/// inject_noise, substeps, randomized_perturbation, reference.type,
/// reference.period, reference.duty, reference.low, reference.high,
/// reference.level, mpc.hp, mpc.hu, mpc.qk, mpc.rk, mpc.penalize,
/// noise.process_std, noise.meas_std.
std::vector<Scenario> parse_scenarios(const std::string& text,
                                      const std::vector<std::pair<std::string, std::string>>& overrides,
                                      std::optional<std::uint64_t> seed_override);

/// parse_scenarios over a file's contents; missing file -> ConfigError.
std::vector<Scenario> load_scenarios(const std::string& path,
                                     const std::vector<std::pair<std::string, std::string>>& overrides,
                                     std::optional<std::uint64_t> seed_override);

}  // namespace rmpc
