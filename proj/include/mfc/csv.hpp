#pragma once

#include <filesystem>
#include <string>

#include "mfc/scenario.hpp"

namespace mfc {

// Column order: t, then per channel i = 1..m: y_i, y_star_i, y_star_dot_i, e_i, f_est_i, u_i, v_i.
std::string csv_header(std::size_t channel_count);

/**
 * Writes header plus one row per tick. Numbers use the shortest decimal form
 * that round-trips to the same double, with '.' as decimal point; every line
 * ends in '\n'.
 */
void export_csv(const ScenarioRecord& record, const std::filesystem::path& path);

// Reads rows back; summary and event metadata are not part of the file.
ScenarioRecord read_csv(const std::filesystem::path& path);

}  // namespace mfc
