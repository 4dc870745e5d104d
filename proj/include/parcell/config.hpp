#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "parcell/cell_model.hpp"
#include "parcell/pack_model.hpp"

namespace parcell {

/// Cells of a pack as read from a config file, with their initial SOCs.
struct PackConfig {
  std::vector<CellParams> cells;
  std::vector<double> z0;
};

/// Pack config JSON:
///   { "ocv": {"kind": "poly", "coeffs": [...]}
///          | {"kind": "table", "z": [...], "v": [...], "interp": "pchip"|"linear"},
///     "cells": [ {"r1_ohm", "r2_ohm", "c_farad", "q_ah", "z0", "ocv"?}, ... ] }
/// The top-level "ocv" is optional (default NMC curve); a cell-level "ocv"
/// overrides it. Errors are ConfigError with the offending key in the message.
PackConfig parse_pack_config(std::string_view json_text, const std::string& source = "<string>");
PackConfig load_pack_config(const std::filesystem::path& path);

PackModel assemble(const PackConfig& cfg, PackTolerances tol = {});

/// Comma-separated list of numbers, e.g. "-30,-30,-20,2,4,-20".
VectorXd parse_csv_vector(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace parcell
