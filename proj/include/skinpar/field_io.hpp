#pragma once

#include <filesystem>
#include <iosfwd>

#include "skinpar/discretization.hpp"

namespace skinpar {

/// Plain-text ".field" snapshot:
///
///   nx ny nz hx hy hz
///   time=<t>
///   one value per line, x-fastest
///
/// Values are written with 17 significant digits so a round trip is exact.
void write_field(std::ostream& out, const StateVector& state);
void write_field(const std::filesystem::path& path, const StateVector& state);

/// Throws skinpar::Error on malformed input. The time line is optional.
StateVector read_field(std::istream& in);
StateVector read_field(const std::filesystem::path& path);

}  // namespace skinpar
