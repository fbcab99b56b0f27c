#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lowreg/field.hpp"

namespace lowreg {

// Grid field text format (stable; see docs/file_formats.md):
//
//   line 1:  n L_1 .. L_n h_1 .. h_n staggering        (staggering: cell|vertex)
//   line 2:  fields <k> center c_1 .. c_n
//   then one line per node in linear order (axis 1 fastest):
//            i_1 .. i_n v_1 .. v_k
//
// Reals are written in shortest round-trip form with '.' decimals.

/// Grid plus k value columns, as read back from a field file.
struct GridFieldData {
  GridSpec grid;
  std::vector<std::vector<double>> columns;
};

void write_grid_field(std::ostream& os, const GridSpec& grid,
                      const std::vector<std::span<const double>>& columns);
GridFieldData read_grid_field(std::istream& is);

void write_scalar_field(const std::string& path, const ScalarField& f);
ScalarField read_scalar_field(const std::string& path);

/// Packed components (i <= j, row-major) as columns.
void write_tensor_field(const std::string& path, const SymmetricTensorField& t);
SymmetricTensorField read_tensor_field(const std::string& path);

/// Shortest round-trip decimal representation, locale independent.
std::string format_real(double v);

}  // namespace lowreg
