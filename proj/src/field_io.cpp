#include "lowreg/field_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lowreg/error.hpp"

namespace lowreg {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_real(const std::string& tok) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    fail(ErrorKind::Io, "bad real '" + tok + "' in field file");
  }
  return v;
}

}  // namespace

void write_grid_field(std::ostream& os, const GridSpec& grid,
                      const std::vector<std::span<const double>>& columns) {
  const int n = grid.dim();
  os << n;
  for (int k = 0; k < n; ++k) os << ' ' << format_real(grid.half_width()[k]);
  for (int k = 0; k < n; ++k) os << ' ' << format_real(grid.spacing()[k]);
  os << ' ' << (grid.cell_centered() ? "cell" : "vertex") << '\n';
  os << "fields " << columns.size() << " center";
  for (int k = 0; k < n; ++k) os << ' ' << format_real(grid.center()[k]);
  os << '\n';
  std::vector<std::size_t> idx(n);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.multi_index(node, idx);
    for (int k = 0; k < n; ++k) os << (k ? " " : "") << idx[k];
    for (const auto& c : columns) os << ' ' << format_real(c[node]);
    os << '\n';
  }
}

GridFieldData read_grid_field(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::Io,
          "field file: missing header");
  std::istringstream hs(line);
  int n = 0;
  hs >> n;
  require(n >= 1, ErrorKind::Io, "field file: bad dimension");
  Point L(n), h(n), c(n, 0.0);
  std::string tok;
  for (int k = 0; k < n; ++k) {
    hs >> tok;
    L[k] = parse_real(tok);
  }
  for (int k = 0; k < n; ++k) {
    hs >> tok;
    h[k] = parse_real(tok);
  }
  std::string stag;
  hs >> stag;
  require(stag == "cell" || stag == "vertex", ErrorKind::Io,
          "field file: staggering must be cell or vertex");
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::Io,
          "field file: missing fields line");
  std::istringstream fs(line);
  std::string word;
  std::size_t ncols = 0;
  fs >> word >> ncols;
  require(word == "fields", ErrorKind::Io, "field file: expected 'fields'");
  fs >> word;
  require(word == "center", ErrorKind::Io, "field file: expected 'center'");
  for (int k = 0; k < n; ++k) {
    fs >> tok;
    c[k] = parse_real(tok);
  }
  GridFieldData data{GridSpec(c, L, h, stag == "cell"), {}};
  data.columns.assign(ncols, std::vector<double>(data.grid.size()));
  std::vector<std::size_t> idx(n);
  for (std::size_t node = 0; node < data.grid.size(); ++node) {
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::Io,
            "field file: truncated at node " + std::to_string(node));
    std::istringstream ls(line);
    for (int k = 0; k < n; ++k) ls >> idx[k];
    require(static_cast<bool>(ls) && data.grid.linear_index(idx) == node,
            ErrorKind::Io, "field file: node index out of order");
    for (std::size_t j = 0; j < ncols; ++j) {
      ls >> tok;
      data.columns[j][node] = parse_real(tok);
    }
  }
  return data;
}

void write_scalar_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  write_grid_field(os, f.grid(), {f.values()});
}

ScalarField read_scalar_field(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + path);
  auto data = read_grid_field(is);
  require(data.columns.size() == 1, ErrorKind::Io,
          "scalar field file must have one column");
  return ScalarField(data.grid, std::move(data.columns[0]));
}

void write_tensor_field(const std::string& path, const SymmetricTensorField& t) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + path);
  std::vector<std::span<const double>> cols;
  for (const auto& c : t.packed()) cols.emplace_back(c);
  write_grid_field(os, t.grid(), cols);
}

SymmetricTensorField read_tensor_field(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + path);
  auto data = read_grid_field(is);
  return SymmetricTensorField(data.grid, std::move(data.columns));
}

}  // namespace lowreg
