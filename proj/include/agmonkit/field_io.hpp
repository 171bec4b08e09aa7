#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "agmonkit/grid.hpp"

namespace agmonkit {

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

/// Writes a field as CSV:
///
///   # dim=2, bounds=[[a0,b0],[a1,b1]], n=[n0,n1]
///   # key=value, key=value        (optional extra header line)
///   x,y,value                     (one row per node, row-major)
void write_field_csv(std::ostream& os, const GridField& f, const HeaderFields& extra = {});

/// Reads the format produced by write_field_csv. Extra header keys are
/// returned through `extra` when given.
GridField read_field_csv(std::istream& is, std::map<std::string, std::string>* extra = nullptr);

/// Gnuplot-ready columns: "x value" in 1D, "x y value" in 2D with a blank
/// line after each row of constant x.
void write_plot_dat(std::ostream& os, const GridField& f, const std::string& title);

}  // namespace agmonkit
