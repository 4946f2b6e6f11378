#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fvdwr/dual.hpp"
#include "fvdwr/field.hpp"
#include "fvdwr/mesh.hpp"

namespace fvdwr {

// Legacy unstructured-grid ASCII output (version 2). Point-data scalars carry
// nodal fields, cell-data scalars carry element indicators. Output is
// byte-stable for identical inputs.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, const P1Field*>>& point_fields,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_fields);

// Control-volume interfaces as a line soup, for inspection.
void write_diagram_vtk(const std::string& path, const DualDiagram& diagram);

// RFC-4180-style CSV with a fixed header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double v);

struct ErrorReport;  // estimator.hpp

// Structured text summary of an error report: estimator parts, the
// control-volume decomposition and the indicator norms.
void write_report_text(const std::string& path, const ErrorReport& report);

}  // namespace fvdwr
