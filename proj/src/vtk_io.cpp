#include "fvdwr/vtk_io.hpp"

#include <cstdio>
#include <fstream>

#include "fvdwr/errors.hpp"
#include "fvdwr/estimator.hpp"

namespace fvdwr {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, const P1Field*>>& point_fields,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& cell_fields) {
  for (const auto& [name, values] : cell_fields) {
    if (static_cast<int>(values->size()) != mesh.num_elements())
      throw IoError("cell field '" + name + "' size does not match the element count");
  }
  for (const auto& [name, field] : point_fields) {
    if (field->size() != mesh.num_vertices())
      throw IoError("point field '" + name + "' size does not match the vertex count");
  }

  auto out = open_out(path);
  out << "# vtk DataFile Version 2.0\n";
  out << "fvdwr fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << format_double(mesh.vertex(i).x) << " " << format_double(mesh.vertex(i).y) << " 0\n";
  }
  out << "CELLS " << mesh.num_elements() << " " << 4 * mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
  out << "CELL_TYPES " << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) out << "5\n";

  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << "\n";
    for (const auto& [name, field] : point_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (int i = 0; i < field->size(); ++i) out << format_double((*field)[i]) << "\n";
    }
  }
  if (!cell_fields.empty()) {
    out << "CELL_DATA " << mesh.num_elements() << "\n";
    for (const auto& [name, values] : cell_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double v : *values) out << format_double(v) << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_diagram_vtk(const std::string& path, const DualDiagram& diagram) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 2.0\n";
  out << "fvdwr control volumes\n";
  out << "ASCII\n";
  out << "DATASET POLYDATA\n";
  int nseg = 0;
  for (int s = 0; s < diagram.num_segments(); ++s)
    if (diagram.segment(s).length > 0.0) ++nseg;
  out << "POINTS " << 2 * nseg << " double\n";
  for (int s = 0; s < diagram.num_segments(); ++s) {
    const auto& seg = diagram.segment(s);
    if (seg.length == 0.0) continue;
    out << format_double(seg.p0.x) << " " << format_double(seg.p0.y) << " 0\n";
    out << format_double(seg.p1.x) << " " << format_double(seg.p1.y) << " 0\n";
  }
  out << "LINES " << nseg << " " << 3 * nseg << "\n";
  for (int k = 0; k < nseg; ++k) out << "2 " << 2 * k << " " << 2 * k + 1 << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_report_text(const std::string& path, const ErrorReport& report) {
  auto out = open_out(path);
  out << "goal value        " << format_double(report.goal_value) << "\n";
  out << "eta_T             " << format_double(report.eta_T) << "\n";
  out << "eta_m             " << format_double(report.eta_m) << "\n";
  out << "eta_nc            " << format_double(report.eta_nc) << "\n";
  out << "total estimate    " << format_double(report.total()) << "\n";
  if (report.effectivity_value)
    out << "effectivity       " << format_double(*report.effectivity_value) << "\n";
  out << "\n";
  out << "delta_0           " << format_double(report.nc.delta0) << "\n";
  out << "delta_1           " << format_double(report.nc.delta1) << "\n";
  out << "delta_2           " << format_double(report.nc.delta2) << "\n";
  out << "delta_3           " << format_double(report.nc.delta3) << "\n";
  out << "delta sum         " << format_double(report.nc.delta_sum()) << "\n";
  out << "\n";
  out << "eta_0             " << format_double(report.nc.eta0) << "\n";
  out << "eta_1             " << format_double(report.nc.eta1) << "\n";
  out << "eta_2             " << format_double(report.nc.eta2) << "\n";
  out << "eta_3             " << format_double(report.nc.eta3) << "\n";
  out << "sum eta_l         " << format_double(report.nc.eta_sum()) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k)
    out << header[k] << (k + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw IoError("CSV row width does not match the header");
    for (std::size_t k = 0; k < row.size(); ++k)
      out << format_double(row[k]) << (k + 1 < row.size() ? "," : "\n");
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fvdwr
