#pragma once

#include <string>
#include <vector>

#include "lagflow/gravity.hpp"
#include "lagflow/grid_field.hpp"
#include "lagflow/label_space.hpp"

namespace lagflow {

// deterministic shortest-exact double formatting shared by all writers
std::string format_double(double v);

// columnar text snapshots
void write_flowmap_csv(const FlowMap& map, const std::string& path);
FlowMap read_flowmap_csv(const std::string& path);

void write_gridfield_csv(const GridField& f, const std::string& path);
GridField read_gridfield_csv(const std::string& path);

// raw little-endian container with a 16-byte magic/version header;
// round-trips bit exactly
void write_flowmap_binary(const FlowMap& map, const std::string& path);
FlowMap read_flowmap_binary(const std::string& path);

void write_gridfield_binary(const GridField& f, const std::string& path);
GridField read_gridfield_binary(const std::string& path);

void write_profile_csv(const RadialProfile& p, const std::string& r_name,
                       const std::string& v_name, const std::string& path);
RadialProfile read_profile_csv(const std::string& path);

// time-series diagnostics: one row per sample, one column per quantity
class DiagnosticsLog {
  public:
    explicit DiagnosticsLog(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void append(const std::vector<double>& row);
    void write_csv(const std::string& path) const;

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    std::vector<double> column(const std::string& name) const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

// reshape a diagnostics CSV into long-format (time, name, value) rows; the
// scale factor is recorded in the header and applied to the values
void emit_plotdata(const std::string& diagnostics_csv, const std::string& out_csv,
                   double scale = 1.0, const std::vector<std::string>& columns = {});

}  // namespace lagflow
