#pragma once

#include "wpharm/domain.hpp"
#include "wpharm/solver.hpp"

#include <string>
#include <vector>

namespace wpharm {

// deterministic shortest round-trip formatting for doubles
std::string format_double(double v);

// CSV writer with RFC-4180-style quoting; rows are emitted verbatim in
// order, after a "# config=<hash>" comment line when a hash is given.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash);
    void row(const std::vector<std::string>& cells);
    void numeric_row(const std::vector<double>& cells);

private:
    std::string path_;
    std::string buffer_;
    void flush();
    friend class CsvFinalizer;

public:
    ~CsvWriter();
};

// Mesh text format: header "n #V #T h", vertex lines, cell lines, then the
// boundary vertex indices on one line.
void write_mesh(const Mesh& mesh, const std::string& path,
                const std::string& config_hash);
Mesh read_mesh(const std::string& path);

// Map file: header "target j m", per-vertex lines
//   index frozen <regular...> | <factor...>
// with model factors "rho phi" or "P0" and glued factors "sheet rho phi"
// (sheet -1 encodes P0).
void write_map(const DiscreteMap& map, const std::string& path,
               const std::string& config_hash);
// reads values and target onto an existing mesh
DiscreteMap read_map(std::shared_ptr<const Mesh> mesh,
                     const std::string& path);

std::string solve_report_json(const SolveReport& report,
                              const std::string& config_hash);

} // namespace wpharm
