#include "wpharm/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wpharm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string csv_quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash)
    : path_(path) {
    if (!config_hash.empty())
        buffer_ += "# config=" + config_hash + "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += csv_quote(cells[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::numeric_row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += format_double(cells[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::flush() {
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path_);
    out << buffer_;
}

CsvWriter::~CsvWriter() {
    try {
        flush();
    } catch (...) {
    }
}

void write_mesh(const Mesh& mesh, const std::string& path,
                const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!config_hash.empty()) out << "# config=" << config_hash << "\n";
    out << mesh.dim << " " << mesh.n_vertices() << " " << mesh.n_cells() << " "
        << format_double(mesh.h) << "\n";
    for (const auto& v : mesh.vertices) {
        out << format_double(v[0]) << " " << format_double(v[1]);
        if (mesh.dim == 3) out << " " << format_double(v[2]);
        out << "\n";
    }
    for (const auto& c : mesh.cells) {
        out << c[0] << " " << c[1] << " " << c[2];
        if (mesh.dim == 3) out << " " << c[3];
        out << "\n";
    }
    bool first = true;
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.boundary[v]) {
            if (!first) out << " ";
            out << v;
            first = false;
        }
    out << "\n";
}

Mesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh " + path);
    std::string line;
    do {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated mesh file " + path);
    } while (!line.empty() && line[0] == '#');

    Mesh mesh;
    std::size_t nv = 0, nc = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> mesh.dim >> nv >> nc >> mesh.h))
            throw std::runtime_error("bad mesh header in " + path);
    }
    mesh.vertices.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        mesh.vertices[v] = {0.0, 0.0, 0.0};
        in >> mesh.vertices[v][0] >> mesh.vertices[v][1];
        if (mesh.dim == 3) in >> mesh.vertices[v][2];
    }
    mesh.cells.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        mesh.cells[c] = {0, 0, 0, -1};
        in >> mesh.cells[c][0] >> mesh.cells[c][1] >> mesh.cells[c][2];
        if (mesh.dim == 3) in >> mesh.cells[c][3];
    }
    mesh.boundary.assign(nv, 0);
    std::getline(in, line); // end of last cell line
    if (std::getline(in, line)) {
        std::istringstream bs(line);
        std::size_t idx;
        while (bs >> idx)
            if (idx < nv) mesh.boundary[idx] = 1;
    }
    // weights are not serialized; rebuild cotangent weights
    std::map<std::pair<int, int>, double> wmap;
    if (mesh.dim == 2) {
        for (const auto& c : mesh.cells)
            for (int k = 0; k < 3; ++k) {
                const int a = c[k], b = c[(k + 1) % 3], o = c[(k + 2) % 3];
                const auto& A = mesh.vertices[a];
                const auto& B = mesh.vertices[b];
                const auto& O = mesh.vertices[o];
                const double ux = A[0] - O[0], uy = A[1] - O[1];
                const double vx = B[0] - O[0], vy = B[1] - O[1];
                const double cross = std::fabs(ux * vy - uy * vx);
                const double dot = ux * vx + uy * vy;
                auto key = std::minmax(a, b);
                wmap[{key.first, key.second}] +=
                    0.5 * dot / std::max(cross, 1e-300);
            }
        for (auto& [key, w] : wmap) {
            if (w < 0.0) {
                w = 0.0;
                ++mesh.clamped_edges;
            }
            mesh.edges.push_back({key.first, key.second, w});
        }
    }
    mesh.finalize();
    return mesh;
}

namespace {

const char* target_name(Target::Kind k) {
    switch (k) {
    case Target::Kind::Model: return "model";
    case Target::Kind::Glued: return "glued";
    case Target::Kind::Product: return "product";
    case Target::Kind::Region: return "region";
    }
    return "model";
}

} // namespace

void write_map(const DiscreteMap& map, const std::string& path,
               const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!config_hash.empty()) out << "# config=" << config_hash << "\n";
    out << target_name(map.target.kind) << " " << map.target.j << " "
        << map.target.m;
    if (map.target.kind == Target::Kind::Region)
        out << " " << format_double(map.target.rho0);
    out << "\n";
    for (std::size_t v = 0; v < map.values.size(); ++v) {
        out << v << " " << int(map.frozen[v]);
        for (double r : map.values[v].regular)
            out << " " << format_double(r);
        for (const auto& g : map.values[v].singular) {
            if (map.target.kind == Target::Kind::Glued ||
                map.target.kind == Target::Kind::Product) {
                if (g.is_basepoint())
                    out << " -1 0 0";
                else
                    out << " " << g.sheet() << " "
                        << format_double(g.point().rho()) << " "
                        << format_double(g.point().phi());
            } else {
                if (g.is_basepoint())
                    out << " P0";
                else
                    out << " " << format_double(g.point().rho()) << " "
                        << format_double(g.point().phi());
            }
        }
        out << "\n";
    }
}

DiscreteMap read_map(std::shared_ptr<const Mesh> mesh,
                     const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map " + path);
    std::string line;
    do {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated map file " + path);
    } while (!line.empty() && line[0] == '#');

    DiscreteMap map;
    map.mesh = mesh;
    {
        std::istringstream hs(line);
        std::string kind;
        hs >> kind >> map.target.j >> map.target.m;
        if (kind == "model")
            map.target.kind = Target::Kind::Model;
        else if (kind == "glued")
            map.target.kind = Target::Kind::Glued;
        else if (kind == "product")
            map.target.kind = Target::Kind::Product;
        else if (kind == "region") {
            map.target.kind = Target::Kind::Region;
            hs >> map.target.rho0;
        } else
            throw std::runtime_error("unknown target tag " + kind);
    }
    const std::size_t n = mesh->n_vertices();
    map.values.assign(n, MapValue::basepoint());
    map.frozen.assign(n, 0);
    const int rd = map.target.regular_dim();
    const int nf = (map.target.kind == Target::Kind::Product) ? map.target.m : 1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t idx;
        int frozen;
        if (!(ls >> idx >> frozen)) continue;
        if (idx >= n) throw std::runtime_error("vertex index out of range");
        MapValue val;
        val.regular.resize(rd);
        for (int c = 0; c < rd; ++c) ls >> val.regular[c];
        for (int f = 0; f < nf; ++f) {
            if (map.target.kind == Target::Kind::Glued ||
                map.target.kind == Target::Kind::Product) {
                int sheet;
                double rho, phi;
                ls >> sheet >> rho >> phi;
                val.singular.push_back(
                    sheet < 0 ? GluedPoint::basepoint()
                              : GluedPoint::on_sheet(sheet, rho, phi));
            } else {
                std::string tok;
                ls >> tok;
                if (tok == "P0") {
                    val.singular.push_back(GluedPoint::basepoint());
                } else {
                    double phi;
                    ls >> phi;
                    val.singular.push_back(
                        GluedPoint::on_sheet(0, std::stod(tok), phi));
                }
            }
        }
        map.values[idx] = std::move(val);
        map.frozen[idx] = frozen ? 1 : 0;
    }
    return map;
}

std::string solve_report_json(const SolveReport& report,
                              const std::string& config_hash) {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["sweeps"] = report.sweeps;
    j["final_energy"] = report.final_energy;
    j["max_move_last"] = report.max_move_last;
    j["converged"] = report.converged;
    j["flagged_vertices"] = report.flagged_vertices;
    if (std::isfinite(report.el_residual))
        j["el_residual"] = report.el_residual;
    j["energy_history"] = report.energy_history;
    return j.dump(2);
}

} // namespace wpharm
