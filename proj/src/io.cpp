#include "lagflow/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lagflow {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

constexpr char kMagic[8] = {'L', 'A', 'G', 'F', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindFlowMap = 1;
constexpr std::uint32_t kKindGridField = 2;

void write_header(std::ofstream& os, std::uint32_t kind) {
    os.write(kMagic, 8);
    os.write(reinterpret_cast<const char*>(&kVersion), 4);
    os.write(reinterpret_cast<const char*>(&kind), 4);
}

std::uint32_t read_header(std::ifstream& is, const std::string& path) {
    char magic[8];
    std::uint32_t version = 0, kind = 0;
    is.read(magic, 8);
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&kind), 4);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("not a lagflow snapshot: " + path);
    if (version != kVersion) throw IoError("unsupported snapshot version in " + path);
    return kind;
}

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_grid(std::ofstream& os, const Grid& g) {
    put(os, static_cast<std::int32_t>(g.dim));
    put(os, static_cast<std::int32_t>(g.boundary == Boundary::Periodic ? 0 : 1));
    for (int a = 0; a < 3; ++a) put(os, g.lo[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) put(os, g.hi[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) put(os, static_cast<std::int32_t>(g.n[static_cast<std::size_t>(a)]));
}

Grid read_grid(std::ifstream& is) {
    std::int32_t dim = 0, bnd = 0;
    get(is, dim);
    get(is, bnd);
    std::array<double, 3> lo{}, hi{};
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) get(is, lo[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) get(is, hi[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) {
        std::int32_t v = 0;
        get(is, v);
        n[static_cast<std::size_t>(a)] = v;
    }
    return Grid(dim, lo, hi, n, bnd == 0 ? Boundary::Periodic : Boundary::Bounded);
}

std::string grid_meta(const Grid& g) {
    std::ostringstream os;
    os << "dim=" << g.dim << " boundary=" << (g.boundary == Boundary::Periodic ? "periodic" : "bounded");
    os << " shape=";
    for (int a = 0; a < g.dim; ++a) os << (a ? "x" : "") << g.n[static_cast<std::size_t>(a)];
    os << " lo=";
    for (int a = 0; a < g.dim; ++a) os << (a ? "," : "") << format_double(g.lo[static_cast<std::size_t>(a)]);
    os << " hi=";
    for (int a = 0; a < g.dim; ++a) os << (a ? "," : "") << format_double(g.hi[static_cast<std::size_t>(a)]);
    return os.str();
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw IoError("cannot open for reading: " + path);
    return is;
}

}  // namespace

void write_flowmap_csv(const FlowMap& map, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "# lagflow flowmap " << grid_meta(map.lattice) << " mass=" << format_double(map.mass)
       << " time=" << format_double(map.time) << "\n";
    os << "index";
    const int d = map.lattice.dim;
    for (int a = 0; a < d; ++a) os << ",xi" << a;
    for (int a = 0; a < d; ++a) os << ",x" << a;
    for (int a = 0; a < d; ++a) os << ",p" << a;
    os << ",rho0\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        os << i;
        const Vec3 xi = map.lattice.coord(i);
        for (int a = 0; a < d; ++a) os << "," << format_double(xi[a]);
        for (int a = 0; a < d; ++a) os << "," << format_double(map.positions[i][a]);
        for (int a = 0; a < d; ++a) os << "," << format_double(map.momenta[i][a]);
        os << "," << format_double(map.rho0[i]) << "\n";
    }
}

namespace {

Grid parse_grid_meta(const std::string& line) {
    auto grab = [&](const std::string& key) {
        const auto pos = line.find(key + "=");
        if (pos == std::string::npos) throw IoError("missing " + key + " in snapshot header");
        const auto start = pos + key.size() + 1;
        const auto end = line.find(' ', start);
        return line.substr(start, end == std::string::npos ? end : end - start);
    };
    const int dim = std::stoi(grab("dim"));
    const Boundary b = grab("boundary") == "periodic" ? Boundary::Periodic : Boundary::Bounded;
    std::array<int, 3> n{1, 1, 1};
    {
        std::stringstream ss(grab("shape"));
        std::string tok;
        int a = 0;
        while (std::getline(ss, tok, 'x') && a < 3) n[static_cast<std::size_t>(a++)] = std::stoi(tok);
    }
    std::array<double, 3> lo{0, 0, 0}, hi{1, 1, 1};
    {
        std::stringstream ss(grab("lo"));
        std::string tok;
        int a = 0;
        while (std::getline(ss, tok, ',') && a < 3) lo[static_cast<std::size_t>(a++)] = std::stod(tok);
    }
    {
        std::stringstream ss(grab("hi"));
        std::string tok;
        int a = 0;
        while (std::getline(ss, tok, ',') && a < 3) hi[static_cast<std::size_t>(a++)] = std::stod(tok);
    }
    return Grid(dim, lo, hi, n, b);
}

double meta_value(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos) throw IoError("missing " + key + " in snapshot header");
    return std::stod(line.substr(pos + key.size() + 1));
}

}  // namespace

FlowMap read_flowmap_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# lagflow flowmap", 0) != 0)
        throw IoError("not a flowmap csv: " + path);
    FlowMap map;
    map.lattice = parse_grid_meta(line);
    map.mass = meta_value(line, "mass");
    map.time = meta_value(line, "time");
    std::getline(is, line);  // column header
    const std::size_t nn = map.lattice.node_count();
    const int d = map.lattice.dim;
    map.positions.resize(nn);
    map.momenta.resize(nn);
    map.rho0.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        if (!std::getline(is, line)) throw IoError("truncated flowmap csv: " + path);
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');  // index
        for (int a = 0; a < d; ++a) std::getline(ss, tok, ',');  // xi (recomputed)
        for (int a = 0; a < d; ++a) {
            std::getline(ss, tok, ',');
            map.positions[i][a] = std::stod(tok);
        }
        for (int a = 0; a < d; ++a) {
            std::getline(ss, tok, ',');
            map.momenta[i][a] = std::stod(tok);
        }
        std::getline(ss, tok, ',');
        map.rho0[i] = std::stod(tok);
    }
    return map;
}

void write_gridfield_csv(const GridField& f, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "# lagflow gridfield " << grid_meta(f.grid) << " ncomp=" << f.ncomp << " units="
       << (f.units.empty() ? "-" : f.units) << "\n";
    const int d = f.grid.dim;
    for (int a = 0; a < d; ++a) os << (a ? "," : "") << "i" << a;
    for (int a = 0; a < d; ++a) os << ",x" << a;
    for (int c = 0; c < f.ncomp; ++c) os << ",c" << c;
    os << "\n";
    const std::size_t nodes = f.grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const auto idx = f.grid.unflat(n);
        const Vec3 x = f.grid.coord(idx);
        for (int a = 0; a < d; ++a) os << (a ? "," : "") << idx[static_cast<std::size_t>(a)];
        for (int a = 0; a < d; ++a) os << "," << format_double(x[a]);
        for (int c = 0; c < f.ncomp; ++c) os << "," << format_double(f.at(n, c));
        os << "\n";
    }
}

GridField read_gridfield_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# lagflow gridfield", 0) != 0)
        throw IoError("not a gridfield csv: " + path);
    const Grid g = parse_grid_meta(line);
    const int ncomp = static_cast<int>(meta_value(line, "ncomp"));
    GridField f(g, ncomp);
    std::getline(is, line);  // column header
    const std::size_t nodes = g.node_count();
    const int d = g.dim;
    for (std::size_t n = 0; n < nodes; ++n) {
        if (!std::getline(is, line)) throw IoError("truncated gridfield csv: " + path);
        std::stringstream ss(line);
        std::string tok;
        for (int a = 0; a < 2 * d; ++a) std::getline(ss, tok, ',');
        for (int c = 0; c < ncomp; ++c) {
            std::getline(ss, tok, ',');
            f.at(n, c) = std::stod(tok);
        }
    }
    return f;
}

void write_flowmap_binary(const FlowMap& map, const std::string& path) {
    std::ofstream os = open_out(path, true);
    write_header(os, kKindFlowMap);
    write_grid(os, map.lattice);
    put(os, map.mass);
    put(os, map.time);
    const std::size_t nn = map.size();
    put(os, static_cast<std::uint64_t>(nn));
    for (std::size_t i = 0; i < nn; ++i)
        for (int a = 0; a < 3; ++a) put(os, map.positions[i][a]);
    for (std::size_t i = 0; i < nn; ++i)
        for (int a = 0; a < 3; ++a) put(os, map.momenta[i][a]);
    for (std::size_t i = 0; i < nn; ++i) put(os, map.rho0[i]);
}

FlowMap read_flowmap_binary(const std::string& path) {
    std::ifstream is = open_in(path, true);
    if (read_header(is, path) != kKindFlowMap) throw IoError("snapshot kind mismatch: " + path);
    FlowMap map;
    map.lattice = read_grid(is);
    get(is, map.mass);
    get(is, map.time);
    std::uint64_t nn = 0;
    get(is, nn);
    if (nn != map.lattice.node_count()) throw IoError("corrupt flowmap snapshot: " + path);
    map.positions.resize(nn);
    map.momenta.resize(nn);
    map.rho0.resize(nn);
    for (std::size_t i = 0; i < nn; ++i)
        for (int a = 0; a < 3; ++a) get(is, map.positions[i][a]);
    for (std::size_t i = 0; i < nn; ++i)
        for (int a = 0; a < 3; ++a) get(is, map.momenta[i][a]);
    for (std::size_t i = 0; i < nn; ++i) get(is, map.rho0[i]);
    if (!is) throw IoError("truncated flowmap snapshot: " + path);
    return map;
}

void write_gridfield_binary(const GridField& f, const std::string& path) {
    std::ofstream os = open_out(path, true);
    write_header(os, kKindGridField);
    write_grid(os, f.grid);
    put(os, static_cast<std::int32_t>(f.ncomp));
    const std::uint32_t ulen = static_cast<std::uint32_t>(f.units.size());
    put(os, ulen);
    os.write(f.units.data(), ulen);
    put(os, static_cast<std::uint64_t>(f.values.size()));
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridField read_gridfield_binary(const std::string& path) {
    std::ifstream is = open_in(path, true);
    if (read_header(is, path) != kKindGridField) throw IoError("snapshot kind mismatch: " + path);
    const Grid g = read_grid(is);
    std::int32_t ncomp = 0;
    get(is, ncomp);
    std::uint32_t ulen = 0;
    get(is, ulen);
    std::string units(ulen, '\0');
    is.read(units.data(), ulen);
    GridField f(g, ncomp, units);
    std::uint64_t count = 0;
    get(is, count);
    if (count != f.values.size()) throw IoError("corrupt gridfield snapshot: " + path);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw IoError("truncated gridfield snapshot: " + path);
    return f;
}

void write_profile_csv(const RadialProfile& p, const std::string& r_name, const std::string& v_name,
                       const std::string& path) {
    std::ofstream os = open_out(path);
    os << r_name << "," << v_name << "\n";
    for (std::size_t i = 0; i < p.r.size(); ++i)
        os << format_double(p.r[i]) << "," << format_double(p.value[i]) << "\n";
}

RadialProfile read_profile_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty profile csv: " + path);
    RadialProfile p;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        p.r.push_back(std::stod(tok));
        std::getline(ss, tok, ',');
        p.value.push_back(std::stod(tok));
    }
    p.validate();
    return p;
}

void DiagnosticsLog::append(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw Error("diagnostics row width mismatch");
    rows_.push_back(row);
}

void DiagnosticsLog::write_csv(const std::string& path) const {
    std::ofstream os = open_out(path);
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << "\n";
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
}

std::vector<double> DiagnosticsLog::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] == name) {
            std::vector<double> out;
            out.reserve(rows_.size());
            for (const auto& row : rows_) out.push_back(row[c]);
            return out;
        }
    }
    throw Error("unknown diagnostics column: " + name);
}

void emit_plotdata(const std::string& diagnostics_csv, const std::string& out_csv, double scale,
                   const std::vector<std::string>& columns) {
    std::ifstream is = open_in(diagnostics_csv);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty diagnostics csv: " + diagnostics_csv);
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) names.push_back(tok);
    }
    if (names.empty()) throw IoError("diagnostics csv has no header: " + diagnostics_csv);
    for (const auto& want : columns) {
        bool found = false;
        for (const auto& n : names)
            if (n == want) found = true;
        if (!found) throw Error("unknown column requested: " + want);
    }
    auto selected = [&](const std::string& n) {
        if (columns.empty()) return true;
        for (const auto& want : columns)
            if (n == want) return true;
        return false;
    };

    std::ofstream os = open_out(out_csv);
    os << "# scale=" << format_double(scale) << "\n";
    os << names.front() << ",name,value\n";
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != names.size()) throw IoError("ragged diagnostics csv row");
        for (std::size_t c = 1; c < names.size(); ++c) {
            if (!selected(names[c])) continue;
            os << format_double(vals[0]) << "," << names[c] << "," << format_double(vals[c] * scale)
               << "\n";
        }
    }
}

}  // namespace lagflow
