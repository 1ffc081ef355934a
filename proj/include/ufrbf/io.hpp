#ifndef UFRBF_IO_HPP
#define UFRBF_IO_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "ufrbf/assembly.hpp"
#include "ufrbf/geometry.hpp"

namespace ufrbf {

/// Writes `content` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParameterError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw ParameterError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ParameterError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

/// Comma separated table with a header row. Numbers are written with 17
/// significant digits so files round-trip exactly.
class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row
    {
    public:
        Row& operator<<(double v)
        {
            std::ostringstream s;
            s << std::setprecision(17) << v;
            cells_.push_back(s.str());
            return *this;
        }
        template <class T>
            requires std::is_integral_v<T>
        Row& operator<<(T v)
        {
            cells_.push_back(std::to_string(v));
            return *this;
        }
        Row& operator<<(const std::string& v)
        {
            cells_.push_back(v);
            return *this;
        }
        Row& operator<<(const char* v) { return *this << std::string(v); }

    private:
        friend class CsvTable;
        std::vector<std::string> cells_;
    };

    Row& row()
    {
        rows_.emplace_back();
        return rows_.back();
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    std::string str() const
    {
        std::ostringstream out;
        write_line(out, header_);
        for (const auto& r : rows_) {
            if (r.cells_.size() != header_.size())
                throw ParameterError("csv: row has " + std::to_string(r.cells_.size()) + " cells, header has "
                                     + std::to_string(header_.size()));
            write_line(out, r.cells_);
        }
        return out.str();
    }

    void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

/// Reads a CSV written by CsvTable: header plus numeric rows.
struct CsvData
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    Index column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<Index>(i);
        throw ParameterError("csv: no column '" + name + "'");
    }
};

inline CsvData read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream s(line);
        std::string c;
        while (std::getline(s, c, ',')) cells.push_back(c);
        return cells;
    };
    CsvData d;
    std::string line;
    if (std::getline(in, line)) d.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) d.rows.push_back(split(line));
    return d;
}

// ---------------------------------------------------------------------------
// Point files: whitespace separated, one point per row, '#' header lines
// carrying d, N and h.
// ---------------------------------------------------------------------------

template <int Dim>
void write_points(const std::filesystem::path& path, const PointList<Dim>& points, double h)
{
    std::ostringstream out;
    out << "# d " << Dim << "\n# N " << points.size() << "\n# h " << std::setprecision(17) << h << '\n';
    for (const auto& p : points) {
        for (int a = 0; a < Dim; ++a) out << (a ? " " : "") << p[a];
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

template <int Dim>
struct PointFile
{
    PointList<Dim> points;
    double h = 0.0;
};

template <int Dim>
PointFile<Dim> read_points(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open '" + path.string() + "'");
    PointFile<Dim> f;
    long long declared = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        if (line[0] == '#') {
            std::string hash, key;
            s >> hash >> key;
            if (key == "d") {
                int d = 0;
                s >> d;
                if (d != Dim)
                    throw ParameterError("point file '" + path.string() + "' has d = " + std::to_string(d)
                                         + ", expected " + std::to_string(Dim));
            } else if (key == "N") {
                s >> declared;
            } else if (key == "h") {
                s >> f.h;
            }
            continue;
        }
        Point<Dim> p;
        for (int a = 0; a < Dim; ++a)
            if (!(s >> p[a])) throw ParameterError("point file '" + path.string() + "': malformed row '" + line + "'");
        f.points.push_back(p);
    }
    if (declared >= 0 && declared != static_cast<long long>(f.points.size()))
        throw ParameterError("point file '" + path.string() + "': header N does not match row count");
    return f;
}

/// Rows x y [z] nx ny [nz] label with label D or N.
template <int Dim>
void write_boundary_samples(const std::filesystem::path& path, const std::vector<BoundarySample<Dim>>& samples)
{
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& b : samples) {
        for (int a = 0; a < Dim; ++a) out << b.point[a] << ' ';
        for (int a = 0; a < Dim; ++a) out << b.normal[a] << ' ';
        out << to_string(b.label) << '\n';
    }
    write_file_atomic(path, out.str());
}

/// MatrixMarket coordinate real general, 1-based.
inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a)
{
    std::ostringstream out;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n' << std::setprecision(17);
    for (Index r = 0; r < a.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(a, r); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    write_file_atomic(path, out.str());
}

/// MatrixMarket array real general (a column vector).
inline void write_matrix_market(const std::filesystem::path& path, const Eigen::VectorXd& v)
{
    std::ostringstream out;
    out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n" << std::setprecision(17);
    for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
    write_file_atomic(path, out.str());
}

/// Field export: coordinates, u_h, u_exact, abs_err, log10_abs_err.
template <int Dim>
CsvTable field_table(const PointList<Dim>& points, const Eigen::VectorXd& u_h, const Eigen::VectorXd& u_exact)
{
    if (static_cast<Index>(points.size()) != u_h.size() || u_h.size() != u_exact.size())
        throw ParameterError("field_table: length mismatch");
    static const char* axes[] = {"x", "y", "z"};
    std::vector<std::string> header(axes, axes + Dim);
    for (const char* c : {"u_h", "u_exact", "abs_err", "log10_abs_err"}) header.emplace_back(c);
    CsvTable t(std::move(header));
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& r = t.row();
        for (int a = 0; a < Dim; ++a) r << points[i][a];
        const double err = std::abs(u_h[i] - u_exact[i]);
        // Exact agreement gets the floor of double precision rather than -inf.
        r << u_h[i] << u_exact[i] << err << std::log10(std::max(err, 1e-300));
    }
    return t;
}

} // namespace ufrbf

#endif // UFRBF_IO_HPP
