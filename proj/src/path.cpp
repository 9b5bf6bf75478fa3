#include "ranksim/path.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ranksim/error.hpp"

namespace ranksim {

DiscretePath::DiscretePath(std::size_t dim, std::vector<double> grid)
    : dim_(dim), grid_(std::move(grid)), values_(grid_.size() * dim, 0.0) {}

DiscretePath::DiscretePath(std::size_t dim, std::vector<double> grid, std::vector<double> values)
    : dim_(dim), grid_(std::move(grid)), values_(std::move(values)) {
    check_consistent();
}

void DiscretePath::push_back(double t, std::span<const double> v) {
    if (v.size() != dim_) throw ValidationError("path: row dimension mismatch");
    grid_.push_back(t);
    values_.insert(values_.end(), v.begin(), v.end());
}

void DiscretePath::reserve(std::size_t n) {
    grid_.reserve(n);
    values_.reserve(n * dim_);
}

void DiscretePath::check_consistent() const {
    if (values_.size() != grid_.size() * dim_) throw ValidationError("path: values do not match grid size * dim");
    for (std::size_t k = 1; k < grid_.size(); ++k)
        if (!(grid_[k] > grid_[k - 1])) throw ValidationError("path: grid must be strictly increasing");
}

double DiscretePath::amplitude() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> DiscretePath::coordinate(std::size_t i) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = at(k, i);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void DiscretePath::write_csv(std::ostream& os, const std::string& prefix) const {
    os << 't';
    for (std::size_t i = 0; i < dim_; ++i) os << ',' << prefix << (i + 1);
    os << '\n';
    for (std::size_t k = 0; k < size(); ++k) {
        os << format_double(grid_[k]);
        for (std::size_t i = 0; i < dim_; ++i) os << ',' << format_double(at(k, i));
        os << '\n';
    }
}

void DiscretePath::write_csv(const std::string& path, const std::string& prefix) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(os, prefix);
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("csv: bad number '" + s + "'");
    return v;
}

} // namespace

DiscretePath DiscretePath::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.empty() || header[0] != "t") throw ValidationError("csv: header must start with 't'");
    const std::size_t dim = header.size() - 1;
    DiscretePath p(dim, {});
    std::vector<double> row(dim);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != dim + 1) throw ValidationError("csv: row has wrong number of columns");
        for (std::size_t i = 0; i < dim; ++i) row[i] = parse_double(cells[i + 1]);
        p.push_back(parse_double(cells[0]), row);
    }
    p.check_consistent();
    return p;
}

DiscretePath DiscretePath::read_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_csv(is);
}

} // namespace ranksim
