#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ranksim {

/// A K-dimensional path sampled on a strictly increasing time grid.
/// Values are stored row-major: the vector at grid point k occupies
/// [k*dim, (k+1)*dim).
class DiscretePath {
public:
    DiscretePath() = default;
    DiscretePath(std::size_t dim, std::vector<double> grid);
    DiscretePath(std::size_t dim, std::vector<double> grid, std::vector<double> values);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return grid_.size(); }
    bool empty() const noexcept { return grid_.empty(); }

    const std::vector<double>& grid() const noexcept { return grid_; }
    double time(std::size_t k) const { return grid_[k]; }

    std::span<double> row(std::size_t k) { return {values_.data() + k * dim_, dim_}; }
    std::span<const double> row(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
    double& at(std::size_t k, std::size_t i) { return values_[k * dim_ + i]; }
    double at(std::size_t k, std::size_t i) const { return values_[k * dim_ + i]; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    void push_back(double t, std::span<const double> v);
    void reserve(std::size_t n);

    /// Throws ValidationError unless the grid is strictly increasing and sized consistently.
    void check_consistent() const;
    /// sup over grid and coordinates of |value|.
    double amplitude() const noexcept;
    /// Coordinate i as a standalone series.
    std::vector<double> coordinate(std::size_t i) const;

    /// CSV with header `t,<prefix>1,...,<prefix>K`; `.` decimal point, LF endings.
    void write_csv(std::ostream& os, const std::string& prefix = "x") const;
    void write_csv(const std::string& path, const std::string& prefix = "x") const;
    static DiscretePath read_csv(std::istream& is);
    static DiscretePath read_csv(const std::string& path);

private:
    std::size_t dim_ = 0;
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Diffusion-scaled gaps: shortest scaled queue, then successive differences.
struct GapPath : DiscretePath {
    using DiscretePath::DiscretePath;
    GapPath() = default;
    explicit GapPath(DiscretePath p) : DiscretePath(std::move(p)) {}
};

/// Nondecreasing pushing (local time) process with L(0) = 0.
struct LocalTimePath : DiscretePath {
    using DiscretePath::DiscretePath;
    LocalTimePath() = default;
    explicit LocalTimePath(DiscretePath p) : DiscretePath(std::move(p)) {}
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace ranksim
