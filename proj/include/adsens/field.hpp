#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace adsens {

/// Per-time R^d values along one path, indexed by n = 1..N.
class GradientField {
public:
    GradientField() = default;
    GradientField(int steps, int dim) : steps_(steps), dim_(dim), values_(static_cast<std::size_t>(steps * dim)) {}

    int steps() const { return steps_; }
    int dim() const { return dim_; }
    double& at(int n, int i) { return values_[static_cast<std::size_t>((n - 1) * dim_ + i)]; }
    double at(int n, int i) const { return values_[static_cast<std::size_t>((n - 1) * dim_ + i)]; }
    std::span<const double> row(int n) const {
        return {values_.data() + static_cast<std::size_t>((n - 1) * dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<double> row(int n) {
        return {values_.data() + static_cast<std::size_t>((n - 1) * dim_), static_cast<std::size_t>(dim_)};
    }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

private:
    int steps_ = 0;
    int dim_ = 1;
    std::vector<double> values_;
};

/// Per-path, per-time R^d values for a whole path population (M x N x d, contiguous).
class PathField {
public:
    PathField() = default;
    PathField(std::size_t paths, int steps, int dim)
        : paths_(paths), steps_(steps), dim_(dim), values_(paths * static_cast<std::size_t>(steps * dim)) {}

    std::size_t paths() const { return paths_; }
    int steps() const { return steps_; }
    int dim() const { return dim_; }

    double& at(std::size_t m, int n, int i) { return values_[index(m, n, i)]; }
    double at(std::size_t m, int n, int i) const { return values_[index(m, n, i)]; }
    std::span<const double> row(std::size_t m, int n) const {
        return {values_.data() + index(m, n, 0), static_cast<std::size_t>(dim_)};
    }
    std::span<double> row(std::size_t m, int n) {
        return {values_.data() + index(m, n, 0), static_cast<std::size_t>(dim_)};
    }
    void set_path(std::size_t m, const GradientField& g) {
        std::copy(g.data().begin(), g.data().end(), values_.begin() + static_cast<std::ptrdiff_t>(index(m, 1, 0)));
    }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

private:
    std::size_t index(std::size_t m, int n, int i) const {
        return (m * static_cast<std::size_t>(steps_) + static_cast<std::size_t>(n - 1)) *
                   static_cast<std::size_t>(dim_) +
               static_cast<std::size_t>(i);
    }

    std::size_t paths_ = 0;
    int steps_ = 0;
    int dim_ = 1;
    std::vector<double> values_;
};

}  // namespace adsens
