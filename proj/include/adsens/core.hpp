#pragma once

// Path spaces, transport costs and a few numeric helpers shared by every module.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adsens {

/// Strictly increasing observation times t_0 = 0 < ... < t_N = T.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times);

    /// Uniform grid with N steps on [0, T].
    static TimeGrid uniform(int steps, double horizon);
    /// 0, 1, ..., N for problems without a physical clock.
    static TimeGrid integer(int steps);

    int steps() const { return static_cast<int>(times_.size()) - 1; }
    double horizon() const { return times_.back(); }
    double operator[](int n) const { return times_[static_cast<std::size_t>(n)]; }
    /// t_n - t_{n-1}, n = 1..N.
    double dt(int n) const { return times_[n] - times_[n - 1]; }
    const std::vector<double>& times() const { return times_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> times_{0.0, 1.0};
};

/// A point of {0} x (R^d)^N stored row-major: points[n * d + i] is component i of x_n.
class DiscretePath {
public:
    DiscretePath() = default;
    DiscretePath(int steps, int dim);
    /// Takes N+1 rows of d values; throws unless the first row is zero.
    DiscretePath(int steps, int dim, std::vector<double> points);

    static DiscretePath zero(int steps, int dim) { return DiscretePath(steps, dim); }

    int steps() const { return steps_; }
    int dim() const { return dim_; }

    double& at(int n, int i) { return points_[static_cast<std::size_t>(n * dim_ + i)]; }
    double at(int n, int i) const { return points_[static_cast<std::size_t>(n * dim_ + i)]; }
    std::span<const double> point(int n) const {
        return {points_.data() + static_cast<std::size_t>(n * dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<double> point(int n) {
        return {points_.data() + static_cast<std::size_t>(n * dim_), static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& data() const { return points_; }
    std::vector<double>& data() { return points_; }

    double sup_norm() const;

    bool operator==(const DiscretePath&) const = default;

private:
    int steps_ = 0;
    int dim_ = 1;
    std::vector<double> points_ = std::vector<double>(1, 0.0);
};

/// Delta: (0, x_1, ..., x_N) -> (0, x_1, x_2 - x_1, ..., x_N - x_{N-1}).
DiscretePath increment(const DiscretePath& path);
/// Inverse of increment (cumulative sum).
DiscretePath cumulate(const DiscretePath& increments);

enum class Scaling { discrete, hyperbolic, parabolic };

/// Cost exponent p with derived dual exponent q = p / (p - 1).
class CostSpec {
public:
    explicit CostSpec(double p = 2.0, Scaling scaling = Scaling::discrete, double horizon = 1.0);

    double p() const { return p_; }
    double q() const { return p_ / (p_ - 1.0); }
    Scaling scaling() const { return scaling_; }
    double horizon() const { return horizon_; }
    /// N^{p-1} / T^{p-1} under hyperbolic scaling, 1 otherwise.
    double scale_factor(int steps) const;

private:
    double p_;
    Scaling scaling_;
    double horizon_;
};

/// sum_n |Delta x_n - Delta y_n|_p^p, times the hyperbolic factor when requested.
double cost_cn(const DiscretePath& x, const DiscretePath& y, const CostSpec& spec);

/// l_r norm of a vector, r >= 1.
double lp_norm(std::span<const double> v, double r);
/// |v|_r^r.
double lp_norm_pow(std::span<const double> v, double r);

/// `%.{digits}g` formatting; "nan" / "inf" / "-inf" for non-finite values.
std::string format_sig(double value, int digits = 12);

/// Pairwise (cascade) summation; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

}  // namespace adsens
