#include "adsens/core.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "adsens/error.hpp"

namespace adsens {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw ValidationError("time grid needs at least two points");
    if (times_.front() != 0.0) throw ValidationError("time grid must start at 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) throw ValidationError("time grid must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(int steps, double horizon) {
    if (steps < 1 || !(horizon > 0.0)) throw ValidationError("uniform grid needs N >= 1 and T > 0");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int n = 0; n <= steps; ++n) t[n] = horizon * static_cast<double>(n) / steps;
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::integer(int steps) {
    return uniform(steps, static_cast<double>(steps));
}

DiscretePath::DiscretePath(int steps, int dim)
    : steps_(steps), dim_(dim), points_(static_cast<std::size_t>((steps + 1) * dim), 0.0) {
    if (steps < 1 || dim < 1) throw ValidationError("path needs N >= 1 and d >= 1");
}

DiscretePath::DiscretePath(int steps, int dim, std::vector<double> points)
    : steps_(steps), dim_(dim), points_(std::move(points)) {
    if (steps < 1 || dim < 1) throw ValidationError("path needs N >= 1 and d >= 1");
    if (points_.size() != static_cast<std::size_t>((steps + 1) * dim)) {
        throw ValidationError("path has " + std::to_string(points_.size()) + " values, expected " +
                              std::to_string((steps + 1) * dim));
    }
    for (int i = 0; i < dim; ++i) {
        if (points_[i] != 0.0) throw ValidationError("paths start at the origin");
    }
}

double DiscretePath::sup_norm() const {
    double s = 0.0;
    for (double v : points_) s = std::max(s, std::abs(v));
    return s;
}

DiscretePath increment(const DiscretePath& path) {
    DiscretePath out(path.steps(), path.dim());
    for (int n = path.steps(); n >= 1; --n) {
        for (int i = 0; i < path.dim(); ++i) out.at(n, i) = path.at(n, i) - path.at(n - 1, i);
    }
    return out;
}

DiscretePath cumulate(const DiscretePath& increments) {
    DiscretePath out(increments.steps(), increments.dim());
    for (int n = 1; n <= increments.steps(); ++n) {
        for (int i = 0; i < increments.dim(); ++i) {
            out.at(n, i) = out.at(n - 1, i) + increments.at(n, i);
        }
    }
    return out;
}

CostSpec::CostSpec(double p, Scaling scaling, double horizon)
    : p_(p), scaling_(scaling), horizon_(horizon) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("cost exponent p must be finite and > 1");
    if (!(horizon > 0.0)) throw ValidationError("horizon T must be positive");
    if (scaling == Scaling::parabolic && p != 2.0) {
        throw ValidationError("parabolic scaling requires p = 2");
    }
}

double CostSpec::scale_factor(int steps) const {
    if (scaling_ != Scaling::hyperbolic) return 1.0;
    return std::pow(static_cast<double>(steps) / horizon_, p_ - 1.0);
}

double cost_cn(const DiscretePath& x, const DiscretePath& y, const CostSpec& spec) {
    if (x.steps() != y.steps() || x.dim() != y.dim()) {
        throw ValidationError("cost_cn: paths have different shapes");
    }
    std::vector<double> diff(static_cast<std::size_t>(x.dim()));
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(x.steps()));
    for (int n = 1; n <= x.steps(); ++n) {
        for (int i = 0; i < x.dim(); ++i) {
            diff[i] = (x.at(n, i) - x.at(n - 1, i)) - (y.at(n, i) - y.at(n - 1, i));
        }
        terms.push_back(lp_norm_pow(diff, spec.p()));
    }
    return spec.scale_factor(x.steps()) * pairwise_sum(terms);
}

double lp_norm_pow(std::span<const double> v, double r) {
    double s = 0.0;
    if (r == 2.0) {
        for (double x : v) s += x * x;
    } else {
        for (double x : v) s += std::pow(std::abs(x), r);
    }
    return s;
}

double lp_norm(std::span<const double> v, double r) {
    if (v.size() == 1) return std::abs(v[0]);
    return std::pow(lp_norm_pow(v, r), 1.0 / r);
}

std::string format_sig(double value, int digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kBlock = 32;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace adsens
