#include "adsens/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "adsens/error.hpp"
#include "adsens/spec_parse.hpp"

namespace adsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Penalty Penalty::indicator(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("indicator radius must be positive");
    Penalty p;
    p.family_ = Family::indicator;
    p.radius_ = radius;
    return p;
}

Penalty Penalty::power(double m, double kappa) {
    if (!(m > 1.0)) throw ValidationError("power penalty needs m > 1");
    if (!(kappa > 0.0)) throw ValidationError("power penalty needs kappa > 0");
    Penalty p;
    p.family_ = Family::power;
    p.m_ = m;
    p.kappa_ = kappa;
    return p;
}

Penalty Penalty::table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw ValidationError("penalty table needs at least two knots");
    std::sort(knots.begin(), knots.end());
    if (knots.front().first != 0.0 || knots.front().second != 0.0) {
        throw ValidationError("penalty table must start at (0, 0)");
    }
    double prev_slope = 0.0;
    for (std::size_t k = 1; k < knots.size(); ++k) {
        const double du = knots[k].first - knots[k - 1].first;
        if (!(du > 0.0)) throw ValidationError("penalty table abscissae must be distinct");
        const double s = (knots[k].second - knots[k - 1].second) / du;
        if (s < -1e-12) throw ValidationError("penalty table must be non-decreasing");
        if (s < prev_slope - 1e-12) throw ValidationError("penalty table must be convex");
        prev_slope = s;
    }
    Penalty p;
    p.family_ = Family::table;
    p.knots_ = std::move(knots);
    return p;
}

Penalty Penalty::parse(const std::string& spec) {
    const FamilySpec f = parse_family(spec);
    if (f.family == "indicator") {
        return indicator(f.positional.empty() ? f.number("rho", 1.0) : parse_number(f.positional, "indicator radius"));
    }
    if (f.family == "power") return power(f.number("m"), f.number("kappa", 1.0));
    if (f.family == "table") {
        const std::string file = f.positional.empty() ? f.text("file", "") : f.positional;
        std::ifstream in(file);
        if (!in) throw ValidationError("cannot open penalty table '" + file + "'");
        std::vector<std::pair<double, double>> knots;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // header
            const auto v = parse_number_list(line, ',');
            if (v.size() != 2) throw ValidationError("penalty table rows need two columns");
            knots.emplace_back(v[0], v[1]);
        }
        return table(std::move(knots));
    }
    throw ValidationError("unknown penalty '" + f.family + "' (expected indicator, power or table)");
}

std::string Penalty::describe() const {
    std::ostringstream out;
    out.precision(12);
    switch (family_) {
        case Family::indicator: out << "indicator:" << radius_; break;
        case Family::power: out << "power:m=" << m_ << ",kappa=" << kappa_; break;
        case Family::table: out << "table:" << knots_.size() << " knots"; break;
    }
    return out.str();
}

double Penalty::value(double u) const {
    if (u < 0.0) throw ValidationError("penalty argument must be >= 0");
    switch (family_) {
        case Family::indicator: return u <= radius_ ? 0.0 : kInf;
        case Family::power: return kappa_ * std::pow(u, m_) / m_;
        case Family::table: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), u,
                                       [](double x, const auto& k) { return x < k.first; });
            if (it == knots_.end()) it = knots_.end() - 1;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double s = (hi.second - lo.second) / (hi.first - lo.first);
            return lo.second + s * (u - lo.first);
        }
    }
    return kInf;
}

double Penalty::slope(double u) const {
    switch (family_) {
        case Family::indicator: return u < radius_ ? 0.0 : kInf;
        case Family::power: return kappa_ * std::pow(u, m_ - 1.0);
        case Family::table: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), u,
                                       [](double x, const auto& k) { return x < k.first; });
            if (it == knots_.end()) it = knots_.end() - 1;
            return (it->second - (it - 1)->second) / (it->first - (it - 1)->first);
        }
    }
    return kInf;
}

double Penalty::conjugate(double v) const {
    if (v < 0.0) throw ValidationError("conjugate argument must be >= 0");
    switch (family_) {
        case Family::indicator: return radius_ * v;
        case Family::power: {
            const double dual = m_ / (m_ - 1.0);
            return std::pow(v, dual) * std::pow(kappa_, -1.0 / (m_ - 1.0)) / dual;
        }
        case Family::table: {
            const auto& a = knots_[knots_.size() - 2];
            const auto& b = knots_.back();
            const double last_slope = (b.second - a.second) / (b.first - a.first);
            if (v > last_slope) return kInf;
            // concave piecewise-linear in u: the sup sits at a knot
            double best = 0.0;
            for (const auto& [u, l] : knots_) best = std::max(best, u * v - l);
            return best;
        }
    }
    return kInf;
}

double Penalty::optimal_u(double r) const {
    if (r < 0.0) throw ValidationError("optimal_u needs r >= 0");
    if (r == 0.0) return 0.0;
    switch (family_) {
        case Family::indicator: return radius_;
        case Family::power: return std::pow(r / kappa_, 1.0 / (m_ - 1.0));
        case Family::table: {
            const auto& a = knots_[knots_.size() - 2];
            const auto& b = knots_.back();
            const double last_slope = (b.second - a.second) / (b.first - a.first);
            if (r > last_slope) {
                throw NumericalError("sup of u r - L(u) is unbounded: r exceeds the table's final slope");
            }
            double best = 0.0, arg = 0.0;
            for (const auto& [u, l] : knots_) {
                if (u * r - l > best) {
                    best = u * r - l;
                    arg = u;
                }
            }
            return arg;
        }
    }
    return 0.0;
}

GrowthCheck validate_growth(const Penalty& penalty, double p) {
    switch (penalty.family()) {
        case Penalty::Family::indicator: return {true, "indicator is +inf beyond its radius"};
        case Penalty::Family::power:
            if (penalty.exponent() > p) return {true, "power exponent exceeds p"};
            return {false, "power penalty with m <= p: L(u)/u^p stays bounded, growth condition fails"};
        case Penalty::Family::table:
            return {false, "tabulated penalty grows linearly beyond its last knot; L(u)/u^p -> 0"};
    }
    return {false, "unknown family"};
}

}  // namespace adsens
