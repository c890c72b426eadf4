#include "adsens/ensemble.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "adsens/error.hpp"

namespace adsens {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SampleEnsemble::SampleEnsemble(std::vector<DiscretePath> paths, TimeGrid grid, std::uint64_t seed)
    : paths_(std::move(paths)), grid_(std::move(grid)), seed_(seed) {
    if (paths_.empty()) throw ValidationError("ensemble needs at least one path");
    const int steps = grid_.steps();
    const int dim = paths_.front().dim();
    for (const auto& p : paths_) {
        if (p.steps() != steps || p.dim() != dim) {
            throw ValidationError("ensemble paths must share N, d and the time grid");
        }
    }
}

SampleEnsemble SampleEnsemble::coarsen(int factor) const {
    if (factor < 1 || steps() % factor != 0) {
        throw ValidationError("coarsening factor must divide N");
    }
    const int coarse = steps() / factor;
    std::vector<double> times;
    for (int n = 0; n <= coarse; ++n) times.push_back(grid_[n * factor]);
    std::vector<DiscretePath> out;
    out.reserve(paths_.size());
    for (const auto& p : paths_) {
        DiscretePath c(coarse, p.dim());
        for (int n = 0; n <= coarse; ++n) {
            for (int i = 0; i < p.dim(); ++i) c.at(n, i) = p.at(n * factor, i);
        }
        out.push_back(std::move(c));
    }
    return SampleEnsemble(std::move(out), TimeGrid(std::move(times)), seed_);
}

void SampleEnsemble::write_csv(std::ostream& out) const {
    out << "path_id,t";
    for (int i = 1; i <= dim(); ++i) out << ",x_" << i;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t m = 0; m < paths_.size(); ++m) {
        for (int n = 0; n <= steps(); ++n) {
            out << m << ',' << grid_[n];
            for (int i = 0; i < dim(); ++i) out << ',' << paths_[m].at(n, i);
            out << '\n';
        }
    }
    out.precision(old_precision);
}

SampleEnsemble SampleEnsemble::read_csv(std::istream& in, std::uint64_t seed) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty ensemble CSV");
    int dim = 0;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) dim += col.rfind("x_", 0) == 0 ? 1 : 0;
    }
    if (dim < 1) throw ValidationError("ensemble CSV header lacks x_ columns");
    std::map<long long, std::vector<std::pair<double, std::vector<double>>>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        const long long id = std::stoll(cell);
        std::getline(ss, cell, ',');
        const double t = std::stod(cell);
        std::vector<double> x;
        while (std::getline(ss, cell, ',')) x.push_back(std::stod(cell));
        if (static_cast<int>(x.size()) != dim) throw ValidationError("ensemble CSV row has wrong width");
        rows[id].emplace_back(t, std::move(x));
    }
    if (rows.empty()) throw ValidationError("ensemble CSV has no rows");
    std::vector<double> times;
    for (const auto& [t, x] : rows.begin()->second) times.push_back(t);
    TimeGrid grid(times);
    std::vector<DiscretePath> paths;
    for (const auto& [id, pts] : rows) {
        if (pts.size() != times.size()) throw ValidationError("ensemble CSV paths have different lengths");
        std::vector<double> flat;
        for (std::size_t n = 0; n < pts.size(); ++n) {
            if (pts[n].first != times[n]) throw ValidationError("ensemble CSV paths use different grids");
            flat.insert(flat.end(), pts[n].second.begin(), pts[n].second.end());
        }
        paths.emplace_back(grid.steps(), dim, std::move(flat));
    }
    return SampleEnsemble(std::move(paths), std::move(grid), seed);
}

SampleEnsemble sample_brownian(double horizon, int steps, int dim, std::size_t count,
                               std::uint64_t seed) {
    if (count == 0) throw ValidationError("sample_brownian needs M >= 1");
    TimeGrid grid = TimeGrid::uniform(steps, horizon);
    std::vector<DiscretePath> paths;
    paths.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        std::mt19937_64 rng(stream_seed(seed, m));
        std::normal_distribution<double> normal(0.0, 1.0);
        DiscretePath path(steps, dim);
        for (int n = 1; n <= steps; ++n) {
            const double sd = std::sqrt(grid.dt(n));
            for (int i = 0; i < dim; ++i) path.at(n, i) = path.at(n - 1, i) + sd * normal(rng);
        }
        paths.push_back(std::move(path));
    }
    return SampleEnsemble(std::move(paths), std::move(grid), seed);
}

SampleEnsemble sample_lattice(const LatticeModel& model, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw ValidationError("sample_lattice needs M >= 1");
    std::vector<DiscretePath> paths;
    paths.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        std::mt19937_64 rng(stream_seed(seed, m));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        DiscretePath path(model.steps(), model.dim());
        std::size_t id = 0;
        for (int n = 1; n <= model.steps(); ++n) {
            const auto& children = model.node(id).children;
            double u = uniform(rng);
            std::size_t pick = children.back().first;
            for (const auto& [child, prob] : children) {
                if (u < prob) {
                    pick = child;
                    break;
                }
                u -= prob;
            }
            id = pick;
            for (int i = 0; i < model.dim(); ++i) path.at(n, i) = model.node(id).state[i];
        }
        paths.push_back(std::move(path));
    }
    return SampleEnsemble(std::move(paths), TimeGrid::integer(model.steps()), seed);
}

}  // namespace adsens
