#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsens/core.hpp"
#include "adsens/lattice.hpp"

namespace adsens {

/// M simulated paths with uniform weights; Monte Carlo surrogate for the reference measure.
class SampleEnsemble {
public:
    SampleEnsemble(std::vector<DiscretePath> paths, TimeGrid grid, std::uint64_t seed);

    std::size_t size() const { return paths_.size(); }
    int steps() const { return grid_.steps(); }
    int dim() const { return paths_.front().dim(); }
    double weight() const { return 1.0 / static_cast<double>(paths_.size()); }
    const std::vector<DiscretePath>& paths() const { return paths_; }
    const DiscretePath& path(std::size_t m) const { return paths_[m]; }
    const TimeGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }

    /// Keeps every `factor`-th grid point; used for grid-refinement diagnostics.
    SampleEnsemble coarsen(int factor) const;

    /// CSV with header `path_id,t,x_1..x_d`, one row per (path, time).
    void write_csv(std::ostream& out) const;
    static SampleEnsemble read_csv(std::istream& in, std::uint64_t seed = 0);

private:
    std::vector<DiscretePath> paths_;
    TimeGrid grid_;
    std::uint64_t seed_;
};

/// Discretized Brownian paths: increments ~ N(0, (T/N) I_d). Path m draws from its own
/// stream keyed by (seed, m), so the ensemble does not depend on generation order.
SampleEnsemble sample_brownian(double horizon, int steps, int dim, std::size_t count,
                               std::uint64_t seed);

/// Paths drawn from a lattice by walking down the tree; integer time grid.
SampleEnsemble sample_lattice(const LatticeModel& model, std::size_t count, std::uint64_t seed);

/// 64-bit seed for stream `index` derived from a master seed (splitmix64 finalizer).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace adsens
