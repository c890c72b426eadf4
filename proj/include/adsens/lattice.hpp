#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adsens/core.hpp"

namespace adsens {

/// One node of a non-recombining path tree.
struct LatticeNode {
    int time = 0;
    std::vector<double> state;
    /// (child id, transition probability)
    std::vector<std::pair<std::size_t, double>> children;
    std::size_t parent = 0;  // root points to itself
};

/// Finite reference measure on paths: a non-recombining tree rooted at state 0.
///
/// Non-recombining so that a node is a full history and F_n-conditioning is exact.
class LatticeModel {
public:
    /// Validates: root at time 0 with zero state, probabilities positive and summing to one
    /// (1e-12), leaves at time N, and the martingale claim (1e-10) when set.
    LatticeModel(int dim, std::vector<LatticeNode> nodes, bool is_martingale);

    /// Walk with i.i.d. steps +jump (prob p_up) / -jump; full binary tree of depth N.
    static LatticeModel binary_walk(int steps, double jump = 1.0, double p_up = 0.5);
    /// Walk with increments drawn from a fixed finite distribution (values per component, d = 1).
    static LatticeModel iid_walk(int steps, const std::vector<double>& increments,
                                 const std::vector<double>& probabilities);
    /// Loads the JSON schema documented in the README.
    static LatticeModel from_json(const std::string& text);
    static LatticeModel load(const std::string& file);
    std::string to_json() const;

    int steps() const { return steps_; }
    int dim() const { return dim_; }
    bool is_martingale() const { return is_martingale_; }
    const std::vector<LatticeNode>& nodes() const { return nodes_; }
    const LatticeNode& node(std::size_t id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t leaf_count() const;

private:
    int steps_ = 0;
    int dim_ = 1;
    std::vector<LatticeNode> nodes_;
    bool is_martingale_ = false;
};

struct MartingaleCheck {
    bool ok = false;
    double worst_violation = 0.0;  // max over nodes and components of |sum_i p_i (child_i - node)|
};

MartingaleCheck check_martingale(const LatticeModel& model, double tol = 1e-10);

/// All root-to-leaf paths with their probabilities and the node visited at each time.
struct PathEnumeration {
    std::vector<DiscretePath> paths;
    std::vector<double> probabilities;
    /// nodes[m][n]: node id of path m at time n.
    std::vector<std::vector<std::size_t>> nodes;
};

inline constexpr std::size_t kMaxEnumeratedLeaves = std::size_t{1} << 20;

/// Exhaustive enumeration; throws ValidationError beyond kMaxEnumeratedLeaves leaves.
PathEnumeration enumerate_paths(const LatticeModel& model);

}  // namespace adsens
