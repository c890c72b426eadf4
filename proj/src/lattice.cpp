#include "adsens/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adsens/error.hpp"

namespace adsens {

namespace {

constexpr double kProbabilityTol = 1e-12;
constexpr double kMartingaleTol = 1e-10;

}  // namespace

LatticeModel::LatticeModel(int dim, std::vector<LatticeNode> nodes, bool is_martingale)
    : dim_(dim), nodes_(std::move(nodes)), is_martingale_(is_martingale) {
    if (dim_ < 1) throw ValidationError("lattice dimension must be >= 1");
    if (nodes_.empty()) throw ValidationError("lattice has no nodes");
    const LatticeNode& root = nodes_.front();
    if (root.time != 0) throw ValidationError("lattice root (node 0) must be at time 0");
    for (const auto& node : nodes_) {
        if (node.state.size() != static_cast<std::size_t>(dim_)) {
            throw ValidationError("lattice node state has wrong dimension");
        }
    }
    for (double v : root.state) {
        if (v != 0.0) throw ValidationError("lattice root state must be zero");
    }
    std::vector<int> seen(nodes_.size(), 0);
    seen[0] = 1;
    nodes_[0].parent = 0;
    int leaf_time = -1;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const auto& node = nodes_[id];
        if (node.children.empty()) {
            if (leaf_time < 0) leaf_time = node.time;
            if (node.time != leaf_time) throw ValidationError("every leaf must sit at the same time N");
            continue;
        }
        double total = 0.0;
        for (const auto& [child, prob] : node.children) {
            if (child >= nodes_.size()) throw ValidationError("lattice child id out of range");
            if (!(prob > 0.0)) throw ValidationError("lattice transition probabilities must be > 0");
            if (nodes_[child].time != node.time + 1) {
                throw ValidationError("lattice child must be one time step after its parent");
            }
            if (seen[child]++) throw ValidationError("lattice node has two parents (trees must not recombine)");
            nodes_[child].parent = id;
            total += prob;
        }
        if (std::abs(total - 1.0) > kProbabilityTol) {
            throw ValidationError("child probabilities at node " + std::to_string(id) + " sum to " +
                                  std::to_string(total));
        }
    }
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        if (!seen[id]) throw ValidationError("lattice node " + std::to_string(id) + " is unreachable");
    }
    if (leaf_time < 1) throw ValidationError("lattice horizon must be >= 1");
    steps_ = leaf_time;
    if (is_martingale_) {
        const auto check = check_martingale(*this, kMartingaleTol);
        if (!check.ok) {
            throw ValidationError("lattice claims the martingale property but violates it by " +
                                  std::to_string(check.worst_violation));
        }
    }
}

LatticeModel LatticeModel::binary_walk(int steps, double jump, double p_up) {
    return iid_walk(steps, {jump, -jump}, {p_up, 1.0 - p_up});
}

LatticeModel LatticeModel::iid_walk(int steps, const std::vector<double>& increments,
                                    const std::vector<double>& probabilities) {
    if (steps < 1) throw ValidationError("walk needs N >= 1");
    if (increments.size() != probabilities.size() || increments.empty()) {
        throw ValidationError("walk increments and probabilities must have equal, nonzero length");
    }
    const double branching = static_cast<double>(increments.size());
    if (std::pow(branching, steps) > static_cast<double>(kMaxEnumeratedLeaves)) {
        throw ValidationError("walk lattice too large");
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < increments.size(); ++k) mean += increments[k] * probabilities[k];

    std::vector<LatticeNode> nodes(1);
    nodes[0].state = {0.0};
    std::vector<std::size_t> frontier{0};
    for (int n = 1; n <= steps; ++n) {
        std::vector<std::size_t> next;
        next.reserve(frontier.size() * increments.size());
        for (std::size_t parent : frontier) {
            for (std::size_t k = 0; k < increments.size(); ++k) {
                LatticeNode child;
                child.time = n;
                child.state = {nodes[parent].state[0] + increments[k]};
                child.parent = parent;
                nodes.push_back(std::move(child));
                nodes[parent].children.emplace_back(nodes.size() - 1, probabilities[k]);
                next.push_back(nodes.size() - 1);
            }
        }
        frontier = std::move(next);
    }
    return LatticeModel(1, std::move(nodes), std::abs(mean) <= kMartingaleTol);
}

LatticeModel LatticeModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("lattice JSON: ") + e.what());
    }
    try {
        const int dim = doc.value("dim", 1);
        const bool mart = doc.value("is_martingale", false);
        const auto& raw = doc.at("nodes");
        // ids in the file may be arbitrary; the time-0 node becomes id 0.
        std::map<long long, std::size_t> index;
        std::vector<const nlohmann::json*> order;
        for (const auto& n : raw) {
            if (n.at("time").get<int>() == 0) order.insert(order.begin(), &n);
            else order.push_back(&n);
        }
        for (std::size_t k = 0; k < order.size(); ++k) {
            const long long id = order[k]->at("id").get<long long>();
            if (!index.emplace(id, k).second) throw ValidationError("duplicate lattice node id");
        }
        std::vector<LatticeNode> nodes(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto& n = *order[k];
            nodes[k].time = n.at("time").get<int>();
            nodes[k].state = n.at("state").get<std::vector<double>>();
            if (n.contains("children")) {
                for (const auto& c : n.at("children")) {
                    const auto it = index.find(c.at(0).get<long long>());
                    if (it == index.end()) throw ValidationError("lattice child refers to unknown id");
                    nodes[k].children.emplace_back(it->second, c.at(1).get<double>());
                }
            }
        }
        return LatticeModel(dim, std::move(nodes), mart);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("lattice JSON: ") + e.what());
    }
}

LatticeModel LatticeModel::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open lattice file " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string LatticeModel::to_json() const {
    nlohmann::json doc;
    doc["dim"] = dim_;
    doc["is_martingale"] = is_martingale_;
    auto& arr = doc["nodes"] = nlohmann::json::array();
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        nlohmann::json n;
        n["id"] = id;
        n["time"] = nodes_[id].time;
        n["state"] = nodes_[id].state;
        auto& ch = n["children"] = nlohmann::json::array();
        for (const auto& [child, prob] : nodes_[id].children) ch.push_back({child, prob});
        arr.push_back(std::move(n));
    }
    return doc.dump(1);
}

std::size_t LatticeModel::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.children.empty(); }));
}

MartingaleCheck check_martingale(const LatticeModel& model, double tol) {
    MartingaleCheck result{true, 0.0};
    for (const auto& node : model.nodes()) {
        if (node.children.empty()) continue;
        for (int i = 0; i < model.dim(); ++i) {
            double drift = 0.0;
            for (const auto& [child, prob] : node.children) {
                drift += prob * (model.node(child).state[i] - node.state[i]);
            }
            result.worst_violation = std::max(result.worst_violation, std::abs(drift));
        }
    }
    result.ok = result.worst_violation <= tol;
    return result;
}

PathEnumeration enumerate_paths(const LatticeModel& model) {
    if (model.leaf_count() > kMaxEnumeratedLeaves) {
        throw ValidationError("lattice has more than 2^20 leaves; refusing to enumerate");
    }
    const int steps = model.steps();
    const int dim = model.dim();
    PathEnumeration out;
    std::vector<std::size_t> trail{0};
    std::vector<double> probs{1.0};
    // iterative DFS: child cursor per depth
    std::vector<std::size_t> cursor{0};
    while (!trail.empty()) {
        const auto& node = model.node(trail.back());
        if (node.children.empty()) {
            DiscretePath path(steps, dim);
            for (int n = 0; n <= steps; ++n) {
                const auto& st = model.node(trail[n]).state;
                for (int i = 0; i < dim; ++i) path.at(n, i) = st[i];
            }
            out.paths.push_back(std::move(path));
            out.probabilities.push_back(probs.back());
            out.nodes.push_back(trail);
        }
        if (cursor.back() < node.children.size()) {
            const auto [child, prob] = node.children[cursor.back()++];
            trail.push_back(child);
            probs.push_back(probs.back() * prob);
            cursor.push_back(0);
        } else {
            trail.pop_back();
            probs.pop_back();
            cursor.pop_back();
        }
    }
    return out;
}

}  // namespace adsens
