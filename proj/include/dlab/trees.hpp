#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlab/population.hpp"

namespace dlab {

// Axis-aligned regression tree. Nodes are stored in preorder; a node with
// coord < 0 is a leaf carrying a prediction in [0,1]^d, otherwise inputs with
// x[coord] <= threshold route left.
struct TreeNode {
    int coord = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;
};

struct RegressionTree {
    int label_dim = 1;
    std::vector<TreeNode> nodes;  // node 0 is the root

    int depth() const;
    void eval(const double* x, double* out) const;
    Predictor compile(const Population& p) const;
};

struct TreeBudget {
    int max_features = 3;
    int max_distinct = 32;
    int max_depth = 6;
    std::size_t max_states = 40000000;
};

// Exact depth-bounded risk minimizer via dynamic programming over axis-aligned
// boxes of the distinct-value grid. Candidate thresholds are midpoints between
// consecutive distinct feature values; leaf values are weighted label means
// clamped to [0,1] per coordinate. Throws a resource error (naming the
// offending dimension) when the budget is exceeded.
std::pair<RegressionTree, double> optimal_tree(const Population& p, int depth, const TreeBudget& budget = {});

// CART-style greedy trainer; restarts > 0 adds seeded random threshold
// subsampling and keeps the best tree by exact risk.
RegressionTree greedy_tree(const Population& p, int depth, std::uint64_t seed, int restarts = 0);

// Grafts t2 at every leaf of t1 with averaged leaf values; evaluates to the
// pointwise average everywhere and has depth <= depth(t1) + depth(t2).
RegressionTree tree_midpoint(const RegressionTree& t1, const RegressionTree& t2);

std::string tree_to_json_text(const RegressionTree& t);
RegressionTree tree_from_json_text(const std::string& text);

}  // namespace dlab
