#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlab/population.hpp"

namespace dlab {

// One internal node of a ReLU DAG: relu(<weights, referenced values> + bias).
// References 0..input_dim-1 are input coordinates; input_dim + j is internal
// node j, which must precede this node (topological order).
struct ReluNode {
    std::vector<int> inputs;
    std::vector<double> weights;
    double bias = 0.0;
};

struct ReluNetwork {
    int input_dim = 1;
    int output_dim = 1;
    std::vector<ReluNode> nodes;          // internal nodes, topological order
    std::vector<double> output_weights;   // output_dim x (input_dim + nodes.size()), row-major
    std::vector<double> output_bias;      // output_dim

    int size() const { return static_cast<int>(nodes.size()); }
    void validate() const;
    void eval(const double* x, double* out) const;
    Predictor compile(const Population& p) const;
};

// Disjoint parallel composition computing the pointwise average; the result
// has exactly size(n1) + size(n2) internal nodes.
ReluNetwork nn_midpoint(const ReluNetwork& n1, const ReluNetwork& n2);

struct NnTrainConfig {
    int size_budget = 4;
    double step = 1e-2;
    int steps = 5000;
    int restarts = 1;
};

// Full-batch gradient descent on a one-hidden-layer template within the size
// budget; best-of-restarts by achieved risk. No optimality claim.
std::pair<ReluNetwork, double> train_nn(const Population& p, const NnTrainConfig& cfg, std::uint64_t seed);

std::string nn_to_json_text(const ReluNetwork& net);
ReluNetwork nn_from_json_text(const std::string& text);

}  // namespace dlab
