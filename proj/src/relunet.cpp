#include "dlab/relunet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dlab/rng.hpp"
#include "json.hpp"

namespace dlab {

void ReluNetwork::validate() const {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("relu net: bad dimensions");
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const ReluNode& n = nodes[j];
        if (n.inputs.size() != n.weights.size()) throw std::invalid_argument("relu net: inputs/weights mismatch");
        for (int ref : n.inputs) {
            if (ref < 0 || ref >= input_dim + static_cast<int>(j))
                throw std::invalid_argument("relu net: node " + std::to_string(j) + " references " +
                                            std::to_string(ref) + " out of topological order");
        }
    }
    const std::size_t width = static_cast<std::size_t>(input_dim) + nodes.size();
    if (output_weights.size() != width * static_cast<std::size_t>(output_dim))
        throw std::invalid_argument("relu net: output weight shape mismatch");
    if (output_bias.size() != static_cast<std::size_t>(output_dim))
        throw std::invalid_argument("relu net: output bias shape mismatch");
}

void ReluNetwork::eval(const double* x, double* out) const {
    const std::size_t width = static_cast<std::size_t>(input_dim) + nodes.size();
    std::vector<double> vals(width);
    for (int c = 0; c < input_dim; ++c) vals[static_cast<std::size_t>(c)] = x[c];
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const ReluNode& n = nodes[j];
        double s = n.bias;
        for (std::size_t a = 0; a < n.inputs.size(); ++a) s += n.weights[a] * vals[static_cast<std::size_t>(n.inputs[a])];
        vals[static_cast<std::size_t>(input_dim) + j] = s > 0.0 ? s : 0.0;
    }
    for (int o = 0; o < output_dim; ++o) {
        double s = output_bias[static_cast<std::size_t>(o)];
        const double* row = &output_weights[static_cast<std::size_t>(o) * width];
        for (std::size_t a = 0; a < width; ++a) s += row[a] * vals[a];
        out[o] = s;
    }
}

Predictor ReluNetwork::compile(const Population& p) const {
    if (output_dim != p.label_dim) throw std::invalid_argument("relu net compile: label dimension mismatch");
    if (input_dim != p.feature_dim) throw std::invalid_argument("relu net compile: feature dimension mismatch");
    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    for (std::size_t i = 0; i < p.size(); ++i) eval(p.point(i), f.at(i));
    return f;
}

ReluNetwork nn_midpoint(const ReluNetwork& a, const ReluNetwork& b) {
    if (a.input_dim != b.input_dim || a.output_dim != b.output_dim)
        throw std::invalid_argument("nn_midpoint: dimension mismatch");

    ReluNetwork m;
    m.input_dim = a.input_dim;
    m.output_dim = a.output_dim;
    m.nodes = a.nodes;
    // b's internal references shift past a's copy; input references stay.
    const int shift = static_cast<int>(a.nodes.size());
    for (const ReluNode& n : b.nodes) {
        ReluNode c = n;
        for (int& ref : c.inputs)
            if (ref >= m.input_dim) ref += shift;
        m.nodes.push_back(std::move(c));
    }

    const std::size_t wa = static_cast<std::size_t>(a.input_dim) + a.nodes.size();
    const std::size_t wb = static_cast<std::size_t>(b.input_dim) + b.nodes.size();
    const std::size_t wm = static_cast<std::size_t>(m.input_dim) + m.nodes.size();
    m.output_weights.assign(static_cast<std::size_t>(m.output_dim) * wm, 0.0);
    m.output_bias.assign(static_cast<std::size_t>(m.output_dim), 0.0);
    for (int o = 0; o < m.output_dim; ++o) {
        double* row = &m.output_weights[static_cast<std::size_t>(o) * wm];
        const double* ra = &a.output_weights[static_cast<std::size_t>(o) * wa];
        const double* rb = &b.output_weights[static_cast<std::size_t>(o) * wb];
        for (int c = 0; c < m.input_dim; ++c)
            row[c] = 0.5 * ra[c] + 0.5 * rb[c];
        for (std::size_t j = 0; j < a.nodes.size(); ++j)
            row[static_cast<std::size_t>(m.input_dim) + j] = 0.5 * ra[static_cast<std::size_t>(a.input_dim) + j];
        for (std::size_t j = 0; j < b.nodes.size(); ++j)
            row[static_cast<std::size_t>(m.input_dim) + a.nodes.size() + j] =
                0.5 * rb[static_cast<std::size_t>(b.input_dim) + j];
        m.output_bias[static_cast<std::size_t>(o)] =
            0.5 * a.output_bias[static_cast<std::size_t>(o)] + 0.5 * b.output_bias[static_cast<std::size_t>(o)];
    }
    return m;
}

namespace {

// One-hidden-layer MLP parameters used by the trainer.
struct Mlp {
    int in = 1, hidden = 1, out = 1;
    std::vector<double> w1, b1, w2, b2;  // hidden x in, hidden, out x hidden, out

    void init(Rng& rng) {
        const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (double& v : w1) v = s1 * rng.gaussian();
        for (double& v : b1) v = 0.1 * rng.gaussian();
        for (double& v : w2) v = s2 * rng.gaussian();
        for (double& v : b2) v = 0.1 * rng.gaussian();
    }
};

double mlp_risk(const Mlp& m, const Population& p) {
    std::vector<double> h(static_cast<std::size_t>(m.hidden));
    double risk = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double* x = p.point(i);
        for (int j = 0; j < m.hidden; ++j) {
            double s = m.b1[static_cast<std::size_t>(j)];
            for (int c = 0; c < m.in; ++c) s += m.w1[static_cast<std::size_t>(j * m.in + c)] * x[c];
            h[static_cast<std::size_t>(j)] = s > 0.0 ? s : 0.0;
        }
        for (int o = 0; o < m.out; ++o) {
            double s = m.b2[static_cast<std::size_t>(o)];
            for (int j = 0; j < m.hidden; ++j) s += m.w2[static_cast<std::size_t>(o * m.hidden + j)] * h[static_cast<std::size_t>(j)];
            const double d = p.label(i)[o] - s;
            risk += p.w[i] * d * d;
        }
    }
    return risk;
}

void mlp_gd_step(Mlp& m, const Population& p, double lr) {
    std::vector<double> gw1(m.w1.size(), 0.0), gb1(m.b1.size(), 0.0);
    std::vector<double> gw2(m.w2.size(), 0.0), gb2(m.b2.size(), 0.0);
    std::vector<double> h(static_cast<std::size_t>(m.hidden)), pre(static_cast<std::size_t>(m.hidden));
    std::vector<double> err(static_cast<std::size_t>(m.out));

    for (std::size_t i = 0; i < p.size(); ++i) {
        const double* x = p.point(i);
        for (int j = 0; j < m.hidden; ++j) {
            double s = m.b1[static_cast<std::size_t>(j)];
            for (int c = 0; c < m.in; ++c) s += m.w1[static_cast<std::size_t>(j * m.in + c)] * x[c];
            pre[static_cast<std::size_t>(j)] = s;
            h[static_cast<std::size_t>(j)] = s > 0.0 ? s : 0.0;
        }
        for (int o = 0; o < m.out; ++o) {
            double s = m.b2[static_cast<std::size_t>(o)];
            for (int j = 0; j < m.hidden; ++j) s += m.w2[static_cast<std::size_t>(o * m.hidden + j)] * h[static_cast<std::size_t>(j)];
            err[static_cast<std::size_t>(o)] = 2.0 * p.w[i] * (s - p.label(i)[o]);
        }
        for (int o = 0; o < m.out; ++o) {
            gb2[static_cast<std::size_t>(o)] += err[static_cast<std::size_t>(o)];
            for (int j = 0; j < m.hidden; ++j)
                gw2[static_cast<std::size_t>(o * m.hidden + j)] += err[static_cast<std::size_t>(o)] * h[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < m.hidden; ++j) {
            if (pre[static_cast<std::size_t>(j)] <= 0.0) continue;  // relu'(s) = 0 for s <= 0
            double back = 0.0;
            for (int o = 0; o < m.out; ++o) back += err[static_cast<std::size_t>(o)] * m.w2[static_cast<std::size_t>(o * m.hidden + j)];
            gb1[static_cast<std::size_t>(j)] += back;
            for (int c = 0; c < m.in; ++c) gw1[static_cast<std::size_t>(j * m.in + c)] += back * x[c];
        }
    }
    for (std::size_t a = 0; a < m.w1.size(); ++a) m.w1[a] -= lr * gw1[a];
    for (std::size_t a = 0; a < m.b1.size(); ++a) m.b1[a] -= lr * gb1[a];
    for (std::size_t a = 0; a < m.w2.size(); ++a) m.w2[a] -= lr * gw2[a];
    for (std::size_t a = 0; a < m.b2.size(); ++a) m.b2[a] -= lr * gb2[a];
}

ReluNetwork mlp_to_network(const Mlp& m) {
    ReluNetwork net;
    net.input_dim = m.in;
    net.output_dim = m.out;
    net.nodes.reserve(static_cast<std::size_t>(m.hidden));
    for (int j = 0; j < m.hidden; ++j) {
        ReluNode n;
        n.bias = m.b1[static_cast<std::size_t>(j)];
        for (int c = 0; c < m.in; ++c) {
            n.inputs.push_back(c);
            n.weights.push_back(m.w1[static_cast<std::size_t>(j * m.in + c)]);
        }
        net.nodes.push_back(std::move(n));
    }
    const std::size_t width = static_cast<std::size_t>(m.in + m.hidden);
    net.output_weights.assign(static_cast<std::size_t>(m.out) * width, 0.0);
    net.output_bias.resize(static_cast<std::size_t>(m.out));
    for (int o = 0; o < m.out; ++o) {
        net.output_bias[static_cast<std::size_t>(o)] = m.b2[static_cast<std::size_t>(o)];
        for (int j = 0; j < m.hidden; ++j)
            net.output_weights[static_cast<std::size_t>(o) * width + static_cast<std::size_t>(m.in + j)] =
                m.w2[static_cast<std::size_t>(o * m.hidden + j)];
    }
    return net;
}

}  // namespace

std::pair<ReluNetwork, double> train_nn(const Population& p, const NnTrainConfig& cfg, std::uint64_t seed) {
    p.validate();
    if (cfg.size_budget < 1) throw std::invalid_argument("train_nn: size budget must be >= 1");

    Mlp best;
    double best_risk = std::numeric_limits<double>::infinity();
    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        Mlp m;
        m.in = p.feature_dim;
        m.hidden = cfg.size_budget;
        m.out = p.label_dim;
        m.w1.assign(static_cast<std::size_t>(m.hidden * m.in), 0.0);
        m.b1.assign(static_cast<std::size_t>(m.hidden), 0.0);
        m.w2.assign(static_cast<std::size_t>(m.out * m.hidden), 0.0);
        m.b2.assign(static_cast<std::size_t>(m.out), 0.0);
        Rng rng(derive_seed(seed, {0x77aa, static_cast<std::uint64_t>(r)}));
        m.init(rng);
        for (int s = 0; s < cfg.steps; ++s) mlp_gd_step(m, p, cfg.step);
        const double risk = mlp_risk(m, p);
        if (risk < best_risk) {
            best_risk = risk;
            best = std::move(m);
        }
    }
    return {mlp_to_network(best), best_risk};
}

std::string nn_to_json_text(const ReluNetwork& net) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t j = 0; j < net.nodes.size(); ++j) {
        nlohmann::json n;
        n["index"] = j;
        n["inputs"] = net.nodes[j].inputs;
        n["weights"] = net.nodes[j].weights;
        n["bias"] = net.nodes[j].bias;
        nodes.push_back(std::move(n));
    }
    nlohmann::json doc;
    doc["input_dim"] = net.input_dim;
    doc["output_dim"] = net.output_dim;
    doc["nodes"] = std::move(nodes);
    doc["output_weights"] = net.output_weights;
    doc["output_bias"] = net.output_bias;
    return doc.dump(2);
}

ReluNetwork nn_from_json_text(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    ReluNetwork net;
    net.input_dim = doc.at("input_dim").get<int>();
    net.output_dim = doc.at("output_dim").get<int>();
    for (const auto& n : doc.at("nodes")) {
        ReluNode node;
        node.inputs = n.at("inputs").get<std::vector<int>>();
        node.weights = n.at("weights").get<std::vector<double>>();
        node.bias = n.at("bias").get<double>();
        net.nodes.push_back(std::move(node));
    }
    net.output_weights = doc.at("output_weights").get<std::vector<double>>();
    net.output_bias = doc.at("output_bias").get<std::vector<double>>();
    net.validate();
    return net;
}

}  // namespace dlab
