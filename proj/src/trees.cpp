#include "dlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "dlab/rng.hpp"
#include "json.hpp"

namespace dlab {

namespace {

int node_depth(const RegressionTree& t, int idx) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(idx)];
    if (n.coord < 0) return 0;
    return 1 + std::max(node_depth(t, n.left), node_depth(t, n.right));
}

// Distinct sorted values and per-point value index, per coordinate.
struct FeatureGrid {
    std::vector<std::vector<double>> values;      // per coord, sorted distinct
    std::vector<std::vector<int>> point_index;    // per coord, per point
};

FeatureGrid build_grid(const Population& p) {
    FeatureGrid g;
    const int fd = p.feature_dim;
    g.values.resize(fd);
    g.point_index.assign(fd, std::vector<int>(p.size()));
    for (int c = 0; c < fd; ++c) {
        std::vector<double> vals;
        vals.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) vals.push_back(p.point(i)[c]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        g.values[c] = vals;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double v = p.point(i)[c];
            g.point_index[c][i] =
                static_cast<int>(std::lower_bound(vals.begin(), vals.end(), v) - vals.begin());
        }
    }
    return g;
}

std::vector<double> clamped_mean(const Population& p, const std::vector<std::size_t>& pts) {
    std::vector<double> mean(p.label_dim, 0.0);
    double wsum = 0.0;
    for (std::size_t i : pts) {
        wsum += p.w[i];
        for (int c = 0; c < p.label_dim; ++c) mean[c] += p.w[i] * p.label(i)[c];
    }
    if (wsum > 0.0)
        for (double& v : mean) v /= wsum;
    else
        std::fill(mean.begin(), mean.end(), 0.5);
    for (double& v : mean) v = std::min(1.0, std::max(0.0, v));
    return mean;
}

double leaf_cost(const Population& p, const std::vector<std::size_t>& pts, const std::vector<double>& value) {
    double s = 0.0;
    for (std::size_t i : pts) {
        for (int c = 0; c < p.label_dim; ++c) {
            const double d = p.label(i)[c] - value[c];
            s += p.w[i] * d * d;
        }
    }
    return s;
}

// --- exact DP ---------------------------------------------------------------

struct DpContext {
    const Population* p = nullptr;
    const FeatureGrid* grid = nullptr;
    TreeBudget budget;
    int n_coords = 0;
    struct Entry {
        double cost = 0.0;
        int split_coord = -1;  // -1: leaf
        int split_value_index = -1;
    };
    std::unordered_map<std::uint64_t, Entry> memo;
};

// Box = per-coordinate half-open interval of value indices, packed with the
// remaining depth into a 64-bit key (<= 3 coords of <= 32 values each).
std::uint64_t box_key(const int* lo, const int* hi, int n_coords, int depth) {
    std::uint64_t key = static_cast<std::uint64_t>(depth);
    for (int c = 0; c < n_coords; ++c) {
        key = (key << 6) | static_cast<std::uint64_t>(lo[c]);
        key = (key << 6) | static_cast<std::uint64_t>(hi[c]);
    }
    return key;
}

DpContext::Entry dp_solve(DpContext& ctx, int lo[3], int hi[3], const std::vector<std::size_t>& pts, int depth) {
    const std::uint64_t key = box_key(lo, hi, ctx.n_coords, depth);
    auto it = ctx.memo.find(key);
    if (it != ctx.memo.end()) return it->second;
    if (ctx.memo.size() >= ctx.budget.max_states)
        throw std::runtime_error("optimal_tree: state budget exceeded (" + std::to_string(ctx.budget.max_states) +
                                 " boxes); reduce depth or distinct feature values");

    const Population& p = *ctx.p;
    DpContext::Entry best;
    best.cost = leaf_cost(p, pts, clamped_mean(p, pts));

    if (depth > 0 && pts.size() > 1) {
        std::vector<std::size_t> left_pts, right_pts;
        for (int c = 0; c < ctx.n_coords; ++c) {
            for (int v = lo[c]; v + 1 < hi[c]; ++v) {
                // split between distinct values v and v+1 of coordinate c
                left_pts.clear();
                right_pts.clear();
                for (std::size_t i : pts) {
                    if (ctx.grid->point_index[c][i] <= v)
                        left_pts.push_back(i);
                    else
                        right_pts.push_back(i);
                }
                if (left_pts.empty() || right_pts.empty()) continue;
                const int save_hi = hi[c];
                hi[c] = v + 1;
                const double cl = dp_solve(ctx, lo, hi, left_pts, depth - 1).cost;
                hi[c] = save_hi;
                const int save_lo = lo[c];
                lo[c] = v + 1;
                const double cr = dp_solve(ctx, lo, hi, right_pts, depth - 1).cost;
                lo[c] = save_lo;
                if (cl + cr < best.cost) {
                    best.cost = cl + cr;
                    best.split_coord = c;
                    best.split_value_index = v;
                }
            }
        }
    }
    ctx.memo.emplace(key, best);
    return best;
}

int rebuild_tree(DpContext& ctx, RegressionTree& tree, int lo[3], int hi[3], const std::vector<std::size_t>& pts,
                 int depth) {
    const DpContext::Entry entry = ctx.memo.at(box_key(lo, hi, ctx.n_coords, depth));
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (entry.split_coord < 0) {
        tree.nodes[static_cast<std::size_t>(idx)].value = clamped_mean(*ctx.p, pts);
        return idx;
    }
    const int c = entry.split_coord;
    const int v = entry.split_value_index;
    const auto& vals = ctx.grid->values[static_cast<std::size_t>(c)];
    tree.nodes[static_cast<std::size_t>(idx)].coord = c;
    tree.nodes[static_cast<std::size_t>(idx)].threshold =
        0.5 * (vals[static_cast<std::size_t>(v)] + vals[static_cast<std::size_t>(v + 1)]);

    std::vector<std::size_t> left_pts, right_pts;
    for (std::size_t i : pts) {
        if (ctx.grid->point_index[c][i] <= v)
            left_pts.push_back(i);
        else
            right_pts.push_back(i);
    }
    const int save_hi = hi[c];
    hi[c] = v + 1;
    const int l = rebuild_tree(ctx, tree, lo, hi, left_pts, depth - 1);
    hi[c] = save_hi;
    const int save_lo = lo[c];
    lo[c] = v + 1;
    const int r = rebuild_tree(ctx, tree, lo, hi, right_pts, depth - 1);
    lo[c] = save_lo;
    tree.nodes[static_cast<std::size_t>(idx)].left = l;
    tree.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
}

// --- greedy trainer ----------------------------------------------------------

int greedy_build(const Population& p, const FeatureGrid& grid, RegressionTree& tree,
                 const std::vector<std::size_t>& pts, int depth, Rng* rng, double keep_prob) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const std::vector<double> mean = clamped_mean(p, pts);
    const double here = leaf_cost(p, pts, mean);

    int best_c = -1, best_v = -1;
    double best_cost = here;
    if (depth > 0 && pts.size() > 1) {
        std::vector<std::size_t> left_pts, right_pts;
        for (int c = 0; c < p.feature_dim; ++c) {
            const auto& vals = grid.values[static_cast<std::size_t>(c)];
            for (int v = 0; v + 1 < static_cast<int>(vals.size()); ++v) {
                if (rng && rng->uniform() > keep_prob) continue;
                left_pts.clear();
                right_pts.clear();
                for (std::size_t i : pts) {
                    if (grid.point_index[c][i] <= v)
                        left_pts.push_back(i);
                    else
                        right_pts.push_back(i);
                }
                if (left_pts.empty() || right_pts.empty()) continue;
                const double cost = leaf_cost(p, left_pts, clamped_mean(p, left_pts)) +
                                    leaf_cost(p, right_pts, clamped_mean(p, right_pts));
                if (cost < best_cost) {
                    best_cost = cost;
                    best_c = c;
                    best_v = v;
                }
            }
        }
    }

    if (best_c < 0) {
        tree.nodes[static_cast<std::size_t>(idx)].value = mean;
        return idx;
    }
    std::vector<std::size_t> left_pts, right_pts;
    for (std::size_t i : pts) {
        if (grid.point_index[best_c][i] <= best_v)
            left_pts.push_back(i);
        else
            right_pts.push_back(i);
    }
    const auto& vals = grid.values[static_cast<std::size_t>(best_c)];
    tree.nodes[static_cast<std::size_t>(idx)].coord = best_c;
    tree.nodes[static_cast<std::size_t>(idx)].threshold =
        0.5 * (vals[static_cast<std::size_t>(best_v)] + vals[static_cast<std::size_t>(best_v + 1)]);
    const int l = greedy_build(p, grid, tree, left_pts, depth - 1, rng, keep_prob);
    const int r = greedy_build(p, grid, tree, right_pts, depth - 1, rng, keep_prob);
    tree.nodes[static_cast<std::size_t>(idx)].left = l;
    tree.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
}

int graft(const RegressionTree& t1, int i1, const RegressionTree& t2, RegressionTree& out) {
    const TreeNode& n = t1.nodes[static_cast<std::size_t>(i1)];
    const int idx = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    if (n.coord >= 0) {
        out.nodes[static_cast<std::size_t>(idx)].coord = n.coord;
        out.nodes[static_cast<std::size_t>(idx)].threshold = n.threshold;
        const int l = graft(t1, n.left, t2, out);
        const int r = graft(t1, n.right, t2, out);
        out.nodes[static_cast<std::size_t>(idx)].left = l;
        out.nodes[static_cast<std::size_t>(idx)].right = r;
        return idx;
    }
    // leaf of t1: copy t2 below it with averaged leaf values
    out.nodes.pop_back();
    struct Copier {
        const RegressionTree& t2;
        const std::vector<double>& v1;
        RegressionTree& out;
        int copy(int i2) {
            const TreeNode& m = t2.nodes[static_cast<std::size_t>(i2)];
            const int idx = static_cast<int>(out.nodes.size());
            out.nodes.emplace_back();
            if (m.coord >= 0) {
                out.nodes[static_cast<std::size_t>(idx)].coord = m.coord;
                out.nodes[static_cast<std::size_t>(idx)].threshold = m.threshold;
                const int l = copy(m.left);
                const int r = copy(m.right);
                out.nodes[static_cast<std::size_t>(idx)].left = l;
                out.nodes[static_cast<std::size_t>(idx)].right = r;
            } else {
                auto& val = out.nodes[static_cast<std::size_t>(idx)].value;
                val.resize(v1.size());
                for (std::size_t c = 0; c < v1.size(); ++c) val[c] = 0.5 * (v1[c] + m.value[c]);
            }
            return idx;
        }
    } copier{t2, n.value, out};
    return copier.copy(0);
}

}  // namespace

int RegressionTree::depth() const { return nodes.empty() ? 0 : node_depth(*this, 0); }

void RegressionTree::eval(const double* x, double* out) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].coord >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = x[n.coord] <= n.threshold ? n.left : n.right;
    }
    const auto& v = nodes[static_cast<std::size_t>(idx)].value;
    std::copy(v.begin(), v.end(), out);
}

Predictor RegressionTree::compile(const Population& p) const {
    if (label_dim != p.label_dim) throw std::invalid_argument("tree compile: label dimension mismatch");
    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    for (std::size_t i = 0; i < p.size(); ++i) eval(p.point(i), f.at(i));
    return f;
}

std::pair<RegressionTree, double> optimal_tree(const Population& p, int depth, const TreeBudget& budget) {
    p.validate();
    if (depth < 0) throw std::invalid_argument("optimal_tree: depth must be >= 0");
    if (p.feature_dim > budget.max_features)
        throw std::runtime_error("optimal_tree: feature dimension " + std::to_string(p.feature_dim) +
                                 " exceeds budget " + std::to_string(budget.max_features));
    if (depth > budget.max_depth)
        throw std::runtime_error("optimal_tree: depth " + std::to_string(depth) + " exceeds budget " +
                                 std::to_string(budget.max_depth));

    const FeatureGrid grid = build_grid(p);
    for (int c = 0; c < p.feature_dim; ++c) {
        if (static_cast<int>(grid.values[static_cast<std::size_t>(c)].size()) > budget.max_distinct)
            throw std::runtime_error("optimal_tree: coordinate " + std::to_string(c) + " has " +
                                     std::to_string(grid.values[static_cast<std::size_t>(c)].size()) +
                                     " distinct values, budget is " + std::to_string(budget.max_distinct));
    }

    DpContext ctx;
    ctx.p = &p;
    ctx.grid = &grid;
    ctx.budget = budget;
    ctx.n_coords = p.feature_dim;

    int lo[3] = {0, 0, 0};
    int hi[3] = {0, 0, 0};
    for (int c = 0; c < p.feature_dim; ++c) hi[c] = static_cast<int>(grid.values[static_cast<std::size_t>(c)].size());
    std::vector<std::size_t> pts(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) pts[i] = i;

    const DpContext::Entry top = dp_solve(ctx, lo, hi, pts, depth);
    RegressionTree tree;
    tree.label_dim = p.label_dim;
    rebuild_tree(ctx, tree, lo, hi, pts, depth);
    return {std::move(tree), top.cost};
}

RegressionTree greedy_tree(const Population& p, int depth, std::uint64_t seed, int restarts) {
    p.validate();
    const FeatureGrid grid = build_grid(p);
    std::vector<std::size_t> pts(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) pts[i] = i;

    RegressionTree best;
    double best_risk = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= restarts; ++r) {
        RegressionTree t;
        t.label_dim = p.label_dim;
        if (r == 0) {
            greedy_build(p, grid, t, pts, depth, nullptr, 1.0);
        } else {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
            greedy_build(p, grid, t, pts, depth, &rng, 0.6);
        }
        const double risk = mse(t.compile(p), p);
        if (risk < best_risk) {
            best_risk = risk;
            best = std::move(t);
        }
    }
    return best;
}

RegressionTree tree_midpoint(const RegressionTree& t1, const RegressionTree& t2) {
    if (t1.label_dim != t2.label_dim) throw std::invalid_argument("tree_midpoint: label dimension mismatch");
    RegressionTree out;
    out.label_dim = t1.label_dim;
    graft(t1, 0, t2, out);
    return out;
}

std::string tree_to_json_text(const RegressionTree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const TreeNode& n = t.nodes[i];
        nlohmann::json j;
        j["index"] = i;
        if (n.coord >= 0) {
            j["kind"] = "split";
            j["coord"] = n.coord;
            j["threshold"] = n.threshold;
            j["left"] = n.left;
            j["right"] = n.right;
        } else {
            j["kind"] = "leaf";
            j["value"] = n.value;
        }
        nodes.push_back(std::move(j));
    }
    nlohmann::json doc;
    doc["label_dim"] = t.label_dim;
    doc["nodes"] = std::move(nodes);
    return doc.dump(2);
}

RegressionTree tree_from_json_text(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    RegressionTree t;
    t.label_dim = doc.at("label_dim").get<int>();
    for (const auto& j : doc.at("nodes")) {
        TreeNode n;
        if (j.at("kind") == "split") {
            n.coord = j.at("coord").get<int>();
            n.threshold = j.at("threshold").get<double>();
            n.left = j.at("left").get<int>();
            n.right = j.at("right").get<int>();
        } else {
            n.value = j.at("value").get<std::vector<double>>();
        }
        t.nodes.push_back(std::move(n));
    }
    if (t.nodes.empty()) throw std::invalid_argument("tree: no nodes");
    return t;
}

}  // namespace dlab
