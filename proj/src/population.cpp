#include "dlab/population.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dlab/kernels.hpp"
#include "json.hpp"

namespace dlab {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_shapes(const Predictor& f, const Population& p, const char* what) {
    require(f.dim == p.label_dim,
            std::string(what) + ": predictor dim " + std::to_string(f.dim) + " != population label dim " +
                std::to_string(p.label_dim));
    require(f.size() == p.size(), std::string(what) + ": predictor size " + std::to_string(f.size()) +
                                      " != population size " + std::to_string(p.size()));
}

void check_pair(const Predictor& a, const Predictor& b, const char* what) {
    require(a.dim == b.dim && a.values.size() == b.values.size(), std::string(what) + ": predictor shape mismatch");
}

}  // namespace

void Population::validate(double weight_tol) const {
    require(label_dim >= 1, "population: label dimension must be >= 1");
    require(feature_dim >= 1, "population: feature dimension must be >= 1");
    require(!w.empty(), "population: support must be non-empty");
    require(x.size() == w.size() * static_cast<std::size_t>(feature_dim), "population: x shape mismatch");
    require(y.size() == w.size() * static_cast<std::size_t>(label_dim), "population: y shape mismatch");
    double s = 0.0;
    for (double wi : w) {
        require(wi > 0.0, "population: weights must be positive");
        s += wi;
    }
    require(std::abs(s - 1.0) <= weight_tol,
            "population: weights sum to " + std::to_string(s) + ", expected 1 within tolerance");
}

Predictor Predictor::zeros(std::size_t n, int dim) {
    Predictor f;
    f.dim = dim;
    f.values.assign(n * static_cast<std::size_t>(dim), 0.0);
    return f;
}

Predictor Predictor::from_labels(const Population& p) {
    Predictor f;
    f.dim = p.label_dim;
    f.values = p.y;
    return f;
}

std::string to_string(BoundName name) {
    switch (name) {
        case BoundName::midpoint_identity: return "midpoint-identity";
        case BoundName::midpoint_anchor: return "midpoint-anchor";
        case BoundName::local_curve: return "local-curve-bound";
        case BoundName::sc_midpoint_anchor: return "sc-midpoint-anchor";
        case BoundName::boosting_two_run: return "boosting-two-run-agreement";
        case BoundName::fw_two_run: return "fw-two-run-agreement";
    }
    return "unknown";
}

bool AnchorCertificate::passed(const Tolerances& tol) const {
    if (bound_name == BoundName::midpoint_identity)
        return std::abs(slack) <= tol.rel * (1.0 + std::abs(disagreement));
    return slack >= -tol.abs;
}

double weighted_norm(const Predictor& f, const Population& p) {
    check_shapes(f, p, "weighted_norm");
    return std::sqrt(kernels::sq_norm(f.values.data(), p.w.data(), p.size(), f.dim));
}

double mse(const Predictor& f, const Population& p) {
    check_shapes(f, p, "mse");
    return kernels::sq_dist(p.y.data(), f.values.data(), p.w.data(), p.size(), f.dim);
}

double disagreement(const Predictor& f1, const Predictor& f2, const Population& p) {
    check_shapes(f1, p, "disagreement");
    check_shapes(f2, p, "disagreement");
    return kernels::sq_dist(f1.values.data(), f2.values.data(), p.w.data(), p.size(), f1.dim);
}

double pop_dot(const Predictor& f, const Predictor& g, const Population& p) {
    check_shapes(f, p, "pop_dot");
    check_shapes(g, p, "pop_dot");
    return kernels::dot(f.values.data(), g.values.data(), p.w.data(), p.size(), f.dim);
}

Predictor midpoint(const Predictor& f1, const Predictor& f2) {
    check_pair(f1, f2, "midpoint");
    Predictor m = f1;
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = 0.5 * (f1.values[i] + f2.values[i]);
    return m;
}

AnchorCertificate check_midpoint_identity(const Predictor& f1, const Predictor& f2, const Population& p) {
    AnchorCertificate cert;
    cert.bound_name = BoundName::midpoint_identity;
    cert.mse1 = mse(f1, p);
    cert.mse2 = mse(f2, p);
    cert.mse_mid = mse(midpoint(f1, f2), p);
    cert.disagreement = disagreement(f1, f2, p);
    const double rhs = 2.0 * (cert.mse1 + cert.mse2 - 2.0 * cert.mse_mid);
    cert.slack = rhs - cert.disagreement;
    return cert;
}

AnchorCertificate check_anchor_bound(const Predictor& f1, const Predictor& f2, double risk_of_anchor_class,
                                     const Population& p) {
    AnchorCertificate cert;
    cert.bound_name = BoundName::midpoint_anchor;
    cert.mse1 = mse(f1, p);
    cert.mse2 = mse(f2, p);
    cert.mse_mid = mse(midpoint(f1, f2), p);
    cert.disagreement = disagreement(f1, f2, p);
    const double rhs = 2.0 * (cert.mse1 - risk_of_anchor_class) + 2.0 * (cert.mse2 - risk_of_anchor_class);
    cert.slack = rhs - cert.disagreement;
    return cert;
}

AnchorCertificate check_local_curve_bound(const Predictor& f1, const Predictor& f2, double risk_n, double risk_2n,
                                          double eps, const Population& p) {
    AnchorCertificate cert;
    cert.bound_name = BoundName::local_curve;
    cert.mse1 = mse(f1, p);
    cert.mse2 = mse(f2, p);
    cert.mse_mid = mse(midpoint(f1, f2), p);
    cert.disagreement = disagreement(f1, f2, p);
    const double rhs = 4.0 * (risk_n - risk_2n + eps);
    cert.slack = rhs - cert.disagreement;
    return cert;
}

std::string population_to_json_text(const Population& p) {
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        nlohmann::json pt;
        pt["x"] = std::vector<double>(p.point(i), p.point(i) + p.feature_dim);
        pt["y"] = std::vector<double>(p.label(i), p.label(i) + p.label_dim);
        pt["w"] = p.w[i];
        points.push_back(std::move(pt));
    }
    nlohmann::json doc;
    doc["points"] = std::move(points);
    return doc.dump(2);
}

Population population_from_json_text(const std::string& text, double weight_tol) {
    nlohmann::json doc = nlohmann::json::parse(text);
    require(doc.contains("points") && doc["points"].is_array() && !doc["points"].empty(),
            "population: 'points' must be a non-empty array");
    Population p;
    const auto& points = doc["points"];
    p.feature_dim = static_cast<int>(points[0].at("x").size());
    p.label_dim = static_cast<int>(points[0].at("y").size());
    require(p.feature_dim >= 1 && p.label_dim >= 1, "population: empty x or y in first point");
    for (const auto& pt : points) {
        const auto& xs = pt.at("x");
        const auto& ys = pt.at("y");
        require(static_cast<int>(xs.size()) == p.feature_dim, "population: inconsistent x dimension");
        require(static_cast<int>(ys.size()) == p.label_dim, "population: inconsistent y dimension");
        for (const auto& v : xs) p.x.push_back(v.get<double>());
        for (const auto& v : ys) p.y.push_back(v.get<double>());
        p.w.push_back(pt.at("w").get<double>());
    }
    p.validate(weight_tol);
    // weights within the load tolerance are renormalized to an exact sum of 1
    double s = 0.0;
    for (double wi : p.w) s += wi;
    if (s != 1.0)
        for (double& wi : p.w) wi /= s;
    return p;
}

Population load_population_json(const std::string& path, double weight_tol) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("population: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return population_from_json_text(ss.str(), weight_tol);
}

void save_population_json(const Population& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("population: cannot write " + path);
    out << population_to_json_text(p) << "\n";
}

}  // namespace dlab
