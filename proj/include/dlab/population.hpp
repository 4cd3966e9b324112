#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dlab {

// Finite weighted support of (x, y) pairs. All expectations over it are exact
// finite sums; weights must be positive and sum to 1.
struct Population {
    int feature_dim = 1;
    int label_dim = 1;
    std::vector<double> x;  // size() * feature_dim, row-major
    std::vector<double> y;  // size() * label_dim
    std::vector<double> w;  // size()

    std::size_t size() const { return w.size(); }
    const double* point(std::size_t i) const { return &x[i * static_cast<std::size_t>(feature_dim)]; }
    const double* label(std::size_t i) const { return &y[i * static_cast<std::size_t>(label_dim)]; }

    // Throws std::invalid_argument on broken invariants (weights, shapes).
    void validate(double weight_tol = 1e-12) const;
};

// Prediction vector indexed by support point; the universal model
// representation for norms, MSE and disagreement.
struct Predictor {
    int dim = 1;
    std::vector<double> values;  // size() * dim

    std::size_t size() const { return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0; }
    double* at(std::size_t i) { return &values[i * static_cast<std::size_t>(dim)]; }
    const double* at(std::size_t i) const { return &values[i * static_cast<std::size_t>(dim)]; }

    static Predictor zeros(std::size_t n, int dim);
    static Predictor from_labels(const Population& p);  // y as a predictor
};

enum class BoundName {
    midpoint_identity,
    midpoint_anchor,
    local_curve,
    sc_midpoint_anchor,
    boosting_two_run,
    fw_two_run,
};

std::string to_string(BoundName name);

struct Tolerances {
    double abs = 1e-9;
    double rel = 1e-10;
};

// Outcome of one lemma-level check. slack is RHS minus LHS of the certified
// bound; for the identity check it is the signed defect RHS - LHS and the
// pass criterion is two-sided.
struct AnchorCertificate {
    BoundName bound_name = BoundName::midpoint_identity;
    double mse1 = 0.0;
    double mse2 = 0.0;
    double mse_mid = 0.0;
    double disagreement = 0.0;
    double slack = 0.0;

    bool passed(const Tolerances& tol = {}) const;
};

// (E |f(x)|^2)^{1/2}
double weighted_norm(const Predictor& f, const Population& p);
// E |y - f(x)|^2
double mse(const Predictor& f, const Population& p);
// E |f1(x) - f2(x)|^2
double disagreement(const Predictor& f1, const Predictor& f2, const Population& p);
// E <f(x), g(x)>
double pop_dot(const Predictor& f, const Predictor& g, const Population& p);

Predictor midpoint(const Predictor& f1, const Predictor& f2);

// D(f1,f2) = 2 (MSE(f1) + MSE(f2) - 2 MSE(mid)); checked as an equality.
AnchorCertificate check_midpoint_identity(const Predictor& f1, const Predictor& f2, const Population& p);

// D(f1,f2) <= 2 (MSE(f1) - R) + 2 (MSE(f2) - R) for any class containing the
// midpoint with risk R. Caller establishes the membership precondition.
AnchorCertificate check_anchor_bound(const Predictor& f1, const Predictor& f2, double risk_of_anchor_class,
                                     const Population& p);

// D(f1,f2) <= 4 (risk_n - risk_2n + eps) for eps-suboptimal level-n models
// whose midpoint lands in the level-2n class.
AnchorCertificate check_local_curve_bound(const Predictor& f1, const Predictor& f2, double risk_n, double risk_2n,
                                          double eps, const Population& p);

// JSON (de)serialization; one document per population, shape
// {"points":[{"x":[...],"y":[...],"w":...}]}. Loading validates invariants and
// rejects weight sums off by more than weight_tol.
std::string population_to_json_text(const Population& p);
Population population_from_json_text(const std::string& text, double weight_tol = 1e-9);
Population load_population_json(const std::string& path, double weight_tol = 1e-9);
void save_population_json(const Population& p, const std::string& path);

}  // namespace dlab
