#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dlab/population.hpp"
#include "dlab/rng.hpp"

namespace dlab {

// A mu-strongly-convex, L-smooth loss in the prediction argument. User
// extensions must pass certify_loss before being used in experiments.
class Loss {
public:
    virtual ~Loss() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual double mu() const = 0;
    virtual double smoothness() const = 0;
    virtual double value(const double* y, const double* p) const = 0;
    virtual void gradient(const double* y, const double* p, double* out) const = 0;
    // Draws a label suitable for probe certification of this loss.
    virtual void random_label(Rng& rng, double* out) const = 0;
};

// |y - p|^2 with mu = L = 2.
class SquaredLoss final : public Loss {
public:
    explicit SquaredLoss(int dim) : dim_(dim) {}
    std::string name() const override { return "squared"; }
    int dim() const override { return dim_; }
    double mu() const override { return 2.0; }
    double smoothness() const override { return 2.0; }
    double value(const double* y, const double* p) const override;
    void gradient(const double* y, const double* p, double* out) const override;
    void random_label(Rng& rng, double* out) const override;

private:
    int dim_;
};

// logsumexp(p) - <y, p> + (mu0/2) |p|^2 over logits p, for label distributions
// y. mu = mu0; L = mu0 + 1/2 (the logsumexp Hessian diag(s) - s s^T has
// spectral norm at most 1/2, verified by probe in the test suite).
class SoftmaxCrossEntropyLoss final : public Loss {
public:
    SoftmaxCrossEntropyLoss(int dim, double mu0) : dim_(dim), mu0_(mu0) {}
    std::string name() const override { return "softmax_ce"; }
    int dim() const override { return dim_; }
    double mu() const override { return mu0_; }
    double smoothness() const override { return mu0_ + 0.5; }
    double value(const double* y, const double* p) const override;
    void gradient(const double* y, const double* p, double* out) const override;
    void random_label(Rng& rng, double* out) const override;
    double ridge() const { return mu0_; }

private:
    int dim_;
    double mu0_;
};

double population_risk(const Loss& loss, const Predictor& f, const Population& p);

struct LossCatalogEntry {
    std::string name;
    double mu = 0.0;
    double smoothness = 0.0;
};

std::vector<LossCatalogEntry> builtin_losses(double mu0 = 1.0);
std::unique_ptr<Loss> make_loss(const std::string& name, int dim, double mu0 = 1.0);

struct LossCertificate {
    long probes = 0;
    double max_strong_convexity_violation = 0.0;
    double max_smoothness_violation = 0.0;
    double max_gradient_rel_err = 0.0;
    // Pointwise strongly-convex midpoint inequality
    // |p1-p2|^2 <= (4/mu) (L(y,p1) + L(y,p2) - 2 L(y, (p1+p2)/2)).
    double max_midpoint_violation = 0.0;
    bool passed(double ineq_tol = 1e-9, double grad_tol = 1e-6) const {
        return max_strong_convexity_violation <= ineq_tol && max_smoothness_violation <= ineq_tol &&
               max_midpoint_violation <= ineq_tol && max_gradient_rel_err <= grad_tol;
    }
};

// Probe-based certification: strong convexity, gradient Lipschitzness, central
// finite-difference gradient agreement and the pointwise midpoint inequality,
// on `probes` random (y, p1, p2) triples.
LossCertificate certify_loss(const Loss& loss, long probes, std::uint64_t seed);

}  // namespace dlab
