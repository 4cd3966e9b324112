#pragma once

#include <string>
#include <vector>

#include "dlab/population.hpp"

namespace dlab {

// Finite weak-learner class: symmetric (negations added at construction),
// normalized (atoms with population norm > 1 are rescaled to unit norm) and
// non-degenerate (zero atoms rejected). Atoms are indexed 0..2B-1 where the
// first B are the stored base atoms and index B+j is -base[j].
class WeakLearnerClass {
public:
    WeakLearnerClass(std::vector<Predictor> base_atoms, const Population& p, std::vector<std::string> names = {});

    std::size_t base_count() const { return base_.size(); }
    std::size_t atom_count() const { return 2 * base_.size(); }
    const Predictor& base_atom(std::size_t j) const { return base_[j]; }
    const std::vector<Predictor>& base_atoms() const { return base_; }

    double sign_of(std::size_t atom_index) const { return atom_index < base_.size() ? 1.0 : -1.0; }
    std::size_t base_index_of(std::size_t atom_index) const {
        return atom_index < base_.size() ? atom_index : atom_index - base_.size();
    }
    Predictor atom(std::size_t atom_index) const;
    std::string atom_name(std::size_t atom_index) const;

    int label_dim() const { return base_.front().dim; }
    std::size_t support_size() const { return base_.front().size(); }

private:
    std::vector<Predictor> base_;
    std::vector<std::string> names_;
};

struct AtomicNormResult {
    double value = 0.0;
    // Signed coefficients over the base atoms realizing the optimum.
    std::vector<double> coefficients;
};

// ||f||_A = min sum_j |alpha_j| subject to sum_j alpha_j g_j = f at every
// support point and coordinate. Requires f in span(C) on the support
// (projection residual below span_tol in population norm), else throws.
AtomicNormResult atomic_norm(const Predictor& f, const WeakLearnerClass& c, const Population& p,
                             double span_tol = 1e-9);

struct TauStarResult {
    Predictor fstar;           // population least-squares minimizer over span(C)
    double risk = 0.0;         // R(V(C))
    double tau_star = 0.0;     // ||fstar||_A
    std::vector<double> atomic_coefficients;
};

TauStarResult tau_star(const WeakLearnerClass& c, const Population& p);

}  // namespace dlab
