#include "dlab/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "dlab/kernels.hpp"

namespace dlab {

double SquaredLoss::value(const double* y, const double* p) const {
    double s = 0.0;
    for (int c = 0; c < dim_; ++c) {
        const double d = y[c] - p[c];
        s += d * d;
    }
    return s;
}

void SquaredLoss::gradient(const double* y, const double* p, double* out) const {
    for (int c = 0; c < dim_; ++c) out[c] = 2.0 * (p[c] - y[c]);
}

void SquaredLoss::random_label(Rng& rng, double* out) const {
    for (int c = 0; c < dim_; ++c) out[c] = rng.uniform(-2.0, 2.0);
}

namespace {

double logsumexp(const double* p, int dim) {
    double mx = p[0];
    for (int c = 1; c < dim; ++c) mx = std::max(mx, p[c]);
    double s = 0.0;
    for (int c = 0; c < dim; ++c) s += std::exp(p[c] - mx);
    return mx + std::log(s);
}

}  // namespace

double SoftmaxCrossEntropyLoss::value(const double* y, const double* p) const {
    double dot = 0.0, sq = 0.0;
    for (int c = 0; c < dim_; ++c) {
        dot += y[c] * p[c];
        sq += p[c] * p[c];
    }
    return logsumexp(p, dim_) - dot + 0.5 * mu0_ * sq;
}

void SoftmaxCrossEntropyLoss::gradient(const double* y, const double* p, double* out) const {
    const double lse = logsumexp(p, dim_);
    for (int c = 0; c < dim_; ++c) out[c] = std::exp(p[c] - lse) - y[c] + mu0_ * p[c];
}

void SoftmaxCrossEntropyLoss::random_label(Rng& rng, double* out) const {
    // random point of the probability simplex (normalized exponentials)
    double s = 0.0;
    for (int c = 0; c < dim_; ++c) {
        out[c] = -std::log(1.0 - rng.uniform());
        s += out[c];
    }
    for (int c = 0; c < dim_; ++c) out[c] /= s;
}

double population_risk(const Loss& loss, const Predictor& f, const Population& p) {
    if (f.dim != p.label_dim || f.size() != p.size())
        throw std::invalid_argument("population_risk: predictor shape mismatch");
    if (loss.dim() != p.label_dim) throw std::invalid_argument("population_risk: loss dimension mismatch");
    return kernels::blocked_sum(p.size(),
                                [&](std::size_t i) { return p.w[i] * loss.value(p.label(i), f.at(i)); });
}

std::vector<LossCatalogEntry> builtin_losses(double mu0) {
    return {{"squared", 2.0, 2.0}, {"softmax_ce", mu0, mu0 + 0.5}};
}

std::unique_ptr<Loss> make_loss(const std::string& name, int dim, double mu0) {
    if (name == "squared") return std::make_unique<SquaredLoss>(dim);
    if (name == "softmax_ce") {
        if (mu0 <= 0.0) throw std::invalid_argument("softmax_ce: mu0 must be > 0");
        return std::make_unique<SoftmaxCrossEntropyLoss>(dim, mu0);
    }
    throw std::invalid_argument("unknown loss '" + name + "'");
}

LossCertificate certify_loss(const Loss& loss, long probes, std::uint64_t seed) {
    const int d = loss.dim();
    Rng rng(derive_seed(seed, {0x1055u}));
    LossCertificate cert;
    cert.probes = probes;

    std::vector<double> y(d), p1(d), p2(d), mid(d), g1(d), g2(d), fd(d), probe(d);
    const double h = 1e-5;

    for (long it = 0; it < probes; ++it) {
        loss.random_label(rng, y.data());
        for (int c = 0; c < d; ++c) {
            p1[c] = rng.uniform(-2.0, 2.0);
            p2[c] = rng.uniform(-2.0, 2.0);
            mid[c] = 0.5 * (p1[c] + p2[c]);
        }
        const double v1 = loss.value(y.data(), p1.data());
        const double v2 = loss.value(y.data(), p2.data());
        const double vm = loss.value(y.data(), mid.data());
        loss.gradient(y.data(), p1.data(), g1.data());
        loss.gradient(y.data(), p2.data(), g2.data());

        // strong convexity at (p1, p2)
        double lin = 0.0, dist2 = 0.0;
        for (int c = 0; c < d; ++c) {
            lin += g2[c] * (p1[c] - p2[c]);
            const double dv = p1[c] - p2[c];
            dist2 += dv * dv;
        }
        const double sc_violation = (v2 + lin + 0.5 * loss.mu() * dist2) - v1;
        cert.max_strong_convexity_violation =
            std::max(cert.max_strong_convexity_violation, sc_violation / (1.0 + std::abs(v1)));

        // smoothness
        double gd2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double dg = g1[c] - g2[c];
            gd2 += dg * dg;
        }
        cert.max_smoothness_violation = std::max(
            cert.max_smoothness_violation, std::sqrt(gd2) - loss.smoothness() * std::sqrt(dist2));

        // pointwise midpoint inequality
        const double mid_violation = dist2 - (4.0 / loss.mu()) * (v1 + v2 - 2.0 * vm);
        cert.max_midpoint_violation =
            std::max(cert.max_midpoint_violation, mid_violation / (1.0 + dist2));

        // central finite differences at p1
        double num = 0.0, den = 0.0;
        for (int c = 0; c < d; ++c) {
            probe = p1;
            probe[c] = p1[c] + h;
            const double up = loss.value(y.data(), probe.data());
            probe[c] = p1[c] - h;
            const double dn = loss.value(y.data(), probe.data());
            fd[c] = (up - dn) / (2.0 * h);
            num += (fd[c] - g1[c]) * (fd[c] - g1[c]);
            den += g1[c] * g1[c];
        }
        cert.max_gradient_rel_err =
            std::max(cert.max_gradient_rel_err, std::sqrt(num) / (1.0 + std::sqrt(den)));
    }
    return cert;
}

}  // namespace dlab
