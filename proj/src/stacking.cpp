#include "dlab/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dlab/kernels.hpp"
#include "dlab/linalg.hpp"
#include "dlab/rng.hpp"
#include "dlab/trees.hpp"

namespace dlab {

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of_mean(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

SpanModel ols_span(const std::vector<Predictor>& basis, const Population& p) {
    if (basis.empty()) throw std::invalid_argument("ols_span: empty basis");
    const std::size_t k = basis.size();
    for (const auto& g : basis) {
        if (g.dim != p.label_dim || g.size() != p.size())
            throw std::invalid_argument("ols_span: basis predictor shape mismatch");
    }

    // Normal equations under the population inner product.
    std::vector<double> gram(k * k);
    std::vector<double> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double v = kernels::dot(basis[i].values.data(), basis[j].values.data(), p.w.data(), p.size(), p.label_dim);
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
        rhs[i] = kernels::dot(p.y.data(), basis[i].values.data(), p.w.data(), p.size(), p.label_dim);
    }

    SpanModel model;
    model.coefficients = linalg::min_norm_psd_solve(k, gram, rhs);
    model.compiled = Predictor::zeros(p.size(), p.label_dim);
    for (std::size_t j = 0; j < k; ++j) {
        const double cj = model.coefficients[j];
        if (cj == 0.0) continue;
        const auto& bvals = basis[j].values;
        for (std::size_t i = 0; i < bvals.size(); ++i) model.compiled.values[i] += cj * bvals[i];
    }
    model.risk = mse(model.compiled, p);
    model.basis = basis;
    return model;
}

BaseModelSource BaseModelSource::explicit_mixture(std::vector<Predictor> models, std::vector<double> probs) {
    if (models.empty()) throw std::invalid_argument("explicit_mixture: no models");
    if (models.size() != probs.size()) throw std::invalid_argument("explicit_mixture: models/probs size mismatch");
    double s = 0.0;
    for (double q : probs) {
        if (q < 0.0) throw std::invalid_argument("explicit_mixture: negative probability");
        s += q;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("explicit_mixture: probabilities must sum to 1");
    BaseModelSource src;
    src.kind_ = Kind::explicit_mix;
    src.count_ = models.size();
    src.models_ = std::move(models);
    src.cum_probs_.resize(src.count_);
    double acc = 0.0;
    for (std::size_t i = 0; i < src.count_; ++i) {
        acc += probs[i];
        src.cum_probs_[i] = acc;
    }
    src.cum_probs_.back() = 1.0;
    return src;
}

BaseModelSource BaseModelSource::generated_mixture(std::size_t count, std::function<Predictor(std::size_t)> builder) {
    if (count == 0 || !builder) throw std::invalid_argument("generated_mixture: empty family");
    BaseModelSource src;
    src.kind_ = Kind::generated_mix;
    src.count_ = count;
    src.builder_ = std::move(builder);
    return src;
}

BaseModelSource BaseModelSource::shard_trainer(ShardTrainerConfig cfg) {
    if (cfg.shard_size < 1) throw std::invalid_argument("shard_trainer: shard_size must be >= 1");
    BaseModelSource src;
    src.kind_ = Kind::shard;
    src.shard_cfg_ = std::move(cfg);
    return src;
}

Predictor BaseModelSource::mixture_member(std::size_t i) const {
    if (kind_ == Kind::explicit_mix) return models_.at(i);
    if (kind_ == Kind::generated_mix) return builder_(i);
    throw std::logic_error("mixture_member: shard trainer has no fixed members");
}

BaseModelSource::Session BaseModelSource::start_trial(const Population& p, std::uint64_t trial_seed) const {
    Session s;
    s.src_ = this;
    s.pop_ = &p;
    s.trial_seed_ = trial_seed;
    if (kind_ == Kind::shard) {
        // Weighted permutation without replacement (successive weighted draws).
        const std::size_t n = p.size();
        Rng rng(derive_seed(trial_seed, {0x5a4d}));
        std::vector<std::size_t> pool(n);
        std::vector<double> wts(p.w);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        s.shard_order_.reserve(n);
        double total = 0.0;
        for (double v : wts) total += v;
        std::size_t remaining = n;
        while (remaining > 0) {
            double u = rng.uniform() * total;
            std::size_t pick = remaining - 1;
            double acc = 0.0;
            for (std::size_t j = 0; j < remaining; ++j) {
                acc += wts[pool[j]];
                if (u < acc) {
                    pick = j;
                    break;
                }
            }
            const std::size_t idx = pool[pick];
            s.shard_order_.push_back(idx);
            total -= wts[idx];
            pool[pick] = pool[remaining - 1];
            --remaining;
        }
    }
    return s;
}

Predictor BaseModelSource::Session::draw(int draw_index) {
    const BaseModelSource& src = *src_;
    if (src.kind_ == Kind::shard) {
        const auto& cfg = src.shard_cfg_;
        const std::size_t n = pop_->size();
        const std::size_t lo = static_cast<std::size_t>(draw_index) * static_cast<std::size_t>(cfg.shard_size);
        const std::size_t hi = lo + static_cast<std::size_t>(cfg.shard_size);
        if (hi > n)
            throw std::runtime_error("shard_trainer: source exhausted (requested shard " + std::to_string(draw_index) +
                                     " of size " + std::to_string(cfg.shard_size) + " from support of size " +
                                     std::to_string(n) + ")");
        Population shard;
        shard.feature_dim = pop_->feature_dim;
        shard.label_dim = pop_->label_dim;
        const double uw = 1.0 / static_cast<double>(cfg.shard_size);
        for (std::size_t j = lo; j < hi; ++j) {
            const std::size_t i = shard_order_[j];
            shard.x.insert(shard.x.end(), pop_->point(i), pop_->point(i) + pop_->feature_dim);
            shard.y.insert(shard.y.end(), pop_->label(i), pop_->label(i) + pop_->label_dim);
            shard.w.push_back(uw);
        }
        const std::uint64_t seed = derive_seed(trial_seed_, {0x7ea1, static_cast<std::uint64_t>(draw_index)});
        if (cfg.trainer) return cfg.trainer(shard, *pop_, seed);
        RegressionTree t = greedy_tree(shard, cfg.tree_depth, seed);
        return t.compile(*pop_);
    }

    Rng rng(derive_seed(trial_seed_, {0xd4a3, static_cast<std::uint64_t>(draw_index)}));
    std::size_t idx;
    if (src.kind_ == Kind::explicit_mix) {
        const double u = rng.uniform();
        idx = static_cast<std::size_t>(std::lower_bound(src.cum_probs_.begin(), src.cum_probs_.end(), u) -
                                       src.cum_probs_.begin());
        if (idx >= src.count_) idx = src.count_ - 1;
        return src.models_[idx];
    }
    idx = rng.index(src.count_);
    return src.builder_(idx);
}

StackingTrialRecord run_stacking_pair(const BaseModelSource& source, int k, const Population& p,
                                      std::uint64_t trial_seed, long trial_index) {
    if (k < 1) throw std::invalid_argument("run_stacking_pair: k must be >= 1");
    auto session = source.start_trial(p, trial_seed);
    std::vector<Predictor> g1, g2;
    g1.reserve(k);
    g2.reserve(k);
    for (int i = 0; i < k; ++i) g1.push_back(session.draw(i));
    for (int i = 0; i < k; ++i) g2.push_back(session.draw(k + i));

    std::vector<Predictor> both = g1;
    both.insert(both.end(), g2.begin(), g2.end());

    SpanModel h1 = ols_span(g1, p);
    SpanModel h2 = ols_span(g2, p);
    SpanModel hu = ols_span(both, p);

    StackingTrialRecord rec;
    rec.k = k;
    rec.trial = trial_index;
    rec.trial_seed = trial_seed;
    rec.R_G = h1.risk;
    rec.R_Gprime = h2.risk;
    rec.R_union = hu.risk;
    rec.D = disagreement(h1.compiled, h2.compiled, p);
    rec.pointwise_slack = 2.0 * (rec.R_G - rec.R_union) + 2.0 * (rec.R_Gprime - rec.R_union) - rec.D;
    return rec;
}

StackingCurve stacking_curve(const BaseModelSource& source, const std::vector<int>& k_values, long trials,
                             const Population& p, std::uint64_t base_seed) {
    if (trials < 1) throw std::invalid_argument("stacking_curve: trials must be >= 1");
    StackingCurve curve;
    for (int k : k_values) {
        std::vector<StackingTrialRecord> recs(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
        for (long t = 0; t < trials; ++t) {
            const std::uint64_t seed = derive_seed(base_seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)});
            recs[static_cast<std::size_t>(t)] = run_stacking_pair(source, k, p, seed, t);
        }
        std::vector<double> rk, r2k, ds, margins;
        rk.reserve(recs.size());
        for (const auto& r : recs) {
            rk.push_back(0.5 * (r.R_G + r.R_Gprime));
            r2k.push_back(r.R_union);
            ds.push_back(r.D);
            margins.push_back(4.0 * (0.5 * (r.R_G + r.R_Gprime) - r.R_union) - r.D);
        }
        StackingAggregate agg;
        agg.k = k;
        agg.trials = trials;
        agg.R_k_hat = mean(rk);
        agg.R_2k_hat = mean(r2k);
        agg.D_hat = mean(ds);
        agg.bound_margin = 4.0 * (agg.R_k_hat - agg.R_2k_hat) - agg.D_hat;
        agg.margin_stderr = stderr_of_mean(margins);
        agg.D_stderr = stderr_of_mean(ds);
        curve.aggregate.push_back(agg);
        curve.trials.insert(curve.trials.end(), recs.begin(), recs.end());
    }
    return curve;
}

TightnessInstance build_tightness_instance(int k, double eps) {
    if (k < 1) throw std::invalid_argument("build_tightness_instance: k must be >= 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("build_tightness_instance: eps must be in (0, 1]");

    const double sigma2 = (eps / 8.0) * static_cast<double>(k);
    const long m = static_cast<long>(std::ceil(96.0 * std::pow(static_cast<double>(k), 3) / eps));
    const long n = m + 1;
    const double root = std::sqrt(static_cast<double>(n));
    const double sigma = std::sqrt(sigma2);

    TightnessInstance inst;
    Population& p = inst.population;
    p.feature_dim = 1;
    p.label_dim = 1;
    p.x.resize(n);
    p.y.assign(n, 0.0);
    p.w.assign(n, 1.0 / static_cast<double>(n));
    for (long j = 0; j < n; ++j) p.x[static_cast<std::size_t>(j)] = static_cast<double>(j);
    p.y[0] = root;  // y = e_0 in the scaled-indicator basis

    const std::size_t count = static_cast<std::size_t>(m);
    const std::size_t nn = static_cast<std::size_t>(n);
    inst.source = BaseModelSource::generated_mixture(count, [nn, root, sigma](std::size_t i) {
        Predictor g = Predictor::zeros(nn, 1);
        g.values[0] = root;
        g.values[i + 1] = sigma * root;  // atom g_{i+1} = e_0 + sigma e_{i+1}
        return g;
    });

    TightnessClosedForms& f = inst.forms;
    const double kd = static_cast<double>(k);
    f.sigma2 = sigma2;
    f.m = m;
    f.risk_k = sigma2 / (kd + sigma2);
    f.risk_2k = sigma2 / (2.0 * kd + sigma2);
    f.delta0 = f.risk_k - f.risk_2k;
    f.d0 = 2.0 * kd * sigma2 / ((kd + sigma2) * (kd + sigma2));
    f.ratio_pointwise = 4.0 - 2.0 * sigma2 / (kd + sigma2);
    f.collision_prob_bound = (2.0 * kd) * (2.0 * kd - 1.0) / 2.0 / static_cast<double>(m);
    return inst;
}

TightnessReport verify_tightness(int k, double eps, long trials, std::uint64_t seed, double mc_sigma) {
    TightnessInstance inst = build_tightness_instance(k, eps);
    StackingCurve curve = stacking_curve(inst.source, {k}, trials, inst.population, seed);
    return tightness_report_from_curve(inst, curve, k, eps, mc_sigma);
}

TightnessReport tightness_report_from_curve(const TightnessInstance& inst, const StackingCurve& curve, int k,
                                            double eps, double mc_sigma) {
    const StackingAggregate& agg = curve.aggregate.front();
    const long trials = agg.trials;

    TightnessReport rep;
    rep.k = k;
    rep.eps = eps;
    rep.trials = trials;
    rep.forms = inst.forms;
    rep.R_k_hat = agg.R_k_hat;
    rep.R_2k_hat = agg.R_2k_hat;
    rep.D_hat = agg.D_hat;

    const double drop = agg.R_k_hat - agg.R_2k_hat;
    if (drop < 1e-12) {
        rep.conclusive = false;
        return rep;
    }
    rep.conclusive = true;
    rep.ratio = agg.D_hat / drop;

    // Delta-method stderr of the ratio of means, with covariance.
    std::vector<double> dv, gv;
    dv.reserve(curve.trials.size());
    for (const auto& r : curve.trials) {
        dv.push_back(r.D);
        gv.push_back(0.5 * (r.R_G + r.R_Gprime) - r.R_union);
    }
    const long n = trials;
    const double md = agg.D_hat, mg = drop;
    double vd = 0.0, vg = 0.0, cdg = 0.0;
    for (long i = 0; i < n; ++i) {
        vd += (dv[i] - md) * (dv[i] - md);
        vg += (gv[i] - mg) * (gv[i] - mg);
        cdg += (dv[i] - md) * (gv[i] - mg);
    }
    const double nn1 = static_cast<double>(n) * static_cast<double>(n - 1);
    vd /= nn1;
    vg /= nn1;
    cdg /= nn1;
    rep.ratio_stderr = std::sqrt(std::max(0.0, vd / (mg * mg) + md * md * vg / (mg * mg * mg * mg) -
                                                   2.0 * md * cdg / (mg * mg * mg)));

    rep.lower_pass = rep.ratio >= 4.0 - eps - mc_sigma * rep.ratio_stderr;
    rep.upper_pass = rep.ratio <= 4.0 + mc_sigma * rep.ratio_stderr;
    return rep;
}

}  // namespace dlab
