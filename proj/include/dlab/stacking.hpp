#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dlab/population.hpp"

namespace dlab {

// Population least squares over the span of a basis of predictors. For
// vector-valued outputs there is one scalar coefficient per basis element.
// Coefficients are the minimum-Euclidean-norm risk minimizer (rank-deficient
// Gram matrices are resolved by eigenvalue thresholding), so the risk and the
// compiled predictor are unique even when the coefficients are not.
struct SpanModel {
    std::vector<Predictor> basis;
    std::vector<double> coefficients;
    Predictor compiled;
    double risk = 0.0;
};

SpanModel ols_span(const std::vector<Predictor>& basis, const Population& p);

// Shard-trainer realization of a base-model distribution: each trial permutes
// the support (weighted, without replacement) and trains on consecutive
// disjoint shards. The default trainer is a greedy regression tree.
struct ShardTrainerConfig {
    int shard_size = 8;
    int tree_depth = 2;
    // Optional override; receives the shard (uniform weights), the full
    // population (for compiling) and a derived seed.
    std::function<Predictor(const Population& shard, const Population& full, std::uint64_t seed)> trainer;
};

// A distribution Q over base predictors. Draws are reproducible:
// (trial_seed, draw_index) fully determines the draw.
class BaseModelSource {
public:
    static BaseModelSource explicit_mixture(std::vector<Predictor> models, std::vector<double> probs);
    // Finite mixture whose members are built on demand; used when the family
    // is too large to materialize (e.g. the near-tightness instance).
    static BaseModelSource generated_mixture(std::size_t count, std::function<Predictor(std::size_t)> builder);
    static BaseModelSource shard_trainer(ShardTrainerConfig cfg);

    bool is_shard_trainer() const { return kind_ == Kind::shard; }
    std::size_t mixture_size() const { return kind_ == Kind::shard ? 0 : count_; }
    Predictor mixture_member(std::size_t i) const;

    class Session {
    public:
        Predictor draw(int draw_index);

    private:
        friend class BaseModelSource;
        const BaseModelSource* src_ = nullptr;
        const Population* pop_ = nullptr;
        std::uint64_t trial_seed_ = 0;
        std::vector<std::size_t> shard_order_;  // shard mode only
    };

    // Starts one trial's deterministic draw stream. Shard mode draws disjoint
    // shards and throws std::runtime_error when the support is exhausted.
    Session start_trial(const Population& p, std::uint64_t trial_seed) const;

private:
    enum class Kind { explicit_mix, generated_mix, shard };
    Kind kind_ = Kind::explicit_mix;
    std::vector<Predictor> models_;
    std::vector<double> cum_probs_;
    std::size_t count_ = 0;
    std::function<Predictor(std::size_t)> builder_;
    ShardTrainerConfig shard_cfg_;
};

struct StackingTrialRecord {
    int k = 0;
    long trial = 0;
    double R_G = 0.0;
    double R_Gprime = 0.0;
    double R_union = 0.0;
    double D = 0.0;
    double pointwise_slack = 0.0;  // 2(R_G - R_union) + 2(R_G' - R_union) - D
    std::uint64_t trial_seed = 0;
};

StackingTrialRecord run_stacking_pair(const BaseModelSource& source, int k, const Population& p,
                                      std::uint64_t trial_seed, long trial_index = 0);

struct StackingAggregate {
    int k = 0;
    long trials = 0;
    double R_k_hat = 0.0;
    double R_2k_hat = 0.0;
    double D_hat = 0.0;
    double bound_margin = 0.0;    // 4 (R_k_hat - R_2k_hat) - D_hat
    double margin_stderr = 0.0;   // stderr of the per-trial margin
    double D_stderr = 0.0;
};

struct StackingCurve {
    std::vector<StackingTrialRecord> trials;
    std::vector<StackingAggregate> aggregate;
};

// Monte Carlo learning-curve experiment. R_2k_hat is estimated from the trial
// unions (the union of two independent k-samples is a 2k i.i.d. sample).
// Trials run in parallel; per-trial seeds derive from (base_seed, k, trial).
StackingCurve stacking_curve(const BaseModelSource& source, const std::vector<int>& k_values, long trials,
                             const Population& p, std::uint64_t base_seed);

// Explicit near-tightness construction: uniform support {0..m}, scaled
// indicator basis, target e_0, atoms g_i = e_0 + sigma e_i with
// sigma^2 = eps*k/8 and m = ceil(96 k^3 / eps).
struct TightnessClosedForms {
    double sigma2 = 0.0;
    long m = 0;
    double risk_k = 0.0;           // sigma^2 / (k + sigma^2)
    double risk_2k = 0.0;          // sigma^2 / (2k + sigma^2)
    double delta0 = 0.0;           // risk_k - risk_2k
    double d0 = 0.0;               // 2 k sigma^2 / (k + sigma^2)^2
    double ratio_pointwise = 0.0;  // 4 - 2 sigma^2 / (k + sigma^2)
    double collision_prob_bound = 0.0;
};

struct TightnessInstance {
    Population population;
    BaseModelSource source;
    TightnessClosedForms forms;
};

TightnessInstance build_tightness_instance(int k, double eps);

struct TightnessReport {
    int k = 0;
    double eps = 0.0;
    long trials = 0;
    TightnessClosedForms forms;
    double R_k_hat = 0.0;
    double R_2k_hat = 0.0;
    double D_hat = 0.0;
    double ratio = 0.0;
    double ratio_stderr = 0.0;
    bool conclusive = false;  // false when the risk drop is below the division guard
    bool lower_pass = false;  // ratio >= 4 - eps - 3 stderr
    bool upper_pass = false;  // ratio <= 4 + 3 stderr
};

// mc_sigma is the Monte Carlo pass threshold in standard errors.
TightnessReport verify_tightness(int k, double eps, long trials, std::uint64_t seed, double mc_sigma = 3.0);

// Ratio bracket computed from an existing Monte Carlo curve (single k value);
// verify_tightness is a convenience wrapper around this.
TightnessReport tightness_report_from_curve(const TightnessInstance& inst, const StackingCurve& curve, int k,
                                            double eps, double mc_sigma = 3.0);

}  // namespace dlab
