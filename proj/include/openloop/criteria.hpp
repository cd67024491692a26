#pragma once

#include "openloop/mdp.hpp"
#include "openloop/tree.hpp"

#include <span>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

namespace openloop {

/// Sub-tree reuse tests. AlwaysKeep / AlwaysDiscard are test fixtures used to
/// pin the controller's degenerate behaviours; they skip the expansion gate.
enum class CriterionKind { Plain, SDM, SDV, SDSD, RDV, AlwaysKeep, AlwaysDiscard };

struct CriterionConfig {
    CriterionKind kind = CriterionKind::Plain;
    double sdm_fraction = 0.8;  // majority-mode fraction in (0, 1]
    double sdv = 0.4;
    double sdsd = 1.0;
    double rdv = 0.9;

    /// Threshold read by `kind` (0 for threshold-free kinds).
    double threshold() const;
};

enum class VerdictReason {
    Kept,
    NotFullyExpanded,
    ActionUnavailable,
    MultiModalOutsideMajority,
    VarianceExceeded,
    DistanceExceeded,
    ReturnVarianceExceeded,
    AlwaysDiscard,
};

struct Verdict {
    bool keep = true;
    VerdictReason reason = VerdictReason::Kept;

    static Verdict kept() { return {true, VerdictReason::Kept}; }
    static Verdict discard(VerdictReason why) { return {false, why}; }
};

class UnsupportedCriterion : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string_view to_string(CriterionKind kind);
std::string_view to_string(VerdictReason reason);
CriterionKind parse_criterion_kind(std::string_view name);

/// Unbiased (n - 1) sample variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> samples);

/// sqrt((x - mu)^T cov^-1 (x - mu)). `cov` is used as given; throws
/// std::invalid_argument on dimension mismatch and std::domain_error when
/// `cov` is not positive definite.
double mahalanobis(std::span<const double> x, std::span<const double> mu, const Eigen::MatrixXd& cov);

inline constexpr double kCovarianceRidge = 1e-6;
inline constexpr double kVmrMeanFloor = 1e-6;

/// Mahalanobis distance of `s` from the sampled states at the tree root,
/// using the unbiased empirical covariance plus kCovarianceRidge * I.
double state_distance(const Tree& tree, const State& s);

/// Dispersion statistic used by SDV: plain variance for scalar states, max
/// per-dimension variance-to-|mean| ratio for vector states.
double state_dispersion(const Tree& tree);

/// Variance of the recommended root action's returns (max over tied
/// recommendations).
double return_dispersion(const Tree& tree);

/// Keep iff every root action was tried and, when `model` is given, the
/// recommended action is available from `s`.
Verdict plain(const Tree& tree, const State& s, const GenerativeModel* model = nullptr);
Verdict sdm(const Tree& tree, const State& s, double majority_fraction, const GenerativeModel* model = nullptr);
Verdict sdv(const Tree& tree, const State& s, double threshold, const GenerativeModel* model = nullptr);
Verdict sdsd(const Tree& tree, const State& s, double threshold, const GenerativeModel* model = nullptr);
Verdict rdv(const Tree& tree, const State& s, double threshold, const GenerativeModel* model = nullptr);

/// Dispatches on `config.kind`. Reads only the sub-tree statistics, the
/// current state and the model's static action-availability predicate.
Verdict decide(const CriterionConfig& config, const Tree& tree, const State& s, const GenerativeModel& model);

}  // namespace openloop
