#include "openloop/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace openloop {

double CriterionConfig::threshold() const {
    switch (kind) {
        case CriterionKind::SDM:
            return sdm_fraction;
        case CriterionKind::SDV:
            return sdv;
        case CriterionKind::SDSD:
            return sdsd;
        case CriterionKind::RDV:
            return rdv;
        default:
            return 0.0;
    }
}

std::string_view to_string(CriterionKind kind) {
    switch (kind) {
        case CriterionKind::Plain:
            return "plain";
        case CriterionKind::SDM:
            return "sdm";
        case CriterionKind::SDV:
            return "sdv";
        case CriterionKind::SDSD:
            return "sdsd";
        case CriterionKind::RDV:
            return "rdv";
        case CriterionKind::AlwaysKeep:
            return "always-keep";
        case CriterionKind::AlwaysDiscard:
            return "always-discard";
    }
    return "?";
}

std::string_view to_string(VerdictReason reason) {
    switch (reason) {
        case VerdictReason::Kept:
            return "kept";
        case VerdictReason::NotFullyExpanded:
            return "not-fully-expanded";
        case VerdictReason::ActionUnavailable:
            return "action-unavailable";
        case VerdictReason::MultiModalOutsideMajority:
            return "multimodal-outside-majority";
        case VerdictReason::VarianceExceeded:
            return "variance-exceeded";
        case VerdictReason::DistanceExceeded:
            return "distance-exceeded";
        case VerdictReason::ReturnVarianceExceeded:
            return "return-variance-exceeded";
        case VerdictReason::AlwaysDiscard:
            return "always-discard";
    }
    return "?";
}

CriterionKind parse_criterion_kind(std::string_view name) {
    for (CriterionKind k : {CriterionKind::Plain, CriterionKind::SDM, CriterionKind::SDV, CriterionKind::SDSD,
                            CriterionKind::RDV, CriterionKind::AlwaysKeep, CriterionKind::AlwaysDiscard}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown criterion \"" + std::string(name) + "\"");
}

double sample_variance(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double v : samples) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) {
        ss += (v - mean) * (v - mean);
    }
    return ss / static_cast<double>(n - 1);
}

double mahalanobis(std::span<const double> x, std::span<const double> mu, const Eigen::MatrixXd& cov) {
    const auto d = static_cast<Eigen::Index>(x.size());
    if (mu.size() != x.size() || cov.rows() != d || cov.cols() != d) {
        throw std::invalid_argument("mahalanobis: dimension mismatch");
    }
    Eigen::VectorXd diff(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        diff(i) = x[static_cast<std::size_t>(i)] - mu[static_cast<std::size_t>(i)];
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw std::domain_error("mahalanobis: covariance is not positive definite");
    }
    return std::sqrt(std::max(0.0, diff.dot(llt.solve(diff))));
}

namespace {

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // unbiased; zero for a single sample
};

Moments state_moments(const std::vector<State>& states) {
    const auto d = static_cast<Eigen::Index>(states.front().dims);
    const auto n = static_cast<double>(states.size());
    Moments m{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
    for (const State& s : states) {
        for (Eigen::Index k = 0; k < d; ++k) {
            m.mean(k) += s.x[static_cast<std::size_t>(k)];
        }
    }
    m.mean /= n;
    if (states.size() < 2) {
        return m;
    }
    Eigen::VectorXd diff(d);
    for (const State& s : states) {
        for (Eigen::Index k = 0; k < d; ++k) {
            diff(k) = s.x[static_cast<std::size_t>(k)] - m.mean(k);
        }
        m.cov.noalias() += diff * diff.transpose();
    }
    m.cov /= (n - 1.0);
    return m;
}

}  // namespace

double state_distance(const Tree& tree, const State& s) {
    const std::vector<State>& states = tree.root().sampled_states;
    if (states.empty()) {
        return 0.0;
    }
    Moments m = state_moments(states);
    m.cov.diagonal().array() += kCovarianceRidge;
    const std::vector<double> mu(m.mean.data(), m.mean.data() + m.mean.size());
    return mahalanobis(s.features(), mu, m.cov);
}

double state_dispersion(const Tree& tree) {
    const std::vector<State>& states = tree.root().sampled_states;
    if (states.size() < 2) {
        return 0.0;
    }
    const Moments m = state_moments(states);
    if (m.mean.size() == 1) {
        return m.cov(0, 0);
    }
    double worst = 0.0;
    for (Eigen::Index k = 0; k < m.mean.size(); ++k) {
        const double vmr = m.cov(k, k) / std::max(std::abs(m.mean(k)), kVmrMeanFloor);
        worst = std::max(worst, vmr);
    }
    return worst;
}

double return_dispersion(const Tree& tree) {
    const TreeNode& root = tree.root();
    double worst = 0.0;
    for (Action a : best_actions(root)) {
        worst = std::max(worst, sample_variance(root.actions[static_cast<std::size_t>(a.index)].returns));
    }
    return worst;
}

Verdict plain(const Tree& tree, const State& s, const GenerativeModel* model) {
    const TreeNode& root = tree.root();
    if (!root.fully_expanded()) {
        return Verdict::discard(VerdictReason::NotFullyExpanded);
    }
    if (model != nullptr) {
        for (Action a : best_actions(root)) {
            if (!model->action_available(s, a)) {
                return Verdict::discard(VerdictReason::ActionUnavailable);
            }
        }
    }
    return Verdict::kept();
}

Verdict sdm(const Tree& tree, const State& s, double majority_fraction, const GenerativeModel* model) {
    if (const Verdict gate = plain(tree, s, model); !gate.keep) {
        return gate;
    }
    const std::vector<State>& states = tree.root().sampled_states;
    if (!s.is_discrete() || std::any_of(states.begin(), states.end(), [](const State& x) { return !x.is_discrete(); })) {
        throw UnsupportedCriterion("state-distribution modality needs discrete states");
    }
    // modes are groups of identical states
    std::vector<std::pair<const State*, std::size_t>> modes;
    for (const State& x : states) {
        auto it = std::find_if(modes.begin(), modes.end(),
                               [&](const auto& m) { return same_discrete_state(*m.first, x); });
        if (it == modes.end()) {
            modes.emplace_back(&x, 1);
        } else {
            ++it->second;
        }
    }
    if (modes.size() <= 1) {
        return Verdict::kept();
    }
    std::size_t own = 0;
    for (const auto& m : modes) {
        if (same_discrete_state(*m.first, s)) {
            own = m.second;
        }
    }
    const double fraction = static_cast<double>(own) / static_cast<double>(states.size());
    return fraction > majority_fraction ? Verdict::kept() : Verdict::discard(VerdictReason::MultiModalOutsideMajority);
}

Verdict sdv(const Tree& tree, const State& s, double threshold, const GenerativeModel* model) {
    if (const Verdict gate = plain(tree, s, model); !gate.keep) {
        return gate;
    }
    return state_dispersion(tree) > threshold ? Verdict::discard(VerdictReason::VarianceExceeded) : Verdict::kept();
}

Verdict sdsd(const Tree& tree, const State& s, double threshold, const GenerativeModel* model) {
    if (const Verdict gate = plain(tree, s, model); !gate.keep) {
        return gate;
    }
    return state_distance(tree, s) > threshold ? Verdict::discard(VerdictReason::DistanceExceeded) : Verdict::kept();
}

Verdict rdv(const Tree& tree, const State& s, double threshold, const GenerativeModel* model) {
    if (const Verdict gate = plain(tree, s, model); !gate.keep) {
        return gate;
    }
    return return_dispersion(tree) > threshold ? Verdict::discard(VerdictReason::ReturnVarianceExceeded)
                                               : Verdict::kept();
}

Verdict decide(const CriterionConfig& config, const Tree& tree, const State& s, const GenerativeModel& model) {
    switch (config.kind) {
        case CriterionKind::Plain:
            return plain(tree, s, &model);
        case CriterionKind::SDM:
            return sdm(tree, s, config.sdm_fraction, &model);
        case CriterionKind::SDV:
            return sdv(tree, s, config.sdv, &model);
        case CriterionKind::SDSD:
            return sdsd(tree, s, config.sdsd, &model);
        case CriterionKind::RDV:
            return rdv(tree, s, config.rdv, &model);
        case CriterionKind::AlwaysKeep:
            return Verdict::kept();
        case CriterionKind::AlwaysDiscard:
            return Verdict::discard(VerdictReason::AlwaysDiscard);
    }
    throw std::logic_error("unhandled criterion kind");
}

}  // namespace openloop
