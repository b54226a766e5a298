#pragma once

#include "radioslam/assignment.hpp"
#include "radioslam/dynamics.hpp"
#include "radioslam/sensing.hpp"
#include "radioslam/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace radioslam {

struct GaussianDensity {
    Vec mean;
    Mat cov;
};

/// Landmark kinds a Bernoulli component can take, in storage order.
inline constexpr std::array<LandmarkKind, 2> kMapKinds{LandmarkKind::VA, LandmarkKind::SP};

/// One potential landmark: existence probability, a distribution over
/// {VA, SP} and a 3D position density per kind.
struct BernoulliComponent {
    double existence = 0.0;
    std::array<double, 2> kind_probs{0.5, 0.5};
    std::array<GaussianDensity, 2> density;
    /// Opaque label copied from the measurement that created the component.
    /// The filter never interprets it.
    int tag = -1;

    std::size_t most_likely_kind() const { return kind_probs[1] > kind_probs[0] ? 1 : 0; }
};

/// Uniform intensity of never-detected landmarks over an axis-aligned box.
struct UndetectedIntensity {
    Vec3 lo{-300.0, -300.0, -50.0};
    Vec3 hi{300.0, 300.0, 100.0};
    std::array<double, 2> expected_count{4.0, 4.0};  // VA, SP

    double volume() const { return (hi - lo).prod(); }
    bool contains(const Vec3& p) const {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
    double density(std::size_t kind) const { return expected_count[kind] / volume(); }
};

struct GlobalHypothesis {
    double weight = 1.0;
    /// Local hypothesis index per Bernoulli.
    std::vector<int> selectors;
};

struct PMBBelief {
    GaussianDensity ue;  // over (x, y, heading, bias)
    UndetectedIntensity undetected;
    std::vector<BernoulliComponent> bernoullis;
    /// A single entry after every update (PMB form).
    std::vector<GlobalHypothesis> hypotheses{GlobalHypothesis{}};
};

struct FilterConfig {
    int gamma = 10;
    double prune_r = 1e-4;
    double gate = 5.0;  // Mahalanobis radius
    int max_components = 50;
    double report_r = 0.5;
    double min_kind_prob = 1e-9;
    /// A link enters the joint UE/landmark update only when the posterior of
    /// its dominant kind reaches this level; otherwise the landmark is
    /// updated on its own so a wrong kind cannot drag the UE.
    double kind_confidence = 0.99;
    Landmark bs{Vec3(0, 0, 40), LandmarkKind::BS};
    MotionConfig motion;
    SensorConfig sensor;

    void validate() const;
};

PMBBelief initial_belief(const UEState& mean, const Mat4& cov, const UndetectedIntensity& undetected = {});

/// Linearized UE prediction; the static map is untouched.
PMBBelief predict(const PMBBelief& belief, const MotionConfig& motion);

/// One data association out of the gamma retained, with normalized weight.
/// Rows of the assignment are the BS (row 0) followed by the prior
/// Bernoullis; columns are the measurements followed by one misdetection
/// column per row. Measurements left unassigned are birth or clutter.
struct WeightedAssociation {
    Assignment assignment;
    double weight = 0.0;
};

struct UpdateResult {
    PMBBelief belief;
    std::vector<WeightedAssociation> associations;
    /// Tag of each assignment row (row 0 is the BS and carries `kBsTag`).
    std::vector<int> row_tags;
    int num_measurements = 0;
};

inline constexpr int kBsTag = 0;

/// Measurement update: gating, gamma-best association, joint linearized
/// UE/landmark update per association, births, misdetections, and reduction
/// back to a single PMB. `measurement_tags`, when given, are copied onto the
/// components born from the corresponding measurements.
UpdateResult update(const PMBBelief& belief, const std::vector<Measurement>& measurements,
                    const FilterConfig& cfg, std::span<const int> measurement_tags = {});

struct MapEstimate {
    Vec3 position;
    LandmarkKind kind;
    double existence;
};

struct Estimate {
    UEState ue;
    std::vector<MapEstimate> map;
};

Estimate estimate(const PMBBelief& belief, double report_r = 0.5);

/// Total weight of the retained associations that agree with the true
/// sources (`truth_assoc` as in Scan, compared against the row tags).
double correct_da_weight(const UpdateResult& result, std::span<const int> truth_assoc);

/// Symmetrizes and clamps negative eigenvalues; throws NumericalFailure if
/// the most negative eigenvalue is below -1e-6 * trace.
Mat repair_covariance(const Mat& cov);

}  // namespace radioslam
