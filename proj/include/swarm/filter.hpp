#pragma once

// Unscented Kalman filter over cluster states.
//
// Multi-member clusters use their member states as sigma points around the
// cluster mean (weight 0.5 on the mean, the rest shared evenly); singletons use
// the standard scaled 2n+1 point set built from a Cholesky factor of (n+λ)P.

#include <stdexcept>
#include <vector>

#include "swarm/dynamics.hpp"
#include "swarm/model.hpp"

namespace swarm {

class FilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SigmaScheme { MemberBased, ScaledSingleton };

struct SigmaSet {
  std::vector<Vec4> points;
  std::vector<double> mean_weights;
  std::vector<double> cov_weights;
  SigmaScheme scheme = SigmaScheme::ScaledSingleton;
  // Member-based scheme only: member_ids[k] owns points[k + 1].
  std::vector<AgentId> member_ids;
};

struct MeasurementModel {
  // Observes [px, py].
  Mat2 noise_cov = Mat2::Identity();

  static MeasurementModel from_config(const Config& cfg, int observed_members = 1);
};

// Lower-triangular L with L L^T = m, escalating diagonal jitter from 1e-12 to
// 1e-6 when the plain factorization fails.
Mat4 lower_sqrt(const Mat4& m);

SigmaSet sigma_points_cluster(const Cluster& c, const StateMap& states);
SigmaSet sigma_points_singleton(const AgentState& x, const Mat4& p, const Config& cfg);

Mat4 process_noise(const Config& cfg);

struct Prediction {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Zero();
  SigmaSet propagated;
  Mat4 noise = Mat4::Zero();  // process noise included in cov but not in the points
};

// Advances every sigma point `steps` times by dynamics::step with step size dt,
// then recombines; process noise is added once. With member_goals, a
// member-based point heads for its own member's goal; the centre point and
// points of members without an entry use `goal`.
Prediction predict(const SigmaSet& sig, const Goal& goal, const ForceField& field, const Config& cfg, double dt,
                   int steps = 1, const GoalMap* member_goals = nullptr);

struct Posterior {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Zero();
  bool regularized = false;  // P_zz needed jitter to invert
};

Posterior update(const Prediction& predicted, const Vec2& z, const MeasurementModel& mm);

// Shifts every member's propagated point by (posterior_mean - predicted mean).
StateMap redistribute_members(const Cluster& c, const Vec4& posterior_mean, const Prediction& predicted);

}  // namespace swarm
