#include "swarm/filter.hpp"

#include <cmath>

namespace swarm {

namespace {
constexpr int kStateDim = 4;
}

MeasurementModel MeasurementModel::from_config(const Config& cfg, int observed_members) {
  MeasurementModel mm;
  double var = cfg.meas_noise_std * cfg.meas_noise_std;
  if (cfg.scale_cluster_meas_noise && observed_members > 1) var /= observed_members;
  mm.noise_cov = var * Mat2::Identity();
  return mm;
}

Mat4 lower_sqrt(const Mat4& m) {
  const Mat4 sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Mat4> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double jitter = 1e-12; jitter <= 1e-6 * (1 + 1e-9); jitter *= 10.0) {
    llt.compute(sym + jitter * Mat4::Identity());
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw FilterError("covariance is not positive semi-definite; Cholesky failed after jitter");
}

SigmaSet sigma_points_cluster(const Cluster& c, const StateMap& states) {
  if (c.size() < 2) throw FilterError("member-based sigma points need at least two members");
  SigmaSet s;
  s.scheme = SigmaScheme::MemberBased;
  s.points.push_back(mean_state(c.members, states).vector());
  s.member_ids = c.members;
  for (AgentId a : c.members) s.points.push_back(states.at(a).vector());
  const double rest = 0.5 / static_cast<double>(c.size());
  s.mean_weights.assign(s.points.size(), rest);
  s.mean_weights[0] = 0.5;
  s.cov_weights = s.mean_weights;
  return s;
}

SigmaSet sigma_points_singleton(const AgentState& x, const Mat4& p, const Config& cfg) {
  const double n = kStateDim;
  const double alpha2 = cfg.ukf_alpha * cfg.ukf_alpha;
  const double lambda = alpha2 * (n + cfg.ukf_kappa) - n;
  const Mat4 l = lower_sqrt((n + lambda) * p);

  SigmaSet s;
  s.scheme = SigmaScheme::ScaledSingleton;
  const Vec4 mu = x.vector();
  s.points.push_back(mu);
  for (int i = 0; i < kStateDim; ++i) s.points.push_back(mu + l.col(i));
  for (int i = 0; i < kStateDim; ++i) s.points.push_back(mu - l.col(i));

  const double wi = 1.0 / (2.0 * (n + lambda));
  s.mean_weights.assign(s.points.size(), wi);
  s.cov_weights.assign(s.points.size(), wi);
  s.mean_weights[0] = lambda / (n + lambda);
  s.cov_weights[0] = lambda / (n + lambda) + (1.0 - alpha2 + cfg.ukf_beta);
  return s;
}

Mat4 process_noise(const Config& cfg) {
  const double qp = cfg.proc_noise_std * cfg.proc_noise_std;
  const double qv = cfg.proc_noise_std_v * cfg.proc_noise_std_v;
  return Vec4(qp, qp, qv, qv).asDiagonal();
}

Prediction predict(const SigmaSet& sig, const Goal& goal, const ForceField& field, const Config& cfg, double dt,
                   int steps, const GoalMap* member_goals) {
  if (steps < 1) throw std::invalid_argument("predict: steps must be >= 1");
  Prediction out;
  out.propagated = sig;
  auto& pts_out = out.propagated.points;
  for (std::size_t i = 0; i < pts_out.size(); ++i) {
    const Goal* g = &goal;
    if (member_goals && sig.scheme == SigmaScheme::MemberBased && i > 0) {
      auto it = member_goals->find(sig.member_ids[i - 1]);
      if (it != member_goals->end()) g = &it->second;
    }
    AgentState s = AgentState::from_vector(pts_out[i]);
    for (int k = 0; k < steps; ++k) s = step(s, *g, field, cfg, dt);
    pts_out[i] = s.vector();
  }
  const auto& pts = out.propagated.points;
  for (std::size_t i = 0; i < pts.size(); ++i) out.mean += sig.mean_weights[i] * pts[i];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec4 d = pts[i] - out.mean;
    out.cov += sig.cov_weights[i] * d * d.transpose();
  }
  out.noise = process_noise(cfg);
  out.cov += out.noise;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

Posterior update(const Prediction& predicted, const Vec2& z, const MeasurementModel& mm) {
  if (!z.allFinite()) throw std::invalid_argument("update: measurement must be finite");
  const auto& sig = predicted.propagated;
  const auto& pts = sig.points;

  Vec2 zbar = Vec2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) zbar += sig.mean_weights[i] * pts[i].head<2>();

  Mat2 pzz = Mat2::Zero();
  Eigen::Matrix<double, 4, 2> pxz = Eigen::Matrix<double, 4, 2>::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 dz = pts[i].head<2>() - zbar;
    pzz += sig.cov_weights[i] * dz * dz.transpose();
    pxz += sig.cov_weights[i] * (pts[i] - predicted.mean) * dz.transpose();
  }
  // h is linear, so the process noise enters exactly as it would through
  // sigma points redrawn from the predicted covariance.
  pzz += predicted.noise.topLeftCorner<2, 2>() + mm.noise_cov;
  pxz += predicted.noise.leftCols<2>();
  pzz = 0.5 * (pzz + pzz.transpose());

  Posterior post;
  Eigen::LDLT<Mat2> ldlt(pzz);
  if (ldlt.info() != Eigen::Success || !(std::abs(pzz.determinant()) > 1e-300)) {
    pzz += 1e-9 * Mat2::Identity();
    post.regularized = true;
  }
  const Eigen::Matrix<double, 4, 2> gain = pxz * pzz.inverse();
  post.mean = predicted.mean + gain * (z - zbar);
  post.cov = predicted.cov - gain * pzz * gain.transpose();
  post.cov = 0.5 * (post.cov + post.cov.transpose());
  return post;
}

StateMap redistribute_members(const Cluster& c, const Vec4& posterior_mean, const Prediction& predicted) {
  const auto& sig = predicted.propagated;
  if (sig.scheme != SigmaScheme::MemberBased) throw FilterError("redistribute_members needs member-based sigma points");
  const Vec4 shift = posterior_mean - predicted.mean;
  StateMap out;
  for (std::size_t k = 0; k < sig.member_ids.size(); ++k) {
    if (!c.contains(sig.member_ids[k])) continue;
    out[sig.member_ids[k]] = AgentState::from_vector(sig.points[k + 1] + shift);
  }
  return out;
}

}  // namespace swarm
