#include "fsrl/kicksim.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

namespace fsrl {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kRadPerDeg = std::numbers::pi / 180.0;

double wrap_angle(double a) noexcept { return std::remainder(a, 2.0 * std::numbers::pi); }

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

std::string_view state_model_name(StateModel m) noexcept {
  return m == StateModel::Proposed ? "proposed" : "legacy";
}

StateModel parse_state_model(std::string_view name) {
  if (name == "proposed") return StateModel::Proposed;
  if (name == "legacy") return StateModel::Legacy;
  throw ConfigError("unknown state model '" + std::string(name) + "' (expected proposed or legacy)");
}

std::string_view termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::None:
      return "none";
    case Termination::Timeout:
      return "timeout";
    case Termination::RobotOut:
      return "robot_out";
    case Termination::BallOut:
      return "ball_out";
    case Termination::BallTouched:
      return "ball_touched";
  }
  return "unknown";
}

void KickSimConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(field.length, "field length");
  positive(field.width, "field width");
  positive(field.goalWidth, "goal width");
  positive(field.ballStartDistance, "ball start distance");
  positive(field.robotStartDistance, "robot start distance");
  positive(phaseDuration, "phase duration");
  positive(legacyControlPeriod, "legacy control period");
  positive(timeout, "timeout");
  positive(frictionDecel, "friction deceleration");
  positive(robotRadius, "robot radius");
  positive(ballRadius, "ball radius");
  positive(rhoMax, "rhoMax");
  positive(gammaMaxDeg, "gammaMax");
  positive(phiMaxDeg, "phiMax");
  positive(psi0, "psi0");
  positive(alpha0Deg, "alpha0");
  if (kappa < 0.0) throw ConfigError("kappa must be non-negative");
  if (footOffset < 0.0) throw ConfigError("foot offset must be non-negative");
  if (!(vxMax > vxMin) || !(vyMax > 0.0) || !(vthetaMaxDeg > 0.0)) {
    throw ConfigError("velocity boxes must be non-empty");
  }
  if (rhoCores < 2 || gammaCores < 2 || phiCores < 2) throw ConfigError("at least two cores per dimension");
  if (to_us(phaseDuration) <= 0 || to_us(legacyControlPeriod) <= 0) {
    throw ConfigError("control periods must be at least one microsecond");
  }
}

double KickSimConfig::max_goal_angle_deg() const noexcept {
  return std::atan(0.5 * field.goalWidth / field.ballStartDistance) * kDegPerRad;
}

std::vector<double> state_vector(const Observation& obs, StateModel expected) {
  if (obs.model != expected) {
    throw ConfigError("observation from the " + std::string(state_model_name(obs.model)) +
                      " state model fed to a " + std::string(state_model_name(expected)) + " learner");
  }
  if (expected == StateModel::Proposed) {
    return {obs.rho, obs.gammaDeg, obs.phiDeg, static_cast<double>(obs.phaseType)};
  }
  return {obs.rho, obs.gammaDeg, obs.phiDeg};
}

StateSpace make_state_space(StateModel model, const KickSimConfig& cfg) {
  std::vector<DimensionGrid> dims{
      DimensionGrid(0.0, cfg.rhoMax, cfg.rhoCores),
      DimensionGrid(-cfg.gammaMaxDeg, cfg.gammaMaxDeg, cfg.gammaCores),
      DimensionGrid(-cfg.phiMaxDeg, cfg.phiMaxDeg, cfg.phiCores),
  };
  if (model == StateModel::Proposed) dims.push_back(DimensionGrid::binary());
  return StateSpace(std::move(dims));
}

void BallState::advance(double dt, double frictionDecel) noexcept {
  const double v = speed();
  if (v <= 0.0 || dt <= 0.0) return;
  const Vec2 dir = velocity * (1.0 / v);
  const double tStop = v / frictionDecel;
  const double t = std::min(dt, tStop);
  position = position + dir * (v * t - 0.5 * frictionDecel * t * t);
  const double vNew = t >= tStop ? 0.0 : v - frictionDecel * t;
  velocity = dir * vNew;
}

Pose integrate_twist(const Pose& pose, const VelocityCommand& cmd, double dt) noexcept {
  const double w = cmd.vthetaDeg * kRadPerDeg;
  const double wt = w * dt;
  double s;  // integral of cos(w tau)
  double c;  // integral of sin(w tau)
  if (std::abs(wt) < 1e-9) {
    s = dt;
    c = 0.5 * w * dt * dt;
  } else {
    s = std::sin(wt) / w;
    c = (1.0 - std::cos(wt)) / w;
  }
  const double bx = s * cmd.vx - c * cmd.vy;
  const double by = c * cmd.vx + s * cmd.vy;
  const double ch = std::cos(pose.heading);
  const double sh = std::sin(pose.heading);
  Pose out;
  out.position = {pose.position.x + ch * bx - sh * by, pose.position.y + sh * bx + ch * by};
  out.heading = wt == 0.0 ? pose.heading : wrap_angle(pose.heading + wt);
  return out;
}

Vec2 world_velocity(const Pose& pose, const VelocityCommand& cmd) noexcept {
  const double ch = std::cos(pose.heading);
  const double sh = std::sin(pose.heading);
  return {ch * cmd.vx - sh * cmd.vy, sh * cmd.vx + ch * cmd.vy};
}

std::optional<double> first_contact(const Pose& pose, const VelocityCommand& cmd, Vec2 ball,
                                    double dt, double contactDistance) {
  auto gap = [&](double t) {
    return (integrate_twist(pose, cmd, t).position - ball).norm() - contactDistance;
  };
  if (gap(0.0) <= 0.0) return 0.0;
  if (cmd.vx == 0.0 && cmd.vy == 0.0) return std::nullopt;
  // Dense sampling brackets the first crossing, bisection refines it.
  constexpr int kSamples = 64;
  double prev = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    const double t = dt * i / kSamples;
    if (gap(t) <= 0.0) {
      double lo = prev;
      double hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) <= 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::nullopt;
}

BallState contact_resolve(const Pose& robotAtContact, const VelocityCommand& cmd,
                          const BallState& ball, const KickSimConfig& cfg) {
  BallState out = ball;
  out.touched = true;
  Vec2 d = ball.position - robotAtContact.position;
  const double n = d.norm();
  const Vec2 u = n > 0.0 ? d * (1.0 / n) : Vec2{std::cos(robotAtContact.heading),
                                                std::sin(robotAtContact.heading)};
  const double along = world_velocity(robotAtContact, cmd).dot(u);
  out.velocity = u * (cfg.kappa * std::max(0.0, along));
  // Direction is kept even for a zero-speed launch so the shot can be scored.
  out.position = ball.position;
  return out;
}

KickOutcome evaluate_kick(const BallState& launched, const KickSimConfig& cfg) {
  KickOutcome k;
  k.launchSpeed = launched.speed();
  const Vec2 b = launched.position;
  const Vec2 target = cfg.field.target();
  Vec2 u;
  if (k.launchSpeed > 0.0) {
    u = launched.velocity * (1.0 / k.launchSpeed);
  } else {
    // A zero-speed contact has no trajectory; score it as aimed at the target
    // with the full remaining distance.
    const Vec2 toTarget = target - b;
    u = toTarget * (1.0 / toTarget.norm());
  }
  k.launchDirection = u;
  k.travel = k.launchSpeed * k.launchSpeed / (2.0 * cfg.frictionDecel);
  k.restPoint = b + u * k.travel;

  const double goalX = cfg.field.goal_line_x();
  if (u.x > 0.0) {
    const double toLine = (goalX - b.x) / u.x;
    k.psiError = std::max(0.0, toLine - k.travel);
    const double crossY = b.y + u.y * toLine;
    k.goal = k.travel >= toLine && std::abs(crossY) <= 0.5 * cfg.field.goalWidth;
  } else {
    k.psiError = goalX - k.restPoint.x;
    k.goal = false;
  }
  const Vec2 toTarget = target - b;
  const double cross = toTarget.x * u.y - toTarget.y * u.x;
  k.alphaErrorDeg = std::abs(std::atan2(cross, toTarget.dot(u))) * kDegPerRad;
  k.distanceError = std::clamp(k.psiError / cfg.field.ballStartDistance, 0.0, 1.0);
  k.angleError = k.alphaErrorDeg / cfg.max_goal_angle_deg();
  return k;
}

double kick_reward(const KickOutcome& kick, const KickSimConfig& cfg) {
  return cfg.rewardK * std::exp(-kick.psiError / cfg.psi0) * std::exp(-kick.alphaErrorDeg / cfg.alpha0Deg);
}

double approach_reward(const Observation& obs, const KickSimConfig& cfg) {
  return -(obs.rho / cfg.rhoMax + std::abs(obs.phiDeg) / cfg.phiMaxDeg +
           std::abs(obs.gammaDeg) / cfg.gammaMaxDeg);
}

Observation observe_from(Vec2 origin, double heading, Vec2 ball, Vec2 target, int phaseType,
                         StateModel model, const KickSimConfig& cfg) {
  const Vec2 d = ball - origin;
  const double toBall = d.angle();
  Observation obs;
  obs.model = model;
  obs.rawRho = d.norm();
  obs.rawGammaDeg = wrap_angle(toBall - heading) * kDegPerRad;
  obs.rawPhiDeg = wrap_angle(toBall - (target - ball).angle()) * kDegPerRad;
  obs.rho = std::clamp(obs.rawRho, 0.0, cfg.rhoMax);
  obs.gammaDeg = std::clamp(obs.rawGammaDeg, -cfg.gammaMaxDeg, cfg.gammaMaxDeg);
  obs.phiDeg = std::clamp(obs.rawPhiDeg, -cfg.phiMaxDeg, cfg.phiMaxDeg);
  obs.phaseType = model == StateModel::Proposed ? phaseType : 0;
  return obs;
}

Vec2 foot_position(const Pose& pose, Foot foot, double offset) noexcept {
  const double side = foot == Foot::Left ? offset : -offset;
  return {pose.position.x - std::sin(pose.heading) * side,
          pose.position.y + std::cos(pose.heading) * side};
}

Foot select_foot(const Pose& pose, Vec2 ball, double offset) noexcept {
  const double left = (ball - foot_position(pose, Foot::Left, offset)).norm();
  const double right = (ball - foot_position(pose, Foot::Right, offset)).norm();
  return right < left ? Foot::Right : Foot::Left;
}

Termination terminal_check(bool touched, const Pose& robot, const BallState& ball,
                           double elapsedSeconds, const KickSimConfig& cfg) {
  if (touched) return Termination::BallTouched;
  if (!cfg.field.contains(robot.position)) return Termination::RobotOut;
  if (!cfg.field.contains(ball.position)) return Termination::BallOut;
  if (elapsedSeconds >= cfg.timeout - 1e-9) return Termination::Timeout;
  return Termination::None;
}

KickWorld::KickWorld(KickSimConfig cfg, StateModel model)
    : cfg_((cfg.validate(), cfg)),
      model_(model),
      phaseUs_(to_us(cfg_.phaseDuration)),
      controlUs_(model == StateModel::Proposed ? to_us(cfg_.phaseDuration)
                                               : to_us(cfg_.legacyControlPeriod)) {
  reset_to(Pose{{cfg_.field.ball_start().x - cfg_.field.robotStartDistance, 0.0}, 0.0}, 0);
}

Observation KickWorld::reset(Rng& rng) {
  // Robot on the arc of radius robotStartDistance around the ball, with the
  // alignment angle strictly inside +-phiMax, facing the ball.
  double phi;
  do {
    phi = rng.uniform(-cfg_.phiMaxDeg, cfg_.phiMaxDeg);
  } while (std::abs(phi) >= cfg_.phiMaxDeg);
  const int phaseType = static_cast<int>(rng.uniform_index(2));
  const Vec2 ball = cfg_.field.ball_start();
  const double toTarget = (cfg_.field.target() - ball).angle();
  const double dir = toTarget + phi * kRadPerDeg;  // direction robot -> ball
  Pose robot;
  robot.position = ball - Vec2{std::cos(dir), std::sin(dir)} * cfg_.field.robotStartDistance;
  robot.heading = wrap_angle(dir);
  return reset_to(robot, phaseType);
}

Observation KickWorld::reset_to(const Pose& robot, int phaseType) {
  robot_ = robot;
  ball_ = BallState{};
  ball_.position = cfg_.field.ball_start();
  ball_.radius = cfg_.ballRadius;
  requested_ = {};
  latched_ = {};
  phaseType_ = phaseType & 1;
  phaseIndex_ = 0;
  phaseTimeUs_ = 0;
  elapsedUs_ = 0;
  terminated_ = false;
  kick_.reset();
  return observe();
}

Observation KickWorld::observe() const {
  Vec2 origin = robot_.position;
  if (model_ == StateModel::Legacy) {
    origin = foot_position(robot_, select_foot(robot_, ball_.position, cfg_.footOffset), cfg_.footOffset);
  }
  return observe_from(origin, robot_.heading, ball_.position, cfg_.field.target(), phaseType_, model_,
                      cfg_);
}

int KickWorld::max_steps() const noexcept {
  const std::int64_t timeoutUs = to_us(cfg_.timeout);
  return static_cast<int>((timeoutUs + controlUs_ - 1) / controlUs_);
}

void KickWorld::advance(std::int64_t durationUs) {
  const double contactDistance = cfg_.robotRadius + cfg_.ballRadius;
  std::int64_t remaining = durationUs;
  while (remaining > 0) {
    if (phaseTimeUs_ == 0) latched_ = requested_;
    const std::int64_t seg = std::min(remaining, phaseUs_ - phaseTimeUs_);
    const double dt = static_cast<double>(seg) * 1e-6;
    if (!ball_.touched) {
      if (auto tc = first_contact(robot_, latched_, ball_.position, dt, contactDistance)) {
        robot_ = integrate_twist(robot_, latched_, *tc);
        ball_ = contact_resolve(robot_, latched_, ball_, cfg_);
        kick_ = evaluate_kick(ball_, cfg_);
        ball_.advance(dt - *tc, cfg_.frictionDecel);
        elapsedUs_ += std::llround(*tc * 1e6);
        return;
      }
    }
    robot_ = integrate_twist(robot_, latched_, dt);
    ball_.advance(dt, cfg_.frictionDecel);
    elapsedUs_ += seg;
    phaseTimeUs_ += seg;
    remaining -= seg;
    if (phaseTimeUs_ == phaseUs_) {
      phaseTimeUs_ = 0;
      ++phaseIndex_;
      phaseType_ ^= 1;
    }
  }
}

StepResult KickWorld::step(const VelocityCommand& cmd) {
  if (terminated_) throw ProtocolError("KickWorld::step called after the episode terminated");
  requested_.vx = std::clamp(cmd.vx, cfg_.vxMin, cfg_.vxMax);
  requested_.vy = std::clamp(cmd.vy, -cfg_.vyMax, cfg_.vyMax);
  requested_.vthetaDeg = std::clamp(cmd.vthetaDeg, -cfg_.vthetaMaxDeg, cfg_.vthetaMaxDeg);

  advance(model_ == StateModel::Proposed ? phaseUs_ - phaseTimeUs_ : controlUs_);

  StepResult r;
  r.obs = observe();
  r.reason = terminal_check(ball_.touched, robot_, ball_, elapsed_seconds(), cfg_);
  r.terminal = r.reason != Termination::None;
  if (r.reason == Termination::BallTouched) {
    r.kick = kick_;
    r.reward = kick_reward(*kick_, cfg_);
  } else {
    r.reward = approach_reward(r.obs, cfg_);
  }
  terminated_ = r.terminal;
  return r;
}

}  // namespace fsrl
